//! Maximize one objective subject to a target `(cls, sr)` pair, by exact
//! penalty scalarization with a ramped weight.

use serde::{Deserialize, Serialize};

use super::optimizer::{optimize_observed, OptimizerSettings};
use super::{DesignPoint, Landscape, ObjectiveKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintSettings {
    /// Allowed deviation of `cls` and `sr` from the target, in gamma0.
    pub tol: f64,
    pub stages: usize,
    pub initial_weight: f64,
    pub growth: f64,
    pub optimizer: OptimizerSettings,
}

impl Default for ConstraintSettings {
    fn default() -> Self {
        Self {
            tol: 1.0,
            stages: 3,
            initial_weight: 1.0,
            growth: 10.0,
            optimizer: OptimizerSettings::default(),
        }
    }
}

/// Normalized constraint violation: zero inside the tolerance box.
fn violation(p: &DesignPoint, target: [f64; 2], tol: f64, scales: [f64; 2]) -> f64 {
    let o = &p.objectives;
    let dc = ((o.cls - target[0]).abs() - tol).max(0.0);
    let ds = ((o.sr - target[1]).abs() - tol).max(0.0);
    dc / scales[0] + ds / scales[1]
}

/// Best `maximize` value with `|cls - cls*| <= tol` and `|sr - sr*| <= tol`.
pub fn constrained_best<L: Landscape + ?Sized>(
    land: &L,
    target: [f64; 2],
    maximize: ObjectiveKind,
    settings: &ConstraintSettings,
) -> Result<DesignPoint> {
    constrained_best_from(land, target, maximize, settings, &[])
}

/// Like [`constrained_best`], also starting from the given points (in the
/// variables' units), e.g. a known feasible witness.
pub fn constrained_best_from<L: Landscape + ?Sized>(
    land: &L,
    target: [f64; 2],
    maximize: ObjectiveKind,
    settings: &ConstraintSettings,
    starts: &[Vec<f64>],
) -> Result<DesignPoint> {
    if !(settings.tol >= 0.0) || settings.stages == 0 || !(settings.initial_weight > 0.0) || !(settings.growth >= 1.0) {
        return Err(Error::InvalidSpace("constraint settings out of range".into()));
    }
    if matches!(maximize, ObjectiveKind::Cls | ObjectiveKind::Sr) {
        return Err(Error::InvalidSpace("the constrained objective must be vis or fe".into()));
    }
    let norm = land.normalization();
    let scales = [norm.scale(ObjectiveKind::Cls), norm.scale(ObjectiveKind::Sr)];
    let tol = settings.tol;

    // Best point satisfying the constraint, over every evaluation of every stage.
    let observe = |st: &mut Option<(f64, DesignPoint)>, p: &DesignPoint| {
        if violation(p, target, tol, scales) == 0.0 {
            let v = p.objectives.get(maximize);
            if st.as_ref().map_or(true, |(b, _)| v > *b) {
                *st = Some((v, p.clone()));
            }
        }
    };

    let mut seeds: Vec<Vec<f64>> = starts.to_vec();
    let mut feasible: Option<(f64, DesignPoint)> = None;
    let mut last_violation = f64::INFINITY;
    let mut weight = settings.initial_weight;
    for stage in 0..settings.stages {
        let cost = |p: &DesignPoint| -norm.apply(maximize, &p.objectives) + weight * violation(p, target, tol, scales);
        let opt = OptimizerSettings {
            seed: settings.optimizer.seed.wrapping_add(stage as u64),
            ..settings.optimizer
        };
        let (res, states) = optimize_observed(land, &cost, &opt, &seeds, &observe)?;
        for (v, p) in states.into_iter().flatten() {
            if feasible.as_ref().map_or(true, |(b, _)| v > *b) {
                feasible = Some((v, p));
            }
        }
        last_violation = violation(&res.best, target, tol, scales);
        seeds = starts.to_vec();
        seeds.insert(0, res.best.x.clone());
        weight *= settings.growth;
    }
    feasible.map(|(_, p)| p).ok_or(Error::TargetUnreachable(last_violation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Objectives, SquareStub};
    use crate::error::Result;

    /// Square stub with `vis = 1 - (cls^2 + sr^2) / 2`.
    struct Dome;

    impl Landscape for Dome {
        fn names(&self) -> Vec<String> {
            SquareStub.names()
        }
        fn bounds(&self) -> Vec<(f64, f64)> {
            SquareStub.bounds()
        }
        fn evaluate(&self, x: &[f64]) -> Result<DesignPoint> {
            let mut p = SquareStub.evaluate(x)?;
            let o = p.objectives;
            p.objectives = Objectives {
                vis: 1.0 - 0.5 * (o.cls * o.cls + o.sr * o.sr),
                ..o
            };
            Ok(p)
        }
    }

    fn quick(tol: f64) -> ConstraintSettings {
        ConstraintSettings {
            tol,
            optimizer: OptimizerSettings {
                restarts: 6,
                pilot_factor: 4,
                ..OptimizerSettings::default()
            },
            ..ConstraintSettings::default()
        }
    }

    #[test]
    fn active_constraint() {
        let p = constrained_best(&Dome, [0.5, -0.5], ObjectiveKind::Vis, &quick(0.1)).unwrap();
        assert!((p.objectives.cls - 0.4).abs() < 1e-4 && (p.objectives.sr + 0.4).abs() < 1e-4);
    }

    #[test]
    fn inactive_constraint() {
        let p = constrained_best(&Dome, [0.05, 0.0], ObjectiveKind::Vis, &quick(0.1)).unwrap();
        assert!(p.objectives.vis > 1.0 - 1e-8);
    }

    #[test]
    fn unreachable_target() {
        let r = constrained_best(&Dome, [3.0, 0.0], ObjectiveKind::Vis, &quick(0.1));
        assert!(matches!(r, Err(Error::TargetUnreachable(v)) if v > 0.0));
    }

    #[test]
    fn witness_is_a_floor() {
        let w = vec![0.8, 0.3];
        let wp = Dome.evaluate(&w).unwrap();
        let target = [wp.objectives.cls, wp.objectives.sr];
        let p = constrained_best_from(&Dome, target, ObjectiveKind::Vis, &quick(0.5), &[w]).unwrap();
        assert!(p.objectives.vis >= wp.objectives.vis);
    }
}
