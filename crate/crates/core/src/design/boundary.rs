//! Boundary tracing of two-objective sets by repeated scalar maximization:
//! a rotating linear functional for convex sections and a narrow rotated
//! parabola for star-convex, non-convex ones.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimizer::{optimize_observed, OptimizerSettings};
use super::{DesignPoint, Landscape, Normalization, ObjectiveKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMethod {
    Linear,
    Parabola,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceSettings {
    /// Number of directions (linear) or rotations (parabola), uniform on [0, 2pi).
    pub count: usize,
    /// Parabola narrowness in normalized objective units.
    pub kappa: f64,
    pub optimizer: OptimizerSettings,
}

impl Default for TraceSettings {
    fn default() -> Self {
        Self {
            count: 36,
            kappa: 50.0,
            optimizer: OptimizerSettings::default(),
        }
    }
}

/// One supporting point and the angle that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub angle: f64,
    pub score: f64,
    pub point: DesignPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub method: TraceMethod,
    pub pair: [ObjectiveKind; 2],
    pub variables: Vec<String>,
    /// Anchor in raw objective units (parabola only).
    pub anchor: Option<[f64; 2]>,
    pub kappa: Option<f64>,
    pub points: Vec<TracePoint>,
}

impl BoundaryTrace {
    /// Summary table, one row per angle.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,angle,score,feasible,cls,sr,vis,fe");
        for v in &self.variables {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        for (i, tp) in self.points.iter().enumerate() {
            let o = &tp.point.objectives;
            out.push_str(&format!(
                "{i},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                tp.angle, tp.score, tp.point.feasible, o.cls, o.sr, o.vis, o.fe
            ));
            for x in &tp.point.x {
                out.push_str(&format!(",{x:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Objective pair of every point, in raw units.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|tp| (tp.point.objectives.get(self.pair[0]), tp.point.objectives.get(self.pair[1])))
            .collect()
    }
}

/// Scalarization family indexed by angle.
#[derive(Clone, Copy)]
enum Scalar {
    Linear,
    Parabola { anchor: [f64; 2], kappa: f64 },
}

impl Scalar {
    /// Score (to maximize) of the normalized pair `p` for angle `angle`.
    fn score(&self, angle: f64, p: [f64; 2]) -> f64 {
        let (s, c) = angle.sin_cos();
        match *self {
            Scalar::Linear => c * p[0] + s * p[1],
            Scalar::Parabola { anchor, kappa } => {
                let (dx, dy) = (p[0] - anchor[0], p[1] - anchor[1]);
                let along = c * dx + s * dy;
                let across = -s * dx + c * dy;
                along - kappa * across * across
            }
        }
    }
}

fn normalized(norm: &Normalization, pair: [ObjectiveKind; 2], p: &DesignPoint) -> [f64; 2] {
    [norm.apply(pair[0], &p.objectives), norm.apply(pair[1], &p.objectives)]
}

fn angles(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}

/// Best sampled point per angle.
type Bests = Vec<Option<(f64, DesignPoint)>>;

fn absorb(bests: &mut Bests, other: Bests) {
    for (b, o) in bests.iter_mut().zip(other) {
        if let Some((s, p)) = o {
            if b.as_ref().map_or(true, |(bs, _)| s > *bs) {
                *b = Some((s, p));
            }
        }
    }
}

/// Maximize the scalarization for every angle. Every evaluated point is
/// scored against all angles, so each returned point is the best sample of
/// the whole run for its angle.
fn trace<L: Landscape + ?Sized>(
    land: &L,
    pair: [ObjectiveKind; 2],
    scalar: Scalar,
    angles: &[f64],
    settings: &OptimizerSettings,
) -> Result<Vec<TracePoint>> {
    let norm = land.normalization();
    let n = angles.len();
    let observe = |st: &mut Bests, p: &DesignPoint| {
        if st.is_empty() {
            *st = vec![None; n];
        }
        let q = normalized(&norm, pair, p);
        for (b, &a) in st.iter_mut().zip(angles) {
            let s = scalar.score(a, q);
            if s.is_finite() && b.as_ref().map_or(true, |(bs, _)| s > *bs) {
                *b = Some((s, p.clone()));
            }
        }
    };
    let runs: Vec<Result<Vec<Bests>>> = angles
        .par_iter()
        .map(|&a| {
            let cost = |p: &DesignPoint| -scalar.score(a, normalized(&norm, pair, p));
            optimize_observed(land, &cost, settings, &[], &observe).map(|(_, states)| states)
        })
        .collect();
    let mut bests: Bests = vec![None; n];
    for run in runs {
        for st in run? {
            if !st.is_empty() {
                absorb(&mut bests, st);
            }
        }
    }
    bests
        .into_iter()
        .zip(angles)
        .map(|(b, &angle)| {
            let (score, point) = b.ok_or(Error::AllInfeasible)?;
            Ok(TracePoint { angle, score, point })
        })
        .collect()
}

fn check_pair(pair: [ObjectiveKind; 2]) -> Result<()> {
    if pair[0] == pair[1] {
        return Err(Error::InvalidSpace("boundary pair needs two distinct objectives".into()));
    }
    Ok(())
}

/// Supporting points of the `(pair[0], pair[1])` set for `settings.count`
/// directions.
pub fn trace_boundary_linear<L: Landscape + ?Sized>(
    land: &L,
    pair: [ObjectiveKind; 2],
    settings: &TraceSettings,
) -> Result<BoundaryTrace> {
    check_pair(pair)?;
    if settings.count < 4 {
        return Err(Error::InvalidSpace("linear tracing needs at least 4 directions".into()));
    }
    let points = trace(land, pair, Scalar::Linear, &angles(settings.count), &settings.optimizer)?;
    Ok(BoundaryTrace {
        method: TraceMethod::Linear,
        pair,
        variables: land.names(),
        anchor: None,
        kappa: None,
        points,
    })
}

/// Boundary points found by rotating a narrow parabola around `anchor`
/// (raw objective units; should lie inside a star-convex set).
pub fn trace_boundary_parabola<L: Landscape + ?Sized>(
    land: &L,
    pair: [ObjectiveKind; 2],
    anchor: [f64; 2],
    settings: &TraceSettings,
) -> Result<BoundaryTrace> {
    check_pair(pair)?;
    if settings.count == 0 || !(settings.kappa > 0.0) {
        return Err(Error::InvalidSpace("parabola tracing needs count >= 1 and kappa > 0".into()));
    }
    let scalar = parabola(land, pair, anchor, settings.kappa)?;
    let points = trace(land, pair, scalar, &angles(settings.count), &settings.optimizer)?;
    Ok(BoundaryTrace {
        method: TraceMethod::Parabola,
        pair,
        variables: land.names(),
        anchor: Some(anchor),
        kappa: Some(settings.kappa),
        points,
    })
}

fn parabola<L: Landscape + ?Sized>(land: &L, pair: [ObjectiveKind; 2], anchor: [f64; 2], kappa: f64) -> Result<Scalar> {
    if !anchor.iter().all(|a| a.is_finite()) {
        return Err(Error::InvalidSpace("anchor must be finite".into()));
    }
    let norm = land.normalization();
    Ok(Scalar::Parabola {
        anchor: [anchor[0] / norm.scale(pair[0]), anchor[1] / norm.scale(pair[1])],
        kappa,
    })
}

/// Supporting point for the single direction `phi` (radians).
pub fn trace_linear_direction<L: Landscape + ?Sized>(
    land: &L,
    pair: [ObjectiveKind; 2],
    phi: f64,
    settings: &OptimizerSettings,
) -> Result<TracePoint> {
    check_pair(pair)?;
    let angle = phi.rem_euclid(2.0 * PI);
    Ok(trace(land, pair, Scalar::Linear, &[angle], settings)?.remove(0))
}

/// Parabola maximizer for the single rotation `angle` (radians).
pub fn trace_parabola_rotation<L: Landscape + ?Sized>(
    land: &L,
    pair: [ObjectiveKind; 2],
    anchor: [f64; 2],
    angle: f64,
    kappa: f64,
    settings: &OptimizerSettings,
) -> Result<TracePoint> {
    check_pair(pair)?;
    let scalar = parabola(land, pair, anchor, kappa)?;
    let angle = angle.rem_euclid(2.0 * PI);
    Ok(trace(land, pair, scalar, &[angle], settings)?.remove(0))
}
