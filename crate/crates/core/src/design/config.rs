//! JSON-configured design runs.

use serde::{Deserialize, Serialize};

use super::boundary::{trace_boundary_linear, trace_boundary_parabola, BoundaryTrace, TraceSettings};
use super::constrained::{constrained_best, ConstraintSettings};
use super::optimizer::{latin_hypercube, optimize, to_box, OptimizerSettings};
use super::space::{DesignSpace, XraySpace};
use super::{Cost, DesignPoint, Landscape, ObjectiveKind};
use crate::error::{Error, Result};
use crate::materials::MaterialDb;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn default_pilot() -> usize {
    256
}

fn default_count() -> usize {
    36
}

fn default_kappa() -> f64 {
    50.0
}

fn default_tol() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskConfig {
    Optimize {
        cost: Cost,
    },
    TraceLinear {
        pair: [ObjectiveKind; 2],
        #[serde(default = "default_count")]
        count: usize,
    },
    TraceParabola {
        pair: [ObjectiveKind; 2],
        /// Raw objective units; defaults to the centroid of the pilot sample.
        #[serde(default)]
        anchor: Option<[f64; 2]>,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
    Constrained {
        target: [f64; 2],
        maximize: ObjectiveKind,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub space: DesignSpace,
    pub task: TaskConfig,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    /// Override `optimizer.seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Override `optimizer.restarts`.
    #[serde(default)]
    pub restarts: Option<usize>,
    /// Latin-hypercube samples used to set the vis/fe scales.
    #[serde(default = "default_pilot")]
    pub pilot_samples: usize,
}

impl DesignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Optimizer settings after applying the top-level overrides.
    pub fn resolved_optimizer(&self) -> OptimizerSettings {
        let mut s = self.optimizer;
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(r) = self.restarts {
            s.restarts = r;
        }
        s
    }

    /// Copy with overrides folded in, as written to output headers.
    pub fn resolved(&self) -> Self {
        Self {
            optimizer: self.resolved_optimizer(),
            seed: None,
            restarts: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOutput {
    pub points: Vec<DesignPoint>,
    pub trace: Option<BoundaryTrace>,
}

impl DesignOutput {
    /// One JSON object per design point.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&serde_json::to_string(p).expect("design points serialize"));
            out.push('\n');
        }
        out
    }
}

fn pilot_centroid<L: Landscape>(land: &L, pair: [ObjectiveKind; 2], samples: usize, seed: u64) -> Result<[f64; 2]> {
    let bounds = land.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut n) = ([0.0; 2], 0usize);
    for u in latin_hypercube(samples.max(1), bounds.len(), &mut rng) {
        let p = land.evaluate(&to_box(&bounds, &u))?;
        if p.feasible {
            sum[0] += p.objectives.get(pair[0]);
            sum[1] += p.objectives.get(pair[1]);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::AllInfeasible);
    }
    Ok([sum[0] / n as f64, sum[1] / n as f64])
}

pub fn run_design(db: &MaterialDb, cfg: &DesignConfig) -> Result<DesignOutput> {
    let opt = cfg.resolved_optimizer();
    let land = XraySpace::new(db, cfg.space.clone())?.with_pilot_normalization(cfg.pilot_samples.max(1), opt.seed);
    let norm = land.normalization();
    match &cfg.task {
        TaskConfig::Optimize { cost } => {
            let f = |p: &DesignPoint| cost.value(&p.objectives, &norm);
            let r = optimize(&land, &f, &opt)?;
            Ok(DesignOutput {
                points: vec![r.best],
                trace: None,
            })
        }
        TaskConfig::TraceLinear { pair, count } => {
            let settings = TraceSettings {
                count: *count,
                optimizer: opt,
                ..TraceSettings::default()
            };
            let t = trace_boundary_linear(&land, *pair, &settings)?;
            Ok(DesignOutput {
                points: t.points.iter().map(|tp| tp.point.clone()).collect(),
                trace: Some(t),
            })
        }
        TaskConfig::TraceParabola { pair, anchor, count, kappa } => {
            let anchor = match anchor {
                Some(a) => *a,
                None => pilot_centroid(&land, *pair, cfg.pilot_samples, opt.seed)?,
            };
            let settings = TraceSettings {
                count: *count,
                kappa: *kappa,
                optimizer: opt,
            };
            let t = trace_boundary_parabola(&land, *pair, anchor, &settings)?;
            Ok(DesignOutput {
                points: t.points.iter().map(|tp| tp.point.clone()).collect(),
                trace: Some(t),
            })
        }
        TaskConfig::Constrained { target, maximize, tol } => {
            let settings = ConstraintSettings {
                tol: *tol,
                optimizer: opt,
                ..ConstraintSettings::default()
            };
            Ok(DesignOutput {
                points: vec![constrained_best(&land, *target, *maximize, &settings)?],
                trace: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_with_defaults() {
        let text = r#"{
            "space": {
                "template": {
                    "layers": [
                        {"material": "Pt", "d_nm": 80.4},
                        {"material": "C", "d_nm": 46.0},
                        {"material": "Fe-57", "d_nm": 0.574},
                        {"material": "C", "d_nm": 46.1},
                        {"material": "Pt", "d_nm": 17.8}
                    ],
                    "substrate": "Si",
                    "resonant": 2
                },
                "isotope": "Fe-57",
                "variables": [{"name": "theta", "lower": 2.0, "upper": 2.6}]
            },
            "task": {"kind": "optimize", "cost": {"maximize": "sr"}},
            "seed": 7,
            "restarts": 4
        }"#;
        let cfg = DesignConfig::from_json(text).unwrap();
        let opt = cfg.resolved_optimizer();
        assert_eq!((opt.seed, opt.restarts, opt.max_evals), (7, 4, 2000));
        assert_eq!(cfg.space.theta, 3.0);
        let r = cfg.resolved();
        assert_eq!(r.seed, None);
        assert_eq!(r.optimizer.seed, 7);
    }

    #[test]
    fn task_tags() {
        let t: TaskConfig = serde_json::from_str(r#"{"kind":"trace_parabola","pair":["sr","fe"]}"#).unwrap();
        assert_eq!(
            t,
            TaskConfig::TraceParabola {
                pair: [ObjectiveKind::Sr, ObjectiveKind::Fe],
                anchor: None,
                count: 36,
                kappa: 50.0
            }
        );
        assert!(serde_json::from_str::<TaskConfig>(r#"{"kind":"dance"}"#).is_err());
    }
}
