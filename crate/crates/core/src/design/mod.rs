//! Inverse design over cavity geometries: objectives, landscapes, a bounded
//! multistart simplex optimizer and boundary tracing of objective sets.

mod boundary;
mod config;
mod constrained;
mod fabry_perot;
mod optimizer;
mod space;
mod stubs;
mod survey;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boundary::{
    trace_boundary_linear, trace_boundary_parabola, trace_linear_direction, trace_parabola_rotation, BoundaryTrace,
    TraceMethod, TracePoint, TraceSettings,
};
pub use config::{run_design, DesignConfig, DesignOutput, TaskConfig};
pub use constrained::{constrained_best, constrained_best_from, ConstraintSettings};
pub use fabry_perot::{FabryPerotSpace, FpVariable};
pub use optimizer::{
    latin_hypercube, nelder_mead, optimize, optimize_observed, optimize_with_starts, NmResult, ObserveFn, OptimizeResult,
    OptimizerSettings,
};
pub use space::{DesignSpace, VarBound, Variable, XraySpace};
pub use stubs::{CrescentStub, EllipseStub, QuadraticStub, SquareStub};
pub use survey::{survey, survey_csv, SurveyRow, SurveySpec};

/// The four design observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Cls,
    Sr,
    Vis,
    Fe,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [Self::Cls, Self::Sr, Self::Vis, Self::Fe];

    pub fn name(self) -> &'static str {
        match self {
            Self::Cls => "cls",
            Self::Sr => "sr",
            Self::Vis => "vis",
            Self::Fe => "fe",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cls" => Ok(Self::Cls),
            "sr" => Ok(Self::Sr),
            "vis" => Ok(Self::Vis),
            "fe" => Ok(Self::Fe),
            other => Err(Error::InvalidSpace(format!("unknown objective '{other}'"))),
        }
    }
}

/// Objective values of one design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    pub cls: f64,
    pub sr: f64,
    pub vis: f64,
    pub fe: f64,
}

impl Objectives {
    pub const NAN: Objectives = Objectives {
        cls: f64::NAN,
        sr: f64::NAN,
        vis: f64::NAN,
        fe: f64::NAN,
    };

    pub fn splat(v: f64) -> Self {
        Self {
            cls: v,
            sr: v,
            vis: v,
            fe: v,
        }
    }

    pub fn get(&self, kind: ObjectiveKind) -> f64 {
        match kind {
            ObjectiveKind::Cls => self.cls,
            ObjectiveKind::Sr => self.sr,
            ObjectiveKind::Vis => self.vis,
            ObjectiveKind::Fe => self.fe,
        }
    }

    pub fn is_finite(&self) -> bool {
        ObjectiveKind::ALL.iter().all(|&k| self.get(k).is_finite())
    }
}

/// A point of a design space with its objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub x: Vec<f64>,
    pub objectives: Objectives,
    pub feasible: bool,
}

impl DesignPoint {
    pub fn infeasible(x: Vec<f64>) -> Self {
        Self {
            x,
            objectives: Objectives::NAN,
            feasible: false,
        }
    }
}

/// Divisors bringing each objective to unit scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization(pub Objectives);

impl Normalization {
    pub fn unit() -> Self {
        Self(Objectives::splat(1.0))
    }

    pub fn scale(&self, kind: ObjectiveKind) -> f64 {
        self.0.get(kind)
    }

    pub fn apply(&self, kind: ObjectiveKind, o: &Objectives) -> f64 {
        o.get(kind) / self.scale(kind)
    }
}

/// Anything that maps a bounded box of parameters to objectives.
pub trait Landscape: Sync {
    /// Variable names, in order.
    fn names(&self) -> Vec<String>;

    fn bounds(&self) -> Vec<(f64, f64)>;

    /// Evaluate at `x`. Fails only when `x` lies outside the bounds; forward
    /// model failures give an infeasible point.
    fn evaluate(&self, x: &[f64]) -> Result<DesignPoint>;

    /// Objective scales used by costs and boundary tracing.
    fn normalization(&self) -> Normalization {
        Normalization::unit()
    }

    fn dim(&self) -> usize {
        self.bounds().len()
    }
}

pub(crate) fn check_bounds(names: &[String], bounds: &[(f64, f64)], x: &[f64]) -> Result<()> {
    if x.len() != bounds.len() {
        return Err(Error::InvalidSpace(format!("expected {} variables, got {}", bounds.len(), x.len())));
    }
    for ((name, &(lo, hi)), &v) in names.iter().zip(bounds).zip(x) {
        if !(v >= lo && v <= hi) {
            return Err(Error::OutOfBounds {
                name: name.clone(),
                value: v,
                lower: lo,
                upper: hi,
            });
        }
    }
    Ok(())
}

/// Scalar cost to minimize, built from normalized objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cost {
    Maximize(ObjectiveKind),
    Minimize(ObjectiveKind),
    /// Minimize `sum w_k o_k'` over normalized objectives.
    Linear(Vec<(ObjectiveKind, f64)>),
}

impl Cost {
    pub fn value(&self, o: &Objectives, norm: &Normalization) -> f64 {
        match self {
            Cost::Maximize(k) => -norm.apply(*k, o),
            Cost::Minimize(k) => norm.apply(*k, o),
            Cost::Linear(w) => w.iter().map(|&(k, wk)| wk * norm.apply(k, o)).sum(),
        }
    }
}

/// Evaluate on a full tensor grid (`counts[i]` points along variable `i`,
/// bounds inclusive), in row-major order with the last variable fastest.
pub fn grid_scan<L: Landscape + ?Sized>(land: &L, counts: &[usize]) -> Result<Vec<DesignPoint>> {
    use rayon::prelude::*;
    let bounds = land.bounds();
    if counts.len() != bounds.len() || counts.iter().any(|&c| c == 0) {
        return Err(Error::InvalidSpace("grid counts must match the variables and be positive".into()));
    }
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .zip(counts)
        .map(|(&(lo, hi), &n)| crate::spectra::linspace(lo, hi, n))
        .collect();
    let total: usize = counts.iter().product();
    (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = vec![0.0; axes.len()];
            for d in (0..axes.len()).rev() {
                x[d] = axes[d][idx % counts[d]];
                idx /= counts[d];
            }
            land.evaluate(&x)
        })
        .collect()
}

/// Index of the feasible point with the largest value of `kind` (first on ties).
pub fn argmax(points: &[DesignPoint], kind: ObjectiveKind) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        if !p.feasible {
            continue;
        }
        let v = p.objectives.get(kind);
        if v.is_finite() && best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
