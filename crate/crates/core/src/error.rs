use thiserror::Error;

/// Errors raised by the forward model, the data layer and the design drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown material '{0}'")]
    UnknownMaterial(String),

    #[error("unknown isotope '{0}'")]
    UnknownIsotope(String),

    #[error("energy {energy} keV outside tabulated range [{min}, {max}] keV of '{material}'")]
    EnergyOutOfRange {
        material: String,
        energy: f64,
        min: f64,
        max: f64,
    },

    #[error("thickness must be positive, got {0} nm")]
    NonPositiveThickness(f64),

    #[error("layer {index} has invalid thickness {d_nm} nm")]
    InvalidThickness { index: usize, d_nm: f64 },

    #[error("resonant layer has zero thickness")]
    ResonantLayerZero,

    #[error("invalid stack: {0}")]
    InvalidStack(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("degenerate interface: beta_i + beta_j = 0")]
    DegenerateInterface,

    #[error("isotope '{isotope}' does not match the cavity: {reason}")]
    IsotopeMismatch { isotope: String, reason: String },

    #[error("electronic background vanishes (|r_el| < 1e-12); Fano phase undefined")]
    ZeroBackground,

    #[error("pole search window is empty")]
    EmptyWindow,

    #[error("Newton iteration did not converge")]
    NoConvergence,

    #[error("residue estimates disagree (relative error {0:e})")]
    ContourDisagreement(f64),

    #[error("variable '{name}' = {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid design space: {0}")]
    InvalidSpace(String),

    #[error("no feasible point found")]
    AllInfeasible,

    #[error("target unreachable: residual constraint violation {0:e}")]
    TargetUnreachable(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
