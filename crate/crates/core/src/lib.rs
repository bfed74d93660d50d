//! Forward model and inverse design of thin-film x-ray cavities hosting a
//! layer of Moessbauer nuclei, described as an artificial two-level system.

pub mod design;
pub mod effective;
pub mod error;
pub mod fresnel;
pub mod greens;
pub mod materials;
pub mod modes;
pub mod spectra;
pub mod stack;
pub mod units;

pub use error::{Error, Result};
pub use fresnel::{composite_coeffs, fresnel, parratt, CompositeCoeffs, InterfaceCoeffs, StackOptics};
pub use greens::GreensEval;
pub use materials::{areal_density, dipole_strength, Isotope, Material, MaterialDb, OpticalPoint};
pub use stack::{collapse_zero_layers, k_parallel, CavityStack, Geometry, Layer};
pub use effective::{naive_isotope_rescale, two_level_params, TwoLevelParams};
pub use spectra::{fano_params, rocking_curve, visibility, FanoParams, RockingCurve, Spectrum};
pub use modes::{find_poles, mittag_leffler, single_mode_circle, CircleFit, Pole, PoleSet};
