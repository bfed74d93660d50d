//! Artificial two-level parameters of the nuclei in a cavity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{self, GreensEval};
use crate::materials::{areal_density, dipole_strength, Isotope, MaterialDb, VACUUM};
use crate::stack::{CavityStack, Geometry};
use crate::units::energy_to_wavenumber;

/// Collective Lamb shift, superradiant broadening and driving of the
/// effective two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    /// Collective Lamb shift, units of gamma0.
    pub cls: f64,
    /// Superradiant decay enhancement, units of gamma0.
    pub sr: f64,
    /// Effective Rabi frequency relative to `d E` of a single nucleus at unit
    /// incident field: `(N/A) E_in(z)`, nm^-2.
    pub rabi_rel: Complex64,
    /// Field enhancement `|E_in(z)|^2`.
    pub fe: f64,
}

/// `(N/A) mu0 omega^2 |d|^2 / gamma0` in nm^-1; multiplying a Green's function
/// (nm) gives a rate in units of gamma0.
pub fn coupling_scale(iso: &Isotope, d3: f64) -> Result<f64> {
    let k = energy_to_wavenumber(iso.omega_nuc);
    Ok(areal_density(iso, d3)? * k * k * dipole_strength(iso) / iso.gamma0_per_nm())
}

fn check_match(stack: &CavityStack, iso: &Isotope, geom: &Geometry) -> Result<()> {
    let rel = (geom.omega - iso.omega_nuc).abs() / iso.omega_nuc;
    if rel > 1e-9 {
        return Err(Error::IsotopeMismatch {
            isotope: iso.name.clone(),
            reason: format!("probing energy {} keV differs from transition energy {} keV", geom.omega, iso.omega_nuc),
        });
    }
    let host = &stack.resonant_layer().material;
    if host != &iso.name && host != VACUUM {
        return Err(Error::IsotopeMismatch {
            isotope: iso.name.clone(),
            reason: format!("resonant layer is made of '{host}'"),
        });
    }
    Ok(())
}

/// Two-level parameters from precomputed Green's quantities.
pub fn params_from_greens(ev: &GreensEval, scale: f64, n_per_area: f64) -> TwoLevelParams {
    TwoLevelParams {
        cls: -scale * ev.g_zz.re,
        sr: 2.0 * scale * ev.g_zz.im,
        rabi_rel: n_per_area * ev.e_in_z,
        fe: ev.e_in_z.norm_sqr(),
    }
}

pub fn two_level_params(db: &MaterialDb, stack: &CavityStack, iso: &Isotope, geom: &Geometry) -> Result<TwoLevelParams> {
    check_match(stack, iso, geom)?;
    let ev = greens::evaluate(db, stack, geom)?;
    let d3 = stack.resonant_layer().d_nm;
    Ok(params_from_greens(&ev, coupling_scale(iso, d3)?, areal_density(iso, d3)?))
}

pub(crate) fn validate_pairing(stack: &CavityStack, iso: &Isotope, geom: &Geometry) -> Result<()> {
    check_match(stack, iso, geom)
}

/// Rescale `cls` and `sr` from one isotope to another at fixed geometry,
/// assuming the Green's function scales as `1/omega`.
pub fn naive_isotope_rescale(base: TwoLevelParams, iso_from: &Isotope, iso_to: &Isotope, d3: f64) -> Result<TwoLevelParams> {
    let factor = |iso: &Isotope| -> Result<f64> {
        Ok(coupling_scale(iso, d3)? / energy_to_wavenumber(iso.omega_nuc))
    };
    let ratio = factor(iso_to)? / factor(iso_from)?;
    Ok(TwoLevelParams {
        cls: base.cls * ratio,
        sr: base.sr * ratio,
        ..base
    })
}

/// Like [`naive_isotope_rescale`], looking both isotopes up by name.
pub fn naive_isotope_rescale_by_name(db: &MaterialDb, base: TwoLevelParams, from: &str, to: &str, d3: f64) -> Result<TwoLevelParams> {
    naive_isotope_rescale(base, db.isotope(from)?, db.isotope(to)?, d3)
}
