//! In-plane Green's function at the resonant layer, the nuclei-to-surface
//! propagator, and the driving field, all for a single `k_parallel`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fresnel::{CompositeCoeffs, Profile, StackOptics};
use crate::materials::MaterialDb;
use crate::stack::{CavityStack, Geometry};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Green's function values and fields at one geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreensEval {
    /// `G(z, z)`, nm.
    pub g_zz: Complex64,
    /// `G(0, z)`, nm.
    pub g_0z: Complex64,
    /// Driving field at the nuclei for unit incident amplitude.
    pub e_in_z: Complex64,
    /// Total field at the surface, `1 + r_el`.
    pub e_in_0: Complex64,
    pub coeffs: CompositeCoeffs,
}

impl GreensEval {
    pub fn field_enhancement(&self) -> f64 {
        self.e_in_z.norm_sqr()
    }
}

impl Profile<'_> {
    /// Resonant denominator `1 - r_up r_down exp(2 i beta_m d_m)`.
    pub fn mode_denominator(&self, c: &CompositeCoeffs) -> Complex64 {
        let m = self.m;
        1.0 - c.r_up * c.r_down * (2.0 * I * self.beta[m] * self.d[m]).exp()
    }

    pub fn greens(&self) -> GreensEval {
        let c = self.composite();
        self.greens_from(c)
    }

    pub fn greens_from(&self, c: CompositeCoeffs) -> GreensEval {
        let m = self.m;
        let b = self.beta[m];
        let d = self.d[m];
        let z = self.z;
        let den = self.mode_denominator(&c);
        let up = 1.0 + c.r_up * (2.0 * I * b * z).exp();
        let down = 1.0 + c.r_down * (2.0 * I * b * (d - z)).exp();
        let g_zz = I / (2.0 * b) * up * down / den;
        let e_in_z = c.t_in * ((I * b * z).exp() + c.r_down * (I * b * (2.0 * d - z)).exp()) / den;
        let g_0z = I / (2.0 * self.beta[0]) * e_in_z;
        GreensEval {
            g_zz,
            g_0z,
            e_in_z,
            e_in_0: 1.0 + c.r_el,
            coeffs: c,
        }
    }
}

pub(crate) fn require_resonant_thickness(stack: &CavityStack) -> Result<()> {
    if stack.resonant_layer().d_nm > 0.0 {
        Ok(())
    } else {
        Err(Error::ResonantLayerZero)
    }
}

/// Evaluate all Green's quantities in one pass.
pub fn evaluate(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<GreensEval> {
    geom.validate()?;
    require_resonant_thickness(stack)?;
    let optics = StackOptics::new(db, stack, geom.omega)?;
    Ok(optics.profile(Complex64::new(geom.theta, 0.0)).greens())
}

pub fn green_equal_z(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<Complex64> {
    Ok(evaluate(db, stack, geom)?.g_zz)
}

pub fn green_surface(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<Complex64> {
    Ok(evaluate(db, stack, geom)?.g_0z)
}

pub fn field_at_nuclei(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<Complex64> {
    Ok(evaluate(db, stack, geom)?.e_in_z)
}

pub fn field_at_surface(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<Complex64> {
    Ok(evaluate(db, stack, geom)?.e_in_0)
}
