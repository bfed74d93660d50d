//! Layered cavity geometry and longitudinal wavevectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::MaterialDb;
use crate::units::{energy_to_wavenumber, mrad_to_rad, NORMAL_INCIDENCE_MRAD};

/// One finite layer, listed from the surface downwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: String,
    pub d_nm: f64,
}

impl Layer {
    pub fn new(material: impl Into<String>, d_nm: f64) -> Self {
        Self {
            material: material.into(),
            d_nm,
        }
    }
}

fn default_z_rel() -> f64 {
    0.5
}

/// Cavity below a vacuum half-space: finite layers on a semi-infinite substrate,
/// one of which hosts the resonant nuclei.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityStack {
    pub layers: Vec<Layer>,
    pub substrate: String,
    /// Index into `layers` of the resonant layer.
    pub resonant: usize,
    /// Depth of the nuclei inside the resonant layer, as a fraction of its thickness.
    #[serde(default = "default_z_rel")]
    pub z_rel: f64,
}

impl CavityStack {
    pub fn new(layers: Vec<Layer>, substrate: impl Into<String>, resonant: usize) -> Result<Self> {
        let s = Self {
            layers,
            substrate: substrate.into(),
            resonant,
            z_rel: 0.5,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_z_rel(mut self, z_rel: f64) -> Result<Self> {
        self.z_rel = z_rel;
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stack serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.resonant >= self.layers.len() {
            return Err(Error::InvalidStack(format!(
                "resonant index {} out of range for {} layers",
                self.resonant,
                self.layers.len()
            )));
        }
        for (index, l) in self.layers.iter().enumerate() {
            if !(l.d_nm >= 0.0) || !l.d_nm.is_finite() {
                return Err(Error::InvalidThickness { index, d_nm: l.d_nm });
            }
        }
        if !(0.0..=1.0).contains(&self.z_rel) {
            return Err(Error::InvalidStack(format!("z_rel = {} outside [0, 1]", self.z_rel)));
        }
        Ok(())
    }

    pub fn resonant_layer(&self) -> &Layer {
        &self.layers[self.resonant]
    }

    /// Depth of the nuclei below the top of the resonant layer, nm.
    pub fn nuclear_depth(&self) -> f64 {
        self.z_rel * self.resonant_layer().d_nm
    }

    /// The same stack with all layers in reverse order and the substrate taken
    /// as the top half-space material. Only meaningful for vacuum substrates.
    pub fn mirrored(&self) -> Self {
        let mut layers = self.layers.clone();
        layers.reverse();
        Self {
            layers,
            substrate: self.substrate.clone(),
            resonant: self.layers.len() - 1 - self.resonant,
            z_rel: 1.0 - self.z_rel,
        }
    }

    /// Refractive indices of vacuum, each layer and the substrate at `omega`.
    pub fn indices(&self, db: &MaterialDb, omega: f64) -> Result<Vec<Complex64>> {
        let mut n = Vec::with_capacity(self.layers.len() + 2);
        n.push(Complex64::new(1.0, 0.0));
        for l in &self.layers {
            n.push(db.refractive_index(&l.material, omega)?);
        }
        n.push(db.refractive_index(&self.substrate, omega)?);
        Ok(n)
    }

    /// `n - 1` of vacuum, each layer and the substrate at `omega`.
    pub fn index_deviations(&self, db: &MaterialDb, omega: f64) -> Result<Vec<Complex64>> {
        let mut dn = Vec::with_capacity(self.layers.len() + 2);
        dn.push(Complex64::new(0.0, 0.0));
        for l in &self.layers {
            dn.push(db.index_deviation(&l.material, omega)?);
        }
        dn.push(db.index_deviation(&self.substrate, omega)?);
        Ok(dn)
    }
}

/// Removes zero-thickness layers other than the resonant one.
pub fn collapse_zero_layers(stack: &CavityStack) -> Result<CavityStack> {
    if stack.resonant_layer().d_nm == 0.0 {
        return Err(Error::ResonantLayerZero);
    }
    let mut layers = Vec::with_capacity(stack.layers.len());
    let mut resonant = 0;
    for (i, l) in stack.layers.iter().enumerate() {
        if i == stack.resonant {
            resonant = layers.len();
            layers.push(l.clone());
        } else if l.d_nm != 0.0 {
            layers.push(l.clone());
        }
    }
    Ok(CavityStack {
        layers,
        substrate: stack.substrate.clone(),
        resonant,
        z_rel: stack.z_rel,
    })
}

/// Probe energy and grazing angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// keV
    pub omega: f64,
    /// Grazing angle from the surface plane, mrad.
    pub theta: f64,
}

impl Geometry {
    pub fn new(omega: f64, theta: f64) -> Result<Self> {
        let g = Self { omega, theta };
        g.validate()?;
        Ok(g)
    }

    pub fn normal_incidence(omega: f64) -> Result<Self> {
        Self::new(omega, NORMAL_INCIDENCE_MRAD)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidGeometry(format!("omega = {} keV", self.omega)));
        }
        if !(self.theta > 0.0 && self.theta <= 1570.8) {
            return Err(Error::InvalidGeometry(format!("theta = {} mrad", self.theta)));
        }
        Ok(())
    }

    pub fn k0(&self) -> f64 {
        energy_to_wavenumber(self.omega)
    }
}

/// In-plane wavevector `k cos(theta)`, nm^-1. Exactly zero at normal incidence.
pub fn k_parallel(geom: &Geometry) -> f64 {
    let theta = mrad_to_rad(geom.theta);
    if theta >= std::f64::consts::FRAC_PI_2 - 1e-12 {
        return 0.0;
    }
    geom.k0() * theta.cos()
}

/// Square root with the branch cut on the negative imaginary axis. On the
/// closed upper half plane this coincides with the passive branch
/// (`Im >= 0`, and `Re >= 0` when purely real), and it stays analytic for
/// slightly complex angles.
#[inline]
pub(crate) fn passive_sqrt(w: Complex64) -> Complex64 {
    let rot = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    (w * Complex64::new(0.0, -1.0)).sqrt() * rot
}

/// `beta = k0 sqrt(sin^2 theta + n^2 - 1)` from `dn = n - 1`, the same as
/// `sqrt(k^2 - k_par^2)` without the cancellation at grazing incidence.
#[inline]
pub(crate) fn longitudinal(k0: f64, dn: Complex64, sin2: Complex64) -> Complex64 {
    k0 * passive_sqrt(sin2 + dn * (dn + 2.0))
}

/// `sin^2` of a (possibly complex) angle in mrad.
#[inline]
pub(crate) fn sin_squared(theta_mrad: Complex64) -> Complex64 {
    let s = (theta_mrad * 1e-3).sin();
    s * s
}

/// Longitudinal wavevectors `beta_j` (nm^-1) of vacuum, every layer and the substrate.
pub fn layer_beta(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<Vec<Complex64>> {
    let dn = stack.index_deviations(db, geom.omega)?;
    let k0 = geom.k0();
    let sin2 = sin_squared(Complex64::new(geom.theta, 0.0));
    Ok(dn.iter().map(|&d| longitudinal(k0, d, sin2)).collect())
}
