//! Optical Fabry-Perot comparison space at normal incidence: two diamond
//! mirrors around a weakly absorbing gap with the emitter plane at its centre.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_bounds, DesignPoint, Landscape, Objectives};
use crate::error::{Error, Result};
use crate::fresnel::StackOptics;
use crate::materials::MaterialDb;
use crate::stack::{CavityStack, Geometry, Layer};
use crate::units::{wavelength_to_energy, NORMAL_INCIDENCE_MRAD};

/// Thickness of the emitter sheet at the gap centre, nm.
const SHEET_NM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpVariable {
    DFront,
    DGap,
    DRear,
    Wavelength,
}

impl FpVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::DFront => "d_front",
            Self::DGap => "d_gap",
            Self::DRear => "d_rear",
            Self::Wavelength => "wavelength",
        }
    }
}

/// Objectives: `sr` and `cls` are the emitter's decay-rate and frequency
/// shifts relative to the free-space rate, `fe` the intensity enhancement
/// at the emitter, `vis` is not defined and set to zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FabryPerotSpace {
    pub mirror: String,
    pub gap: String,
    /// Values used for variables that are not scanned.
    pub d_front: f64,
    pub d_gap: f64,
    pub d_rear: f64,
    pub wavelength: f64,
    pub variables: Vec<(FpVariable, f64, f64)>,
    #[serde(skip)]
    db: Option<MaterialDb>,
}

impl FabryPerotSpace {
    /// Diamond mirrors, lossy gap, 700 nm probe; all three thicknesses free.
    pub fn diamond(db: &MaterialDb) -> Result<Self> {
        let s = Self {
            mirror: "diamond".into(),
            gap: "lossy-gap".into(),
            d_front: 72.9,
            d_gap: 350.0,
            d_rear: 72.9,
            wavelength: 700.0,
            variables: vec![
                (FpVariable::DFront, 0.0, 200.0),
                (FpVariable::DGap, 50.0, 800.0),
                (FpVariable::DRear, 0.0, 200.0),
            ],
            db: None,
        };
        s.bind(db)
    }

    /// Attach the material database and check the configuration.
    pub fn bind(mut self, db: &MaterialDb) -> Result<Self> {
        for (i, &(v, lo, hi)) in self.variables.iter().enumerate() {
            if self.variables[..i].iter().any(|w| w.0 == v) {
                return Err(Error::InvalidSpace(format!("variable '{}' listed twice", v.name())));
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
                return Err(Error::InvalidSpace(format!("bad bounds for '{}'", v.name())));
            }
            if v == FpVariable::Wavelength && lo <= 0.0 {
                return Err(Error::InvalidSpace("wavelength must be positive".into()));
            }
        }
        db.material(&self.mirror)?;
        db.material(&self.gap)?;
        self.db = Some(db.clone());
        Ok(self)
    }

    pub fn with_variables(mut self, variables: Vec<(FpVariable, f64, f64)>) -> Result<Self> {
        let db = self.db.take().ok_or_else(|| Error::InvalidSpace("space not bound to a database".into()))?;
        self.variables = variables;
        self.bind(&db)
    }

    /// Stack and photon energy for `x`.
    pub fn realize(&self, x: &[f64]) -> (CavityStack, f64) {
        let (mut front, mut gap, mut rear, mut lambda) = (self.d_front, self.d_gap, self.d_rear, self.wavelength);
        for (&(v, _, _), &val) in self.variables.iter().zip(x) {
            match v {
                FpVariable::DFront => front = val,
                FpVariable::DGap => gap = val,
                FpVariable::DRear => rear = val,
                FpVariable::Wavelength => lambda = val,
            }
        }
        let half = 0.5 * (gap - SHEET_NM).max(0.0);
        let stack = CavityStack {
            layers: vec![
                Layer::new(&self.mirror, front),
                Layer::new(&self.gap, half),
                Layer::new(&self.gap, SHEET_NM),
                Layer::new(&self.gap, half),
                Layer::new(&self.mirror, rear),
            ],
            substrate: "vacuum".into(),
            resonant: 2,
            z_rel: 0.5,
        };
        (stack, wavelength_to_energy(lambda))
    }

    fn objectives(&self, x: &[f64]) -> Result<Objectives> {
        let db = self.db.as_ref().ok_or_else(|| Error::InvalidSpace("space not bound to a database".into()))?;
        let (stack, omega) = self.realize(x);
        Geometry::new(omega, NORMAL_INCIDENCE_MRAD)?;
        let optics = StackOptics::new(db, &stack, omega)?;
        let k0 = optics.k0();
        let ev = optics.profile(Complex64::new(NORMAL_INCIDENCE_MRAD, 0.0)).greens();
        Ok(Objectives {
            cls: -2.0 * k0 * ev.g_zz.re,
            sr: 2.0 * k0 * ev.g_zz.im,
            vis: 0.0,
            fe: ev.field_enhancement(),
        })
    }
}

impl Landscape for FabryPerotSpace {
    fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.0.name().to_string()).collect()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.variables.iter().map(|v| (v.1, v.2)).collect()
    }

    fn evaluate(&self, x: &[f64]) -> Result<DesignPoint> {
        check_bounds(&self.names(), &self.bounds(), x)?;
        Ok(match self.objectives(x) {
            Ok(o) if o.is_finite() => DesignPoint {
                x: x.to_vec(),
                objectives: o,
                feasible: true,
            },
            _ => DesignPoint::infeasible(x.to_vec()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_gap_is_free_space() {
        let db = MaterialDb::builtin();
        let fp = FabryPerotSpace::diamond(&db).unwrap();
        let p = fp.evaluate(&[0.0, 300.0, 0.0]).unwrap();
        // Only the weak gap absorption separates this from vacuum.
        assert!((p.objectives.sr - 1.0).abs() < 1e-2, "{:?}", p.objectives);
        assert!(p.objectives.cls.abs() < 1e-2);
        assert!((p.objectives.fe - 1.0).abs() < 1e-2);
    }

    #[test]
    fn mirrors_enhance_on_resonance() {
        let db = MaterialDb::builtin();
        let fp = FabryPerotSpace::diamond(&db).unwrap();
        // Half-wave gap: antinode at the centre.
        let on = fp.evaluate(&[72.9, 350.0, 72.9]).unwrap();
        let off = fp.evaluate(&[72.9, 175.0, 72.9]).unwrap();
        assert!(on.objectives.sr > 1.5 && on.objectives.fe > 1.5, "{:?}", on.objectives);
        assert!(off.objectives.sr < 1.0);
    }

    #[test]
    fn unbound_space_is_rejected() {
        let db = MaterialDb::builtin();
        let fp = FabryPerotSpace::diamond(&db).unwrap();
        assert!(fp.clone().with_variables(vec![(FpVariable::DGap, 10.0, 5.0)]).is_err());
        assert!(fp.with_variables(vec![(FpVariable::Wavelength, 600.0, 800.0)]).is_ok());
    }
}
