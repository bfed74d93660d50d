//! The archetype x-ray cavity design space:
//! top cladding / upper guide / resonant layer / lower guide / bottom cladding / substrate.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optimizer::{latin_hypercube, to_box};
use super::{check_bounds, DesignPoint, Landscape, Normalization, Objectives};
use crate::effective::{coupling_scale, params_from_greens};
use crate::error::{Error, Result};
use crate::fresnel::StackOptics;
use crate::materials::{areal_density, Isotope, MaterialDb};
use crate::spectra::{fano_from_greens, visibility};
use crate::stack::{CavityStack, Geometry, Layer};
use crate::units::NORMAL_INCIDENCE_MRAD;

/// Design variables of the archetype space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    DTop,
    DGuideUp,
    DGuideDown,
    DBottom,
    ZRel,
    Theta,
    Omega,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Self::DTop => "d_top",
            Self::DGuideUp => "d_guide_up",
            Self::DGuideDown => "d_guide_down",
            Self::DBottom => "d_bottom",
            Self::ZRel => "z_rel",
            Self::Theta => "theta",
            Self::Omega => "omega",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Self::DTop | Self::DGuideUp | Self::DGuideDown | Self::DBottom => "nm",
            Self::ZRel => "1",
            Self::Theta => "mrad",
            Self::Omega => "keV",
        }
    }

    fn layer(self) -> Option<usize> {
        match self {
            Self::DTop => Some(0),
            Self::DGuideUp => Some(1),
            Self::DGuideDown => Some(3),
            Self::DBottom => Some(4),
            _ => None,
        }
    }

    /// Default bounds: thicknesses [0, 400] nm, angle [0.5, 10] mrad,
    /// nuclear position [0.05, 0.95].
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Self::ZRel => (0.05, 0.95),
            Self::Theta => (0.5, 10.0),
            Self::Omega => (5.0, 30.0),
            _ => (0.0, 400.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarBound {
    pub name: Variable,
    pub lower: f64,
    pub upper: f64,
}

impl VarBound {
    pub fn new(name: Variable, lower: f64, upper: f64) -> Self {
        Self { name, lower, upper }
    }

    pub fn default_for(name: Variable) -> Self {
        let (lower, upper) = name.default_bounds();
        Self { name, lower, upper }
    }
}

fn default_resonant_thickness() -> f64 {
    0.574
}

/// Variables and fixed parts of an archetype design problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    /// Five layers (top, upper guide, resonant, lower guide, bottom) on a
    /// substrate; thicknesses not listed as variables are kept fixed.
    pub template: CavityStack,
    pub isotope: String,
    /// Incidence angle used when `theta` is not a variable, mrad.
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Photon energy used when `omega` is not a variable; defaults to the
    /// isotope's transition energy.
    #[serde(default)]
    pub omega: Option<f64>,
    pub variables: Vec<VarBound>,
}

fn default_theta() -> f64 {
    3.0
}

impl DesignSpace {
    /// `cladding / guide / isotope / guide / cladding / substrate` with the
    /// default variables (all four thicknesses and the angle).
    pub fn archetype(cladding: &str, guide: &str, isotope: &str, substrate: &str) -> Self {
        let template = CavityStack {
            layers: vec![
                Layer::new(cladding, 80.4),
                Layer::new(guide, 46.0),
                Layer::new(isotope, default_resonant_thickness()),
                Layer::new(guide, 46.1),
                Layer::new(cladding, 17.8),
            ],
            substrate: substrate.to_string(),
            resonant: 2,
            z_rel: 0.5,
        };
        Self {
            template,
            isotope: isotope.to_string(),
            theta: default_theta(),
            omega: None,
            variables: [Variable::DTop, Variable::DGuideUp, Variable::DGuideDown, Variable::DBottom, Variable::Theta]
                .into_iter()
                .map(VarBound::default_for)
                .collect(),
        }
    }

    pub fn with_bounds(mut self, name: Variable, lower: f64, upper: f64) -> Self {
        match self.variables.iter_mut().find(|v| v.name == name) {
            Some(v) => {
                v.lower = lower;
                v.upper = upper;
            }
            None => self.variables.push(VarBound::new(name, lower, upper)),
        }
        self
    }

    pub fn without(mut self, name: Variable) -> Self {
        self.variables.retain(|v| v.name != name);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpace(m));
        if self.template.layers.len() != 5 || self.template.resonant != 2 {
            return bad("template must have five layers with the resonant layer in the middle".into());
        }
        self.template.validate()?;
        for (i, v) in self.variables.iter().enumerate() {
            if self.variables[..i].iter().any(|w| w.name == v.name) {
                return bad(format!("variable '{}' listed twice", v.name.name()));
            }
            if !(v.lower.is_finite() && v.upper.is_finite() && v.lower < v.upper) {
                return bad(format!("bounds of '{}' must be finite with lower < upper", v.name.name()));
            }
            let ok = match v.name {
                Variable::Theta => v.lower > 0.0 && v.upper < NORMAL_INCIDENCE_MRAD,
                Variable::ZRel => v.lower >= 0.0 && v.upper <= 1.0,
                Variable::Omega => v.lower > 0.0,
                _ => v.lower >= 0.0,
            };
            if !ok {
                return bad(format!("bounds of '{}' outside the physical range", v.name.name()));
            }
        }
        if !(self.theta > 0.0 && self.theta <= NORMAL_INCIDENCE_MRAD) {
            return bad(format!("theta = {} mrad outside (0, pi/2]", self.theta));
        }
        Ok(())
    }

    /// Variable vector describing `stack` at angle `theta` (fails when a
    /// value lies outside the bounds).
    pub fn point_for(&self, stack: &CavityStack, theta: f64) -> Result<Vec<f64>> {
        let x: Vec<f64> = self
            .variables
            .iter()
            .map(|v| match v.name {
                Variable::ZRel => stack.z_rel,
                Variable::Theta => theta,
                Variable::Omega => self.omega.unwrap_or(f64::NAN),
                other => stack.layers[other.layer().expect("thickness variable")].d_nm,
            })
            .collect();
        let names: Vec<String> = self.variables.iter().map(|v| v.name.name().to_string()).collect();
        let bounds: Vec<(f64, f64)> = self.variables.iter().map(|v| (v.lower, v.upper)).collect();
        check_bounds(&names, &bounds, &x)?;
        Ok(x)
    }
}

/// A validated design space bound to a material database.
#[derive(Debug, Clone)]
pub struct XraySpace {
    space: DesignSpace,
    db: MaterialDb,
    iso: Isotope,
    fixed_indices: Option<Vec<Complex64>>,
    norm: Normalization,
}

impl XraySpace {
    pub fn new(db: &MaterialDb, space: DesignSpace) -> Result<Self> {
        space.validate()?;
        let iso = db.isotope(&space.isotope)?.clone();
        let omega_is_var = space.variables.iter().any(|v| v.name == Variable::Omega);
        let fixed_indices = if omega_is_var {
            None
        } else {
            Some(space.template.index_deviations(db, space.omega.unwrap_or(iso.omega_nuc))?)
        };
        Ok(Self {
            space,
            db: db.clone(),
            iso,
            fixed_indices,
            norm: Normalization(Objectives {
                cls: 100.0,
                sr: 100.0,
                vis: 1.0,
                fe: 1.0,
            }),
        })
    }

    /// Set the `vis` and `fe` scales from the maxima of a Latin-hypercube
    /// pilot sweep (`cls` and `sr` stay at 100 gamma0).
    pub fn with_pilot_normalization(mut self, samples: usize, seed: u64) -> Self {
        let bounds = self.bounds();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = latin_hypercube(samples, bounds.len(), &mut rng);
        let (mut vis, mut fe) = (0.0f64, 0.0f64);
        for u in pts {
            if let Ok(p) = self.evaluate(&to_box(&bounds, &u)) {
                if p.feasible {
                    vis = vis.max(p.objectives.vis);
                    fe = fe.max(p.objectives.fe);
                }
            }
        }
        if vis > 0.0 {
            self.norm.0.vis = vis;
        }
        if fe > 0.0 {
            self.norm.0.fe = fe;
        }
        self
    }

    pub fn with_normalization(mut self, norm: Normalization) -> Self {
        self.norm = norm;
        self
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn isotope(&self) -> &Isotope {
        &self.iso
    }

    /// Stack and geometry described by `x` (no bound check).
    pub fn realize(&self, x: &[f64]) -> Result<(CavityStack, Geometry)> {
        let mut stack = self.space.template.clone();
        let mut theta = self.space.theta;
        let mut omega = self.space.omega.unwrap_or(self.iso.omega_nuc);
        for (v, &val) in self.space.variables.iter().zip(x) {
            match v.name {
                Variable::ZRel => stack.z_rel = val,
                Variable::Theta => theta = val,
                Variable::Omega => omega = val,
                other => stack.layers[other.layer().expect("thickness variable")].d_nm = val,
            }
        }
        Ok((stack, Geometry::new(omega, theta)?))
    }

    fn objectives(&self, x: &[f64]) -> Result<Objectives> {
        let (stack, geom) = self.realize(x)?;
        crate::effective::validate_pairing(&stack, &self.iso, &geom)?;
        let optics = match &self.fixed_indices {
            Some(n) => StackOptics::from_parts(n.clone(), &stack, geom.omega),
            None => StackOptics::new(&self.db, &stack, geom.omega)?,
        };
        let d3 = stack.resonant_layer().d_nm;
        let scale = coupling_scale(&self.iso, d3)?;
        let ev = optics.profile(Complex64::new(geom.theta, 0.0)).greens();
        let tl = params_from_greens(&ev, scale, areal_density(&self.iso, d3)?);
        let fp = fano_from_greens(&ev, scale);
        Ok(Objectives {
            cls: tl.cls,
            sr: tl.sr,
            vis: visibility(&fp),
            fe: tl.fe,
        })
    }
}

impl Landscape for XraySpace {
    fn names(&self) -> Vec<String> {
        self.space.variables.iter().map(|v| v.name.name().to_string()).collect()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.space.variables.iter().map(|v| (v.lower, v.upper)).collect()
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

    fn normalization(&self) -> Normalization {
        self.norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::two_level_params;

    fn thick_top_space() -> XraySpace {
        XraySpace::new(&MaterialDb::builtin(), DesignSpace::archetype("Pt", "C", "Fe-57", "Si")).unwrap()
    }

    #[test]
    fn evaluation_matches_forward_model() {
        let space = thick_top_space();
        let x = [80.4, 46.0, 46.1, 17.8, 2.5];
        let p = space.evaluate(&x).unwrap();
        assert!(p.feasible);
        let db = MaterialDb::builtin();
        let (stack, geom) = space.realize(&x).unwrap();
        let tl = two_level_params(&db, &stack, db.isotope("Fe-57").unwrap(), &geom).unwrap();
        assert_eq!(p.objectives.sr, tl.sr);
        assert_eq!(p.objectives.cls, tl.cls);
        assert_eq!(p.objectives.fe, tl.fe);
    }

    #[test]
    fn bounds_are_inclusive_and_checked() {
        let space = thick_top_space();
        assert!(space.evaluate(&[0.0, 400.0, 0.0, 400.0, 10.0]).unwrap().feasible);
        assert!(matches!(
            space.evaluate(&[-1.0, 46.0, 46.1, 17.8, 2.5]),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(space.evaluate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_spaces() {
        let db = MaterialDb::builtin();
        let s = DesignSpace::archetype("Pt", "C", "Fe-57", "Si").with_bounds(Variable::Theta, 0.0, 3.0);
        assert!(XraySpace::new(&db, s).is_err());
        let s = DesignSpace::archetype("Pt", "C", "Fe-57", "Si").with_bounds(Variable::DTop, 5.0, 5.0);
        assert!(XraySpace::new(&db, s).is_err());
        let s = DesignSpace::archetype("Pt", "C", "Fe-57", "Si").with_bounds(Variable::DTop, -5.0, 5.0);
        assert!(XraySpace::new(&db, s).is_err());
    }

    #[test]
    fn detuned_energy_is_infeasible() {
        let db = MaterialDb::builtin();
        let s = DesignSpace::archetype("Pt", "C", "Fe-57", "Si").with_bounds(Variable::Omega, 14.0, 15.0);
        let space = XraySpace::new(&db, s).unwrap();
        assert!(!space.evaluate(&[80.4, 46.0, 46.1, 17.8, 2.5, 14.2]).unwrap().feasible);
        assert!(space.evaluate(&[80.4, 46.0, 46.1, 17.8, 2.5, 14.4]).unwrap().feasible);
    }

    #[test]
    fn point_for_roundtrip() {
        let space = thick_top_space();
        let (stack, _) = space.realize(&[80.4, 46.0, 46.1, 17.8, 2.5]).unwrap();
        assert_eq!(space.space().point_for(&stack, 2.5).unwrap(), vec![80.4, 46.0, 46.1, 17.8, 2.5]);
    }
}
