//! Batch optimization over a cross product of cladding, guide and isotope
//! choices for the archetype cavity.

use serde::{Deserialize, Serialize};

use super::optimizer::{optimize, OptimizerSettings};
use super::space::{DesignSpace, Variable, XraySpace};
use super::{Cost, DesignPoint, Landscape, ObjectiveKind};
use crate::effective::{naive_isotope_rescale, TwoLevelParams};
use crate::error::{Error, Result};
use crate::materials::MaterialDb;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurveySpec {
    pub claddings: Vec<String>,
    pub guides: Vec<String>,
    pub isotopes: Vec<String>,
    pub substrate: String,
    /// Isotope whose optimum is rescaled to estimate the others.
    pub reference: String,
    pub objectives: Vec<ObjectiveKind>,
    /// Angle bounds for the reference isotope, mrad; other isotopes get them
    /// scaled by the inverse energy ratio.
    pub theta_bounds: (f64, f64),
    pub thickness_bounds: (f64, f64),
    pub optimizer: OptimizerSettings,
}

impl Default for SurveySpec {
    fn default() -> Self {
        Self {
            claddings: vec!["Pd".into()],
            guides: vec!["C".into()],
            isotopes: vec!["Fe-57".into(), "Sn-119".into(), "Sc-45".into()],
            substrate: "Si".into(),
            reference: "Fe-57".into(),
            objectives: vec![ObjectiveKind::Sr, ObjectiveKind::Fe],
            theta_bounds: (0.5, 10.0),
            thickness_bounds: (0.0, 400.0),
            optimizer: OptimizerSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub cladding: String,
    pub guide: String,
    pub isotope: String,
    pub objective: ObjectiveKind,
    pub best: DesignPoint,
    /// Reference optimum rescaled to this isotope (sr rows only).
    pub naive_estimate: Option<f64>,
}

impl SurveyRow {
    pub fn value(&self) -> f64 {
        self.best.objectives.get(self.objective)
    }
}

fn space_for(db: &MaterialDb, spec: &SurveySpec, cladding: &str, guide: &str, iso: &str) -> Result<XraySpace> {
    let omega = db.isotope(iso)?.omega_nuc;
    let omega_ref = db.isotope(&spec.reference)?.omega_nuc;
    let s = omega_ref / omega;
    let (t0, t1) = spec.theta_bounds;
    let (d0, d1) = spec.thickness_bounds;
    let mut space = DesignSpace::archetype(cladding, guide, iso, &spec.substrate)
        .with_bounds(Variable::Theta, t0 * s, t1 * s);
    for v in [Variable::DTop, Variable::DGuideUp, Variable::DGuideDown, Variable::DBottom] {
        space = space.with_bounds(v, d0, d1);
    }
    XraySpace::new(db, space)
}

fn params_of(p: &DesignPoint) -> TwoLevelParams {
    TwoLevelParams {
        cls: p.objectives.cls,
        sr: p.objectives.sr,
        rabi_rel: Default::default(),
        fe: p.objectives.fe,
    }
}

/// Optimize every objective for every `(cladding, guide, isotope)`
/// combination. Rows come in cross-product order, objectives innermost.
pub fn survey(db: &MaterialDb, spec: &SurveySpec) -> Result<Vec<SurveyRow>> {
    if spec.isotopes.is_empty() || spec.claddings.is_empty() || spec.guides.is_empty() || spec.objectives.is_empty() {
        return Err(Error::InvalidSpace("survey lists must not be empty".into()));
    }
    let reference = db.isotope(&spec.reference)?.clone();
    let mut rows = Vec::new();
    for cladding in &spec.claddings {
        for guide in &spec.guides {
            let mut reference_sr: Option<DesignPoint> = None;
            if spec.objectives.contains(&ObjectiveKind::Sr) {
                let space = space_for(db, spec, cladding, guide, &spec.reference)?;
                reference_sr = Some(optimize(&space, &cost_fn(&space, ObjectiveKind::Sr), &spec.optimizer)?.best);
            }
            for iso_name in &spec.isotopes {
                let iso = db.isotope(iso_name)?;
                let space = space_for(db, spec, cladding, guide, iso_name)?;
                for &kind in &spec.objectives {
                    let best = if kind == ObjectiveKind::Sr && *iso_name == spec.reference {
                        reference_sr.clone().expect("reference sr optimum")
                    } else {
                        optimize(&space, &cost_fn(&space, kind), &spec.optimizer)?.best
                    };
                    let naive_estimate = match (&reference_sr, kind) {
                        (Some(r), ObjectiveKind::Sr) => {
                            let d3 = space.space().template.resonant_layer().d_nm;
                            Some(naive_isotope_rescale(params_of(r), &reference, iso, d3)?.sr)
                        }
                        _ => None,
                    };
                    rows.push(SurveyRow {
                        cladding: cladding.clone(),
                        guide: guide.clone(),
                        isotope: iso_name.clone(),
                        objective: kind,
                        best,
                        naive_estimate,
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn cost_fn<L: Landscape>(land: &L, kind: ObjectiveKind) -> impl Fn(&DesignPoint) -> f64 + Sync {
    let norm = land.normalization();
    let cost = Cost::Maximize(kind);
    move |p: &DesignPoint| cost.value(&p.objectives, &norm)
}

/// Survey rows as CSV.
pub fn survey_csv(rows: &[SurveyRow]) -> String {
    let mut out = String::from("cladding,guide,isotope,objective,value,naive_estimate,cls,sr,vis,fe,x\n");
    for r in rows {
        let o = &r.best.objectives;
        let naive = r.naive_estimate.map_or(String::from("nan"), |v| format!("{v:.16e}"));
        let x: Vec<String> = r.best.x.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&format!(
            "{},{},{},{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.cladding,
            r.guide,
            r.isotope,
            r.objective.name(),
            r.value(),
            naive,
            o.cls,
            o.sr,
            o.vis,
            o.fe,
            x.join(";")
        ));
    }
    out
}
