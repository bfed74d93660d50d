//! Optical constants and nuclear isotope data.
//!
//! Materials are tabulated as `n = 1 - delta + i beta` against photon energy and
//! interpolated log-log between nodes. Isotopes carry the nuclear transition
//! data needed to turn a Green's function into collective two-level parameters.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{energy_to_wavenumber, HBAR_C_EV_NM};

/// Name that always resolves to `n = 1`, at every energy.
pub const VACUUM: &str = "vacuum";

const DEFAULT_MATERIALS: &str = include_str!("../data/materials.csv");
const DEFAULT_ISOTOPES: &str = include_str!("../data/isotopes.csv");

/// One tabulated node of a material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalPoint {
    pub energy_kev: f64,
    pub delta: f64,
    pub beta: f64,
}

/// A material with energy-dependent refractive index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    table: Vec<OpticalPoint>,
}

impl Material {
    pub fn new(name: impl Into<String>, mut table: Vec<OpticalPoint>) -> Result<Self> {
        let name = name.into();
        if table.is_empty() {
            return Err(Error::InvalidData(format!("material '{name}' has no rows")));
        }
        table.sort_by(|a, b| a.energy_kev.total_cmp(&b.energy_kev));
        for w in table.windows(2) {
            if w[1].energy_kev <= w[0].energy_kev {
                return Err(Error::InvalidData(format!(
                    "material '{name}': energies not strictly increasing at {} keV",
                    w[1].energy_kev
                )));
            }
        }
        for p in &table {
            if !(p.energy_kev > 0.0) || !p.delta.is_finite() || !(p.beta >= 0.0) || !p.beta.is_finite() {
                return Err(Error::InvalidData(format!(
                    "material '{name}': bad row at {} keV",
                    p.energy_kev
                )));
            }
        }
        Ok(Self { name, table })
    }

    pub fn table(&self) -> &[OpticalPoint] {
        &self.table
    }

    pub fn energy_range(&self) -> (f64, f64) {
        (self.table[0].energy_kev, self.table[self.table.len() - 1].energy_kev)
    }

    /// `(delta, beta)` at `energy`, log-log interpolated. Nodes are returned exactly.
    pub fn delta_beta(&self, energy: f64) -> Result<(f64, f64)> {
        let (min, max) = self.energy_range();
        if !(energy >= min && energy <= max) {
            return Err(Error::EnergyOutOfRange {
                material: self.name.clone(),
                energy,
                min,
                max,
            });
        }
        let idx = self.table.partition_point(|p| p.energy_kev < energy);
        let hi = self.table[idx];
        if hi.energy_kev == energy {
            return Ok((hi.delta, hi.beta));
        }
        let lo = self.table[idx - 1];
        let t = (energy / lo.energy_kev).ln() / (hi.energy_kev / lo.energy_kev).ln();
        Ok((loglog(lo.delta, hi.delta, t), loglog(lo.beta, hi.beta, t)))
    }

    pub fn refractive_index(&self, energy: f64) -> Result<Complex64> {
        Ok(1.0 + self.index_deviation(energy)?)
    }

    /// `n - 1 = -delta + i beta`, without the rounding of forming `n` first.
    pub fn index_deviation(&self, energy: f64) -> Result<Complex64> {
        let (delta, beta) = self.delta_beta(energy)?;
        Ok(Complex64::new(-delta, beta))
    }
}

// Values of mixed sign or zero fall back to linear interpolation in log(E).
fn loglog(a: f64, b: f64, t: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        (a.ln() + t * (b.ln() - a.ln())).exp()
    } else {
        a + t * (b - a)
    }
}

/// Nuclear transition and host data of a Moessbauer isotope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Isotope {
    pub name: String,
    /// Transition energy, keV.
    pub omega_nuc: f64,
    /// Natural linewidth, neV.
    pub gamma0: f64,
    /// Internal conversion coefficient.
    pub alpha_ic: f64,
    /// Twice the excited-state spin.
    pub two_ie: u32,
    /// Twice the ground-state spin.
    pub two_ig: u32,
    /// Lamb-Moessbauer factor.
    pub f_lm: f64,
    /// Abundance of the resonant isotope in the layer.
    pub abundance: f64,
    /// Atomic number density, nm^-3.
    pub rho_v: f64,
    pub electronic_delta: f64,
    pub electronic_beta: f64,
}

impl Isotope {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidData(format!("isotope '{}': {what}", self.name)));
        if !(self.omega_nuc > 0.0) {
            return bad("omega_nuc must be > 0");
        }
        if !(self.gamma0 > 0.0) {
            return bad("gamma0 must be > 0");
        }
        if !(self.alpha_ic >= 0.0) {
            return bad("alpha_ic must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.f_lm) {
            return bad("f_LM must lie in [0, 1]");
        }
        if !(self.abundance > 0.0 && self.abundance <= 1.0) {
            return bad("abundance must lie in (0, 1]");
        }
        if !(self.rho_v > 0.0) {
            return bad("rho_V must be > 0");
        }
        Ok(())
    }

    /// Electronic index of the host at the transition energy.
    pub fn electronic_index(&self) -> Complex64 {
        Complex64::new(1.0 - self.electronic_delta, self.electronic_beta)
    }

    /// Natural linewidth as a wavenumber, nm^-1.
    pub fn gamma0_per_nm(&self) -> f64 {
        self.gamma0 * 1e-9 / HBAR_C_EV_NM
    }

    /// `(2 I_e + 1) / (2 I_g + 1)`.
    pub fn multiplicity_ratio(&self) -> f64 {
        (self.two_ie as f64 + 1.0) / (self.two_ig as f64 + 1.0)
    }
}

/// Squared transition dipole moment in natural units (nm^2),
/// `|d|^2 = 2 pi gamma0 / omega^3 / (2 (1 + alpha)) * (2 I_e + 1) / (2 I_g + 1)`.
pub fn dipole_strength(iso: &Isotope) -> f64 {
    let omega = energy_to_wavenumber(iso.omega_nuc);
    2.0 * std::f64::consts::PI * iso.gamma0_per_nm() / omega.powi(3) / (2.0 * (1.0 + iso.alpha_ic))
        * iso.multiplicity_ratio()
}

/// Effective in-plane density of resonant nuclei, nm^-2.
pub fn areal_density(iso: &Isotope, d3: f64) -> Result<f64> {
    if !(d3 > 0.0) {
        return Err(Error::NonPositiveThickness(d3));
    }
    Ok(d3 * iso.rho_v * iso.abundance * iso.f_lm)
}

/// Immutable store of materials and isotopes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MaterialDb {
    materials: BTreeMap<String, Material>,
    isotopes: BTreeMap<String, Isotope>,
}

#[derive(Deserialize)]
struct MaterialRow {
    name: String,
    energy_kev: f64,
    delta: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct IsotopeRow {
    name: String,
    omega_nuc_kev: f64,
    gamma0_nev: f64,
    alpha_ic: f64,
    two_ie: u32,
    two_ig: u32,
    f_lm: f64,
    abundance: f64,
    rho_v_per_nm3: f64,
    delta_el: f64,
    beta_el: f64,
}

fn csv_reader<R: Read>(src: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(src)
}

// Header names are matched case-insensitively.
fn lowercase_headers<R: Read>(rdr: &mut csv::Reader<R>) -> Result<()> {
    let headers = rdr.headers()?.clone();
    let lower: csv::StringRecord = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    rdr.set_headers(lower);
    Ok(())
}

impl MaterialDb {
    /// The database shipped with the crate.
    pub fn builtin() -> Self {
        static BUILTIN: OnceLock<MaterialDb> = OnceLock::new();
        BUILTIN
            .get_or_init(|| {
                Self::from_csv(DEFAULT_MATERIALS.as_bytes(), DEFAULT_ISOTOPES.as_bytes())
                    .expect("shipped material database is valid")
            })
            .clone()
    }

    /// Parse the material and isotope CSV files.
    pub fn from_csv<R1: Read, R2: Read>(materials: R1, isotopes: R2) -> Result<Self> {
        let mut rows: BTreeMap<String, Vec<OpticalPoint>> = BTreeMap::new();
        let mut rdr = csv_reader(materials);
        lowercase_headers(&mut rdr)?;
        for rec in rdr.deserialize() {
            let row: MaterialRow = rec?;
            rows.entry(row.name).or_default().push(OpticalPoint {
                energy_kev: row.energy_kev,
                delta: row.delta,
                beta: row.beta,
            });
        }
        let mut db = MaterialDb::default();
        for (name, table) in rows {
            if name == VACUUM {
                return Err(Error::InvalidData("'vacuum' is reserved".into()));
            }
            db.materials.insert(name.clone(), Material::new(name, table)?);
        }

        let mut rdr = csv_reader(isotopes);
        lowercase_headers(&mut rdr)?;
        for rec in rdr.deserialize() {
            let row: IsotopeRow = rec?;
            let iso = row.into_isotope();
            iso.validate()?;
            db.isotopes.insert(iso.name.clone(), iso);
        }
        Ok(db)
    }

    /// Load `materials.csv` and `isotopes.csv` from a directory.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let m = std::fs::File::open(dir.join("materials.csv"))?;
        let i = std::fs::File::open(dir.join("isotopes.csv"))?;
        Self::from_csv(m, i)
    }

    pub fn insert_material(&mut self, material: Material) {
        self.materials.insert(material.name.clone(), material);
    }

    pub fn insert_isotope(&mut self, iso: Isotope) -> Result<()> {
        iso.validate()?;
        self.isotopes.insert(iso.name.clone(), iso);
        Ok(())
    }

    pub fn material(&self, name: &str) -> Result<&Material> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn isotope(&self, name: &str) -> Result<&Isotope> {
        self.isotopes
            .get(name)
            .ok_or_else(|| Error::UnknownIsotope(name.to_string()))
    }

    pub fn material_names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }

    pub fn isotope_names(&self) -> impl Iterator<Item = &str> {
        self.isotopes.keys().map(String::as_str)
    }

    /// Complex refractive index `1 - delta + i beta` of `material` at `energy` (keV).
    pub fn refractive_index(&self, material: &str, energy: f64) -> Result<Complex64> {
        if material == VACUUM {
            return Ok(Complex64::new(1.0, 0.0));
        }
        self.material(material)?.refractive_index(energy)
    }

    /// `n - 1` of a material; zero for vacuum.
    pub fn index_deviation(&self, material: &str, energy: f64) -> Result<Complex64> {
        if material == VACUUM {
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.material(material)?.index_deviation(energy)
    }
}

impl IsotopeRow {
    fn into_isotope(self) -> Isotope {
        Isotope {
            name: self.name,
            omega_nuc: self.omega_nuc_kev,
            gamma0: self.gamma0_nev,
            alpha_ic: self.alpha_ic,
            two_ie: self.two_ie,
            two_ig: self.two_ig,
            f_lm: self.f_lm,
            abundance: self.abundance,
            rho_v: self.rho_v_per_nm3,
            electronic_delta: self.delta_el,
            electronic_beta: self.beta_el,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(db: &MaterialDb) -> Isotope {
        db.isotope("Fe-57").unwrap().clone()
    }

    #[test]
    fn builtin_has_default_set() {
        let db = MaterialDb::builtin();
        for m in ["Pt", "Pd", "C", "Si", "B4C", "MgO", "diamond", "Fe-57", "Sn-119", "Sc-45"] {
            assert!(db.material(m).is_ok(), "{m}");
        }
        for i in ["Fe-57", "Sn-119", "Sc-45"] {
            assert!(db.isotope(i).is_ok(), "{i}");
        }
    }

    #[test]
    fn published_indices_at_transition_energies() {
        let db = MaterialDb::builtin();
        let n = db.refractive_index("Fe-57", 14.4).unwrap();
        assert_eq!(n, Complex64::new(1.0 - 7.3e-6, 0.33e-6));
        let n = db.refractive_index("C", 23.9).unwrap();
        assert_eq!(n, Complex64::new(1.0 - 0.82e-6, 2.8e-10));
        let n = db.refractive_index("C", 14.4).unwrap();
        assert_eq!(n, Complex64::new(1.0 - 2.3e-6, 1.2e-9));
        for iso in ["Fe-57", "Sn-119", "Sc-45"] {
            let iso = db.isotope(iso).unwrap();
            let n = db.refractive_index(&iso.name, iso.omega_nuc).unwrap();
            assert_eq!(n, iso.electronic_index());
        }
        let fe = db.isotope("Fe-57").unwrap();
        assert_eq!(fe.omega_nuc, 14.4);
        assert_eq!(db.isotope("Sn-119").unwrap().omega_nuc, 23.9);
        assert_eq!(db.isotope("Sc-45").unwrap().omega_nuc, 12.4);
    }

    #[test]
    fn vacuum_is_unity_everywhere() {
        let db = MaterialDb::builtin();
        for e in [1e-3, 14.4, 1e4] {
            assert_eq!(db.refractive_index(VACUUM, e).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn lookup_errors() {
        let db = MaterialDb::builtin();
        assert!(matches!(db.refractive_index("Unobtainium", 14.4), Err(Error::UnknownMaterial(_))));
        assert!(matches!(db.refractive_index("Pt", 100.0), Err(Error::EnergyOutOfRange { .. })));
        assert!(matches!(db.isotope("Xx-1"), Err(Error::UnknownIsotope(_))));
    }

    #[test]
    fn interpolation_is_loglog_between_nodes() {
        let m = Material::new(
            "x",
            vec![
                OpticalPoint { energy_kev: 10.0, delta: 4e-6, beta: 1e-7 },
                OpticalPoint { energy_kev: 20.0, delta: 1e-6, beta: 1e-8 },
            ],
        )
        .unwrap();
        // delta ~ E^-2 and beta ~ E^-log2(10) between the two nodes
        let (d, b) = m.delta_beta(10.0 * 2f64.sqrt()).unwrap();
        assert!((d - 2e-6).abs() < 1e-18);
        assert!((b - 1e-7 / 10f64.sqrt()).abs() < 1e-20);
    }

    #[test]
    fn interpolation_continuous_and_passive() {
        let db = MaterialDb::builtin();
        for name in ["Pt", "Pd", "C", "Si", "MgO"] {
            let m = db.material(name).unwrap();
            let mut e = 5.01;
            while e < 29.9 {
                let a = m.refractive_index(e).unwrap();
                let b = m.refractive_index(e + 1e-9).unwrap();
                assert!(a.im >= 0.0);
                assert!((a - b).norm() < 1e-10, "{name} at {e}");
                e += 0.37;
            }
        }
    }

    #[test]
    fn rejects_bad_tables() {
        let p = |e: f64, b: f64| OpticalPoint { energy_kev: e, delta: 1e-6, beta: b };
        assert!(Material::new("a", vec![]).is_err());
        assert!(Material::new("a", vec![p(1.0, 0.0), p(1.0, 0.0)]).is_err());
        assert!(Material::new("a", vec![p(1.0, -1e-9)]).is_err());
    }

    #[test]
    fn dipole_strength_equal_spins_no_conversion() {
        let db = MaterialDb::builtin();
        let mut iso = fe(&db);
        iso.two_ie = 1;
        iso.two_ig = 1;
        iso.alpha_ic = 0.0;
        let omega = energy_to_wavenumber(iso.omega_nuc);
        let expected = std::f64::consts::PI * iso.gamma0_per_nm() / omega.powi(3);
        assert!((dipole_strength(&iso) / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dipole_strength_fe57_hand_evaluation() {
        let db = MaterialDb::builtin();
        let iso = fe(&db);
        // 2 pi * gamma0 / omega^3 / (2 * 9.56) * 4 / 2 with gamma0 = 4.66 neV, omega = 14.4 keV
        let gamma0 = 4.66e-9 / 197.3269804;
        let omega = 14400.0 / 197.3269804;
        let by_hand = 2.0 * std::f64::consts::PI * gamma0 / (omega * omega * omega) / 19.12 * 2.0;
        assert!((dipole_strength(&iso) / by_hand - 1.0).abs() < 1e-13);
    }

    #[test]
    fn dipole_strength_linear_in_gamma0() {
        let db = MaterialDb::builtin();
        let iso = fe(&db);
        let mut twice = iso.clone();
        twice.gamma0 *= 2.0;
        assert!((dipole_strength(&twice) / dipole_strength(&iso) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn areal_density_examples() {
        let db = MaterialDb::builtin();
        let iso = fe(&db);
        let na = areal_density(&iso, 0.574).unwrap();
        // 84.9 * 0.95 * 0.8 * 0.574
        assert!((na - 37.036776).abs() < 1e-9);
        assert!((na - 37.03).abs() < 0.01);
        let mut dead = iso.clone();
        dead.f_lm = 0.0;
        assert_eq!(areal_density(&dead, 0.574).unwrap(), 0.0);
        assert!((areal_density(&iso, 1.148).unwrap() / na - 2.0).abs() < 1e-14);
        assert!(matches!(areal_density(&iso, 0.0), Err(Error::NonPositiveThickness(_))));
    }

    #[test]
    fn csv_round_trip_from_custom_source() {
        let mats = "# comment\nname,energy_keV,delta,beta\nX,10,1e-6,1e-8\nX,20,5e-7,2e-9\n";
        let isos = "name,omega_nuc_keV,gamma0_neV,alpha_ic,two_Ie,two_Ig,f_LM,abundance,rho_V_per_nm3,delta_el,beta_el\nY,10,1,0,1,1,1,1,10,1e-6,1e-8\n";
        let db = MaterialDb::from_csv(mats.as_bytes(), isos.as_bytes()).unwrap();
        assert_eq!(db.refractive_index("X", 20.0).unwrap(), Complex64::new(1.0 - 5e-7, 2e-9));
        assert_eq!(db.isotope("Y").unwrap().multiplicity_ratio(), 1.0);
        let bad = "name,omega_nuc_keV,gamma0_neV,alpha_ic,two_Ie,two_Ig,f_LM,abundance,rho_V_per_nm3,delta_el,beta_el\nY,10,1,0,1,1,1.5,1,10,1e-6,1e-8\n";
        assert!(MaterialDb::from_csv(mats.as_bytes(), bad.as_bytes()).is_err());
    }
}
