//! Python bindings: material database, stacks, forward model, pole search
//! and JSON-configured design runs.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use xcavity::design::{run_design, DesignConfig};
use xcavity::greens;
use xcavity::spectra::{self, fano_extrema};
use xcavity::{CavityStack, Error, Geometry, Layer};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::DegenerateInterface
        | Error::ZeroBackground
        | Error::NoConvergence
        | Error::ContourDisagreement(_)
        | Error::AllInfeasible
        | Error::TargetUnreachable(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Optical constants and isotope data.
#[pyclass(name = "MaterialDb", module = "pyxcavity", frozen, skip_from_py_object)]
struct PyMaterialDb(xcavity::MaterialDb);

#[pymethods]
impl PyMaterialDb {
    /// The tables shipped with the library.
    #[staticmethod]
    fn builtin() -> Self {
        Self(xcavity::MaterialDb::builtin())
    }

    /// Load `materials.csv` and `isotopes.csv` from a directory.
    #[staticmethod]
    fn from_dir(path: &str) -> PyResult<Self> {
        xcavity::MaterialDb::from_dir(path).map(Self).map_err(to_py)
    }

    fn materials(&self) -> Vec<String> {
        self.0.material_names().map(String::from).collect()
    }

    fn isotopes(&self) -> Vec<String> {
        self.0.isotope_names().map(String::from).collect()
    }

    fn refractive_index(&self, material: &str, energy_kev: f64) -> PyResult<Complex64> {
        self.0.refractive_index(material, energy_kev).map_err(to_py)
    }

    /// Transition energy of an isotope, keV.
    fn transition_energy(&self, isotope: &str) -> PyResult<f64> {
        Ok(self.0.isotope(isotope).map_err(to_py)?.omega_nuc)
    }
}

/// Layer stack on a substrate; `layers` is a list of `(material, thickness_nm)`.
#[pyclass(name = "Stack", module = "pyxcavity", frozen, skip_from_py_object)]
struct PyStack(CavityStack);

#[pymethods]
impl PyStack {
    #[new]
    #[pyo3(signature = (layers, substrate, resonant, z_rel = 0.5))]
    fn new(layers: Vec<(String, f64)>, substrate: &str, resonant: usize, z_rel: f64) -> PyResult<Self> {
        let layers = layers.into_iter().map(|(m, d)| Layer::new(m, d)).collect();
        CavityStack::new(layers, substrate, resonant)
            .and_then(|s| s.with_z_rel(z_rel))
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CavityStack::from_json(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn layers(&self) -> Vec<(String, f64)> {
        self.0.layers.iter().map(|l| (l.material.clone(), l.d_nm)).collect()
    }

    #[getter]
    fn substrate(&self) -> String {
        self.0.substrate.clone()
    }

    #[getter]
    fn resonant(&self) -> usize {
        self.0.resonant
    }

    #[getter]
    fn z_rel(&self) -> f64 {
        self.0.z_rel
    }

    /// The stack turned upside down, keeping the substrate.
    fn mirrored(&self) -> Self {
        Self(self.0.mirrored())
    }

    fn __repr__(&self) -> String {
        format!("Stack({})", self.0.to_json())
    }
}

fn geometry(omega: f64, theta: f64) -> PyResult<Geometry> {
    Geometry::new(omega, theta).map_err(to_py)
}

/// Electronic reflection coefficient of the stack.
#[pyfunction]
fn parratt(db: &PyMaterialDb, stack: &PyStack, omega: f64, theta: f64) -> PyResult<Complex64> {
    xcavity::parratt(&db.0, &stack.0, &geometry(omega, theta)?).map_err(to_py)
}

/// Green's function and fields at the nuclear plane.
#[pyfunction]
fn green<'py>(py: Python<'py>, db: &PyMaterialDb, stack: &PyStack, omega: f64, theta: f64) -> PyResult<Bound<'py, PyDict>> {
    let ev = greens::evaluate(&db.0, &stack.0, &geometry(omega, theta)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("g_zz", ev.g_zz)?;
    d.set_item("g_0z", ev.g_0z)?;
    d.set_item("e_in_z", ev.e_in_z)?;
    d.set_item("e_in_0", ev.e_in_0)?;
    d.set_item("r_el", ev.coeffs.r_el)?;
    Ok(d)
}

fn isotope<'a>(db: &'a PyMaterialDb, stack: &PyStack, name: Option<&str>) -> PyResult<&'a xcavity::Isotope> {
    let name = name.unwrap_or(&stack.0.resonant_layer().material);
    db.0.isotope(name).map_err(to_py)
}

/// Collective Lamb shift, superradiant rate (both in gamma0) and field
/// enhancement at the nuclei, probed on resonance.
#[pyfunction]
#[pyo3(signature = (db, stack, theta, isotope_name = None))]
fn two_level_params<'py>(
    py: Python<'py>,
    db: &PyMaterialDb,
    stack: &PyStack,
    theta: f64,
    isotope_name: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let iso = isotope(db, stack, isotope_name)?;
    let p = xcavity::two_level_params(&db.0, &stack.0, iso, &geometry(iso.omega_nuc, theta)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("cls", p.cls)?;
    d.set_item("sr", p.sr)?;
    d.set_item("fe", p.fe)?;
    d.set_item("rabi_rel", p.rabi_rel)?;
    Ok(d)
}

/// Fano line parameters and visibility of the reflected spectrum.
#[pyfunction]
#[pyo3(signature = (db, stack, theta, isotope_name = None))]
fn fano<'py>(
    py: Python<'py>,
    db: &PyMaterialDb,
    stack: &PyStack,
    theta: f64,
    isotope_name: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let iso = isotope(db, stack, isotope_name)?;
    let fp = spectra::fano_params(&db.0, &stack.0, iso, &geometry(iso.omega_nuc, theta)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("r_el", fp.r_el)?;
    d.set_item("a_weight", fp.a_weight)?;
    d.set_item("phi", fp.phi)?;
    d.set_item("center", fp.center)?;
    d.set_item("hwhm", fp.hwhm)?;
    d.set_item("visibility", spectra::visibility(&fp))?;
    d.set_item("extrema", fano_extrema(&fp).map(|(p, m)| (fp.center + p, fp.center + m)))?;
    Ok(d)
}

/// Reflected intensity over a detuning grid (gamma0).
#[pyfunction]
#[pyo3(signature = (db, stack, theta, detuning, isotope_name = None))]
fn spectrum(db: &PyMaterialDb, stack: &PyStack, theta: f64, detuning: Vec<f64>, isotope_name: Option<&str>) -> PyResult<Vec<f64>> {
    let iso = isotope(db, stack, isotope_name)?;
    let fp = spectra::fano_params(&db.0, &stack.0, iso, &geometry(iso.omega_nuc, theta)?).map_err(to_py)?;
    Ok(spectra::spectrum(&fp, &detuning).map_err(to_py)?.intensity)
}

/// Electronic reflectivity over an angle grid (mrad).
#[pyfunction]
fn rocking_curve(db: &PyMaterialDb, stack: &PyStack, omega: f64, thetas: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(xcavity::rocking_curve(&db.0, &stack.0, omega, &thetas).map_err(to_py)?.intensity)
}

/// Poles of the Green's function in `[theta_min, theta_max]` as
/// `(theta0, residue)` pairs of complex numbers.
#[pyfunction]
#[pyo3(signature = (db, stack, theta_min, theta_max, isotope_name = None))]
fn poles(
    db: &PyMaterialDb,
    stack: &PyStack,
    theta_min: f64,
    theta_max: f64,
    isotope_name: Option<&str>,
) -> PyResult<Vec<(Complex64, Complex64)>> {
    let iso = isotope(db, stack, isotope_name)?;
    let set = xcavity::find_poles(&db.0, &stack.0, iso.omega_nuc, theta_min, theta_max).map_err(to_py)?;
    Ok(set.poles.iter().map(|p| (p.theta0, p.residue)).collect())
}

/// Run a design config (JSON text); returns one JSON object per design point.
#[pyfunction]
fn design(py: Python<'_>, db: &PyMaterialDb, config_json: &str) -> PyResult<Vec<String>> {
    let cfg = DesignConfig::from_json(config_json).map_err(to_py)?;
    let out = py.detach(|| run_design(&db.0, &cfg)).map_err(to_py)?;
    Ok(out.to_json_lines().lines().map(String::from).collect())
}

#[pymodule]
pub fn pyxcavity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMaterialDb>()?;
    m.add_class::<PyStack>()?;
    m.add_function(wrap_pyfunction!(parratt, m)?)?;
    m.add_function(wrap_pyfunction!(green, m)?)?;
    m.add_function(wrap_pyfunction!(two_level_params, m)?)?;
    m.add_function(wrap_pyfunction!(fano, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(rocking_curve, m)?)?;
    m.add_function(wrap_pyfunction!(poles, m)?)?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    Ok(())
}
