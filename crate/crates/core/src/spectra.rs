//! Nuclear Fano lineshapes in reflection, their visibility, and rocking curves.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::effective::{coupling_scale, validate_pairing};
use crate::error::{Error, Result};
use crate::fresnel::StackOptics;
use crate::greens::{self, GreensEval};
use crate::materials::{Isotope, MaterialDb};
use crate::stack::{CavityStack, Geometry};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Background threshold below which the Fano phase is undefined.
pub const ZERO_BACKGROUND: f64 = 1e-12;

/// Parameters of the reflected Fano line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoParams {
    pub r_el: Complex64,
    /// Weight `A` of the nuclear contribution, units of gamma0.
    pub a_weight: Complex64,
    /// `arg(A) - arg(r_el)` in (-pi, pi].
    pub phi: f64,
    /// Line centre relative to the bare transition (the collective Lamb shift), gamma0.
    pub center: f64,
    /// Half width `(1 + sr) / 2`, gamma0.
    pub hwhm: f64,
}

fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

impl FanoParams {
    pub fn new(r_el: Complex64, a_weight: Complex64, center: f64, hwhm: f64) -> Self {
        Self {
            r_el,
            a_weight,
            phi: wrap_phase(a_weight.arg() - r_el.arg()),
            center,
            hwhm,
        }
    }

    /// True when the electronic background is too small to define `phi`.
    pub fn zero_background(&self) -> bool {
        self.r_el.norm() < ZERO_BACKGROUND
    }

    /// Complex reflection coefficient at a detuning from the bare transition.
    pub fn reflection(&self, detuning: f64) -> Complex64 {
        self.r_el + nuclear_response(self, detuning)
    }

    pub fn intensity(&self, detuning: f64) -> f64 {
        self.reflection(detuning).norm_sqr()
    }

    /// The same line written as `| |r_el| + |A| e^{i phi} / (D + i G) |^2`.
    pub fn intensity_phase_form(&self, detuning: f64) -> f64 {
        let d = detuning - self.center;
        (self.r_el.norm() + self.a_weight.norm() * Complex64::from_polar(1.0, self.phi) / (d + I * self.hwhm)).norm_sqr()
    }
}

/// Nuclear contribution `A / (D + i G)` to the reflection, with
/// `D = detuning - center`.
pub fn nuclear_response(fp: &FanoParams, detuning: f64) -> Complex64 {
    fp.a_weight / (detuning - fp.center + I * fp.hwhm)
}

/// Fano parameters from Green's quantities and the coupling scale of
/// [`coupling_scale`].
pub fn fano_from_greens(ev: &GreensEval, scale: f64) -> FanoParams {
    let cls = -scale * ev.g_zz.re;
    let sr = 2.0 * scale * ev.g_zz.im;
    let a = -scale * ev.g_0z * ev.e_in_z;
    FanoParams::new(ev.coeffs.r_el, a, cls, 0.5 * (1.0 + sr))
}

/// Fano parameters of a cavity at resonant probing. For a vanishing
/// electronic background `phi` is set to `arg(A)`; check
/// [`FanoParams::zero_background`].
pub fn fano_params(db: &MaterialDb, stack: &CavityStack, iso: &Isotope, geom: &Geometry) -> Result<FanoParams> {
    validate_pairing(stack, iso, geom)?;
    let ev = greens::evaluate(db, stack, geom)?;
    Ok(fano_from_greens(&ev, coupling_scale(iso, stack.resonant_layer().d_nm)?))
}

/// Like [`fano_params`] but failing with `ZeroBackground` when the phase is undefined.
pub fn fano_params_strict(db: &MaterialDb, stack: &CavityStack, iso: &Isotope, geom: &Geometry) -> Result<FanoParams> {
    let fp = fano_params(db, stack, iso, geom)?;
    if fp.zero_background() {
        return Err(Error::ZeroBackground);
    }
    Ok(fp)
}

/// The two extrema of the line relative to its centre, from the closed form.
/// `None` when the background vanishes or `cos(phi)` is zero.
pub fn fano_extrema(fp: &FanoParams) -> Option<(f64, f64)> {
    let r = fp.r_el.norm();
    let a = fp.a_weight.norm();
    let g = fp.hwhm;
    let (s, c) = fp.phi.sin_cos();
    if r < ZERO_BACKGROUND || c.abs() < 1e-9 || a == 0.0 {
        return None;
    }
    let sec = 1.0 / c;
    let root = (a * a + 4.0 * r * r * g * g + 4.0 * a * r * g * s).max(0.0).sqrt();
    let base = a * sec + 2.0 * r * g * s / c;
    let plus = -(base + sec * root) / (2.0 * r);
    let minus = -(base - sec * root) / (2.0 * r);
    Some((plus, minus))
}

/// Peak-to-peak amplitude of the Fano line in reflected intensity.
pub fn visibility(fp: &FanoParams) -> f64 {
    if fp.a_weight.norm() == 0.0 {
        return 0.0;
    }
    if fp.zero_background() {
        return (fp.a_weight.norm() / fp.hwhm).powi(2);
    }
    match fano_extrema(fp) {
        Some((p, m)) => (fp.intensity(fp.center + p) - fp.intensity(fp.center + m)).abs(),
        None => visibility_numeric(fp),
    }
}

fn intensity_slope(fp: &FanoParams, d: f64) -> f64 {
    let w = d + I * fp.hwhm;
    let r = fp.r_el + fp.a_weight / w;
    2.0 * (r.conj() * (-fp.a_weight / (w * w))).re
}

/// Stationary points of the line (relative to its centre) by bracketing
/// sign changes of the derivative and bisecting.
pub fn fano_extrema_numeric(fp: &FanoParams) -> Vec<f64> {
    // asinh-spaced grid: 0.01 hwhm resolution at the centre, reaching 1e17 hwhm.
    const N: usize = 9000;
    const S: f64 = 40.0;
    let g = fp.hwhm;
    let at = |k: usize| g * (S * (2.0 * k as f64 / (N - 1) as f64 - 1.0)).sinh();
    let mut out = Vec::new();
    let mut x0 = at(0);
    let mut f0 = intensity_slope(fp, x0);
    for k in 1..N {
        let x1 = at(k);
        let f1 = intensity_slope(fp, x1);
        if f0 == 0.0 {
            out.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = intensity_slope(fp, mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Visibility from a numerical extremum search, including the far-detuned
/// limit `|r_el|^2` when one extremum sits at infinity.
pub fn visibility_numeric(fp: &FanoParams) -> f64 {
    let tail = fp.r_el.norm_sqr();
    let (mut lo, mut hi) = (tail, tail);
    for d in fano_extrema_numeric(fp) {
        let v = fp.intensity(fp.center + d);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// Reflected intensity over a detuning grid (units of gamma0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub detuning: Vec<f64>,
    pub intensity: Vec<f64>,
}

/// Electronic reflectivity over an angle grid (mrad).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RockingCurve {
    pub theta_mrad: Vec<f64>,
    pub intensity: Vec<f64>,
}

/// `count` equidistant points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Default detuning grid: +-200 gamma0 with 4001 points.
pub fn default_detuning_grid() -> Vec<f64> {
    linspace(-200.0, 200.0, 4001)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGeometry("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

pub fn spectrum(fp: &FanoParams, detuning: &[f64]) -> Result<Spectrum> {
    check_grid(detuning)?;
    Ok(Spectrum {
        detuning: detuning.to_vec(),
        intensity: detuning.iter().map(|&d| fp.intensity(d)).collect(),
    })
}

pub fn rocking_curve(db: &MaterialDb, stack: &CavityStack, omega: f64, thetas: &[f64]) -> Result<RockingCurve> {
    check_grid(thetas)?;
    let optics = StackOptics::new(db, stack, omega)?;
    let mut intensity = Vec::with_capacity(thetas.len());
    for &t in thetas {
        Geometry::new(omega, t)?;
        intensity.push(optics.profile(Complex64::new(t, 0.0)).parratt().norm_sqr());
    }
    Ok(RockingCurve {
        theta_mrad: thetas.to_vec(),
        intensity,
    })
}

fn csv_with_header(header_json: &str, columns: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = String::new();
    for line in header_json.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "{columns}");
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{x:.16e},{y:.16e}");
    }
    out
}

impl Spectrum {
    /// CSV with a `#` header carrying `header_json` (usually the stack).
    pub fn to_csv(&self, header_json: &str) -> String {
        csv_with_header(header_json, "detuning_gamma0,intensity", &self.detuning, &self.intensity)
    }
}

impl RockingCurve {
    pub fn to_csv(&self, header_json: &str) -> String {
        csv_with_header(header_json, "theta_mrad,intensity", &self.theta_mrad, &self.intensity)
    }

    /// Indices of interior local minima.
    pub fn minima(&self) -> Vec<usize> {
        let y = &self.intensity;
        (1..y.len().saturating_sub(1))
            .filter(|&i| y[i] < y[i - 1] && y[i] <= y[i + 1])
            .collect()
    }
}
