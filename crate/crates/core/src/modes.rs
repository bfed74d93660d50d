//! Complex-angle poles of the Green's function, their residues, and the
//! pole-expansion and single-mode reconstructions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fresnel::StackOptics;
use crate::greens::require_resonant_thickness;
use crate::materials::MaterialDb;
use crate::stack::CavityStack;

/// Relative disagreement between the two residue evaluations that flags a pole.
pub const CONTOUR_FLAG: f64 = 1e-4;

/// A zero of the resonant denominator in the complex angle plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// Pole position, mrad. Decaying modes have `Im <= 0`.
    pub theta0: Complex64,
    /// Residue of `G(z, z)` in `theta` (nm mrad).
    pub residue: Complex64,
    /// 1-based rank by `Re theta0` within the search window.
    pub order_index: usize,
    /// Relative difference between the derivative and contour residues.
    pub contour_check_rel_err: f64,
    /// Set when the two residue evaluations disagree beyond [`CONTOUR_FLAG`].
    pub flagged: bool,
}

impl Pole {
    /// Half width of the mode in angle, mrad.
    pub fn half_width(&self) -> f64 {
        self.theta0.im.abs()
    }
}

/// Entry of the JSON pole report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleRecord {
    pub re_theta0_mrad: f64,
    pub im_theta0_mrad: f64,
    pub re_residue: f64,
    pub im_residue: f64,
    pub order_index: usize,
    pub contour_check_rel_err: f64,
}

impl From<&Pole> for PoleRecord {
    fn from(p: &Pole) -> Self {
        Self {
            re_theta0_mrad: p.theta0.re,
            im_theta0_mrad: p.theta0.im,
            re_residue: p.residue.re,
            im_residue: p.residue.im,
            order_index: p.order_index,
            contour_check_rel_err: p.contour_check_rel_err,
        }
    }
}

pub fn pole_report_json(poles: &[Pole]) -> String {
    let recs: Vec<PoleRecord> = poles.iter().map(PoleRecord::from).collect();
    serde_json::to_string_pretty(&recs).expect("pole records serialize")
}

/// Search settings for [`find_poles_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleSearch {
    pub theta_min: f64,
    pub theta_max: f64,
    /// Largest accepted `|Im theta0|`; defaults to the window width.
    pub im_max: Option<f64>,
    /// Number of real-axis scan points.
    pub seeds: usize,
    pub max_iter: usize,
    /// Acceptance threshold on `|D(theta0)|`.
    pub tol: f64,
    /// Poles closer than this (mrad) are merged.
    pub dedup: f64,
}

impl PoleSearch {
    pub fn new(theta_min: f64, theta_max: f64) -> Self {
        let seeds = (((theta_max - theta_min) / 5e-4).ceil() as usize).clamp(200, 200_000);
        Self {
            theta_min,
            theta_max,
            im_max: None,
            seeds,
            max_iter: 60,
            tol: 1e-10,
            dedup: 1e-6,
        }
    }
}

/// Poles found in a window, plus the number of seeds whose Newton iteration
/// did not converge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
    pub dropped_seeds: usize,
}

/// Evaluator of the resonant denominator and Green's function at complex angles.
pub struct ModeSolver {
    optics: StackOptics,
}

const STEP: f64 = 1e-5;

impl ModeSolver {
    pub fn new(db: &MaterialDb, stack: &CavityStack, omega: f64) -> Result<Self> {
        require_resonant_thickness(stack)?;
        Ok(Self {
            optics: StackOptics::new(db, stack, omega)?,
        })
    }

    /// `D(theta) = 1 - r_up r_down exp(2 i beta_m d_m)`.
    pub fn denominator(&self, theta: Complex64) -> Complex64 {
        let p = self.optics.profile(theta);
        let c = p.composite();
        p.mode_denominator(&c)
    }

    /// `G(z, z)` at a complex angle.
    pub fn green(&self, theta: Complex64) -> Complex64 {
        self.optics.profile(theta).greens().g_zz
    }

    /// Numerator `N = G D`.
    pub fn numerator(&self, theta: Complex64) -> Complex64 {
        let p = self.optics.profile(theta);
        let c = p.composite();
        p.greens_from(c).g_zz * p.mode_denominator(&c)
    }

    /// `D'(theta)` from a fourth-order central stencil along the real axis,
    /// valid because `D` is holomorphic.
    pub fn denominator_derivative(&self, theta: Complex64) -> Complex64 {
        let h = STEP;
        let f = |k: f64| self.denominator(theta + k * h);
        (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h)
    }

    fn newton(&self, start: Complex64, max_iter: usize, tol: f64) -> Option<Complex64> {
        let mut z = start;
        for _ in 0..max_iter {
            let d = self.denominator(z);
            let dp = self.denominator_derivative(z);
            if !(d.is_finite() && dp.is_finite()) || dp.norm() == 0.0 {
                return None;
            }
            let step = d / dp;
            z -= step;
            if !(z.re > 0.0) || !z.is_finite() {
                return None;
            }
            if step.norm() <= 1e-14 * z.norm().max(1.0) {
                break;
            }
        }
        (self.denominator(z).norm() < tol).then_some(z)
    }

    /// `N(theta0) / D'(theta0)`.
    pub fn residue_derivative(&self, theta0: Complex64) -> Complex64 {
        self.numerator(theta0) / self.denominator_derivative(theta0)
    }

    /// Residue by the trapezoidal rule on a circle around the pole.
    pub fn residue_contour(&self, theta0: Complex64, radius: f64, nodes: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..nodes {
            let offset = Complex64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
            acc += self.green(theta0 + offset) * offset;
        }
        acc / nodes as f64
    }

    fn residue_pair(&self, theta0: Complex64) -> (Complex64, Complex64) {
        let radius = 0.1 * theta0.im.abs().max(1e-9);
        (self.residue_derivative(theta0), self.residue_contour(theta0, radius, 64))
    }

    pub fn find(&self, search: &PoleSearch) -> Result<PoleSet> {
        if !(search.theta_max > search.theta_min) || search.seeds < 3 {
            return Err(Error::EmptyWindow);
        }
        let im_max = search.im_max.unwrap_or(search.theta_max - search.theta_min);
        let n = search.seeds;
        let thetas: Vec<f64> = (0..n)
            .map(|i| search.theta_min + (search.theta_max - search.theta_min) * i as f64 / (n - 1) as f64)
            .collect();
        let mags: Vec<f64> = thetas
            .iter()
            .map(|&t| self.denominator(Complex64::new(t, 0.0)).norm())
            .collect();
        let mut found: Vec<Complex64> = Vec::new();
        let mut dropped = 0;
        for i in 1..n - 1 {
            if !(mags[i] < mags[i - 1] && mags[i] <= mags[i + 1]) {
                continue;
            }
            let accepted = self.newton(Complex64::new(thetas[i], 0.0), search.max_iter, search.tol).filter(|z| {
                z.re >= search.theta_min && z.re <= search.theta_max && z.im.abs() <= im_max
            });
            match accepted {
                Some(z) => {
                    if found.iter().all(|p| (p - z).norm() > search.dedup) {
                        found.push(z);
                    }
                }
                None => dropped += 1,
            }
        }
        found.sort_by(|a, b| a.re.total_cmp(&b.re));
        let pairs: Vec<(Complex64, Complex64)> = found.iter().map(|&z| self.residue_pair(z)).collect();
        let largest = pairs.iter().map(|(a, _)| a.norm()).fold(0.0, f64::max);
        let poles = found
            .iter()
            .zip(&pairs)
            .enumerate()
            .map(|(i, (&theta0, &(deriv, contour)))| {
                let scale = deriv.norm().max(contour.norm()).max(1e-12 * largest);
                let rel = if scale > 0.0 { (deriv - contour).norm() / scale } else { 0.0 };
                Pole {
                    theta0,
                    residue: deriv,
                    order_index: i + 1,
                    contour_check_rel_err: rel,
                    flagged: rel > CONTOUR_FLAG,
                }
            })
            .collect();
        Ok(PoleSet { poles, dropped_seeds: dropped })
    }

    /// `G(z, z)` at `theta = 0`, the constant of the pole expansion.
    pub fn green_at_zero(&self) -> Complex64 {
        self.green(Complex64::new(0.0, 0.0))
    }

    /// Constant of the single-mode form, matched to the exact Green's
    /// function at two angles ten half-widths either side of the pole.
    pub fn single_mode_constant(&self, pole: &Pole) -> Complex64 {
        let w = 10.0 * pole.half_width();
        let at = |t: f64| {
            let th = Complex64::new(t, 0.0);
            self.green(th) - pole.residue / (th - pole.theta0)
        };
        0.5 * (at(pole.theta0.re - w) + at(pole.theta0.re + w))
    }
}

pub fn find_poles(db: &MaterialDb, stack: &CavityStack, omega: f64, theta_min: f64, theta_max: f64) -> Result<PoleSet> {
    find_poles_with(db, stack, omega, &PoleSearch::new(theta_min, theta_max))
}

pub fn find_poles_with(db: &MaterialDb, stack: &CavityStack, omega: f64, search: &PoleSearch) -> Result<PoleSet> {
    ModeSolver::new(db, stack, omega)?.find(search)
}

/// Residue of `G(z, z)` at a converged pole, checked against a contour
/// integral; fails with `ContourDisagreement` beyond [`CONTOUR_FLAG`].
pub fn residue(db: &MaterialDb, stack: &CavityStack, omega: f64, pole: &Pole) -> Result<Complex64> {
    let solver = ModeSolver::new(db, stack, omega)?;
    let (a, b) = solver.residue_pair(pole.theta0);
    let rel = (a - b).norm() / a.norm().max(b.norm());
    if rel > CONTOUR_FLAG {
        return Err(Error::ContourDisagreement(rel));
    }
    Ok(a)
}

/// Pole expansion `G(0) + sum Res (1/theta0 + 1/(theta - theta0))`.
pub fn mittag_leffler(poles: &[Pole], g_at_zero: Complex64, theta: f64) -> Complex64 {
    let th = Complex64::new(theta, 0.0);
    poles
        .iter()
        .fold(g_at_zero, |acc, p| acc + p.residue * (1.0 / p.theta0 + 1.0 / (th - p.theta0)))
}

/// Single-mode form `C + Res / (theta - theta0)`.
pub fn single_mode(pole: &Pole, c: Complex64, theta: f64) -> Complex64 {
    c + pole.residue / (Complex64::new(theta, 0.0) - pole.theta0)
}

/// Least-squares circle through points of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    /// Largest radial deviation of any point from the fitted circle.
    pub residual: f64,
}

impl CircleFit {
    pub fn relative_residual(&self) -> f64 {
        self.residual / self.radius
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// Algebraic (Kasa) fit refined by Gauss-Newton on the geometric distance.
pub fn fit_circle(points: &[Complex64]) -> Option<CircleFit> {
    if points.len() < 3 {
        return None;
    }
    let mean = points.iter().sum::<Complex64>() / points.len() as f64;
    let scale = points.iter().map(|p| (p - mean).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let q = (p - mean) / scale;
            (q.re, q.im)
        })
        .collect();
    // x^2 + y^2 + D x + E y + F = 0
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for &(x, y) in &pts {
        let row = [x, y, 1.0];
        let rhs = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            b[i] += row[i] * rhs;
        }
    }
    let [d, e, f] = solve3(a, b)?;
    let (mut cx, mut cy) = (-d / 2.0, -e / 2.0);
    let mut r = (cx * cx + cy * cy - f).max(0.0).sqrt();
    for _ in 0..20 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for &(x, y) in &pts {
            let dist = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
            if dist == 0.0 {
                continue;
            }
            let res = dist - r;
            let jrow = [-(x - cx) / dist, -(y - cy) / dist, -1.0];
            for i in 0..3 {
                for j in 0..3 {
                    jtj[i][j] += jrow[i] * jrow[j];
                }
                jtr[i] -= jrow[i] * res;
            }
        }
        let Some(delta) = solve3(jtj, jtr) else { break };
        cx += delta[0];
        cy += delta[1];
        r += delta[2];
        if delta.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-15 {
            break;
        }
    }
    let residual = pts
        .iter()
        .map(|&(x, y)| (((x - cx).powi(2) + (y - cy).powi(2)).sqrt() - r).abs())
        .fold(0.0, f64::max);
    Some(CircleFit {
        center: mean + scale * Complex64::new(cx, cy),
        radius: scale * r,
        residual: scale * residual,
    })
}

/// Evaluate the single-mode form over `thetas` and fit a circle to it.
pub fn single_mode_circle(pole: &Pole, c: Complex64, thetas: &[f64]) -> Option<CircleFit> {
    let pts: Vec<Complex64> = thetas.iter().map(|&t| single_mode(pole, c, t)).collect();
    fit_circle(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stack::Layer;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_fit_exact_points() {
        let center = c(3.0, -2.0);
        let pts: Vec<Complex64> = (0..40).map(|k| center + Complex64::from_polar(0.7, 0.1 * k as f64)).collect();
        let fit = fit_circle(&pts).unwrap();
        assert!((fit.center - center).norm() < 1e-12);
        assert!((fit.radius - 0.7).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn mobius_image_is_circle() {
        let pole = Pole {
            theta0: c(2.2, -0.003),
            residue: c(0.4, -1.3),
            order_index: 1,
            contour_check_rel_err: 0.0,
            flagged: false,
        };
        let thetas: Vec<f64> = (0..401).map(|i| 2.17 + 0.00015 * i as f64).collect();
        let fit = single_mode_circle(&pole, c(5.0, 1.0), &thetas).unwrap();
        assert!(fit.residual < 1e-10 * fit.radius);
    }

    #[test]
    fn mittag_leffler_without_poles_is_constant() {
        assert_eq!(mittag_leffler(&[], c(1.0, 2.0), 3.0), c(1.0, 2.0));
    }

    #[test]
    fn synthetic_residue_by_contour() {
        // f(z) = 3i / (z - (2 - 0.01i)) + z^2
        let z0 = c(2.0, -0.01);
        let f = |z: Complex64| c(0.0, 3.0) / (z - z0) + z * z;
        let nodes = 64;
        let r = 0.001;
        let mut acc = c(0.0, 0.0);
        for k in 0..nodes {
            let off = Complex64::from_polar(r, 2.0 * PI * k as f64 / nodes as f64);
            acc += f(z0 + off) * off;
        }
        let res = acc / nodes as f64;
        assert!((res - c(0.0, 3.0)).norm() < 1e-10);
    }

    #[test]
    fn empty_cavity_has_no_poles() {
        let db = MaterialDb::builtin();
        let s = CavityStack::new(
            vec![Layer::new("vacuum", 40.0), Layer::new("vacuum", 1.0), Layer::new("vacuum", 40.0)],
            "vacuum",
            1,
        )
        .unwrap();
        let set = find_poles(&db, &s, 14.4, 1.0, 5.0).unwrap();
        assert!(set.poles.is_empty());
    }

    #[test]
    fn empty_window_rejected() {
        let db = MaterialDb::builtin();
        let s = CavityStack::new(vec![Layer::new("C", 40.0)], "Pt", 0).unwrap();
        assert!(matches!(find_poles(&db, &s, 14.4, 3.0, 3.0), Err(Error::EmptyWindow)));
    }

    #[test]
    fn json_report_fields() {
        let p = Pole {
            theta0: c(2.2, -0.003),
            residue: c(0.4, -1.3),
            order_index: 1,
            contour_check_rel_err: 1e-9,
            flagged: false,
        };
        let v: serde_json::Value = serde_json::from_str(&pole_report_json(&[p])).unwrap();
        let rec = &v[0];
        for key in ["re_theta0_mrad", "im_theta0_mrad", "re_residue", "im_residue", "order_index", "contour_check_rel_err"] {
            assert!(rec.get(key).is_some(), "{key}");
        }
    }
}
