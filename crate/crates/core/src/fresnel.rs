//! Interface Fresnel coefficients and multilayer recursions (s-polarization).
//!
//! Composite coefficients follow the slash notation of layered-media Green's
//! functions: `r_{i/j}` is the reflection seen from layer `i` of everything
//! between it and layer `j`, referenced at the interface adjacent to `i`;
//! `t_{i/j}` is the corresponding transmission into layer `j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::MaterialDb;
use crate::stack::{longitudinal, sin_squared, CavityStack, Geometry};
use crate::units::energy_to_wavenumber;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Single-interface amplitudes for a wave in layer `i` hitting layer `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceCoeffs {
    pub r: Complex64,
    pub t: Complex64,
}

/// `r = (b_i - b_j) / (b_i + b_j)`, `t = 2 b_i / (b_i + b_j)`.
pub fn fresnel(beta_i: Complex64, beta_j: Complex64) -> Result<InterfaceCoeffs> {
    let s = beta_i + beta_j;
    if s == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateInterface);
    }
    Ok(InterfaceCoeffs {
        r: (beta_i - beta_j) / s,
        t: 2.0 * beta_i / s,
    })
}

#[inline]
fn r_ij(bi: Complex64, bj: Complex64) -> Complex64 {
    (bi - bj) / (bi + bj)
}

#[inline]
fn t_ij(bi: Complex64, bj: Complex64) -> Complex64 {
    2.0 * bi / (bi + bj)
}

/// Index deviations `n - 1` and thicknesses of a stack at one photon energy.
/// Angles may be complex, which the pole search relies on.
#[derive(Debug, Clone)]
pub struct StackOptics {
    dn: Vec<Complex64>,
    d: Vec<f64>,
    m: usize,
    z: f64,
    k0: f64,
}

impl StackOptics {
    pub fn new(db: &MaterialDb, stack: &CavityStack, omega: f64) -> Result<Self> {
        stack.validate()?;
        let dn = stack.index_deviations(db, omega)?;
        Ok(Self::from_parts(dn, stack, omega))
    }

    /// Build from precomputed `n - 1` (vacuum, layers..., substrate).
    pub fn from_parts(dn: Vec<Complex64>, stack: &CavityStack, omega: f64) -> Self {
        let mut d = Vec::with_capacity(dn.len());
        d.push(0.0);
        d.extend(stack.layers.iter().map(|l| l.d_nm));
        d.push(0.0);
        Self {
            dn,
            d,
            m: stack.resonant + 1,
            z: stack.nuclear_depth(),
            k0: energy_to_wavenumber(omega),
        }
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn index_deviations(&self) -> &[Complex64] {
        &self.dn
    }

    pub(crate) fn profile(&self, theta_mrad: Complex64) -> Profile<'_> {
        let sin2 = sin_squared(theta_mrad);
        Profile {
            beta: self.dn.iter().map(|&d| longitudinal(self.k0, d, sin2)).collect(),
            d: &self.d,
            m: self.m,
            z: self.z,
        }
    }
}

/// Longitudinal wavevectors for one angle. Index 0 is vacuum, the last entry
/// the substrate.
#[derive(Debug, Clone)]
pub(crate) struct Profile<'a> {
    pub beta: Vec<Complex64>,
    pub d: &'a [f64],
    pub m: usize,
    pub z: f64,
}

impl Profile<'_> {
    #[inline]
    fn phase(&self, j: usize) -> Complex64 {
        (I * self.beta[j] * self.d[j]).exp()
    }

    #[inline]
    fn phase2(&self, j: usize) -> Complex64 {
        (2.0 * I * self.beta[j] * self.d[j]).exp()
    }

    fn substrate(&self) -> usize {
        self.beta.len() - 1
    }

    /// Reflection inside layer `j` at its lower interface, from everything below.
    pub fn reflection_below(&self, j: usize) -> Complex64 {
        let n = self.substrate();
        let mut r = r_ij(self.beta[n - 1], self.beta[n]);
        for k in (j..n - 1).rev() {
            let rk = r_ij(self.beta[k], self.beta[k + 1]);
            let e = r * self.phase2(k + 1);
            r = (rk + e) / (1.0 + rk * e);
        }
        r
    }

    /// Parratt recursion from the substrate to the surface.
    pub fn parratt(&self) -> Complex64 {
        self.reflection_below(0)
    }

    pub fn composite(&self) -> CompositeCoeffs {
        let m = self.m;
        let b = &self.beta;

        // r_{m/0} and t_{0/m}, built downwards from the surface
        let mut r_up = r_ij(b[1], b[0]);
        let mut t_in = t_ij(b[0], b[1]);
        for j in 1..m {
            let p2 = self.phase2(j);
            let down = r_ij(b[j], b[j + 1]);
            t_in = t_in * t_ij(b[j], b[j + 1]) * self.phase(j) / (1.0 - down * r_up * p2);
            let up = r_ij(b[j + 1], b[j]);
            r_up = (up + r_up * p2) / (1.0 + up * r_up * p2);
        }

        // r_{0/m} and t_{m/0}, with layer m taken as semi-infinite
        let mut q = vec![Complex64::new(0.0, 0.0); m];
        q[m - 1] = r_ij(b[m - 1], b[m]);
        for j in (0..m - 1).rev() {
            let rj = r_ij(b[j], b[j + 1]);
            let e = q[j + 1] * self.phase2(j + 1);
            q[j] = (rj + e) / (1.0 + rj * e);
        }
        let mut t_out = t_ij(b[m], b[m - 1]);
        for j in (1..m).rev() {
            let up = r_ij(b[j], b[j - 1]);
            t_out = t_out * self.phase(j) * t_ij(b[j], b[j - 1]) / (1.0 - up * q[j] * self.phase2(j));
        }
        let r_in = q[0];

        let r_down = self.reflection_below(m);
        let p2m = self.phase2(m);
        let r_el = (r_in + (t_in * t_out - r_in * r_up) * r_down * p2m) / (1.0 - r_up * r_down * p2m);

        CompositeCoeffs {
            r_up,
            r_down,
            t_in,
            t_out,
            r_in,
            r_el,
        }
    }
}

/// Composite coefficients around the resonant layer `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeCoeffs {
    /// `r_{m/0}`: reflection of the resonant layer toward the surface.
    pub r_up: Complex64,
    /// `r_{m/N}`: reflection toward the substrate.
    pub r_down: Complex64,
    /// `t_{0/m}`: vacuum to resonant layer.
    pub t_in: Complex64,
    /// `t_{m/0}`: resonant layer to vacuum.
    pub t_out: Complex64,
    /// `r_{0/m}`: surface reflection with the resonant layer semi-infinite.
    pub r_in: Complex64,
    /// Electronic reflectivity of the full stack.
    pub r_el: Complex64,
}

pub fn composite_coeffs(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<CompositeCoeffs> {
    geom.validate()?;
    let optics = StackOptics::new(db, stack, geom.omega)?;
    Ok(optics.profile(Complex64::new(geom.theta, 0.0)).composite())
}

/// Electronic reflectivity by Parratt's recursion.
pub fn parratt(db: &MaterialDb, stack: &CavityStack, geom: &Geometry) -> Result<Complex64> {
    geom.validate()?;
    let optics = StackOptics::new(db, stack, geom.omega)?;
    Ok(optics.profile(Complex64::new(geom.theta, 0.0)).parratt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stack::{layer_beta, Layer};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fresnel_index_matched() {
        let f = fresnel(c(0.3, 0.01), c(0.3, 0.01)).unwrap();
        assert_eq!(f.r, c(0.0, 0.0));
        assert_eq!(f.t, c(1.0, 0.0));
    }

    #[test]
    fn fresnel_total_reflection_edge() {
        let f = fresnel(c(0.3, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(f.r, c(1.0, 0.0));
        assert_eq!(f.t, c(2.0, 0.0));
    }

    #[test]
    fn fresnel_degenerate() {
        assert!(matches!(fresnel(c(0.3, 0.1), c(-0.3, -0.1)), Err(Error::DegenerateInterface)));
    }

    #[test]
    fn fresnel_continuity_identity() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let a = c(next() * 2.0, next());
            let b = c(next() * 2.0, next());
            let f = fresnel(a, b).unwrap();
            assert!((1.0 + f.r - f.t).norm() < 1e-15);
        }
    }

    fn db() -> MaterialDb {
        MaterialDb::builtin()
    }

    #[test]
    fn empty_cavity_is_transparent() {
        let s = CavityStack::new(
            vec![Layer::new("vacuum", 10.0), Layer::new("vacuum", 1.0), Layer::new("vacuum", 5.0)],
            "vacuum",
            1,
        )
        .unwrap();
        let g = Geometry::new(14.4, 3.0).unwrap();
        let b0 = layer_beta(&db(), &s, &g).unwrap()[0];
        let cc = composite_coeffs(&db(), &s, &g).unwrap();
        assert_eq!(cc.r_up, c(0.0, 0.0));
        assert_eq!(cc.r_down, c(0.0, 0.0));
        assert_eq!(cc.r_el, c(0.0, 0.0));
        // transmissions carry the propagation phase through the layers above
        let phase = (I * b0 * 10.0).exp();
        assert!((cc.t_in - phase).norm() < 1e-15);
        assert!((cc.t_out - phase).norm() < 1e-15);
        assert!((cc.t_in.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bare_substrate_is_single_interface() {
        let g = Geometry::new(14.4, 2.5).unwrap();
        // resonant layer of substrate material: a single vacuum/Si interface
        let s = CavityStack::new(vec![Layer::new("Si", 3.0)], "Si", 0).unwrap();
        let b = layer_beta(&db(), &s, &g).unwrap();
        let expected = fresnel(b[0], b[2]).unwrap().r;
        let cc = composite_coeffs(&db(), &s, &g).unwrap();
        assert_eq!(cc.r_el, expected);
        assert_eq!(parratt(&db(), &s, &g).unwrap(), expected);
        // vacuum spacer: same interface shifted by the round-trip phase
        let s = CavityStack::new(vec![Layer::new("vacuum", 1.0)], "Si", 0).unwrap();
        let shifted = expected * (2.0 * I * b[0] * 1.0).exp();
        assert!((composite_coeffs(&db(), &s, &g).unwrap().r_el - shifted).norm() < 1e-15);
        assert!((parratt(&db(), &s, &g).unwrap() - shifted).norm() < 1e-15);
    }

    #[test]
    fn lossless_slab_matches_airy_formula() {
        let mut mdb = db();
        mdb.insert_material(
            crate::materials::Material::new(
                "glass",
                vec![crate::materials::OpticalPoint {
                    energy_kev: 14.4,
                    delta: 4e-6,
                    beta: 0.0,
                }],
            )
            .unwrap(),
        );
        let d = 37.0;
        let s = CavityStack::new(vec![Layer::new("glass", d)], "vacuum", 0).unwrap();
        for theta in [3.5, 4.0, 6.0, 9.0] {
            let g = Geometry::new(14.4, theta).unwrap();
            let b = layer_beta(&mdb, &s, &g).unwrap();
            // Airy: |r|^2 = 4 R sin^2(phi) / ((1 - R)^2 + 4 R sin^2(phi)), phi = beta d
            let r = ((b[0] - b[1]) / (b[0] + b[1])).re;
            let rr = r * r;
            let phi = b[1].re * d;
            let airy = 4.0 * rr * phi.sin().powi(2) / ((1.0 - rr).powi(2) + 4.0 * rr * phi.sin().powi(2));
            let got = parratt(&mdb, &s, &g).unwrap().norm_sqr();
            assert!((got - airy).abs() < 1e-12, "theta {theta}: {got} vs {airy}");
        }
    }

    #[test]
    fn composite_and_parratt_agree_on_archetype() {
        let s = CavityStack::new(
            vec![
                Layer::new("Pt", 2.7),
                Layer::new("C", 45.7),
                Layer::new("Fe-57", 0.574),
                Layer::new("C", 46.1),
                Layer::new("Pt", 307.3),
            ],
            "Si",
            2,
        )
        .unwrap();
        for i in 0..50 {
            let g = Geometry::new(14.4, 1.0 + 0.1 * i as f64).unwrap();
            let a = composite_coeffs(&db(), &s, &g).unwrap().r_el;
            let b = parratt(&db(), &s, &g).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-3));
            assert!(b.norm() <= 1.0 + 1e-12);
        }
    }
}
