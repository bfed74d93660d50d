//! Property tests of the forward model against independent formulations.

use num_complex::Complex64;
use proptest::prelude::*;

use xcavity::greens::evaluate;
use xcavity::spectra::{fano_params, visibility, FanoParams};
use xcavity::stack::layer_beta;
use xcavity::{two_level_params, CavityStack, Geometry, Layer, MaterialDb};

const MATERIALS: [&str; 8] = ["Pt", "Pd", "C", "Si", "B4C", "MgO", "diamond", "Fe-57"];

fn db() -> &'static MaterialDb {
    static DB: std::sync::OnceLock<MaterialDb> = std::sync::OnceLock::new();
    DB.get_or_init(MaterialDb::builtin)
}

fn layers(max_d: f64) -> impl Strategy<Value = Vec<Layer>> {
    prop::collection::vec((0..MATERIALS.len(), 0.3..max_d), 1..=7)
        .prop_map(|v| v.into_iter().map(|(m, d)| Layer::new(MATERIALS[m], d)).collect())
}

fn stacks(max_d: f64) -> impl Strategy<Value = CavityStack> {
    (layers(max_d), 0..MATERIALS.len(), any::<prop::sample::Index>(), 0.0..=1.0f64).prop_map(
        |(layers, sub, idx, z)| {
            let res = idx.index(layers.len());
            CavityStack::new(layers, MATERIALS[sub], res).unwrap().with_z_rel(z).unwrap()
        },
    )
}

fn geometries() -> impl Strategy<Value = Geometry> {
    (prop::sample::select(vec![12.4, 14.4, 23.9]), 0.3..12.0f64).prop_map(|(w, t)| Geometry::new(w, t).unwrap())
}

/// Scalar Green function of `u'' + beta(x)^2 u = -delta(x - z)` with outgoing
/// waves in vacuum above and the substrate below, from 2x2 transfer
/// matrices of `(u, u')`. Returns `(G(z, z), G(0, z))`.
fn transfer_matrix_green(beta: &[Complex64], d: &[f64], m: usize, z_in_layer: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let step = |s: [Complex64; 2], b: Complex64, h: f64| {
        let (c, sn) = ((b * h).cos(), (b * h).sin());
        [s[0] * c + s[1] * sn / b, -s[0] * b * sn + s[1] * c]
    };
    // From the surface down to the source, for unit upgoing amplitude in vacuum.
    let mut top = [Complex64::new(1.0, 0.0), -i * beta[0]];
    for j in 1..m {
        top = step(top, beta[j], d[j]);
    }
    top = step(top, beta[m], z_in_layer);
    // From the substrate up to the source, for unit downgoing amplitude.
    let last = beta.len() - 1;
    let mut bot = [Complex64::new(1.0, 0.0), i * beta[last]];
    for j in (m + 1..last).rev() {
        bot = step(bot, beta[j], -d[j]);
    }
    bot = step(bot, beta[m], -(d[m] - z_in_layer));
    // E * bot - C * top = (0, -1)
    let det = -bot[0] * top[1] + top[0] * bot[1];
    let c = -bot[0] / det;
    (c * top[0], c)
}

/// Stack with an isotope layer as the resonant layer, probed on resonance.
fn resonant_cases() -> impl Strategy<Value = (CavityStack, Geometry, &'static str)> {
    (stacks(150.0), prop::sample::select(vec!["Fe-57", "Sn-119", "Sc-45"]), 0.3..12.0f64).prop_map(|(mut s, iso, t)| {
        s.layers[s.resonant].material = iso.to_string();
        let w = db().isotope(iso).unwrap().omega_nuc;
        (s, Geometry::new(w, t).unwrap(), iso)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn beta_branch_is_passive(s in stacks(150.0), g in geometries()) {
        for b in layer_beta(db(), &s, &g).unwrap() {
            prop_assert!(b.im >= 0.0);
        }
    }

    #[test]
    fn passivity((s, g, name) in resonant_cases()) {
        let ev = evaluate(db(), &s, &g).unwrap();
        prop_assert!(ev.g_zz.im >= -1e-12);
        let iso = db().isotope(name).unwrap();
        let p = two_level_params(db(), &s, iso, &g).unwrap();
        prop_assert!(p.sr >= -1e-9, "sr = {}", p.sr);
        prop_assert!(p.fe >= 0.0);
        prop_assert!(ev.coeffs.r_el.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn green_matches_transfer_matrices(s in stacks(40.0), g in geometries()) {
        let ev = evaluate(db(), &s, &g).unwrap();
        let beta = layer_beta(db(), &s, &g).unwrap();
        let mut d = vec![0.0];
        d.extend(s.layers.iter().map(|l| l.d_nm));
        d.push(0.0);
        let (gzz, g0z) = transfer_matrix_green(&beta, &d, s.resonant + 1, s.z_rel * s.resonant_layer().d_nm);
        prop_assert!((ev.g_zz - gzz).norm() <= 1e-8 * gzz.norm(), "{} vs {}", ev.g_zz, gzz);
        // The library obtains G(0, z) from the incident field by reciprocity.
        prop_assert!((ev.g_0z - g0z).norm() <= 1e-8 * g0z.norm(), "{} vs {}", ev.g_0z, g0z);
    }

    #[test]
    fn free_standing_stack_is_mirror_symmetric(layers in layers(150.0), idx in any::<prop::sample::Index>(),
                                               z in 0.0..=1.0f64, g in geometries()) {
        let res = idx.index(layers.len());
        let s = CavityStack::new(layers, "vacuum", res).unwrap().with_z_rel(z).unwrap();
        let a = evaluate(db(), &s, &g).unwrap().g_zz;
        let b = evaluate(db(), &s.mirrored(), &g).unwrap().g_zz;
        prop_assert!((a - b).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn visibility_ignores_global_phase(r in 0.02..1.0f64, pr in -3.0..3.0f64, a in 0.1..50.0f64,
                                       pa in -3.0..3.0f64, hw in 0.5..80.0f64, rot in -3.0..3.0f64) {
        let fp = FanoParams::new(Complex64::from_polar(r, pr), Complex64::from_polar(a, pa), 0.0, hw);
        let u = Complex64::from_polar(1.0, rot);
        let rotated = FanoParams::new(fp.r_el * u, fp.a_weight * u, 3.0, hw);
        let (v1, v2) = (visibility(&fp), visibility(&rotated));
        prop_assert!((v1 - v2).abs() <= 1e-10 * v1.max(1.0));
    }

    #[test]
    fn fano_line_has_the_cavity_width((s, g, name) in resonant_cases()) {
        let iso = db().isotope(name).unwrap();
        let p = two_level_params(db(), &s, iso, &g).unwrap();
        let fp = fano_params(db(), &s, iso, &g).unwrap();
        prop_assert!(fp.hwhm >= 0.5 - 1e-9);
        prop_assert!((fp.hwhm - 0.5 * (1.0 + p.sr)).abs() <= 1e-9 * fp.hwhm);
        prop_assert!((fp.center - p.cls).abs() <= 1e-9 * p.cls.abs().max(1.0));
    }
}

#[test]
fn symmetric_cavity_is_mirror_invariant() {
    let s = CavityStack::new(
        vec![
            Layer::new("Pt", 30.0),
            Layer::new("C", 46.0),
            Layer::new("Fe-57", 0.574),
            Layer::new("C", 46.0),
            Layer::new("Pt", 30.0),
        ],
        "vacuum",
        2,
    )
    .unwrap();
    for k in 0..50 {
        let g = Geometry::new(14.4, 1.0 + 0.1 * k as f64).unwrap();
        let a = evaluate(db(), &s, &g).unwrap();
        let b = evaluate(db(), &s.mirrored(), &g).unwrap();
        assert!((a.g_zz - b.g_zz).norm() <= 1e-10 * a.g_zz.norm());
        assert!((a.coeffs.r_up - a.coeffs.r_down).norm() <= 1e-10);
    }
}
