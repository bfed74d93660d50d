//! Bounded Nelder-Mead simplex descent with Latin-hypercube multistart.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DesignPoint, Landscape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub seed: u64,
    /// Evaluation budget per restart.
    pub max_evals: usize,
    /// Stop when every vertex is within this distance of the best one
    /// (unit-cube coordinates).
    pub tol: f64,
    /// Edge length of the initial simplex (unit-cube coordinates).
    pub initial_step: f64,
    /// Draw `pilot_factor * restarts` Latin-hypercube points and start from
    /// the best `restarts` of them; 1 disables screening.
    pub pilot_factor: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            max_evals: 2000,
            tol: 1e-6,
            initial_step: 0.1,
            pilot_factor: 64,
        }
    }
}

/// Outcome of a single simplex descent.
#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

fn project(u: &mut [f64]) {
    for v in u.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Minimize `f` over the unit cube starting at `start`. Trial points are
/// projected onto the cube; non-finite values count as `+inf`. Projection can
/// flatten the simplex against a face, so a converged simplex is rebuilt
/// around its best vertex until that vertex stops improving.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: &mut F, start: &[f64], settings: &OptimizerSettings) -> NmResult {
    let mut evals = 0usize;
    let mut call = |u: &[f64]| {
        evals += 1;
        let v = f(u);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut x = start.to_vec();
    project(&mut x);
    let mut fx = call(&x);
    let mut used = 1;
    let mut converged = false;
    while used < settings.max_evals {
        let pass = nm_pass(&mut call, &x, fx, settings, settings.max_evals - used);
        used += pass.evals;
        let moved = pass.x.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let improved = pass.f < fx;
        if improved {
            x = pass.x;
            fx = pass.f;
        }
        if !pass.converged {
            break;
        }
        if !improved || moved < settings.tol {
            converged = true;
            break;
        }
    }
    NmResult { x, f: fx, evals, converged }
}

/// One simplex descent from `x0` (value `f0`) with at most `budget` calls.
fn nm_pass<F: FnMut(&[f64]) -> f64>(call: &mut F, x0: &[f64], f0: f64, settings: &OptimizerSettings, budget: usize) -> NmResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |u: &[f64], evals: &mut usize| {
        *evals += 1;
        call(u)
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    let mut fs = vec![f0];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = if v[i] + settings.initial_step <= 1.0 {
            v[i] + settings.initial_step
        } else {
            v[i] - settings.initial_step
        };
        fs.push(eval(&v, &mut evals));
        simplex.push(v);
    }
    // Dimension-adaptive coefficients (Gao and Han); the standard set for n = 1.
    let (chi, gamma, sigma) = if n >= 2 {
        let nf = n as f64;
        (1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (2.0, 0.5, 0.5)
    };
    let mut converged = false;
    let point = |c: &[f64], toward: &[f64], t: f64| -> Vec<f64> {
        let mut p: Vec<f64> = c.iter().zip(toward).map(|(ci, wi)| ci + t * (wi - ci)).collect();
        project(&mut p);
        p
    };
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if diameter < settings.tol {
            converged = true;
            break;
        }
        if evals >= budget {
            break;
        }

        let mut c = vec![0.0; n];
        for v in &simplex[..n] {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let xr = point(&c, &worst, -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < fs[0] {
            let xe = point(&c, &worst, -chi);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                fs[n] = fe;
            } else {
                simplex[n] = xr;
                fs[n] = fr;
            }
            continue;
        }
        if fr < fs[n - 1] {
            simplex[n] = xr;
            fs[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < fs[n] {
            let xc = point(&c, &xr, gamma);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = point(&c, &worst, gamma);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(fs[n]) {
            simplex[n] = xc;
            fs[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = point(&best, &simplex[i], sigma);
            fs[i] = eval(&simplex[i], &mut evals);
        }
    }
    NmResult {
        x: simplex[0].clone(),
        f: fs[0],
        evals,
        converged,
    }
}

/// `count` stratified samples of the unit cube in `dim` dimensions.
pub fn latin_hypercube(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]; count];
    for d in 0..dim {
        let mut perm: Vec<usize> = (0..count).collect();
        perm.shuffle(rng);
        for (i, p) in perm.into_iter().enumerate() {
            out[i][d] = (p as f64 + rng.gen::<f64>()) / count as f64;
        }
    }
    out
}

pub(crate) fn to_box(bounds: &[(f64, f64)], u: &[f64]) -> Vec<f64> {
    bounds
        .iter()
        .zip(u)
        .map(|(&(lo, hi), &t)| (lo + t * (hi - lo)).clamp(lo, hi))
        .collect()
}

pub(crate) fn to_unit(bounds: &[(f64, f64)], x: &[f64]) -> Vec<f64> {
    bounds
        .iter()
        .zip(x)
        .map(|(&(lo, hi), &v)| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best: DesignPoint,
    pub cost: f64,
    pub evaluations: usize,
}

fn cost_of<L: Landscape + ?Sized, C: Fn(&DesignPoint) -> f64>(land: &L, bounds: &[(f64, f64)], cost: &C, u: &[f64]) -> (f64, DesignPoint) {
    let x = to_box(bounds, u);
    match land.evaluate(&x) {
        Ok(p) if p.feasible => {
            let c = cost(&p);
            (if c.is_nan() { f64::INFINITY } else { c }, p)
        }
        Ok(p) => (f64::INFINITY, p),
        Err(_) => (f64::INFINITY, DesignPoint::infeasible(x)),
    }
}

/// Multistart minimization of `cost` over the landscape.
pub fn optimize<L, C>(land: &L, cost: &C, settings: &OptimizerSettings) -> Result<OptimizeResult>
where
    L: Landscape + ?Sized,
    C: Fn(&DesignPoint) -> f64 + Sync,
{
    optimize_with_starts(land, cost, settings, &[])
}

/// Like [`optimize`], with extra starting points given in the variables'
/// units and run ahead of the sampled ones.
pub fn optimize_with_starts<L, C>(land: &L, cost: &C, settings: &OptimizerSettings, starts: &[Vec<f64>]) -> Result<OptimizeResult>
where
    L: Landscape + ?Sized,
    C: Fn(&DesignPoint) -> f64 + Sync,
{
    optimize_observed::<L, C, ()>(land, cost, settings, starts, &|_, _| {}).map(|(r, _)| r)
}

pub type ObserveFn<'a, T> = dyn Fn(&mut T, &DesignPoint) + Sync + 'a;

/// Core multistart driver; `observe` sees every evaluated point of a restart.
pub fn optimize_observed<L, C, T>(
    land: &L,
    cost: &C,
    settings: &OptimizerSettings,
    starts: &[Vec<f64>],
    observe: &ObserveFn<'_, T>,
) -> Result<(OptimizeResult, Vec<T>)>
where
    L: Landscape + ?Sized,
    C: Fn(&DesignPoint) -> f64 + Sync,
    T: Default + Send,
{
    if settings.restarts == 0 && starts.is_empty() {
        return Err(Error::InvalidSpace("at least one restart is required".into()));
    }
    let bounds = land.bounds();
    let dim = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let pilot = settings.pilot_factor.max(1) * settings.restarts;
    let mut samples = latin_hypercube(pilot, dim, &mut rng);
    if settings.pilot_factor > 1 && settings.restarts > 0 {
        let scored: Vec<f64> = samples.par_iter().map(|u| cost_of(land, &bounds, cost, u).0).collect();
        let mut idx: Vec<usize> = (0..samples.len()).collect();
        idx.sort_by(|&a, &b| scored[a].total_cmp(&scored[b]).then(a.cmp(&b)));
        samples = idx[..settings.restarts].iter().map(|&i| samples[i].clone()).collect();
    }
    let mut all_starts: Vec<Vec<f64>> = starts.iter().map(|x| to_unit(&bounds, x)).collect();
    all_starts.extend(samples);

    let runs: Vec<(NmResult, DesignPoint, T)> = all_starts
        .par_iter()
        .map(|u0| {
            let mut state = T::default();
            let mut best: Option<(f64, DesignPoint)> = None;
            let mut f = |u: &[f64]| {
                let (c, p) = cost_of(land, &bounds, cost, u);
                if p.feasible {
                    observe(&mut state, &p);
                }
                if best.as_ref().map_or(true, |(b, _)| c < *b) {
                    best = Some((c, p));
                }
                c
            };
            let res = nelder_mead(&mut f, u0, settings);
            let point = best.map(|(_, p)| p).unwrap_or_else(|| DesignPoint::infeasible(to_box(&bounds, &res.x)));
            (res, point, state)
        })
        .collect();

    let evaluations = runs.iter().map(|(r, _, _)| r.evals).sum();
    let mut winner: Option<(f64, DesignPoint)> = None;
    let mut states = Vec::with_capacity(runs.len());
    for (res, point, state) in runs {
        if point.feasible && res.f.is_finite() && winner.as_ref().map_or(true, |(b, _)| res.f < *b) {
            winner = Some((res.f, point));
        }
        states.push(state);
    }
    let (cost, best) = winner.ok_or(Error::AllInfeasible)?;
    Ok((OptimizeResult { best, cost, evaluations }, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{ObjectiveKind, QuadraticStub};

    #[test]
    fn nelder_mead_quadratic() {
        let mut f = |u: &[f64]| (u[0] - 0.3).powi(2) + 2.0 * (u[1] - 0.7).powi(2) + 0.5 * (u[2] - 0.1).powi(2);
        let s = OptimizerSettings::default();
        let r = nelder_mead(&mut f, &[0.9, 0.1, 0.5], &s);
        assert!(r.converged);
        assert!((r.x[0] - 0.3).abs() < 1e-5 && (r.x[1] - 0.7).abs() < 1e-5 && (r.x[2] - 0.1).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_respects_bounds() {
        let mut f = |u: &[f64]| u[0] + (u[1] - 0.5).powi(2);
        let r = nelder_mead(&mut f, &[0.8, 0.2], &OptimizerSettings::default());
        assert_eq!(r.x[0], 0.0);
        assert!((r.x[1] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn latin_hypercube_is_stratified() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = latin_hypercube(50, 3, &mut rng);
        for d in 0..3 {
            let mut bins: Vec<usize> = pts.iter().map(|p| (p[d] * 50.0) as usize).collect();
            bins.sort();
            assert_eq!(bins, (0..50).collect::<Vec<_>>());
        }
    }

    #[test]
    fn multistart_recovers_quadratic_minimum() {
        let stub = QuadraticStub::new(vec![(-2.0, 3.0), (10.0, 20.0), (0.0, 1.0)], vec![1.234, 17.5, 0.05]);
        let s = OptimizerSettings {
            restarts: 4,
            seed: 11,
            ..Default::default()
        };
        let r = optimize(&stub, &|p: &DesignPoint| p.objectives.get(ObjectiveKind::Cls), &s).unwrap();
        for (a, b) in r.best.x.iter().zip(&stub.minimum) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let stub = QuadraticStub::new(vec![(-2.0, 3.0), (10.0, 20.0)], vec![1.0, 12.0]);
        let s = OptimizerSettings {
            restarts: 6,
            seed: 5,
            ..Default::default()
        };
        let cost = |p: &DesignPoint| p.objectives.cls;
        let a = optimize(&stub, &cost, &s).unwrap();
        let b = optimize(&stub, &cost, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_infeasible_is_an_error() {
        struct Dead;
        impl Landscape for Dead {
            fn names(&self) -> Vec<String> {
                vec!["a".into()]
            }
            fn bounds(&self) -> Vec<(f64, f64)> {
                vec![(0.0, 1.0)]
            }
            fn evaluate(&self, x: &[f64]) -> Result<DesignPoint> {
                Ok(DesignPoint::infeasible(x.to_vec()))
            }
        }
        let s = OptimizerSettings {
            restarts: 2,
            max_evals: 50,
            ..Default::default()
        };
        assert!(matches!(optimize(&Dead, &|_: &DesignPoint| 0.0, &s), Err(Error::AllInfeasible)));
    }
}
