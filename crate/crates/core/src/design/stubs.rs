//! Analytic landscapes with known objective sets, used to check the
//! optimizer and the boundary tracers independently of the physics.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{check_bounds, DesignPoint, Landscape, Objectives};
use crate::error::Result;

fn point(x: &[f64], cls: f64, sr: f64) -> DesignPoint {
    DesignPoint {
        x: x.to_vec(),
        objectives: Objectives { cls, sr, vis: 0.0, fe: 0.0 },
        feasible: true,
    }
}

fn names2() -> Vec<String> {
    vec!["u".into(), "v".into()]
}

/// Square-to-disk map; the square's edges go to the unit circle.
fn square_to_disk(u: f64, v: f64) -> (f64, f64) {
    (u * (1.0 - 0.5 * v * v).sqrt(), v * (1.0 - 0.5 * u * u).sqrt())
}

/// `(cls, sr) = (2u - 1, 2v - 1)` on the unit square.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquareStub;

impl Landscape for SquareStub {
    fn names(&self) -> Vec<String> {
        names2()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); 2]
    }

    fn evaluate(&self, x: &[f64]) -> Result<DesignPoint> {
        check_bounds(&self.names(), &self.bounds(), x)?;
        Ok(point(x, 2.0 * x[0] - 1.0, 2.0 * x[1] - 1.0))
    }
}

/// Filled ellipse with semi-axes `a` (cls) and `b` (sr).
#[derive(Debug, Clone, Copy)]
pub struct EllipseStub {
    pub a: f64,
    pub b: f64,
}

impl Default for EllipseStub {
    fn default() -> Self {
        Self { a: 2.0, b: 1.0 }
    }
}

impl EllipseStub {
    /// Boundary point supporting direction `phi`.
    pub fn support(&self, phi: f64) -> (f64, f64) {
        let (c, s) = (phi.cos(), phi.sin());
        let h = (self.a * self.a * c * c + self.b * self.b * s * s).sqrt();
        (self.a * self.a * c / h, self.b * self.b * s / h)
    }
}

impl Landscape for EllipseStub {
    fn names(&self) -> Vec<String> {
        names2()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0); 2]
    }

    fn evaluate(&self, x: &[f64]) -> Result<DesignPoint> {
        check_bounds(&self.names(), &self.bounds(), x)?;
        let (p, q) = square_to_disk(x[0], x[1]);
        Ok(point(x, self.a * p, self.b * q))
    }
}

/// Star-convex set `{r rho(phi) (cos phi, sin phi) : r <= 1}` whose radius
/// has a Gaussian dent of depth `depth` and width `width` around `phi = pi/2`.
#[derive(Debug, Clone, Copy)]
pub struct CrescentStub {
    pub depth: f64,
    pub width: f64,
}

impl Default for CrescentStub {
    fn default() -> Self {
        Self { depth: 0.3, width: 0.4 }
    }
}

impl CrescentStub {
    pub fn radius(&self, phi: f64) -> f64 {
        let t = (phi - FRAC_PI_2 + PI).rem_euclid(2.0 * PI) - PI;
        1.0 - self.depth * (-t * t / (2.0 * self.width * self.width)).exp()
    }

    /// Distance of `(x, y)` from the boundary, measured along the ray
    /// through the origin.
    pub fn radial_gap(&self, x: f64, y: f64) -> f64 {
        let phi = y.atan2(x);
        (x.hypot(y) - self.radius(phi)).abs()
    }
}

impl Landscape for CrescentStub {
    fn names(&self) -> Vec<String> {
        names2()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0); 2]
    }

    fn evaluate(&self, x: &[f64]) -> Result<DesignPoint> {
        check_bounds(&self.names(), &self.bounds(), x)?;
        let (p, q) = square_to_disk(x[0], x[1]);
        let rho = self.radius(q.atan2(p));
        Ok(point(x, rho * p, rho * q))
    }
}

/// Convex quadratic bowl with a known minimizer: `cls` is the bowl value,
/// `sr = -cls`.
#[derive(Debug, Clone)]
pub struct QuadraticStub {
    pub bounds: Vec<(f64, f64)>,
    pub minimum: Vec<f64>,
}

impl QuadraticStub {
    pub fn new(bounds: Vec<(f64, f64)>, minimum: Vec<f64>) -> Self {
        assert_eq!(bounds.len(), minimum.len());
        Self { bounds, minimum }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.bounds
            .iter()
            .zip(&self.minimum)
            .zip(x)
            .enumerate()
            .map(|(i, ((&(lo, hi), &m), &v))| (i + 1) as f64 * ((v - m) / (hi - lo)).powi(2))
            .sum()
    }
}

impl Landscape for QuadraticStub {
    fn names(&self) -> Vec<String> {
        (0..self.bounds.len()).map(|i| format!("x{i}")).collect()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }

    fn evaluate(&self, x: &[f64]) -> Result<DesignPoint> {
        check_bounds(&self.names(), &self.bounds, x)?;
        let c = self.value(x);
        Ok(point(x, c, -c))
    }
}
