//! Composite Gauss-Legendre quadrature with a node-doubling error estimate.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Composite rule: `points` Gauss-Legendre nodes on each of `panels` equal
/// subintervals. The defaults integrate smooth integrands on curve-length
/// scales to near machine precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub points: usize,
    pub panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            points: 32,
            panels: 8,
        }
    }
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the rule by Newton iteration on the Legendre polynomial, seeded
    /// with the Chebyshev-based root estimate.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> Result<f64>>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x)?;
            if !v.is_finite() {
                return Err(Error::QuadratureFailure {
                    context: format!("non-finite integrand at {}", mid + half * x),
                });
            }
            acc += w * v;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate over [a, b] with the composite rule.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(
    spec: QuadratureSpec,
    a: f64,
    b: f64,
    mut f: F,
) -> Result<f64> {
    let rule = GaussLegendre::new(spec.points);
    let h = (b - a) / spec.panels as f64;
    let mut acc = 0.0;
    for i in 0..spec.panels {
        let lo = a + i as f64 * h;
        acc += rule.integrate(lo, lo + h, &mut f)?;
    }
    Ok(acc)
}

/// Integrate and estimate the error by doubling the node count per panel.
/// Returns the refined value together with `|refined - base|`.
pub fn integrate_with_error<F: FnMut(f64) -> Result<f64>>(
    spec: QuadratureSpec,
    a: f64,
    b: f64,
    mut f: F,
) -> Result<(f64, f64)> {
    let base = integrate(spec, a, b, &mut f)?;
    let doubled = integrate(
        QuadratureSpec {
            points: spec.points * 2,
            panels: spec.panels,
        },
        a,
        b,
        &mut f,
    )?;
    Ok((doubled, (doubled - base).abs()))
}
