//! Finite-difference derivative estimates with Richardson extrapolation.
//!
//! These routines are the independent-oracle side of the crate: they must not
//! share any machinery with the jet-based evaluators they are used to check,
//! so everything here works on plain closures returning function values.

use crate::error::{Error, Result};

/// Result of an extrapolated derivative estimate.
#[derive(Debug, Clone, Copy)]
pub struct FdEstimate {
    pub value: f64,
    /// Magnitude of the last Richardson correction; a convergence diagnostic.
    pub last_correction: f64,
    pub converged: bool,
}

/// First derivative at `x` from 5-point central stencils at successively
/// halved steps, combined in a Richardson table.
///
/// The 5-point stencil `(f(x-h) - 8 f(x-h/2) + 8 f(x+h/2) - f(x+h)) / (6h)`
/// is fourth order; each halving gains two more orders in the table. With
/// `levels = 3` this costs eight function evaluations.
pub fn central_derivative<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    x: f64,
    h0: f64,
    levels: usize,
) -> Result<FdEstimate> {
    assert!(h0 > 0.0 && levels >= 1);
    // stencil values at steps h0 / 2^i; function evaluations shared between
    // neighbouring levels
    let mut values = Vec::with_capacity(2 * levels + 2);
    let mut offsets = Vec::new();
    let mut h = h0;
    for _ in 0..=levels {
        offsets.push(h);
        h *= 0.5;
    }
    for &o in &offsets {
        values.push((f(x + o)?, f(x - o)?));
    }
    let stencil = |i: usize| -> f64 {
        let (fp_h, fm_h) = values[i];
        let (fp_half, fm_half) = values[i + 1];
        let h = offsets[i];
        (fm_h - 8.0 * fm_half + 8.0 * fp_half - fp_h) / (6.0 * h)
    };
    let mut row: Vec<f64> = (0..levels).map(stencil).collect();
    // Richardson: the stencil error starts at h^4 and gains h^2 per column
    let mut last_correction = f64::INFINITY;
    let mut order = 4.0;
    while row.len() > 1 {
        let factor = 2f64.powf(order);
        let next: Vec<f64> = row
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        last_correction = (next.last().unwrap() - row.last().unwrap()).abs();
        row = next;
        order += 2.0;
    }
    let value = *row.last().unwrap();
    if !value.is_finite() {
        return Err(Error::FdNotConverged {
            last_correction: f64::NAN,
        });
    }
    let converged = last_correction.is_finite()
        && last_correction <= 1e-5 * 1.0_f64.max(value.abs());
    Ok(FdEstimate {
        value,
        last_correction,
        converged,
    })
}

/// Simple central first derivative, no extrapolation. Used where a single
/// low-order probe is wanted (e.g. frame ODE checks).
pub fn central_simple<F: FnMut(f64) -> Result<f64>>(mut f: F, x: f64, h: f64) -> Result<f64> {
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_exp() {
        let est = central_derivative(|x| Ok(x.exp()), 0.7, 0.1, 3).unwrap();
        assert!((est.value - 0.7f64.exp()).abs() < 1e-11);
        assert!(est.converged);
    }

    #[test]
    fn derivative_of_oscillatory() {
        let f = |x: f64| Ok((3.0 * x).sin() * x.exp());
        let exact = 3.0 * (3.0f64 * 0.4).cos() * 0.4f64.exp() + (3.0f64 * 0.4).sin() * 0.4f64.exp();
        let est = central_derivative(f, 0.4, 0.05, 3).unwrap();
        assert!((est.value - exact).abs() < 1e-10);
    }

    #[test]
    fn simple_central() {
        let d = central_simple(|x| Ok(x * x * x), 2.0, 1e-4).unwrap();
        assert!((d - 12.0).abs() < 1e-6);
    }
}
