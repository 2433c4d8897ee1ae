//! Quintic interpolating splines.
//!
//! Curves given as control points are lifted to C^4 piecewise-quintic
//! polynomials so that jet evaluation can still supply the high-order
//! parameter derivatives the invariant pipeline consumes. Spline-lifted
//! curves remain "reduced accuracy": derivatives beyond the fourth are only
//! piecewise continuous.

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Piecewise quintic polynomial on the uniform knot grid `0, 1, ..., n-1`,
/// interpolating one scalar value per knot.
#[derive(Debug, Clone)]
pub struct QuinticSpline {
    /// Six monomial coefficients per interval, in the local variable
    /// `x = t - i` of interval `i`.
    segments: Vec<[f64; 6]>,
}

impl QuinticSpline {
    pub const MIN_POINTS: usize = 6;

    /// Interpolate `values[i]` at knot `i`. End conditions clamp the first
    /// and second derivatives to one-sided six-point estimates, which are
    /// exact for quintic data and keep the boundary intervals as accurate as
    /// the interior for smooth data.
    pub fn interpolate(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < Self::MIN_POINTS {
            return Err(Error::NodeCount {
                n,
                min: Self::MIN_POINTS,
            });
        }
        let segs = n - 1;
        let unknowns = 6 * segs;

        // Rows are assembled segment-major so the system is banded; the
        // solver below exploits that. Block for segment i (i < segs-1):
        // [interp left, interp right, C1..C4 continuity with segment i+1];
        // the first and last blocks carry the end-derivative rows instead.
        let mut sys = Banded::new(unknowns, 13);
        let mut row = 0;

        let d1_start = one_sided_d1(&values[..6]);
        let d2_start = one_sided_d2(&values[..6]);
        let tail: Vec<f64> = values[n - 6..].iter().rev().copied().collect();
        let d1_end = -one_sided_d1(&tail);
        let d2_end = one_sided_d2(&tail);

        sys.set(row, 1, 1.0);
        sys.rhs[row] = d1_start;
        row += 1;
        sys.set(row, 2, 2.0);
        sys.rhs[row] = d2_start;
        row += 1;

        for i in 0..segs {
            // interpolation at both ends of the interval (local x in [0, 1])
            sys.set(row, 6 * i, 1.0);
            sys.rhs[row] = values[i];
            row += 1;
            for k in 0..6 {
                sys.set(row, 6 * i + k, 1.0);
            }
            sys.rhs[row] = values[i + 1];
            row += 1;
            if i < segs - 1 {
                // C^1..C^4 continuity with the next segment
                for order in 1..=4usize {
                    for k in order..6 {
                        sys.set(row, 6 * i + k, falling_factorial(k, order));
                    }
                    sys.set(row, 6 * (i + 1) + order, -falling_factorial(order, order));
                    row += 1;
                }
            }
        }

        for k in 1..6 {
            sys.set(row, 6 * (segs - 1) + k, falling_factorial(k, 1));
        }
        sys.rhs[row] = d1_end;
        row += 1;
        for k in 2..6 {
            sys.set(row, 6 * (segs - 1) + k, falling_factorial(k, 2));
        }
        sys.rhs[row] = d2_end;
        row += 1;
        debug_assert_eq!(row, unknowns);

        let sol = sys.solve().ok_or(Error::ProjectionDiverged {
            context: "singular quintic spline system".into(),
        })?;
        let segments = (0..segs)
            .map(|i| {
                let mut c = [0.0; 6];
                c.copy_from_slice(&sol[6 * i..6 * i + 6]);
                c
            })
            .collect();
        Ok(Self { segments })
    }

    pub fn knot_count(&self) -> usize {
        self.segments.len() + 1
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let max = self.segments.len() as f64;
        // clamp to the outer segments; evaluation beyond the grid is the
        // polynomial extension of the end segment
        let i = if t < 0.0 {
            0
        } else if t >= max {
            self.segments.len() - 1
        } else {
            t.floor() as usize
        };
        (i, t - i as f64)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, x) = self.locate(t);
        self.segments[i].iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Evaluate at a jet-valued parameter via Horner on the local polynomial.
    pub fn eval_jet(&self, t: &Jet) -> Jet {
        let (i, x0) = self.locate(t.value());
        let local = t.clone().add_scalar(x0 - t.value());
        let mut acc = Jet::zero(t.order());
        for &c in self.segments[i].iter().rev() {
            acc = acc.mul(&local).add_scalar(c);
        }
        acc
    }
}

/// Band matrix with partial-pivoting Gaussian elimination. Each row stores
/// the window `[i - band, i + 2 band]`; row swaps during pivoting stay
/// inside the window because fill-in of banded elimination is bounded by
/// the combined bandwidth.
struct Banded {
    n: usize,
    band: usize,
    width: usize,
    /// Row-major windows: entry (i, j) lives at `data[i * width + (j - lo(i))]`.
    data: Vec<f64>,
    rhs: Vec<f64>,
}

impl Banded {
    fn new(n: usize, band: usize) -> Self {
        let width = 3 * band + 1;
        Self {
            n,
            band,
            width,
            data: vec![0.0; n * width],
            rhs: vec![0.0; n],
        }
    }

    fn lo(&self, i: usize) -> isize {
        i as isize - self.band as isize
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let off = j as isize - self.lo(i);
        debug_assert!(
            (0..self.width as isize).contains(&off),
            "entry ({i}, {j}) outside band"
        );
        self.data[i * self.width + off as usize] = v;
    }

    fn get(&self, i: usize, j: isize) -> f64 {
        let off = j - self.lo(i);
        if (0..self.width as isize).contains(&off) {
            self.data[i * self.width + off as usize]
        } else {
            0.0
        }
    }

    fn solve(mut self) -> Option<Vec<f64>> {
        let n = self.n;
        let band = self.band;
        let width = self.width;
        for k in 0..n {
            // pivot among the rows that can hold column k
            let last = (k + band).min(n - 1);
            let mut pivot = k;
            let mut best = self.get(k, k as isize).abs();
            for r in (k + 1)..=last {
                let v = self.get(r, k as isize).abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best < 1e-300 {
                return None;
            }
            if pivot != k {
                self.swap_rows(k, pivot);
            }
            // eliminate on aligned row windows: column j sits at offset
            // j - r + band of row r, so the pivot row's window leads the
            // target row's by (r - k)
            let hi = (k + 2 * band).min(n - 1);
            let len = hi - k + 1;
            let diag = self.data[k * width + band];
            let rhs_k = self.rhs[k];
            for r in (k + 1)..=last {
                let shift = r - k;
                let factor = self.data[r * width + band - shift] / diag;
                if factor == 0.0 {
                    continue;
                }
                let (pivot_rows, target_rows) = self.data.split_at_mut(r * width);
                let pivot_row = &pivot_rows[k * width + band..k * width + band + len];
                let target_row = &mut target_rows[band - shift..band - shift + len];
                for (t, p) in target_row.iter_mut().zip(pivot_row) {
                    *t -= factor * p;
                }
                self.rhs[r] -= factor * rhs_k;
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let hi = (k + 2 * band).min(n - 1);
            let len = hi - k;
            let row = &self.data[k * width + band + 1..k * width + band + 1 + len];
            let mut acc = self.rhs[k];
            for (coeff, xv) in row.iter().zip(&x[k + 1..=hi]) {
                acc -= coeff * xv;
            }
            x[k] = acc / self.data[k * width + band];
        }
        Some(x)
    }

    fn put(&mut self, i: usize, j: usize, v: f64) {
        let off = j as isize - self.lo(i);
        if (0..self.width as isize).contains(&off) {
            self.data[i * self.width + off as usize] = v;
        } else {
            debug_assert!(v.abs() < 1e-12, "band overflow at ({i}, {j}): {v}");
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        // windows differ; swap via column-aligned copies
        let lo = self.lo(a).min(self.lo(b));
        let hi = (self.lo(a).max(self.lo(b))) + self.width as isize;
        for j in lo.max(0)..hi.min(self.n as isize) {
            let va = self.get(a, j);
            let vb = self.get(b, j);
            self.put(a, j as usize, vb);
            self.put(b, j as usize, va);
        }
        self.rhs.swap(a, b);
    }
}

fn falling_factorial(k: usize, order: usize) -> f64 {
    ((k - order + 1)..=k).map(|v| v as f64).product()
}

/// Six-point one-sided first derivative at the first sample (unit spacing).
fn one_sided_d1(v: &[f64]) -> f64 {
    -137.0 / 60.0 * v[0] + 5.0 * v[1] - 5.0 * v[2] + 10.0 / 3.0 * v[3] - 1.25 * v[4]
        + 0.2 * v[5]
}

/// Six-point one-sided second derivative at the first sample (unit spacing).
fn one_sided_d2(v: &[f64]) -> f64 {
    3.75 * v[0] - 77.0 / 6.0 * v[1] + 107.0 / 6.0 * v[2] - 13.0 * v[3] + 61.0 / 12.0 * v[4]
        - 5.0 / 6.0 * v[5]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quintic_polynomials_exactly() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) - 0.01 * t.powi(5);
        let values: Vec<f64> = (0..12).map(|i| f(i as f64)).collect();
        let sp = QuinticSpline::interpolate(&values).unwrap();
        for k in 0..110 {
            let t = k as f64 * 0.1;
            assert!(
                (sp.eval(t) - f(t)).abs() < 1e-8 * (1.0 + f(t).abs()),
                "t={t}: {} vs {}",
                sp.eval(t),
                f(t)
            );
        }
    }

    #[test]
    fn smooth_function_derivatives() {
        // dense sampling of sin keeps high derivatives meaningful
        let n = 40;
        let scale = 0.2; // knot spacing corresponds to parameter step 0.2
        let values: Vec<f64> = (0..n).map(|i| (i as f64 * scale).sin()).collect();
        let sp = QuinticSpline::interpolate(&values).unwrap();
        // interior point: t = 17.3 knots -> s = 3.46
        let jet = sp.eval_jet(&Jet::variable(17.3, 3).unwrap());
        let s = 17.3 * scale;
        // chain rule: derivative w.r.t. knot index carries factor `scale`
        assert!((jet.value() - s.sin()).abs() < 1e-8);
        assert!((jet.derivative(1).unwrap() - scale * s.cos()).abs() < 1e-6);
        assert!((jet.derivative(2).unwrap() + scale * scale * s.sin()).abs() < 1e-5);
        assert!((jet.derivative(3).unwrap() + scale.powi(3) * s.cos()).abs() < 1e-4);
    }

    #[test]
    fn continuity_at_knots() {
        let values: Vec<f64> = (0..14)
            .map(|i| (0.37 * i as f64).sin() + 0.1 * (i as f64))
            .collect();
        let sp = QuinticSpline::interpolate(&values).unwrap();
        for knot in 1..13 {
            let t = knot as f64;
            let left = sp.eval_jet(&Jet::variable(t - 1e-9, 4).unwrap());
            let right = sp.eval_jet(&Jet::variable(t + 1e-9, 4).unwrap());
            for k in 0..=4 {
                let a = left.derivative(k).unwrap();
                let b = right.derivative(k).unwrap();
                assert!(
                    (a - b).abs() < 1e-5 * (1.0 + a.abs()),
                    "order {k} jump at knot {knot}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            QuinticSpline::interpolate(&[0.0, 1.0, 2.0]),
            Err(Error::NodeCount { .. })
        ));
    }
}
