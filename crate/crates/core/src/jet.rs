//! Truncated Taylor (jet) arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar quantity with respect
//! to one parameter: `coeffs[k] = f^(k)(s0) / k!`. Propagating jets through
//! arithmetic and elementary functions yields exact derivatives of arbitrary
//! compositions up to the truncation order, so no downstream computation ever
//! needs nested finite differences.
//!
//! The divided (Taylor) convention keeps Cauchy products well-scaled at high
//! order. All fallible operations return explicit errors instead of letting
//! NaN propagate.

use crate::error::{Error, Result};

/// Default truncation order. Third derivatives of torsion combinations consume
/// curve derivatives up to order six; one spare order guards intermediates.
pub const DEFAULT_ORDER: usize = 7;

/// Truncated Taylor series of a scalar function of one parameter.
///
/// `coeffs[k]` is the k-th Taylor coefficient, i.e. the k-th derivative
/// divided by k!. The order of the jet is `coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// Jet of the identity function at `value`: coefficients `[value, 1, 0, ..]`.
    pub fn variable(value: f64, order: usize) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "jet variable",
            });
        }
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Ok(Self { coeffs })
    }

    /// Jet of a constant: all derivative coefficients are zero.
    pub fn constant(value: f64, order: usize) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                context: "jet constant",
            });
        }
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Ok(Self { coeffs })
    }

    /// Build a jet directly from Taylor coefficients.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                context: "jet coefficients",
            });
        }
        Ok(Self { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The constant term (the function value at the expansion point).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The k-th derivative value, `k! * coeffs[k]`.
    pub fn derivative(&self, k: usize) -> Result<f64> {
        if k > self.order() {
            return Err(Error::DerivativeOutOfRange {
                index: k,
                order: self.order(),
            });
        }
        Ok(factorial(k) * self.coeffs[k])
    }

    fn assert_same_order(&self, rhs: &Self) {
        assert_eq!(
            self.order(),
            rhs.order(),
            "jet order mismatch: {} vs {}",
            self.order(),
            rhs.order()
        );
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.assert_same_order(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Self { coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.assert_same_order(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Self { coeffs }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| factor * a).collect(),
        }
    }

    pub fn add_scalar(&self, value: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Self) -> Self {
        self.assert_same_order(rhs);
        let n = self.coeffs.len();
        let mut coeffs = vec![0.0; n];
        for k in 0..n {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coeffs[j] * rhs.coeffs[k - j];
            }
            coeffs[k] = acc;
        }
        Self { coeffs }
    }

    /// Recursive division: solves `self = rhs * out` coefficient by coefficient.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        self.assert_same_order(rhs);
        if rhs.coeffs[0] == 0.0 {
            return Err(Error::SingularDivision);
        }
        let n = self.coeffs.len();
        let mut coeffs = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * coeffs[k - j];
            }
            coeffs[k] = acc / rhs.coeffs[0];
        }
        Ok(Self { coeffs })
    }

    pub fn recip(&self) -> Result<Self> {
        Jet::constant(1.0, self.order()).unwrap().div(self)
    }

    /// Integer power by binary exponentiation; negative exponents divide.
    pub fn powi(&self, exponent: i32) -> Result<Self> {
        if exponent < 0 {
            return self.recip()?.powi(-exponent);
        }
        let mut result = Jet::constant(1.0, self.order()).unwrap();
        let mut base = self.clone();
        let mut e = exponent as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Standard jet recurrence for exp.
    pub fn exp(&self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (j as f64) * self.coeffs[j] * out[k - j];
            }
            out[k] = acc / k as f64;
        }
        Self { coeffs: out }
    }

    /// Natural logarithm; requires a positive constant term.
    pub fn ln(&self) -> Result<Self> {
        if self.coeffs[0] <= 0.0 {
            return Err(Error::ElementaryDomain {
                function: "log",
                value: self.coeffs[0],
            });
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].ln();
        for k in 1..n {
            let mut acc = (k as f64) * self.coeffs[k];
            for j in 1..k {
                acc -= (j as f64) * out[j] * self.coeffs[k - j];
            }
            out[k] = acc / (k as f64 * self.coeffs[0]);
        }
        Ok(Self { coeffs: out })
    }

    /// Square root; requires a strictly positive constant term.
    pub fn sqrt(&self) -> Result<Self> {
        if self.coeffs[0] <= 0.0 {
            return Err(Error::ElementaryDomain {
                function: "sqrt",
                value: self.coeffs[0],
            });
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].sqrt();
        for k in 1..n {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= out[j] * out[k - j];
            }
            out[k] = acc / (2.0 * out[0]);
        }
        Ok(Self { coeffs: out })
    }

    /// Sine and cosine propagated jointly through the coupled recurrence.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..n {
            let mut acc_s = 0.0;
            let mut acc_c = 0.0;
            for j in 1..=k {
                let ja = (j as f64) * self.coeffs[j];
                acc_s += ja * c[k - j];
                acc_c += ja * s[k - j];
            }
            s[k] = acc_s / k as f64;
            c[k] = -acc_c / k as f64;
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Arctangent via `atan(a)' (1 + a^2) = a'`.
    pub fn atan(&self) -> Self {
        let w = self.square().add_scalar(1.0);
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].atan();
        for k in 1..n {
            let mut acc = (k as f64) * self.coeffs[k];
            for i in 1..k {
                acc -= (i as f64) * out[i] * w.coeffs[k - i];
            }
            out[k] = acc / (k as f64 * w.coeffs[0]);
        }
        Self { coeffs: out }
    }

    /// Jet of the derivative; the order drops by one.
    pub fn differentiate(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|k| (k as f64) * self.coeffs[k])
            .collect();
        Self { coeffs }
    }

    /// Jet of the antiderivative with given constant term; the order grows by one.
    pub fn antiderivative(&self, constant: f64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(constant);
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (k + 1) as f64);
        }
        Self { coeffs }
    }

    /// Truncate (or zero-pad) to the given order.
    pub fn resize(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Self { coeffs }
    }

    /// Composition `self(g)` where `self` is expanded about `g`'s constant
    /// term. Evaluated by Horner's scheme on the shifted series `g - g0`.
    pub fn compose_shifted(&self, g: &Self) -> Self {
        let mut shifted = g.clone();
        shifted.coeffs[0] = 0.0;
        let mut result = Jet::zero(g.order());
        for &c in self.coeffs.iter().rev() {
            result = result.mul(&shifted).add_scalar(c);
        }
        result
    }

    /// Functional inverse of a series with nonvanishing linear coefficient.
    ///
    /// Given `f(h) = f0 + f1 h + ...` with `f1 != 0`, returns `g` with
    /// `g(0) = 0` and `f(f0-shifted g(k)) = f0 + k` through the truncation
    /// order. Solved coefficient by coefficient; each step cancels the lowest
    /// remaining term of `f(g) - (f0 + k)`.
    pub fn invert_series(&self) -> Result<Self> {
        let n = self.order();
        if n < 1 || self.coeffs[1] == 0.0 {
            return Err(Error::SingularDivision);
        }
        let mut g = Jet::zero(n);
        g.coeffs[1] = 1.0 / self.coeffs[1];
        for m in 2..=n {
            let composed = self.compose_shifted(&g);
            // residual coefficient at order m with g_m still zero
            let target = 0.0;
            let current = composed.coeffs[m] - target;
            g.coeffs[m] = -current / self.coeffs[1];
        }
        Ok(g)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// A 3-vector of jets: Euclidean components in E^3 sharing one expansion order.
#[derive(Debug, Clone, PartialEq)]
pub struct JetVec3 {
    pub x: Jet,
    pub y: Jet,
    pub z: Jet,
}

impl JetVec3 {
    pub fn new(x: Jet, y: Jet, z: Jet) -> Self {
        assert_eq!(x.order(), y.order());
        assert_eq!(y.order(), z.order());
        Self { x, y, z }
    }

    pub fn constant(x: f64, y: f64, z: f64, order: usize) -> Result<Self> {
        Ok(Self {
            x: Jet::constant(x, order)?,
            y: Jet::constant(y, order)?,
            z: Jet::constant(z, order)?,
        })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            x: Jet::zero(order),
            y: Jet::zero(order),
            z: Jet::zero(order),
        }
    }

    pub fn order(&self) -> usize {
        self.x.order()
    }

    /// Constant-term 3-vector.
    pub fn value(&self) -> [f64; 3] {
        [self.x.value(), self.y.value(), self.z.value()]
    }

    /// k-th derivative of each component.
    pub fn derivative(&self, k: usize) -> Result<[f64; 3]> {
        Ok([
            self.x.derivative(k)?,
            self.y.derivative(k)?,
            self.z.derivative(k)?,
        ])
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            x: self.x.add(&rhs.x),
            y: self.y.add(&rhs.y),
            z: self.z.add(&rhs.z),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            x: self.x.sub(&rhs.x),
            y: self.y.sub(&rhs.y),
            z: self.z.sub(&rhs.z),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            x: self.x.neg(),
            y: self.y.neg(),
            z: self.z.neg(),
        }
    }

    pub fn scale(&self, factor: &Jet) -> Self {
        Self {
            x: self.x.mul(factor),
            y: self.y.mul(factor),
            z: self.z.mul(factor),
        }
    }

    pub fn scale_scalar(&self, factor: f64) -> Self {
        Self {
            x: self.x.scale(factor),
            y: self.y.scale(factor),
            z: self.z.scale(factor),
        }
    }

    pub fn dot(&self, rhs: &Self) -> Jet {
        self.x
            .mul(&rhs.x)
            .add(&self.y.mul(&rhs.y))
            .add(&self.z.mul(&rhs.z))
    }

    pub fn cross(&self, rhs: &Self) -> Self {
        Self {
            x: self.y.mul(&rhs.z).sub(&self.z.mul(&rhs.y)),
            y: self.z.mul(&rhs.x).sub(&self.x.mul(&rhs.z)),
            z: self.x.mul(&rhs.y).sub(&self.y.mul(&rhs.x)),
        }
    }

    pub fn norm_squared(&self) -> Jet {
        self.dot(self)
    }

    pub fn norm(&self) -> Result<Jet> {
        self.norm_squared().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm()?;
        Ok(Self {
            x: self.x.div(&n)?,
            y: self.y.div(&n)?,
            z: self.z.div(&n)?,
        })
    }

    pub fn differentiate(&self) -> Self {
        Self {
            x: self.x.differentiate(),
            y: self.y.differentiate(),
            z: self.z.differentiate(),
        }
    }

    pub fn resize(&self, order: usize) -> Self {
        Self {
            x: self.x.resize(order),
            y: self.y.resize(order),
            z: self.z.resize(order),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
    }

    /// Dense polynomial helper used as an independent oracle: coefficient
    /// arithmetic and exact derivative evaluation, no jet code involved.
    #[derive(Clone, Debug)]
    struct Poly(Vec<f64>);

    impl Poly {
        fn eval(&self, x: f64) -> f64 {
            self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
        }

        fn derivative(&self) -> Poly {
            if self.0.len() <= 1 {
                return Poly(vec![0.0]);
            }
            Poly(
                self.0
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| (k as f64) * c)
                    .collect(),
            )
        }

        fn add(&self, rhs: &Poly) -> Poly {
            let n = self.0.len().max(rhs.0.len());
            let mut out = vec![0.0; n];
            for (i, c) in self.0.iter().enumerate() {
                out[i] += c;
            }
            for (i, c) in rhs.0.iter().enumerate() {
                out[i] += c;
            }
            Poly(out)
        }

        fn mul(&self, rhs: &Poly) -> Poly {
            let mut out = vec![0.0; self.0.len() + rhs.0.len() - 1];
            for (i, a) in self.0.iter().enumerate() {
                for (j, b) in rhs.0.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            Poly(out)
        }

        /// Taylor coefficients at x0 via repeated differentiation.
        fn taylor_at(&self, x0: f64, order: usize) -> Vec<f64> {
            let mut out = Vec::with_capacity(order + 1);
            let mut p = self.clone();
            let mut fact = 1.0;
            for k in 0..=order {
                if k > 0 {
                    fact *= k as f64;
                    p = p.derivative();
                }
                out.push(p.eval(x0) / fact);
            }
            out
        }

        fn jet_at(&self, x0: f64, order: usize) -> Jet {
            let x = Jet::variable(x0, order).unwrap();
            let mut acc = Jet::zero(order);
            for &c in self.0.iter().rev() {
                acc = acc.mul(&x).add_scalar(c);
            }
            acc
        }
    }

    #[test]
    fn variable_jet_shape() {
        let j = Jet::variable(2.0, 3).unwrap();
        assert_eq!(j.coeffs(), &[2.0, 1.0, 0.0, 0.0]);
        let j = Jet::variable(0.0, 0).unwrap();
        assert_eq!(j.coeffs(), &[0.0]);
        let j = Jet::variable(-1.5, 7).unwrap();
        assert_eq!(j.coeffs(), &[-1.5, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(Jet::variable(f64::NAN, 3).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let v = Jet::variable(3.0, 2).unwrap();
        assert_eq!(v.mul(&v).coeffs(), &[9.0, 6.0, 1.0]);

        let a = Jet::constant(1.0, 4).unwrap();
        let b = Jet::constant(2.0, 4).unwrap();
        assert_eq!(a.add(&b).coeffs(), &[3.0, 0.0, 0.0, 0.0, 0.0]);

        // 1/s about s = 2: value 1/2, first derivative -1/4, c2 = 1/8
        let one = Jet::constant(1.0, 2).unwrap();
        let s = Jet::variable(2.0, 2).unwrap();
        let q = one.div(&s).unwrap();
        assert!(rel_close(q.coeffs()[0], 0.5, 1e-14));
        assert!(rel_close(q.coeffs()[1], -0.25, 1e-14));
        assert!(rel_close(q.coeffs()[2], 0.125, 1e-14));

        let zero_const = Jet::from_coeffs(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            one.resize(1).div(&zero_const),
            Err(Error::SingularDivision)
        ));
    }

    #[test]
    fn elementary_examples() {
        let s = Jet::variable(0.0, 3).unwrap();
        let sin = s.sin();
        assert!(rel_close(sin.coeffs()[0], 0.0, 1e-15));
        assert!(rel_close(sin.coeffs()[1], 1.0, 1e-15));
        assert!(rel_close(sin.coeffs()[2], 0.0, 1e-15));
        assert!(rel_close(sin.coeffs()[3], -1.0 / 6.0, 1e-15));

        let e = Jet::constant(0.0, 4).unwrap().exp();
        assert_eq!(e.coeffs(), &[1.0, 0.0, 0.0, 0.0, 0.0]);

        // sqrt(s) about 4, order 2: [2, 1/4, -1/64]
        let r = Jet::variable(4.0, 2).unwrap().sqrt().unwrap();
        assert!(rel_close(r.coeffs()[0], 2.0, 1e-14));
        assert!(rel_close(r.coeffs()[1], 0.25, 1e-14));
        assert!(rel_close(r.coeffs()[2], -1.0 / 64.0, 1e-14));

        assert!(Jet::variable(-1.0, 2).unwrap().sqrt().is_err());
        assert!(Jet::variable(0.0, 2).unwrap().ln().is_err());
    }

    #[test]
    fn derivative_extraction() {
        let v = Jet::variable(3.0, 2).unwrap();
        let sq = v.mul(&v);
        assert_eq!(sq.derivative(2).unwrap(), 2.0);
        assert_eq!(sq.derivative(0).unwrap(), 9.0);
        assert!(sq.derivative(3).is_err());

        let sin = Jet::variable(0.0, 3).unwrap().sin();
        assert!(rel_close(sin.derivative(3).unwrap(), -1.0, 1e-14));
    }

    #[test]
    fn chain_rule_sin_of_square() {
        // Oracle: d^k/ds^k sin(s^2) = A_k(s) sin(s^2) + B_k(s) cos(s^2) with
        // A_{k+1} = A_k' - 2s B_k, B_{k+1} = B_k' + 2s A_k (exact polynomials).
        for &s0 in &[-1.0, 0.3, 2.0] {
            let mut a = Poly(vec![1.0]);
            let mut b = Poly(vec![0.0]);
            let two_s = Poly(vec![0.0, 2.0]);
            let jet = Jet::variable(s0, 7).unwrap().square().sin();
            let mut fact = 1.0;
            for k in 0..=7usize {
                if k > 0 {
                    fact *= k as f64;
                    let na = a.derivative().add(&two_s.mul(&b).mul(&Poly(vec![-1.0])));
                    let nb = b.derivative().add(&two_s.mul(&a));
                    a = na;
                    b = nb;
                }
                let exact =
                    (a.eval(s0) * (s0 * s0).sin() + b.eval(s0) * (s0 * s0).cos()) / fact;
                assert!(
                    rel_close(jet.coeffs()[k], exact, 1e-10),
                    "s0={s0} k={k}: jet {} vs exact {exact}",
                    jet.coeffs()[k]
                );
            }
        }
    }

    #[test]
    fn series_inversion_round_trip() {
        // f(h) = sin(1 + h) about 1; composing with the inverse g must give
        // the identity series [f0, 1, 0, ...].
        let f = Jet::variable(1.0, 7).unwrap().sin();
        let g = f.invert_series().unwrap();
        let fg = f.compose_shifted(&g);
        assert!(rel_close(fg.coeffs()[0], f.value(), 1e-12));
        assert!(rel_close(fg.coeffs()[1], 1.0, 1e-12));
        for k in 2..=7 {
            assert!(fg.coeffs()[k].abs() < 1e-12, "k={k}: {}", fg.coeffs()[k]);
        }
    }

    #[test]
    fn vec3_cross_orthogonality() {
        let order = 5;
        let u = Jet::variable(0.4, order).unwrap();
        let a = JetVec3::new(u.sin(), u.cos(), u.square());
        let b = JetVec3::new(u.clone(), u.exp(), Jet::constant(1.0, order).unwrap());
        let c = a.cross(&b);
        let d1 = c.dot(&a);
        let d2 = c.dot(&b);
        for k in 0..=order {
            assert!(d1.coeffs()[k].abs() < 1e-12);
            assert!(d2.coeffs()[k].abs() < 1e-12);
        }
    }

    fn small_poly() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0..2.0f64, 1..=8)
    }

    proptest! {
        #[test]
        fn polynomial_oracle_add_mul_div(p in small_poly(), q in small_poly(), x0 in -1.5..1.5f64) {
            let order = 7;
            let p = Poly(p);
            let mut q = Poly(q);
            // keep the divisor away from zero at the expansion point
            if q.eval(x0).abs() < 0.5 {
                q.0[0] += 1.0_f64.copysign(q.eval(x0) + 1e-9);
            }
            let jp = p.jet_at(x0, order);
            let jq = q.jet_at(x0, order);

            let sum_oracle = p.add(&q).taylor_at(x0, order);
            let sum_jet = jp.add(&jq);
            for k in 0..=order {
                prop_assert!(rel_close(sum_jet.coeffs()[k], sum_oracle[k], 1e-12));
            }

            let prod_oracle = p.mul(&q).taylor_at(x0, order);
            let prod_jet = jp.mul(&jq);
            for k in 0..=order {
                prop_assert!(rel_close(prod_jet.coeffs()[k], prod_oracle[k], 1e-12));
            }

            // Division is certified through the ring axiom: (p/q) * q must
            // reproduce p's jet, with mul itself pinned by the exact oracle
            // above. The natural error scale of the round trip is the product
            // of the coefficient magnitudes entering the Cauchy sum.
            let quot_jet = jp.div(&jq).unwrap();
            let back = quot_jet.mul(&jq);
            let amp = |j: &Jet| j.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let scale = 1.0f64.max(amp(&quot_jet) * amp(&jq));
            for k in 0..=order {
                prop_assert!(
                    (back.coeffs()[k] - jp.coeffs()[k]).abs() <= 1e-12 * scale,
                    "k={} back={} p={}", k, back.coeffs()[k], jp.coeffs()[k]
                );
            }
        }

        #[test]
        fn mul_commutative_associative(a in small_poly(), b in small_poly(), c in small_poly()) {
            let order = 6;
            let ja = Poly(a).jet_at(0.3, order);
            let jb = Poly(b).jet_at(0.3, order);
            let jc = Poly(c).jet_at(0.3, order);
            let ab = ja.mul(&jb);
            let ba = jb.mul(&ja);
            let ab_c = ab.mul(&jc);
            let a_bc = ja.mul(&jb.mul(&jc));
            for k in 0..=order {
                prop_assert!(rel_close(ab.coeffs()[k], ba.coeffs()[k], 1e-13));
                prop_assert!(rel_close(ab_c.coeffs()[k], a_bc.coeffs()[k], 1e-13));
            }
        }
    }
}
