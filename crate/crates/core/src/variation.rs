//! The one-parameter variation of a curve with fixed length and fixed
//! initial data, implemented literally.
//!
//! Given an arc-length base curve extended to `[0, l_star]` and a scalar
//! field `mu` with `mu(0) = mu'(0) = mu''(0) = 0`, the varied family is
//!
//! ```text
//! beta(sigma; t) = x(u(sigma) + t eta(sigma), v(sigma) + t zeta(sigma)),
//! ```
//!
//! where `eta x_u + zeta x_v = mu Q` along the base curve. For each `t` the
//! family is restricted to a fixed-length arc by solving for `lambda(t)`
//! with `integral_0^lambda |beta_sigma| = l`, and the functional
//!
//! ```text
//! F(t) = integral_0^lambda(t) ( <b_s x b_ss, b_sss> /
//!          (<b_s,b_s><b_ss,b_ss> - <b_ss,b_s>^2) )^2 d sigma
//! ```
//!
//! is differentiated at `t = 0$ two independent ways: by extrapolated
//! central differences (the oracle) and analytically through the residual
//! evaluators. Their agreement is the core correctness check of the crate.

use crate::curve::{CurveOnSurface, ParamKind, SPEED_MIN};
use crate::darboux::invariant_jets;
use crate::elastic;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::fd::{central_derivative, FdEstimate};
use crate::jet::{Jet, JetVec3};
use crate::quadrature::{self, GaussLegendre, QuadratureSpec};

/// Tolerance on the endpoint conditions `mu(0) = mu'(0) = mu''(0) = 0`.
const ENDPOINT_TOL: f64 = 1e-12;

/// Admissible variation scalar on `[0, l_star]`.
///
/// The field must vanish to second order at `s = 0` (so the varied arcs keep
/// the initial point and direction) and be C^3: the integrated-by-parts
/// first variation consumes `mu'''` and evaluates `mu''(l)`.
#[derive(Debug, Clone)]
pub struct VariationField {
    kind: FieldKind,
}

#[derive(Debug, Clone)]
enum FieldKind {
    /// Expression in `s`, with `l` bound to the active arc length.
    Expr { expr: Expr, l: f64 },
    Polynomial(Vec<f64>),
    /// `((s-a)(b-s))^4` scaled to peak 1 inside `(a, b)`, zero outside.
    Bump { a: f64, b: f64 },
}

impl VariationField {
    /// Parse and validate an expression field such as `"s^3"` or
    /// `"s^3*(l-s)"`; `l` refers to the active arc length of `curve`.
    pub fn from_expr(src: &str, curve: &CurveOnSurface) -> Result<Self> {
        let field = Self {
            kind: FieldKind::Expr {
                expr: parse_expr(src, &["s", "l"])?,
                l: curve.length(),
            },
        };
        field.validate(curve)?;
        Ok(field)
    }

    /// Polynomial field `sum coeffs[k] s^k`.
    pub fn polynomial(coeffs: Vec<f64>, curve: &CurveOnSurface) -> Result<Self> {
        let field = Self {
            kind: FieldKind::Polynomial(coeffs),
        };
        field.validate(curve)?;
        Ok(field)
    }

    /// Smooth bump supported in `(a, b)`, vanishing to third order at the
    /// seams; used by the localization oracle.
    pub fn bump(a: f64, b: f64, curve: &CurveOnSurface) -> Result<Self> {
        if !(0.0 < a && a < b && b <= curve.extension()) {
            return Err(Error::Config {
                message: format!("bump support ({a}, {b}) outside (0, {}]", curve.extension()),
            });
        }
        let field = Self {
            kind: FieldKind::Bump { a, b },
        };
        field.validate(curve)?;
        Ok(field)
    }

    /// Evaluate as a jet in `s`.
    pub fn eval(&self, s: &Jet) -> Result<Jet> {
        match &self.kind {
            FieldKind::Expr { expr, l } => {
                expr.eval(&[s.clone(), Jet::constant(*l, s.order())?])
            }
            FieldKind::Polynomial(coeffs) => {
                let mut acc = Jet::zero(s.order());
                for &c in coeffs.iter().rev() {
                    acc = acc.mul(s).add_scalar(c);
                }
                Ok(acc)
            }
            FieldKind::Bump { a, b } => {
                if s.value() <= *a || s.value() >= *b {
                    return Ok(Jet::zero(s.order()));
                }
                let peak = ((b - a) / 2.0).powi(8);
                let sa = s.add_scalar(-a);
                let bs = s.neg().add_scalar(*b);
                sa.mul(&bs).powi(4).map(|j| j.scale(1.0 / peak))
            }
        }
    }

    fn validate(&self, curve: &CurveOnSurface) -> Result<()> {
        let at0 = self.eval(&Jet::variable(0.0, 3)?)?;
        let checks: [(&'static str, f64); 3] = [
            ("mu(0)", at0.derivative(0)?),
            ("mu'(0)", at0.derivative(1)?),
            ("mu''(0)", at0.derivative(2)?),
        ];
        for (which, value) in checks {
            if value.abs() > ENDPOINT_TOL {
                return Err(Error::EndpointCondition { which, value });
            }
        }
        // not identically zero
        let mut sup = 0.0f64;
        for i in 1..=32 {
            let s = curve.extension() * i as f64 / 32.0;
            sup = sup.max(self.eval(&Jet::constant(s, 0)?)?.value().abs());
        }
        if sup == 0.0 {
            return Err(Error::Config {
                message: "variation field vanishes identically".into(),
            });
        }
        Ok(())
    }
}

/// The varied family `beta(sigma; t)` over the extended base curve, with its
/// admissible parameter bound `t_eps`.
#[derive(Debug, Clone)]
pub struct VariationFamily {
    base: CurveOnSurface,
    field: VariationField,
    t_eps: f64,
    /// Sup of the displacement magnitudes |eta|, |zeta| over the domain;
    /// the natural scale for finite-difference steps in `t`.
    displacement_sup: f64,
    quad: QuadratureSpec,
    lambda_rule: GaussLegendre,
    lambda_panels: usize,
}

impl VariationFamily {
    /// Build the family and select the admissible bound: start from the
    /// patch-margin estimate, then halve until the restricted-length
    /// condition `L*(t) > (l + l*)/2` and the curvature guard hold on a
    /// `t` grid.
    pub fn new(
        base: CurveOnSurface,
        field: VariationField,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        if base.param_kind() != ParamKind::ArcLength {
            return Err(Error::NotArcLength {
                s: 0.0,
                deviation: f64::NAN,
            });
        }
        if base.extension() <= base.length() {
            return Err(Error::Config {
                message: "variation needs an extended domain l_star > l".into(),
            });
        }
        let mut family = Self {
            base,
            field,
            t_eps: 0.0,
            displacement_sup: 0.0,
            quad,
            lambda_rule: GaussLegendre::new(16),
            lambda_panels: 64,
        };
        family.t_eps = family.select_epsilon()?;
        Ok(family)
    }

    /// Step scale for finite differences in `t`: a raw cap shrunk by the
    /// displacement magnitude, since the family moves by `t * displacement`.
    pub fn fd_step(&self, cap: f64) -> f64 {
        (self.t_eps / 2.0).min(cap / (1.0 + self.displacement_sup))
    }

    pub fn base(&self) -> &CurveOnSurface {
        &self.base
    }

    pub fn field(&self) -> &VariationField {
        &self.field
    }

    pub fn t_eps(&self) -> f64 {
        self.t_eps
    }

    /// Displacement coefficients `(eta, zeta)` as jets in sigma about
    /// `sigma0`: the tangent-plane components of `mu Q` in the `(x_u, x_v)`
    /// basis, from the Gram system.
    pub fn eta_zeta(&self, sigma0: f64, order: usize) -> Result<(Jet, Jet)> {
        let embed_order = (order + 1).max(3);
        let q_jet = crate::darboux::frame_q_jet(&self.base, sigma0, embed_order)?;
        let (u, v) = self.base.uv_jets(sigma0, order)?;
        let (xu, xv) = self.base.patch().tangents(&u, &v)?;
        let q = q_jet.resize(order);
        let e = xu.dot(&xu);
        let f = xu.dot(&xv);
        let g = xv.dot(&xv);
        let a = q.dot(&xu);
        let b = q.dot(&xv);
        let det = e.mul(&g).sub(&f.square());
        let p = a.mul(&g).sub(&b.mul(&f)).div(&det)?;
        let qc = b.mul(&e).sub(&a.mul(&f)).div(&det)?;
        let mu = self.field.eval(&Jet::variable(sigma0, order)?)?;
        Ok((mu.mul(&p), mu.mul(&qc)))
    }

    /// Position jet of the varied curve at a jet-valued `sigma` and fixed `t`.
    pub fn beta_point(&self, sigma: &Jet, t: f64) -> Result<JetVec3> {
        let order = sigma.order();
        let sigma0 = sigma.value();
        let (u, v) = self.base.uv_jets(sigma0, order)?;
        let (eta, zeta) = self.eta_zeta(sigma0, order)?;
        let ub = u.add(&eta.scale(t));
        let vb = v.add(&zeta.scale(t));
        // compose with the incoming jet when it is not the plain variable
        let plain = sigma.coeffs()[1..]
            .iter()
            .enumerate()
            .all(|(k, c)| (k == 0 && *c == 1.0) || (k > 0 && *c == 0.0));
        let (ub, vb) = if plain || order == 0 {
            (ub, vb)
        } else {
            (ub.compose_shifted(sigma), vb.compose_shifted(sigma))
        };
        self.base.patch().eval_position(&ub, &vb)
    }

    /// Speed `|d beta / d sigma|` at a point of the varied curve.
    fn beta_speed(&self, sigma: f64, t: f64) -> Result<f64> {
        let jet = self.beta_point(&Jet::variable(sigma, 1)?, t)?;
        let speed = jet.differentiate().norm_squared().value().sqrt();
        if !speed.is_finite() {
            return Err(Error::QuadratureFailure {
                context: format!("non-finite family speed at sigma = {sigma}"),
            });
        }
        Ok(speed)
    }

    /// Length `L*(t)` of the full varied arc over `[0, l_star]`.
    pub fn family_length(&self, t: f64) -> Result<f64> {
        quadrature::integrate(self.quad, 0.0, self.base.extension(), |sigma| {
            self.beta_speed(sigma, t)
        })
    }

    /// Restriction parameter `lambda(t)`: the sigma with
    /// `integral_0^lambda |beta_sigma| d sigma = l`, by monotone bracketing
    /// over a panel table plus Newton refinement.
    pub fn solve_lambda(&self, t: f64, tol: f64) -> Result<f64> {
        let l = self.base.length();
        let l_star = self.base.extension();
        let n = self.lambda_panels;
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut edges = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        edges.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let lo = l_star * i as f64 / n as f64;
            let hi = l_star * (i + 1) as f64 / n as f64;
            acc += self
                .lambda_rule
                .integrate(lo, hi, |sigma| self.beta_speed(sigma, t))?;
            edges.push(hi);
            cumulative.push(acc);
        }
        if acc < l {
            return Err(Error::RootNotBracketed {
                target: l,
                available: acc,
            });
        }
        let i = match cumulative.binary_search_by(|c| c.partial_cmp(&l).unwrap()) {
            Ok(i) => i.saturating_sub(1),
            Err(i) => i.saturating_sub(1),
        }
        .min(n - 1);
        let frac = (l - cumulative[i]) / (cumulative[i + 1] - cumulative[i]);
        let mut lambda = edges[i] + frac.clamp(0.0, 1.0) * (edges[i + 1] - edges[i]);
        for _ in 0..60 {
            let partial = self
                .lambda_rule
                .integrate(edges[i], lambda, |sigma| self.beta_speed(sigma, t))?;
            let g = cumulative[i] + partial - l;
            if g.abs() <= tol {
                return Ok(lambda);
            }
            let w = self.beta_speed(lambda, t)?;
            if w < SPEED_MIN {
                return Err(Error::NonRegularCurve {
                    sigma: lambda,
                    speed: w,
                });
            }
            lambda -= g / w;
        }
        Err(Error::QuadratureFailure {
            context: "lambda solve did not converge".into(),
        })
    }

    /// The functional of the restricted varied arc.
    pub fn functional(&self, t: f64) -> Result<f64> {
        let lambda = self.solve_lambda(t, 1e-12)?;
        quadrature::integrate(self.quad, 0.0, lambda, |sigma| {
            let beta = self.beta_point(&Jet::variable(sigma, 3)?, t)?;
            let d1 = beta.differentiate();
            let d2 = d1.differentiate();
            let d3 = d2.differentiate();
            let tau = elastic::general_torsion(d1.value(), d2.value(), d3.value(), sigma)?;
            Ok(tau * tau)
        })
    }

    fn select_epsilon(&mut self) -> Result<f64> {
        // margin-based start: distance of (u, v) to the patch boundary over
        // the displacement magnitude
        let mut eps = f64::INFINITY;
        let samples = 48;
        let mut disp_sup = 0.0f64;
        for i in 0..=samples {
            let sigma = self.base.extension() * i as f64 / samples as f64;
            let (u, v) = self.base.uv_jets(sigma, 0)?;
            let (eta, zeta) = self.eta_zeta(sigma, 0)?;
            let margin = self.boundary_margin(u.value(), v.value());
            let disp = eta.value().abs().max(zeta.value().abs());
            disp_sup = disp_sup.max(disp);
            eps = eps.min(margin / (disp + 1e-30));
        }
        self.displacement_sup = disp_sup;
        if !eps.is_finite() {
            eps = 1.0;
        }
        eps = eps.min(1.0);
        // the curvature guard only applies when the base itself clears it
        // (a curvature-degenerate base still supports the length machinery)
        let functional_required = self.functional(0.0).is_ok();
        let l = self.base.length();
        let l_star = self.base.extension();
        for _ in 0..60 {
            let ok = [eps, -eps, eps / 2.0, -eps / 2.0].iter().all(|&t| {
                self.family_length(t)
                    .map(|len| len > 0.5 * (l + l_star))
                    .unwrap_or(false)
                    && (!functional_required || self.functional(t).is_ok())
            });
            if ok {
                return Ok(eps);
            }
            eps *= 0.5;
        }
        Err(Error::Config {
            message: "no admissible variation bound found".into(),
        })
    }

    fn boundary_margin(&self, u: f64, v: f64) -> f64 {
        use crate::surface::Axis;
        let domain = self.base.patch().domain();
        let axis_margin = |axis: &Axis, x: f64| match axis {
            Axis::Interval { lo, hi } => (x - lo).min(hi - x).max(0.0),
            Axis::Unbounded => f64::INFINITY,
        };
        axis_margin(&domain.u, u).min(axis_margin(&domain.v, v))
    }
}

/// Comparison of the restriction-rate identity: `d lambda / dt` at `t = 0`
/// by finite differences against the closed form `integral mu kg ds`.
#[derive(Debug, Clone, Copy)]
pub struct LambdaRate {
    pub fd: FdEstimate,
    pub formula: f64,
}

/// Both sides of the restriction-rate identity.
pub fn dlambda_dt(family: &VariationFamily) -> Result<LambdaRate> {
    // the admissibility bound can be large; cap the stencil where the
    // truncation error, not the bound, limits accuracy
    let h0 = family.fd_step(0.01);
    let fd = central_derivative(|t| family.solve_lambda(t, 1e-13), 0.0, h0, 3)?;
    let formula = quadrature::integrate(
        family.quad,
        0.0,
        family.base().length(),
        |s| {
            let inv = invariant_jets(family.base(), s, 3)?;
            let mu = family.field().eval(&Jet::constant(s, 0)?)?;
            Ok(mu.value() * inv.kg.value())
        },
    )?;
    Ok(LambdaRate { fd, formula })
}

/// First variation of the functional by extrapolated central differences.
pub fn first_variation_fd(family: &VariationFamily) -> Result<FdEstimate> {
    let h0 = family.fd_step(0.05);
    central_derivative(|t| family.functional(t), 0.0, h0, 3)
}

/// The analytically assembled first variation, split into its interior and
/// boundary contributions.
#[derive(Debug, Clone, Copy)]
pub struct FirstVariation {
    /// `integral_0^l mu E ds` with the full interior density.
    pub interior: f64,
    /// `mu(l)` times its boundary coefficient.
    pub b1_term: f64,
    /// `mu'(l)` times its boundary coefficient.
    pub b2_term: f64,
    /// `mu''(l)` times `-2 kn(l) tau(l) / kappa^2(l)`.
    pub b3_term: f64,
    pub total: f64,
}

/// Evaluate the analytic first variation of the functional for the given
/// base curve and admissible field.
pub fn first_variation_analytic(
    curve: &CurveOnSurface,
    field: &VariationField,
    quad: QuadratureSpec,
) -> Result<FirstVariation> {
    let l = curve.length();
    let tau_l = elastic::tau_at_free_end(curve)?;
    let interior = quadrature::integrate(quad, 0.0, l, |s| {
        let mu = field.eval(&Jet::constant(s, 0)?)?;
        Ok(mu.value() * elastic::el_residual(curve, s, tau_l)?)
    })?;
    let cj = elastic::coefficient_jets(curve, l)?;
    let bc = cj.boundary_coefficients()?;
    let mu_l = field.eval(&Jet::variable(l, 2)?)?;
    let b1_term = mu_l.derivative(0)? * bc[0];
    let b2_term = mu_l.derivative(1)? * bc[1];
    let b3_term = mu_l.derivative(2)? * bc[2];
    Ok(FirstVariation {
        interior,
        b1_term,
        b2_term,
        b3_term,
        total: interior + b1_term + b2_term + b3_term,
    })
}
