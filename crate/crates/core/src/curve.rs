//! Curves on surface patches: construction, validation, arc-length
//! reparameterization and the energy functionals.
//!
//! All evaluation is jet-based. Reparameterization composes the coordinate
//! jets with a series inversion of the cumulative length, so arc-length
//! derivatives stay exact to the jet order instead of accumulating
//! interpolation error.

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::jet::{Jet, JetVec3};
use crate::quadrature::{self, GaussLegendre, QuadratureSpec};
use crate::spline::QuinticSpline;
use crate::surface::SurfacePatch;

/// Below this squared curvature the torsion formula (which divides by
/// kappa^2) fails loudly instead of returning garbage.
pub const KAPPA2_MIN: f64 = 1e-8;

/// Speed threshold under which a curve counts as non-regular.
pub const SPEED_MIN: f64 = 1e-10;

/// Tolerance on `| |alpha'| - 1 |` for accepting a curve as arc-length
/// parameterized.
pub const ARC_LENGTH_TOL: f64 = 1e-8;

/// One scalar coordinate function of the curve parameter.
#[derive(Debug, Clone)]
pub enum CoordFn {
    /// Expression in the variable `s`.
    Expr(Expr),
    /// Quintic spline over knot index `t = s / knot_spacing`.
    Spline {
        spline: QuinticSpline,
        knot_spacing: f64,
    },
}

impl CoordFn {
    pub fn from_expr(src: &str) -> Result<Self> {
        Ok(CoordFn::Expr(parse_expr(src, &["s"])?))
    }

    pub fn eval(&self, s: &Jet) -> Result<Jet> {
        match self {
            CoordFn::Expr(e) => e.eval(std::slice::from_ref(s)),
            CoordFn::Spline {
                spline,
                knot_spacing,
            } => Ok(spline.eval_jet(&s.scale(1.0 / knot_spacing))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    ArcLength,
    General,
}

/// Monotone cumulative-length table over the base parameter, with Newton
/// refinement for point queries.
#[derive(Debug, Clone)]
struct ArcLengthMap {
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    rule: GaussLegendre,
}

impl ArcLengthMap {
    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Arc length from 0 to `sigma`.
    fn length_at<F: FnMut(f64) -> Result<f64>>(&self, sigma: f64, mut speed: F) -> Result<f64> {
        let i = match self
            .edges
            .binary_search_by(|e| e.partial_cmp(&sigma).unwrap())
        {
            Ok(i) => i.saturating_sub(1),
            Err(i) => i.saturating_sub(1),
        }
        .min(self.edges.len() - 2);
        let partial = self.rule.integrate(self.edges[i], sigma, &mut speed)?;
        Ok(self.cumulative[i] + partial)
    }

    /// Invert the cumulative length: the `sigma` with `length_at(sigma) = s`.
    fn sigma_at<F: FnMut(f64) -> Result<f64>>(
        &self,
        s: f64,
        mut speed: F,
        tol: f64,
    ) -> Result<f64> {
        if s < -tol || s > self.total() + tol.max(1e-9 * self.total()) {
            return Err(Error::RootNotBracketed {
                target: s,
                available: self.total(),
            });
        }
        let s = s.clamp(0.0, self.total());
        // locate the panel, then Newton on the partial integral
        let i = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.saturating_sub(1),
            Err(i) => i.saturating_sub(1),
        }
        .min(self.edges.len() - 2);
        let (lo, hi) = (self.edges[i], self.edges[i + 1]);
        let frac = (s - self.cumulative[i]) / (self.cumulative[i + 1] - self.cumulative[i]);
        let mut sigma = lo + frac.clamp(0.0, 1.0) * (hi - lo);
        for _ in 0..60 {
            let g = self.length_at(sigma, &mut speed)? - s;
            if g.abs() <= tol {
                return Ok(sigma);
            }
            let w = speed(sigma)?;
            if w < SPEED_MIN {
                return Err(Error::NonRegularCurve { sigma, speed: w });
            }
            sigma -= g / w;
        }
        Err(Error::QuadratureFailure {
            context: format!("arc-length inversion did not converge at s = {s}"),
        })
    }
}

#[derive(Debug, Clone)]
enum CurvePath {
    /// Coordinates directly in the curve parameter.
    Direct { u: CoordFn, v: CoordFn },
    /// Coordinates in a base parameter `sigma`, composed with the inverse
    /// cumulative-length map `sigma(s)`.
    Reparam {
        u: CoordFn,
        v: CoordFn,
        map: ArcLengthMap,
        tol: f64,
    },
}

/// A parameter curve `(u(s), v(s))` on a patch, with its active arc `[0, l]`
/// and the extended domain `[0, l_star]` used by the variational machinery.
#[derive(Debug, Clone)]
pub struct CurveOnSurface {
    patch: SurfacePatch,
    path: CurvePath,
    param: ParamKind,
    length: f64,
    extension: f64,
    reduced_accuracy: bool,
}

impl CurveOnSurface {
    /// Curve whose coordinate expressions are already arc-length
    /// parameterized; validated at construction.
    pub fn arc_length_from_exprs(
        patch: SurfacePatch,
        u: &str,
        v: &str,
        length: f64,
        extension: f64,
    ) -> Result<Self> {
        let curve = Self {
            patch,
            path: CurvePath::Direct {
                u: CoordFn::from_expr(u)?,
                v: CoordFn::from_expr(v)?,
            },
            param: ParamKind::ArcLength,
            length,
            extension,
            reduced_accuracy: false,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Curve in an arbitrary regular parameterization over `[0, domain_end]`,
    /// with the active arc ending at parameter `active_end`.
    pub fn general_from_exprs(
        patch: SurfacePatch,
        u: &str,
        v: &str,
        active_end: f64,
        domain_end: f64,
    ) -> Result<Self> {
        let curve = Self {
            patch,
            path: CurvePath::Direct {
                u: CoordFn::from_expr(u)?,
                v: CoordFn::from_expr(v)?,
            },
            param: ParamKind::General,
            length: active_end,
            extension: domain_end,
            reduced_accuracy: false,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Quintic-spline lift of control points, parameterized over `[0, l]`
    /// by scaled knot index. The lift is a general (non-arc-length)
    /// parameterization and is flagged reduced-accuracy.
    pub fn from_points(patch: SurfacePatch, points: &[[f64; 2]], length: f64) -> Result<Self> {
        let curve = Self::from_points_unchecked(patch, points, length)?;
        curve.validate()?;
        Ok(curve)
    }

    /// Spline lift without the sampled domain/regularity validation; the
    /// relaxation loop builds thousands of short-lived lifts whose
    /// degeneracies are caught by the evaluation guards anyway.
    pub(crate) fn from_points_unchecked(
        patch: SurfacePatch,
        points: &[[f64; 2]],
        length: f64,
    ) -> Result<Self> {
        if points.len() < QuinticSpline::MIN_POINTS {
            return Err(Error::NodeCount {
                n: points.len(),
                min: QuinticSpline::MIN_POINTS,
            });
        }
        let us: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let vs: Vec<f64> = points.iter().map(|p| p[1]).collect();
        let spacing = length / (points.len() - 1) as f64;
        Ok(Self {
            patch,
            path: CurvePath::Direct {
                u: CoordFn::Spline {
                    spline: QuinticSpline::interpolate(&us)?,
                    knot_spacing: spacing,
                },
                v: CoordFn::Spline {
                    spline: QuinticSpline::interpolate(&vs)?,
                    knot_spacing: spacing,
                },
            },
            param: ParamKind::General,
            length,
            extension: length,
            reduced_accuracy: true,
        })
    }

    fn validate(&self) -> Result<()> {
        let stations = 65;
        for i in 0..=stations {
            let s = self.extension * i as f64 / stations as f64;
            let alpha = self.embed(s, 1)?;
            let speed = alpha.differentiate().norm_squared().value().sqrt();
            if speed < SPEED_MIN {
                return Err(Error::NonRegularCurve { sigma: s, speed });
            }
            if self.param == ParamKind::ArcLength && (speed - 1.0).abs() > ARC_LENGTH_TOL {
                return Err(Error::NotArcLength {
                    s,
                    deviation: (speed - 1.0).abs(),
                });
            }
        }
        Ok(())
    }

    pub fn patch(&self) -> &SurfacePatch {
        &self.patch
    }

    /// Arc length (or general-parameter extent) of the active arc.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// End of the extended domain `[0, l_star]`.
    pub fn extension(&self) -> f64 {
        self.extension
    }

    pub fn param_kind(&self) -> ParamKind {
        self.param
    }

    pub fn is_reduced_accuracy(&self) -> bool {
        self.reduced_accuracy
    }

    /// Coordinate jets `(u(s), v(s))` of the given order.
    pub fn uv_jets(&self, s: f64, order: usize) -> Result<(Jet, Jet)> {
        let s_jet = Jet::variable(s, order)?;
        match &self.path {
            CurvePath::Direct { u, v } => Ok((u.eval(&s_jet)?, v.eval(&s_jet)?)),
            CurvePath::Reparam { u, v, map, tol } => {
                let sigma0 = map.sigma_at(s, |x| self.base_speed(u, v, x), *tol)?;
                // the series inversion needs at least a linear term
                let work = order.max(1);
                // jets of the base coordinates in sigma about sigma0
                let sigma_jet = Jet::variable(sigma0, work)?;
                let u_sigma = u.eval(&sigma_jet)?;
                let v_sigma = v.eval(&sigma_jet)?;
                // speed of the base parameterization as a jet in sigma
                let x = self.patch.eval_position(&u_sigma, &v_sigma)?;
                let w = x.differentiate().norm()?;
                // cumulative length as a series in (sigma - sigma0), constant
                // term pinned to s, then inverted to sigma(s)
                let s_of_sigma = w.antiderivative(s).resize(work);
                let sigma_incr = s_of_sigma.invert_series()?;
                let arg = sigma_incr.add_scalar(sigma0);
                Ok((
                    u_sigma.compose_shifted(&arg).resize(order),
                    v_sigma.compose_shifted(&arg).resize(order),
                ))
            }
        }
    }

    fn base_speed(&self, u: &CoordFn, v: &CoordFn, sigma: f64) -> Result<f64> {
        let s_jet = Jet::variable(sigma, 1)?;
        let x = self
            .patch
            .eval_position(&u.eval(&s_jet)?, &v.eval(&s_jet)?)?;
        Ok(x.differentiate().norm_squared().value().sqrt())
    }

    /// Embedded position jet `alpha(s)` of the given order.
    pub fn embed(&self, s: f64, order: usize) -> Result<JetVec3> {
        let (u, v) = self.uv_jets(s, order)?;
        self.patch.eval_position(&u, &v)
    }

    /// Arc-length reparameterization with the same trace.
    ///
    /// Builds a cumulative-length table over the original domain and wraps
    /// the coordinates in its Newton-refined, jet-differentiable inverse.
    /// Already-arc-length curves are returned unchanged.
    pub fn reparameterize_arclength(&self, tol: f64) -> Result<Self> {
        if self.param == ParamKind::ArcLength {
            return Ok(self.clone());
        }
        let (u, v) = match &self.path {
            CurvePath::Direct { u, v } => (u.clone(), v.clone()),
            CurvePath::Reparam { .. } => unreachable!("general curves have direct paths"),
        };
        let sigma_max = self.extension;
        let panels = ((8.0 * sigma_max).ceil() as usize).clamp(64, 4096);
        let rule = GaussLegendre::new(32);
        let mut edges = Vec::with_capacity(panels + 1);
        let mut cumulative = Vec::with_capacity(panels + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        edges.push(0.0);
        for i in 0..panels {
            let lo = sigma_max * i as f64 / panels as f64;
            let hi = sigma_max * (i + 1) as f64 / panels as f64;
            acc += rule.integrate(lo, hi, |x| {
                let w = self.base_speed(&u, &v, x)?;
                if w < SPEED_MIN {
                    return Err(Error::NonRegularCurve { sigma: x, speed: w });
                }
                Ok(w)
            })?;
            edges.push(hi);
            cumulative.push(acc);
        }
        let map = ArcLengthMap {
            edges,
            cumulative,
            rule,
        };
        let active_len = map.length_at(self.length, |x| self.base_speed(&u, &v, x))?;
        let total = map.total();
        let curve = Self {
            patch: self.patch.clone(),
            path: CurvePath::Reparam {
                u,
                v,
                map,
                tol: tol.max(1e-14),
            },
            param: ParamKind::ArcLength,
            length: active_len,
            extension: total,
            reduced_accuracy: self.reduced_accuracy,
        };
        curve.validate()?;
        Ok(curve)
    }

    fn require_arc_length(&self) -> Result<()> {
        if self.param != ParamKind::ArcLength {
            return Err(Error::NotArcLength {
                s: 0.0,
                deviation: f64::NAN,
            });
        }
        Ok(())
    }

    /// Total square torsion `F = integral of tau^2 ds` over the active arc,
    /// with a node-doubling error estimate.
    pub fn total_square_torsion(&self, quad: QuadratureSpec) -> Result<(f64, f64)> {
        self.require_arc_length()?;
        quadrature::integrate_with_error(quad, 0.0, self.length, |s| {
            let st = crate::darboux::invariant_jets(self, s, 4)?;
            Ok(st.tau.value() * st.tau.value())
        })
    }

    /// Total square curvature `K = integral of kappa^2 ds` over the active arc.
    pub fn total_square_curvature(&self, quad: QuadratureSpec) -> Result<(f64, f64)> {
        self.require_arc_length()?;
        quadrature::integrate_with_error(quad, 0.0, self.length, |s| {
            let st = crate::darboux::invariant_jets(self, s, 3)?;
            Ok(st.kappa2.value())
        })
    }

    /// Geometric total square torsion for a general parameterization:
    /// `integral of tau(sigma)^2 |alpha'(sigma)| d sigma` over the active
    /// arc, using the parameterization-invariant torsion formula. Agrees
    /// with [`Self::total_square_torsion`] on arc-length curves.
    pub fn total_square_torsion_general(&self, quad: QuadratureSpec) -> Result<(f64, f64)> {
        quadrature::integrate_with_error(quad, 0.0, self.length, |sigma| {
            let alpha = self.embed(sigma, 3)?;
            let d1 = alpha.differentiate();
            let d2 = d1.differentiate();
            let d3 = d2.differentiate();
            let v1 = [d1.x.value(), d1.y.value(), d1.z.value()];
            let v2 = [d2.x.value(), d2.y.value(), d2.z.value()];
            let v3 = [d3.x.value(), d3.y.value(), d3.z.value()];
            let c = cross3(v1, v2);
            let c2 = dot3(c, c);
            let speed2 = dot3(v1, v1);
            if c2 < KAPPA2_MIN * KAPPA2_MIN * speed2 * speed2 * speed2 {
                return Err(Error::CurvatureDegeneracy {
                    s: sigma,
                    kappa2: c2 / (speed2 * speed2 * speed2),
                });
            }
            let tau = dot3(c, v3) / c2;
            Ok(tau * tau * speed2.sqrt())
        })
    }
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Domain;
    use std::f64::consts::PI;

    #[test]
    fn sphere_equator_is_arc_length() {
        let c = CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::sphere(1.0),
            "1.5707963267948966",
            "s",
            PI,
            1.05 * PI,
        )
        .unwrap();
        let alpha = c.embed(0.0, 2).unwrap();
        assert!((alpha.value()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_arc_length_expr_rejected() {
        let res = CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::sphere(1.0),
            "1.5707963267948966",
            "2*s",
            1.0,
            1.05,
        );
        assert!(matches!(res, Err(Error::NotArcLength { .. })));
    }

    #[test]
    fn reparameterize_doubles_length_of_fast_circle() {
        // speed-2 traversal of the unit-sphere equator over sigma in [0, 1]
        let general = CurveOnSurface::general_from_exprs(
            SurfacePatch::sphere(1.0),
            "1.5707963267948966",
            "2*s",
            1.0,
            1.2,
        )
        .unwrap();
        let arc = general.reparameterize_arclength(1e-12).unwrap();
        assert!((arc.length() - 2.0).abs() < 1e-10);
        assert!((arc.extension() - 2.4).abs() < 1e-10);
        for i in 0..20 {
            let s = 2.3 * i as f64 / 19.0;
            let speed = arc
                .embed(s, 1)
                .unwrap()
                .differentiate()
                .norm_squared()
                .value()
                .sqrt();
            assert!((speed - 1.0).abs() < 1e-11, "s={s}: speed {speed}");
        }
    }

    #[test]
    fn reparameterized_plane_wiggle_has_unit_speed() {
        let general = CurveOnSurface::general_from_exprs(
            SurfacePatch::plane(),
            "s",
            "0.3*sin(s)",
            4.0,
            4.4,
        )
        .unwrap();
        let arc = general.reparameterize_arclength(1e-12).unwrap();
        for i in 0..200 {
            let s = arc.extension() * i as f64 / 200.0;
            let speed = arc
                .embed(s, 1)
                .unwrap()
                .differentiate()
                .norm_squared()
                .value()
                .sqrt();
            assert!((speed - 1.0).abs() < 1e-9, "s={s}: speed {speed}");
        }
        // higher jet coefficients must also see unit speed: d/ds |alpha'|^2 = 0
        let alpha = arc.embed(1.3, 5).unwrap();
        let speed2 = alpha.differentiate().norm_squared();
        for k in 1..=3 {
            assert!(speed2.coeffs()[k].abs() < 1e-8, "k={k}: {}", speed2.coeffs()[k]);
        }
    }

    #[test]
    fn already_arc_length_identity() {
        let c = CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::plane(),
            "s",
            "0",
            1.0,
            1.1,
        )
        .unwrap();
        let r = c.reparameterize_arclength(1e-10).unwrap();
        assert_eq!(r.length(), 1.0);
        let a = c.embed(0.5, 3).unwrap();
        let b = r.embed(0.5, 3).unwrap();
        assert_eq!(a.value(), b.value());
    }

    #[test]
    fn spline_lift_stays_on_graph_patch() {
        let patch =
            SurfacePatch::graph("0.1*u*v", Domain::rectangle(-10.0, 10.0, -10.0, 10.0)).unwrap();
        let points: Vec<[f64; 2]> = (0..16)
            .map(|i| {
                let t = i as f64 / 15.0;
                [t * 3.0, (t * 3.0).sin() * 0.5]
            })
            .collect();
        let c = CurveOnSurface::from_points(patch, &points, 3.2).unwrap();
        assert!(c.is_reduced_accuracy());
        let arc = c.reparameterize_arclength(1e-10).unwrap();
        assert!(arc.length() > 3.0);
    }

    #[test]
    fn domain_exit_detected_at_construction() {
        let patch = SurfacePatch::graph("u+v", Domain::rectangle(0.0, 1.0, 0.0, 1.0)).unwrap();
        let res = CurveOnSurface::general_from_exprs(patch, "s", "0.5", 2.0, 2.2);
        assert!(matches!(res, Err(Error::SurfaceDomain { .. })));
    }
}
