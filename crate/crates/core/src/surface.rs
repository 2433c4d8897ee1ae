//! Oriented parametric surface patches with jet evaluation.
//!
//! A patch is a map `x(u, v)` into Euclidean 3-space. Because evaluation is
//! jet-polymorphic, every mixed partial up to the jet order comes out of a
//! single evaluation. Built-in patches carry hand-written parameterizations
//! so canonical examples have predictable invariant signs; arbitrary patches
//! come from the expression language.

use crate::error::{Error, Result};
use crate::expr::{parse_triple, Expr};
use crate::jet::{Jet, JetVec3};

/// Guard below which `|x_u x x_v|` counts as a regularity failure.
pub const REGULARITY_EPS: f64 = 1e-12;

/// One coordinate axis of a patch domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    /// Hard interval bounds; evaluation outside is an error.
    Interval { lo: f64, hi: f64 },
    /// Periodic or otherwise unconstrained coordinate.
    Unbounded,
}

impl Axis {
    fn contains(&self, x: f64) -> bool {
        match self {
            Axis::Interval { lo, hi } => x > *lo && x < *hi,
            Axis::Unbounded => true,
        }
    }
}

/// Rectangular (possibly unbounded) parameter domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub u: Axis,
    pub v: Axis,
}

impl Domain {
    pub fn unbounded() -> Self {
        Self {
            u: Axis::Unbounded,
            v: Axis::Unbounded,
        }
    }

    pub fn rectangle(u_lo: f64, u_hi: f64, v_lo: f64, v_hi: f64) -> Self {
        Self {
            u: Axis::Interval { lo: u_lo, hi: u_hi },
            v: Axis::Interval { lo: v_lo, hi: v_hi },
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.u.contains(u) && self.v.contains(v)
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let axis = |a: &Axis| match a {
            Axis::Interval { lo, hi } => format!("({lo}, {hi})"),
            Axis::Unbounded => "(-inf, inf)".to_string(),
        };
        write!(f, "{} x {}", axis(&self.u), axis(&self.v))
    }
}

/// The parameterization behind a patch.
#[derive(Debug, Clone)]
pub enum PatchKind {
    /// `x(u, v) = (u, v, 0)`.
    Plane,
    /// Colatitude `u`, longitude `v`: `R (sin u cos v, sin u sin v, cos u)`.
    Sphere { radius: f64 },
    /// Angle `u`, height `v`: `(r cos u, r sin u, v)`.
    Cylinder { radius: f64 },
    /// Tube angle `u`, axial angle `v`:
    /// `((R + r cos u) cos v, (R + r cos u) sin v, r sin u)`.
    Torus { major: f64, minor: f64 },
    /// Height field `x(u, v) = (u, v, f(u, v))`.
    Graph { f: Expr },
    /// Three user expressions, one per Euclidean component.
    Dsl { components: [Expr; 3] },
}

/// An oriented parametric patch.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    kind: PatchKind,
    domain: Domain,
    /// When set, the unit normal is `-(x_u x x_v)/|x_u x x_v|`.
    flip_orientation: bool,
}

impl SurfacePatch {
    pub fn plane() -> Self {
        Self {
            kind: PatchKind::Plane,
            domain: Domain::unbounded(),
            flip_orientation: false,
        }
    }

    pub fn sphere(radius: f64) -> Self {
        Self {
            kind: PatchKind::Sphere { radius },
            domain: Domain {
                u: Axis::Interval {
                    lo: 0.0,
                    hi: std::f64::consts::PI,
                },
                v: Axis::Unbounded,
            },
            flip_orientation: false,
        }
    }

    pub fn cylinder(radius: f64) -> Self {
        Self {
            kind: PatchKind::Cylinder { radius },
            domain: Domain::unbounded(),
            flip_orientation: false,
        }
    }

    pub fn torus(major: f64, minor: f64) -> Self {
        Self {
            kind: PatchKind::Torus { major, minor },
            domain: Domain::unbounded(),
            flip_orientation: false,
        }
    }

    /// Height field over the (u, v) plane, `z = f(u, v)`.
    pub fn graph(expr: &str, domain: Domain) -> Result<Self> {
        Ok(Self {
            kind: PatchKind::Graph {
                f: crate::expr::parse_expr(expr, &["u", "v"])?,
            },
            domain,
            flip_orientation: false,
        })
    }

    /// Patch from a component triple like `"(cos(u), sin(u), v)"`.
    pub fn from_dsl(text: &str, domain: Domain) -> Result<Self> {
        Ok(Self {
            kind: PatchKind::Dsl {
                components: parse_triple(text, &["u", "v"])?,
            },
            domain,
            flip_orientation: false,
        })
    }

    pub fn with_flipped_orientation(mut self, flip: bool) -> Self {
        self.flip_orientation = flip;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn orientation_flipped(&self) -> bool {
        self.flip_orientation
    }

    /// Human-readable record of the normal convention, embedded in reports.
    pub fn orientation_note(&self) -> String {
        if self.flip_orientation {
            "n = -(x_u x x_v)/|x_u x x_v| (flipped)".to_string()
        } else {
            "n = (x_u x x_v)/|x_u x x_v|".to_string()
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PatchKind::Plane => "plane",
            PatchKind::Sphere { .. } => "sphere",
            PatchKind::Cylinder { .. } => "cylinder",
            PatchKind::Torus { .. } => "torus",
            PatchKind::Graph { .. } => "graph",
            PatchKind::Dsl { .. } => "dsl",
        }
    }

    fn check_domain(&self, u: f64, v: f64) -> Result<()> {
        if !self.domain.contains(u, v) {
            return Err(Error::SurfaceDomain {
                u,
                v,
                domain: self.domain.to_string(),
            });
        }
        Ok(())
    }

    /// Position jet at jet-valued parameters, with domain and regularity
    /// checks. When `u`, `v` are jets in a curve parameter the result carries
    /// the position derivatives along the curve.
    pub fn eval(&self, u: &Jet, v: &Jet) -> Result<JetVec3> {
        let x = self.eval_position(u, v)?;
        // regularity is a point property; order-0 partials keep it cheap
        let u0 = Jet::constant(u.value(), 0)?;
        let v0 = Jet::constant(v.value(), 0)?;
        let xu = self.analytic_partial(&u0, &v0, true)?;
        let xv = self.analytic_partial(&u0, &v0, false)?;
        let cross_norm2 = xu.cross(&xv).norm_squared().value();
        if cross_norm2 < REGULARITY_EPS * REGULARITY_EPS {
            return Err(Error::IrregularPoint {
                u: u.value(),
                v: v.value(),
                norm: cross_norm2.sqrt(),
            });
        }
        Ok(x)
    }

    /// Position jet with the domain check only. Internal fast path for dense
    /// curve evaluation, where the frame computation re-detects irregular
    /// points anyway.
    pub(crate) fn eval_position(&self, u: &Jet, v: &Jet) -> Result<JetVec3> {
        self.check_domain(u.value(), v.value())?;
        let order = u.order();
        match &self.kind {
            PatchKind::Plane => Ok(JetVec3::new(u.clone(), v.clone(), Jet::zero(order))),
            PatchKind::Sphere { radius } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                Ok(JetVec3::new(
                    su.mul(&cv).scale(*radius),
                    su.mul(&sv).scale(*radius),
                    cu.scale(*radius),
                ))
            }
            PatchKind::Cylinder { radius } => {
                let (su, cu) = u.sin_cos();
                Ok(JetVec3::new(cu.scale(*radius), su.scale(*radius), v.clone()))
            }
            PatchKind::Torus { major, minor } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                let ring = cu.scale(*minor).add_scalar(*major);
                Ok(JetVec3::new(
                    ring.mul(&cv),
                    ring.mul(&sv),
                    su.scale(*minor),
                ))
            }
            PatchKind::Graph { f } => {
                let z = f.eval(&[u.clone(), v.clone()])?;
                Ok(JetVec3::new(u.clone(), v.clone(), z))
            }
            PatchKind::Dsl { components } => {
                let vars = [u.clone(), v.clone()];
                Ok(JetVec3::new(
                    components[0].eval(&vars)?,
                    components[1].eval(&vars)?,
                    components[2].eval(&vars)?,
                ))
            }
        }
    }

    /// Unit surface normal as jets, `n = +/- (x_u x x_v)/|x_u x x_v|`.
    ///
    /// When `u`, `v` are jets in a curve parameter, the partials are
    /// evaluated along the curve, so the normal carries its derivatives
    /// along the curve as well.
    pub fn unit_normal(&self, u: &Jet, v: &Jet) -> Result<JetVec3> {
        let (xu, xv) = self.tangents(u, v)?;
        let cross = xu.cross(&xv);
        let norm2 = cross.norm_squared();
        if norm2.value() < REGULARITY_EPS * REGULARITY_EPS {
            return Err(Error::IrregularPoint {
                u: u.value(),
                v: v.value(),
                norm: norm2.value().sqrt(),
            });
        }
        let n = cross.normalize()?;
        Ok(if self.flip_orientation { n.neg() } else { n })
    }

    /// `(x_u, x_v)` evaluated at jet-valued parameters. Each partial is
    /// formed analytically per kind (expression patches are differentiated
    /// symbolically), so the result is exact to the jet order.
    pub fn tangents(&self, u: &Jet, v: &Jet) -> Result<(JetVec3, JetVec3)> {
        self.check_domain(u.value(), v.value())?;
        let xu = self.analytic_partial(u, v, true)?;
        let xv = self.analytic_partial(u, v, false)?;
        Ok((xu, xv))
    }

    /// Partial derivative in one surface parameter evaluated at jet-valued
    /// (u, v): exact for every kind, including expression patches (via
    /// symbolic differentiation of the AST).
    fn analytic_partial(&self, u: &Jet, v: &Jet, wrt_u: bool) -> Result<JetVec3> {
        match &self.kind {
            PatchKind::Plane => {
                let order = u.order();
                let (a, b) = if wrt_u { (1.0, 0.0) } else { (0.0, 1.0) };
                JetVec3::constant(a, b, 0.0, order)
            }
            PatchKind::Sphere { radius } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                if wrt_u {
                    Ok(JetVec3::new(
                        cu.mul(&cv).scale(*radius),
                        cu.mul(&sv).scale(*radius),
                        su.scale(-*radius),
                    ))
                } else {
                    Ok(JetVec3::new(
                        su.mul(&sv).scale(-*radius),
                        su.mul(&cv).scale(*radius),
                        Jet::zero(u.order()),
                    ))
                }
            }
            PatchKind::Cylinder { radius } => {
                let order = u.order();
                if wrt_u {
                    let (su, cu) = u.sin_cos();
                    Ok(JetVec3::new(
                        su.scale(-*radius),
                        cu.scale(*radius),
                        Jet::zero(order),
                    ))
                } else {
                    JetVec3::constant(0.0, 0.0, 1.0, order)
                }
            }
            PatchKind::Torus { major, minor } => {
                let (su, cu) = u.sin_cos();
                let (sv, cv) = v.sin_cos();
                if wrt_u {
                    Ok(JetVec3::new(
                        su.mul(&cv).scale(-*minor),
                        su.mul(&sv).scale(-*minor),
                        cu.scale(*minor),
                    ))
                } else {
                    let ring = cu.scale(*minor).add_scalar(*major);
                    Ok(JetVec3::new(ring.mul(&sv).neg(), ring.mul(&cv), Jet::zero(u.order())))
                }
            }
            PatchKind::Graph { f } => {
                let order = u.order();
                let df = differentiate_expr(f, if wrt_u { 0 } else { 1 });
                let dz = df.eval(&[u.clone(), v.clone()])?;
                let (a, b) = if wrt_u { (1.0, 0.0) } else { (0.0, 1.0) };
                Ok(JetVec3::new(
                    Jet::constant(a, order)?,
                    Jet::constant(b, order)?,
                    dz,
                ))
            }
            PatchKind::Dsl { components } => {
                let vars = [u.clone(), v.clone()];
                let idx = if wrt_u { 0 } else { 1 };
                Ok(JetVec3::new(
                    differentiate_expr(&components[0], idx).eval(&vars)?,
                    differentiate_expr(&components[1], idx).eval(&vars)?,
                    differentiate_expr(&components[2], idx).eval(&vars)?,
                ))
            }
        }
    }
}

/// Symbolic partial derivative of an expression tree with respect to the
/// variable at `var_index`.
pub fn differentiate_expr(e: &Expr, var_index: usize) -> Expr {
    use crate::expr::Func;
    match e {
        Expr::Number(_) => Expr::Number(0.0),
        Expr::Var(i) => Expr::Number(if *i == var_index { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::Neg(Box::new(differentiate_expr(a, var_index))),
        Expr::Add(a, b) => Expr::Add(
            Box::new(differentiate_expr(a, var_index)),
            Box::new(differentiate_expr(b, var_index)),
        ),
        Expr::Sub(a, b) => Expr::Sub(
            Box::new(differentiate_expr(a, var_index)),
            Box::new(differentiate_expr(b, var_index)),
        ),
        Expr::Mul(a, b) => Expr::Add(
            Box::new(Expr::Mul(
                Box::new(differentiate_expr(a, var_index)),
                b.clone(),
            )),
            Box::new(Expr::Mul(
                a.clone(),
                Box::new(differentiate_expr(b, var_index)),
            )),
        ),
        Expr::Div(a, b) => {
            // (a/b)' = a'/b - a b' / b^2
            Expr::Sub(
                Box::new(Expr::Div(
                    Box::new(differentiate_expr(a, var_index)),
                    b.clone(),
                )),
                Box::new(Expr::Div(
                    Box::new(Expr::Mul(
                        a.clone(),
                        Box::new(differentiate_expr(b, var_index)),
                    )),
                    Box::new(Expr::Mul(b.clone(), b.clone())),
                )),
            )
        }
        Expr::Pow(a, b) => {
            if let Expr::Number(k) = **b {
                // (a^k)' = k a^(k-1) a'
                Expr::Mul(
                    Box::new(Expr::Mul(
                        Box::new(Expr::Number(k)),
                        Box::new(Expr::Pow(a.clone(), Box::new(Expr::Number(k - 1.0)))),
                    )),
                    Box::new(differentiate_expr(a, var_index)),
                )
            } else {
                // a^b = exp(b ln a): (a^b)' = a^b (b' ln a + b a'/a)
                let ln_a = Expr::Call(Func::Log, a.clone());
                let term1 = Expr::Mul(
                    Box::new(differentiate_expr(b, var_index)),
                    Box::new(ln_a),
                );
                let term2 = Expr::Div(
                    Box::new(Expr::Mul(b.clone(), Box::new(differentiate_expr(a, var_index)))),
                    a.clone(),
                );
                Expr::Mul(
                    Box::new(e.clone()),
                    Box::new(Expr::Add(Box::new(term1), Box::new(term2))),
                )
            }
        }
        Expr::Call(f, a) => {
            let da = differentiate_expr(a, var_index);
            let outer = match f {
                Func::Sin => Expr::Call(Func::Cos, a.clone()),
                Func::Cos => Expr::Neg(Box::new(Expr::Call(Func::Sin, a.clone()))),
                Func::Exp => Expr::Call(Func::Exp, a.clone()),
                Func::Log => Expr::Div(Box::new(Expr::Number(1.0)), a.clone()),
                Func::Sqrt => Expr::Div(
                    Box::new(Expr::Number(0.5)),
                    Box::new(Expr::Call(Func::Sqrt, a.clone())),
                ),
                Func::Atan => Expr::Div(
                    Box::new(Expr::Number(1.0)),
                    Box::new(Expr::Add(
                        Box::new(Expr::Number(1.0)),
                        Box::new(Expr::Mul(a.clone(), a.clone())),
                    )),
                ),
            };
            Expr::Mul(Box::new(outer), Box::new(da))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn const_jets(u: f64, v: f64, order: usize) -> (Jet, Jet) {
        (
            Jet::constant(u, order).unwrap(),
            Jet::constant(v, order).unwrap(),
        )
    }

    #[test]
    fn canonical_points() {
        let sphere = SurfacePatch::sphere(1.0);
        let (u, v) = const_jets(FRAC_PI_2, 0.0, 2);
        let x = sphere.eval(&u, &v).unwrap();
        let [px, py, pz] = x.value();
        assert!((px - 1.0).abs() < 1e-15 && py.abs() < 1e-15 && pz.abs() < 1e-15);

        let plane = SurfacePatch::plane();
        let (u, v) = const_jets(0.3, -0.7, 2);
        assert_eq!(plane.eval(&u, &v).unwrap().value(), [0.3, -0.7, 0.0]);
    }

    #[test]
    fn sphere_outward_normal() {
        let sphere = SurfacePatch::sphere(1.0);
        let (u, v) = const_jets(FRAC_PI_2, 0.0, 3);
        let n = sphere.unit_normal(&u, &v).unwrap().value();
        assert!((n[0] - 1.0).abs() < 1e-12);
        assert!(n[1].abs() < 1e-12 && n[2].abs() < 1e-12);

        let flipped = SurfacePatch::sphere(1.0).with_flipped_orientation(true);
        let n = flipped.unit_normal(&u, &v).unwrap().value();
        assert!((n[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_and_cylinder_normals() {
        let plane = SurfacePatch::plane();
        let (u, v) = const_jets(2.0, 3.0, 2);
        assert_eq!(plane.unit_normal(&u, &v).unwrap().value(), [0.0, 0.0, 1.0]);

        let cyl = SurfacePatch::cylinder(1.0);
        let (u, v) = const_jets(0.0, 5.0, 2);
        let n = cyl.unit_normal(&u, &v).unwrap().value();
        assert!((n[0] - 1.0).abs() < 1e-12);
        assert!(n[1].abs() < 1e-12 && n[2].abs() < 1e-12);
    }

    #[test]
    fn normals_match_closed_forms_at_random_points() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let sphere = SurfacePatch::sphere(2.0);
        let cylinder = SurfacePatch::cylinder(0.7);
        let torus = SurfacePatch::torus(2.0, 1.0);
        for _ in 0..100 {
            let uu = 0.2 + 2.7 * rnd();
            let vv = 6.0 * rnd() - 3.0;
            let (u, v) = const_jets(uu, vv, 2);

            let n = sphere.unit_normal(&u, &v).unwrap().value();
            let exact = [uu.sin() * vv.cos(), uu.sin() * vv.sin(), uu.cos()];
            for k in 0..3 {
                assert!((n[k] - exact[k]).abs() < 1e-10);
            }

            let n = cylinder.unit_normal(&u, &v).unwrap().value();
            let exact = [uu.cos(), uu.sin(), 0.0];
            for k in 0..3 {
                assert!((n[k] - exact[k]).abs() < 1e-10);
            }

            // torus cross product points toward the tube axis
            let n = torus.unit_normal(&u, &v).unwrap().value();
            let exact = [
                -uu.cos() * vv.cos(),
                -uu.cos() * vv.sin(),
                -uu.sin(),
            ];
            for k in 0..3 {
                assert!((n[k] - exact[k]).abs() < 1e-10, "torus {k}: {} vs {}", n[k], exact[k]);
            }
        }
    }

    #[test]
    fn normal_orthogonal_to_tangents() {
        let graph = SurfacePatch::graph("0.5*sin(u)*cos(v)", Domain::rectangle(-5.0, 5.0, -5.0, 5.0)).unwrap();
        let (u, v) = const_jets(0.4, 1.1, 3);
        let n = graph.unit_normal(&u, &v).unwrap();
        let (xu, xv) = graph.tangents(&u, &v).unwrap();
        assert!(n.dot(&xu).value().abs() < 1e-10);
        assert!(n.dot(&xv).value().abs() < 1e-10);
        let norm = n.norm().unwrap().value();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dsl_matches_builtin_jets() {
        let builtin = SurfacePatch::torus(2.0, 1.0);
        let dsl = SurfacePatch::from_dsl(
            "((2+cos(u))*cos(v), (2+cos(u))*sin(v), sin(u))",
            Domain::unbounded(),
        )
        .unwrap();
        let u = Jet::variable(PI / 3.0, 5).unwrap();
        let v = Jet::constant(PI / 4.0, 5).unwrap();
        let a = builtin.eval(&u, &v).unwrap();
        let b = dsl.eval(&u, &v).unwrap();
        for k in 0..=5 {
            assert!((a.x.coeffs()[k] - b.x.coeffs()[k]).abs() < 1e-14);
            assert!((a.y.coeffs()[k] - b.y.coeffs()[k]).abs() < 1e-14);
            assert!((a.z.coeffs()[k] - b.z.coeffs()[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_violations() {
        let sphere = SurfacePatch::sphere(1.0);
        let (u, v) = const_jets(0.0, 0.2, 2); // the pole is excluded
        assert!(matches!(
            sphere.eval(&u, &v),
            Err(Error::SurfaceDomain { .. })
        ));
        let g = SurfacePatch::graph("u*v", Domain::rectangle(0.0, 1.0, 0.0, 1.0)).unwrap();
        let (u, v) = const_jets(1.5, 0.5, 2);
        assert!(g.eval(&u, &v).is_err());
    }
}
