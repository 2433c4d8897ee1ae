//! Darboux frame, invariants and independent Frenet cross-checks.
//!
//! The adapted frame along a surface curve is `{T, Q, n}` with `T` the unit
//! tangent, `n` the oriented surface normal and `Q = n x T`. The frame
//! derivative rows
//!
//! ```text
//! T' =            kg Q + kn n
//! Q' = -kg T           + tg n
//! n' = -kn T  - tg Q
//! ```
//!
//! define geodesic curvature `kg`, normal curvature `kn` and geodesic
//! torsion `tg`. The squared curvature is `kg^2 + kn^2` and the torsion is
//! `tg + (kg kn' - kg' kn)/(kg^2 + kn^2)`; it degenerates when the curvature
//! vanishes, which the standing assumption excludes.
//!
//! Everything here is extracted from jets of the embedded curve, so the
//! invariant derivatives are exact to the jet order; no sampled invariant is
//! ever differenced.

use crate::curve::{CurveOnSurface, KAPPA2_MIN};
use crate::error::{Error, Result};
use crate::jet::{Jet, JetVec3};

/// Frame and invariants at one station, everything carried as jets in arc
/// length. Input to the residual evaluators.
#[derive(Debug, Clone)]
pub struct InvariantJets {
    pub s: f64,
    /// Unit tangent (embedding derivative).
    pub t: JetVec3,
    /// Tangent normal `Q = n x T`.
    pub q: JetVec3,
    /// Oriented unit surface normal.
    pub n: JetVec3,
    pub kg: Jet,
    pub kn: Jet,
    pub tg: Jet,
    pub kappa2: Jet,
    pub tau: Jet,
}

/// Compute frame and invariant jets at `s` from an embedding of the given
/// jet order. With `embed_order = 7` the invariants carry derivatives to
/// order three and the torsion to order three, which is everything the
/// residual evaluators consume.
pub fn invariant_jets(curve: &CurveOnSurface, s: f64, embed_order: usize) -> Result<InvariantJets> {
    assert!(embed_order >= 3, "invariants need at least order-3 embeddings");
    let (u, v) = curve.uv_jets(s, embed_order)?;
    let alpha = curve.patch().eval_position(&u, &v)?;
    let t = alpha.differentiate();
    let frame_order = embed_order - 1;
    let n = curve.patch().unit_normal(&u, &v)?.resize(frame_order);
    let q = n.cross(&t);

    let deriv_order = frame_order - 1;
    let tp = t.differentiate();
    let q_low = q.resize(deriv_order);
    let n_low = n.resize(deriv_order);
    let kg = tp.dot(&q_low);
    let kn = tp.dot(&n_low);
    let tg = q.differentiate().dot(&n_low);
    let kappa2 = kg.square().add(&kn.square());
    if kappa2.value() < KAPPA2_MIN {
        return Err(Error::CurvatureDegeneracy {
            s,
            kappa2: kappa2.value(),
        });
    }
    let tau_order = deriv_order - 1;
    let kg_p = kg.differentiate();
    let kn_p = kn.differentiate();
    let numer = kg.resize(tau_order).mul(&kn_p).sub(&kg_p.mul(&kn.resize(tau_order)));
    let tau = tg.resize(tau_order).add(&numer.div(&kappa2.resize(tau_order))?);

    Ok(InvariantJets {
        s,
        t,
        q,
        n,
        kg,
        kn,
        tg,
        kappa2,
        tau,
    })
}

/// Tangent-normal jets `Q = n x T` along the curve, without the curvature
/// guard: the frame itself stays well-defined on curvature-degenerate
/// curves, and the variation displacement only needs `Q`.
pub(crate) fn frame_q_jet(
    curve: &CurveOnSurface,
    s: f64,
    embed_order: usize,
) -> Result<JetVec3> {
    let (u, v) = curve.uv_jets(s, embed_order)?;
    let alpha = curve.patch().eval_position(&u, &v)?;
    let t = alpha.differentiate();
    let n = curve.patch().unit_normal(&u, &v)?.resize(embed_order - 1);
    Ok(n.cross(&t))
}

/// Frame and invariants with value-plus-three-derivatives extracted, plus
/// the tangent-plane components of `Q`.
#[derive(Debug, Clone)]
pub struct DarbouxState {
    pub s: f64,
    /// Unit tangent at the station.
    pub tangent: [f64; 3],
    /// `Q = n x T` at the station.
    pub tangent_normal: [f64; 3],
    /// Oriented unit surface normal at the station.
    pub normal: [f64; 3],
    /// Components of `Q = p x_u + q x_v`.
    pub p: f64,
    pub q: f64,
    /// `[value, d/ds, d2/ds2, d3/ds3]` of the geodesic curvature.
    pub kg: [f64; 4],
    /// Same layout for the normal curvature.
    pub kn: [f64; 4],
    /// Same layout for the geodesic torsion.
    pub tg: [f64; 4],
    /// `kg^2 + kn^2` at the station.
    pub kappa2: f64,
    /// `[value, d/ds, d2/ds2, d3/ds3]` of the torsion.
    pub tau: [f64; 4],
}

fn first_four(j: &Jet) -> Result<[f64; 4]> {
    Ok([
        j.derivative(0)?,
        j.derivative(1)?,
        j.derivative(2)?,
        j.derivative(3)?,
    ])
}

/// Full Darboux state at one arc-length station.
pub fn darboux_state(curve: &CurveOnSurface, s: f64) -> Result<DarbouxState> {
    let inv = invariant_jets(curve, s, crate::jet::DEFAULT_ORDER)?;

    // tangent-plane components of Q from the Gram system
    let (u, v) = curve.uv_jets(s, 0)?;
    let (xu, xv) = curve.patch().tangents(&u, &v)?;
    let xu = xu.value();
    let xv = xv.value();
    let q_vec = inv.q.value();
    let e = crate::curve::dot3(xu, xu);
    let f = crate::curve::dot3(xu, xv);
    let g = crate::curve::dot3(xv, xv);
    let a = crate::curve::dot3(q_vec, xu);
    let b = crate::curve::dot3(q_vec, xv);
    let det = e * g - f * f;
    let p = (a * g - b * f) / det;
    let q_comp = (b * e - a * f) / det;

    Ok(DarbouxState {
        s,
        tangent: inv.t.value(),
        tangent_normal: q_vec,
        normal: inv.n.value(),
        p,
        q: q_comp,
        kg: first_four(&inv.kg)?,
        kn: first_four(&inv.kn)?,
        tg: first_four(&inv.tg)?,
        kappa2: inv.kappa2.value(),
        tau: first_four(&inv.tau)?,
    })
}

/// Frenet curvature and torsion straight from embedded-curve jets:
/// `kappa = |a' x a''| / |a'|^3` and `tau = <a' x a'', a'''> / |a' x a''|^2`.
///
/// This path never touches the Darboux frame, so it serves as an independent
/// oracle for the invariant identities.
pub fn frenet_oracles(curve: &CurveOnSurface, s: f64) -> Result<(f64, f64)> {
    let alpha = curve.embed(s, 3)?;
    let d1 = alpha.differentiate();
    let d2 = d1.differentiate();
    let d3 = d2.differentiate();
    let v1 = d1.value();
    let v2 = d2.value();
    let v3 = d3.value();
    let c = crate::curve::cross3(v1, v2);
    let c_norm2 = crate::curve::dot3(c, c);
    let speed2 = crate::curve::dot3(v1, v1);
    let kappa = c_norm2.sqrt() / speed2.powf(1.5);
    if kappa < 1e-9 {
        return Err(Error::CurvatureDegeneracy {
            s,
            kappa2: kappa * kappa,
        });
    }
    let tau = crate::curve::dot3(c, v3) / c_norm2;
    Ok((kappa, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SurfacePatch;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn sphere_equator() -> CurveOnSurface {
        CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::sphere(1.0),
            &FRAC_PI_2.to_string(),
            "s",
            PI,
            1.05 * PI,
        )
        .unwrap()
    }

    fn unit_cylinder_helix() -> CurveOnSurface {
        // pitch angle pi/4: u = s cos(pi/4), v = s sin(pi/4)
        let c = std::f64::consts::FRAC_1_SQRT_2;
        CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::cylinder(1.0),
            &format!("{c}*s"),
            &format!("{c}*s"),
            4.0,
            4.2,
        )
        .unwrap()
    }

    #[test]
    fn equator_invariants() {
        let curve = sphere_equator();
        for s in [0.0, 0.7, 2.0, PI] {
            let st = darboux_state(&curve, s).unwrap();
            assert!(st.kg[0].abs() < 1e-10, "kg at {s}: {}", st.kg[0]);
            assert!((st.kn[0] + 1.0).abs() < 1e-10, "kn at {s}: {}", st.kn[0]);
            assert!(st.tg[0].abs() < 1e-10, "tg at {s}: {}", st.tg[0]);
            assert!(st.tau[0].abs() < 1e-9, "tau at {s}: {}", st.tau[0]);
            assert!((st.kappa2 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn plane_curve_invariants() {
        // parabola-like arc reparameterized to arc length
        let general = CurveOnSurface::general_from_exprs(
            SurfacePatch::plane(),
            "s",
            "0.5*s^2",
            2.0,
            2.2,
        )
        .unwrap();
        let curve = general.reparameterize_arclength(1e-12).unwrap();
        for i in 0..10 {
            let s = curve.length() * i as f64 / 9.0;
            let st = darboux_state(&curve, s).unwrap();
            assert!(st.kn[0].abs() < 1e-9);
            assert!(st.tg[0].abs() < 1e-9);
            assert!(st.tau[0].abs() < 1e-8);
            // plane-curve curvature of y = x^2/2 is (1 + x^2)^(-3/2)
            let x = st.s; // placeholder, remapped below
            let _ = x;
        }
        // spot value: at sigma = 0 the curvature is 1, and s(0) = 0
        let st = darboux_state(&curve, 0.0).unwrap();
        assert!((st.kg[0].abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn helix_invariants_constant() {
        let curve = unit_cylinder_helix();
        for s in [0.0, 1.0, 2.5, 4.0] {
            let st = darboux_state(&curve, s).unwrap();
            assert!(st.kg[0].abs() < 1e-10);
            assert!((st.kn[0] + 0.5).abs() < 1e-10, "kn {}", st.kn[0]);
            assert!((st.tg[0] - 0.5).abs() < 1e-10, "tg {}", st.tg[0]);
            assert!((st.tau[0] - 0.5).abs() < 1e-9, "tau {}", st.tau[0]);
            for k in 1..4 {
                assert!(st.kg[k].abs() < 1e-8);
                assert!(st.kn[k].abs() < 1e-8);
                assert!(st.tg[k].abs() < 1e-8);
                assert!(st.tau[k].abs() < 1e-7);
            }
        }
    }

    #[test]
    fn helix_matches_frenet_closed_form() {
        // embedded in E^3 the curve is the circular helix a = 1, b = 1 after
        // the rescaling s -> s/sqrt(2): kappa = tau = 1/2
        let curve = unit_cylinder_helix();
        let (kappa, tau) = frenet_oracles(&curve, 1.3).unwrap();
        assert!((kappa - 0.5).abs() < 1e-10);
        assert!((tau - 0.5).abs() < 1e-10);
    }

    #[test]
    fn frame_orthonormal() {
        let curve = unit_cylinder_helix();
        let st = darboux_state(&curve, 2.0).unwrap();
        let dot = |a: [f64; 3], b: [f64; 3]| crate::curve::dot3(a, b);
        assert!((dot(st.tangent, st.tangent) - 1.0).abs() < 1e-9);
        assert!((dot(st.normal, st.normal) - 1.0).abs() < 1e-9);
        assert!((dot(st.tangent_normal, st.tangent_normal) - 1.0).abs() < 1e-9);
        assert!(dot(st.tangent, st.normal).abs() < 1e-9);
        assert!(dot(st.tangent, st.tangent_normal).abs() < 1e-9);
        assert!(dot(st.normal, st.tangent_normal).abs() < 1e-9);
    }

    #[test]
    fn q_components_reconstruct_q() {
        let curve = unit_cylinder_helix();
        let st = darboux_state(&curve, 1.0).unwrap();
        let (u, v) = curve.uv_jets(1.0, 0).unwrap();
        let (xu, xv) = curve.patch().tangents(&u, &v).unwrap();
        for k in 0..3 {
            let rebuilt = st.p * xu.value()[k] + st.q * xv.value()[k];
            assert!((rebuilt - st.tangent_normal[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn straight_line_degenerates() {
        let line = CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::plane(),
            "s",
            "0",
            1.0,
            1.1,
        )
        .unwrap();
        assert!(matches!(
            darboux_state(&line, 0.5),
            Err(Error::CurvatureDegeneracy { .. })
        ));
        assert!(frenet_oracles(&line, 0.5).is_err());
    }

    #[test]
    fn sphere_curves_have_zero_geodesic_torsion() {
        let wavy = CurveOnSurface::general_from_exprs(
            SurfacePatch::sphere(1.0),
            "1.5707963267948966+0.3*sin(s)",
            "0.8*s",
            3.0,
            3.3,
        )
        .unwrap()
        .reparameterize_arclength(1e-12)
        .unwrap();
        for i in 0..20 {
            let s = wavy.length() * i as f64 / 19.0;
            let st = darboux_state(&wavy, s).unwrap();
            assert!(st.tg[0].abs() < 1e-10, "tg at {s}: {}", st.tg[0]);
        }
    }
}
