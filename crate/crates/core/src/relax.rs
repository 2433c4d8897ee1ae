//! Constrained relaxation: minimize the total square torsion over
//! discretized curves of fixed length with fixed initial point and initial
//! direction, then certify the terminal curve with the residual evaluators.
//!
//! The admissible family is maintained exactly: after every trial step the
//! iterate is projected back by renoding to equal arc length at the target
//! length, with the first node pinned and the second constrained to the
//! prescribed tangent ray. The objective gradient is plain per-node central
//! differencing, which keeps the optimizer independent of the analytic
//! residual evaluators it is meant to certify.

use crate::curve::CurveOnSurface;
use crate::elastic::{verify_relaxed_elastic, ResidualReport, Tolerances};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::surface::SurfacePatch;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Minimum node count: the quintic lift plus the high-order derivatives it
/// feeds need this much support.
pub const MIN_NODES: usize = 12;

/// Relative length-constraint tolerance maintained by projection.
pub const LENGTH_TOL: f64 = 1e-8;

/// A curve as parameter-space nodes with prescribed initial data.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteCurve {
    #[serde(skip)]
    patch: SurfacePatch,
    pub nodes: Vec<[f64; 2]>,
    pub length_target: f64,
    /// Fixed first node.
    pub origin: [f64; 2],
    /// Unit parameter-space direction of the pinned initial ray.
    pub direction: [f64; 2],
}

impl DiscreteCurve {
    pub fn patch(&self) -> &SurfacePatch {
        &self.patch
    }

    /// Quintic lift over `[0, length_target]`.
    pub fn lift(&self) -> Result<CurveOnSurface> {
        CurveOnSurface::from_points(self.patch.clone(), &self.nodes, self.length_target)
    }

    /// Lift without the sampled validation; optimizer hot path.
    fn lift_fast(&self) -> Result<CurveOnSurface> {
        CurveOnSurface::from_points_unchecked(self.patch.clone(), &self.nodes, self.length_target)
    }

    /// Objective value: geometric total square torsion of the lift.
    pub fn objective(&self, quad: QuadratureSpec) -> Result<f64> {
        Ok(self.lift_fast()?.total_square_torsion_general(quad)?.0)
    }
}

/// Sample a curve at equal arc length into a discrete curve.
pub fn discretize(curve: &CurveOnSurface, n: usize) -> Result<DiscreteCurve> {
    if n < MIN_NODES {
        return Err(Error::NodeCount { n, min: MIN_NODES });
    }
    let arc = curve.reparameterize_arclength(1e-12)?;
    let l = arc.length();
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let s = l * i as f64 / (n - 1) as f64;
        let (u, v) = arc.uv_jets(s, 0)?;
        nodes.push([u.value(), v.value()]);
    }
    let (u0, v0) = arc.uv_jets(0.0, 1)?;
    let du = u0.derivative(1)?;
    let dv = v0.derivative(1)?;
    let norm = (du * du + dv * dv).sqrt();
    Ok(DiscreteCurve {
        patch: curve.patch().clone(),
        nodes,
        length_target: l,
        origin: [u0.value(), v0.value()],
        direction: [du / norm, dv / norm],
    })
}

/// Restore feasibility: renode to equal arc length at the target length with
/// the initial point and ray pinned.
///
/// When the current lift is longer than the target, renoding restricts to
/// the initial portion; when shorter, the end segment extrapolates. The
/// fixed point of the iteration is a curve of exactly the target length
/// (to [`LENGTH_TOL`]) with equal-arc-length nodes.
pub fn project_constraints(dc: &DiscreteCurve) -> Result<DiscreteCurve> {
    let mut out = dc.clone();
    let target = out.length_target;
    for _ in 0..30 {
        let total = renode_pass(&mut out)?;
        if (total - target).abs() <= LENGTH_TOL * target {
            return Ok(out);
        }
    }
    Err(Error::ProjectionDiverged {
        context: format!("length residual still above {LENGTH_TOL} after 30 renodings"),
    })
}

/// Single renoding pass used for finite-difference probes: one pass restores
/// feasibility of a slightly perturbed feasible curve to second order, which
/// is all a probe needs.
fn project_once(dc: &DiscreteCurve) -> Result<DiscreteCurve> {
    let mut out = dc.clone();
    renode_pass(&mut out)?;
    Ok(out)
}

/// One pin-and-renode sweep; returns the pre-renode total length.
fn renode_pass(out: &mut DiscreteCurve) -> Result<f64> {
    let n = out.nodes.len();
    let target = out.length_target;
    let rule = crate::quadrature::GaussLegendre::new(4);
    let newton_tol = 1e-13 * target.max(1.0);
    pin_initial(out);
    let lift = out.lift_fast()?;
    let speed = |sigma: f64| -> Result<f64> {
        Ok(lift
            .embed(sigma, 1)?
            .differentiate()
            .norm_squared()
            .value()
            .sqrt())
    };
    // per-segment cumulative lengths over the lift parameter
    let seg = target / (n - 1) as f64;
    let mut cum = vec![0.0; n];
    for i in 0..n - 1 {
        cum[i + 1] = cum[i] + rule.integrate(i as f64 * seg, (i + 1) as f64 * seg, |x| speed(x))?;
    }
    let total = cum[n - 1];
    // resample at equal fractions of the target length
    let mut nodes = vec![out.nodes[0]];
    for j in 1..n {
        let s = target * j as f64 / (n - 1) as f64;
        let sigma = if s <= total {
            let i = cum[1..]
                .iter()
                .position(|c| *c >= s)
                .unwrap_or(n - 2)
                .min(n - 2);
            let lo = i as f64 * seg;
            let frac = (s - cum[i]) / (cum[i + 1] - cum[i]);
            let mut sigma = lo + frac.clamp(0.0, 1.0) * seg;
            for _ in 0..30 {
                let g = cum[i] + rule.integrate(lo, sigma, |x| speed(x))? - s;
                if g.abs() <= newton_tol {
                    break;
                }
                sigma -= g / speed(sigma)?.max(1e-12);
            }
            sigma
        } else {
            // linear extension beyond the available length
            target + (s - total) / speed(target)?.max(1e-12)
        };
        let (u, v) = lift.uv_jets(sigma, 0)?;
        nodes.push([u.value(), v.value()]);
    }
    out.nodes = nodes;
    pin_initial(out);
    Ok(total)
}

fn pin_initial(dc: &mut DiscreteCurve) {
    dc.nodes[0] = dc.origin;
    let d = dc.direction;
    let rel = [
        dc.nodes[1][0] - dc.origin[0],
        dc.nodes[1][1] - dc.origin[1],
    ];
    let t = (rel[0] * d[0] + rel[1] * d[1]).max(1e-9 * dc.length_target);
    dc.nodes[1] = [dc.origin[0] + t * d[0], dc.origin[1] + t * d[1]];
}

/// Step-size rule for the descent loop.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed { step: f64 },
    BacktrackingArmijo,
}

/// Optimizer configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RelaxConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Central-difference step for the objective gradient.
    pub grad_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    pub step_init: f64,
    pub step_growth: f64,
    pub max_backtracks: usize,
    /// Stop when the gradient norm falls below this.
    pub tol_grad: f64,
    /// Stop when the objective falls below this.
    pub f_target: f64,
    /// Seed for the randomized-restart perturbation.
    pub seed: u64,
    pub restarts: usize,
    /// Quadrature for the objective.
    pub quad: QuadratureSpec,
    /// Certification tolerances for the terminal curve. Spline lifts are
    /// reduced-accuracy, so these default looser than the analytic-curve
    /// defaults.
    pub certify: Tolerances,
    pub report_stations: usize,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            step_rule: StepRule::BacktrackingArmijo,
            grad_step: 1e-5,
            armijo_c: 1e-4,
            step_init: 1.0,
            step_growth: 1.5,
            max_backtracks: 40,
            tol_grad: 1e-10,
            f_target: 1e-16,
            seed: 0,
            restarts: 2,
            quad: QuadratureSpec {
                points: 16,
                panels: 8,
            },
            certify: Tolerances {
                interior: 5e-2,
                boundary: 5e-2,
            },
            report_stations: 33,
        }
    }
}

/// Why the descent loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientSmall,
    ObjectiveTarget,
    MaxIters,
    LineSearchFailed,
}

/// Result of a relaxation run.
#[derive(Debug, Clone)]
pub struct RelaxOutcome {
    pub curve: DiscreteCurve,
    /// Accepted objective values, starting with the initial one.
    pub history: Vec<f64>,
    /// Outer descent iterations executed (the history can be longer: the
    /// refinement stages may accept several values inside one iteration).
    pub iterations: usize,
    pub termination: Termination,
    /// Certification of the terminal curve by the residual evaluators.
    pub report: ResidualReport,
}

struct Coords;

impl Coords {
    /// Free coordinates: the ray parameter of node 1 plus nodes 2..n-1.
    fn pack(dc: &DiscreteCurve) -> Vec<f64> {
        let d = dc.direction;
        let rel = [
            dc.nodes[1][0] - dc.origin[0],
            dc.nodes[1][1] - dc.origin[1],
        ];
        let mut x = vec![rel[0] * d[0] + rel[1] * d[1]];
        for node in &dc.nodes[2..] {
            x.push(node[0]);
            x.push(node[1]);
        }
        x
    }

    fn unpack(dc: &DiscreteCurve, x: &[f64]) -> DiscreteCurve {
        let mut out = dc.clone();
        let t = x[0].max(1e-9 * dc.length_target);
        out.nodes[0] = dc.origin;
        out.nodes[1] = [
            dc.origin[0] + t * dc.direction[0],
            dc.origin[1] + t * dc.direction[1],
        ];
        for (i, chunk) in x[1..].chunks_exact(2).enumerate() {
            out.nodes[i + 2] = [chunk[0], chunk[1]];
        }
        out
    }
}

/// Spectral preconditioner for the descent direction.
///
/// The torsion objective is dominated by high-order differences of the
/// nodes, so its stiffness spans roughly `(k_max/k_min)^6` (seven orders of
/// magnitude at 32 nodes) across node-space frequencies, and any raw
/// gradient step is throttled by the stiffest mode. The displacement modes
/// of this basis — a two-channel pinned-free sine family over node index —
/// approximately diagonalize that structure, so per-mode curvatures
/// (estimated by the same finite differencing as the gradient) turn the
/// gradient into a near-Newton step at first-order cost.
struct ModeBasis {
    /// Orthonormal direction vectors in packed-coordinate space.
    vectors: Vec<Vec<f64>>,
    /// Second-difference curvature along each vector.
    curvature: Vec<f64>,
}

impl ModeBasis {
    fn build(dc: &DiscreteCurve) -> Self {
        let n = dc.nodes.len();
        let dim = 2 * n - 3;
        let mut raw: Vec<Vec<f64>> = Vec::new();
        // interleave the channels so the kept set spans both evenly
        for j in 1..n {
            for channel in 0..2 {
                let mut du = vec![0.0; n];
                let mut dv = vec![0.0; n];
                for (i, slot) in (if channel == 0 { &mut du } else { &mut dv })
                    .iter_mut()
                    .enumerate()
                    .skip(1)
                {
                    let phase =
                        std::f64::consts::PI * (j as f64 - 0.5) * i as f64 / (n - 1) as f64;
                    *slot = phase.sin();
                }
                raw.push(pack_displacement(dc, &du, &dv));
            }
        }
        // modified Gram-Schmidt; the ray constraint collapses one direction,
        // which drops out by its vanishing norm
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for mut v in raw {
            for b in &vectors {
                let proj: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                vectors.push(v);
                if vectors.len() == dim {
                    break;
                }
            }
        }
        let m = vectors.len();
        Self {
            vectors,
            curvature: vec![1.0; m],
        }
    }

    /// Re-estimate the per-mode curvatures about the current iterate by
    /// symmetric second differences of the objective.
    fn refresh(&mut self, dc: &DiscreteCurve, x: &[f64], f0: f64, cfg: &RelaxConfig) -> Result<()> {
        let h = 1e-4;
        let estimates: Vec<Result<f64>> = self
            .vectors
            .par_iter()
            .map(|phi| {
                let probe = |sign: f64| -> Result<f64> {
                    let xt: Vec<f64> = x
                        .iter()
                        .zip(phi)
                        .map(|(xi, pi)| xi + sign * h * pi)
                        .collect();
                    project_once(&Coords::unpack(dc, &xt))?.objective(cfg.quad)
                };
                Ok((probe(1.0)? - 2.0 * f0 + probe(-1.0)?) / (h * h))
            })
            .collect();
        for (slot, e) in self.curvature.iter_mut().zip(estimates) {
            *slot = e?;
        }
        Ok(())
    }

    /// Curvature-scaled gradient: `sum_j (<g, phi_j> / c_j) phi_j` with the
    /// curvatures floored positive, so `<g, d> > 0` always holds.
    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let c_max = self.curvature.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let floor = (1e-9 * c_max).max(1e-12);
        let mut d = vec![0.0; grad.len()];
        for (phi, c) in self.vectors.iter().zip(&self.curvature) {
            let coef: f64 = grad.iter().zip(phi).map(|(g, p)| g * p).sum();
            let scale = coef / c.abs().max(floor);
            for (di, pi) in d.iter_mut().zip(phi) {
                *di += scale * pi;
            }
        }
        d
    }
}

/// Map a per-node displacement field to packed coordinates: node 0 is
/// dropped (pinned) and node 1 keeps only its component along the ray.
fn pack_displacement(dc: &DiscreteCurve, du: &[f64], dv: &[f64]) -> Vec<f64> {
    let d = dc.direction;
    let mut x = vec![du[1] * d[0] + dv[1] * d[1]];
    for i in 2..du.len() {
        x.push(du[i]);
        x.push(dv[i]);
    }
    x
}

/// Secant memory over the finite-difference gradient stream (the standard
/// two-loop recursion), seeded by the mode-basis scaling. The basis handles
/// the frequency stiffness; the secant pairs capture the cross-mode coupling
/// of the shallow valley the basis alone cannot see.
struct GradientMemory {
    pairs: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    capacity: usize,
}

impl GradientMemory {
    fn new(capacity: usize) -> Self {
        Self {
            pairs: std::collections::VecDeque::new(),
            capacity,
        }
    }

    fn clear(&mut self) {
        self.pairs.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        let yy: f64 = y.iter().map(|a| a * a).sum();
        // skip pairs with unusable curvature
        if sy > 1e-10 * (ss * yy).sqrt() && sy.is_finite() {
            if self.pairs.len() == self.capacity {
                self.pairs.pop_front();
            }
            self.pairs.push_back((s, y, 1.0 / sy));
        }
    }

    fn direction(&self, grad: &[f64], basis: &ModeBasis) -> Vec<f64> {
        let mut q = grad.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * s.iter().zip(&q).map(|(si, qi)| si * qi).sum::<f64>();
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let mut r = basis.direction(&q);
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * y.iter().zip(&r).map(|(yi, ri)| yi * ri).sum::<f64>();
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += (a - b) * si;
            }
        }
        r
    }
}

/// One cyclic minimization sweep over the basis modes: an exact-ish 1D
/// Newton step along each mode in turn, accepted only on decrease.
///
/// Combined-direction steps suffer from model error in the stiff modes
/// cancelling the small gains available in the shallow ones; a per-mode
/// sweep has no cross-mode contamination, so it drains the shallow valley
/// the combined steps cannot reach.
fn mode_sweep(
    current: &mut DiscreteCurve,
    f_current: &mut f64,
    basis: &ModeBasis,
    history: &mut Vec<f64>,
    cfg: &RelaxConfig,
) -> Result<bool> {
    let mut improved = false;
    // shallow modes first: they hold the remaining energy
    let mut order: Vec<usize> = (0..basis.vectors.len()).collect();
    order.sort_by(|a, b| {
        basis.curvature[*a]
            .abs()
            .partial_cmp(&basis.curvature[*b].abs())
            .unwrap()
    });
    for &m in &order {
        let phi = &basis.vectors[m];
        let x = Coords::pack(current);
        // probe step sized so the objective variation along the mode sits
        // far above the evaluation noise: c h^2 / 2 of order 1e-8
        let c_ref = basis.curvature[m].abs().max(1e-6);
        let h = (1.5e-4 / c_ref.sqrt()).clamp(1e-6, 0.05);
        let probe = |delta: f64| -> Result<f64> {
            let xt: Vec<f64> = x.iter().zip(phi).map(|(xi, pi)| xi + delta * pi).collect();
            project_once(&Coords::unpack(current, &xt))?.objective(cfg.quad)
        };
        let (fp, fm) = match (probe(h), probe(-h)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let slope = (fp - fm) / (2.0 * h);
        let mut curv = (fp - 2.0 * *f_current + fm) / (h * h);
        if !(curv > 0.0) {
            curv = c_ref;
        }
        if slope == 0.0 {
            continue;
        }
        let mut delta = -slope / curv;
        let predicted = 0.5 * slope * slope / curv;
        // skip modes whose attainable gain is in the noise
        if predicted < 1e-3 * *f_current {
            continue;
        }
        for _ in 0..6 {
            let xt: Vec<f64> = x.iter().zip(phi).map(|(xi, pi)| xi + delta * pi).collect();
            let hit = project_constraints(&Coords::unpack(current, &xt))
                .and_then(|p| p.objective(cfg.quad).map(|f| (p, f)))
                .ok()
                .filter(|(_, f)| *f < *f_current - 1e-4 * predicted);
            if let Some((p, f_new)) = hit {
                *current = p;
                *f_current = f_new;
                history.push(f_new);
                improved = true;
                break;
            }
            delta *= 0.5;
        }
    }
    Ok(improved)
}

/// Coupled refinement over the softest modes: estimate the local quadratic
/// model restricted to the low-curvature subspace by finite differences,
/// solve the damped model exactly, and accept the projected step only on
/// decrease. The diagonal scaling cannot see the coupling between shallow
/// modes, and it is exactly that coupling which forms the long valley where
/// plain descent creeps.
fn soft_subspace_step(
    current: &mut DiscreteCurve,
    f_current: &mut f64,
    grad: &[f64],
    basis: &ModeBasis,
    recent_steps: &std::collections::VecDeque<Vec<f64>>,
    history: &mut Vec<f64>,
    cfg: &RelaxConfig,
) -> Result<bool> {
    let dim = 12.min(basis.vectors.len());
    let x = Coords::pack(current);
    // span: recent accepted step directions (the empirical valley) first,
    // then the softest basis modes, orthonormalized together
    let mut span: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut push_vec = |span: &mut Vec<Vec<f64>>, v: &[f64]| {
        let mut w = v.to_vec();
        for b in span.iter() {
            let proj: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
        let norm: f64 = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-7 {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            span.push(w);
        }
    };
    for s in recent_steps.iter().rev().take(4) {
        push_vec(&mut span, s);
    }
    let mut order: Vec<usize> = (0..basis.vectors.len()).collect();
    order.sort_by(|a, b| {
        basis.curvature[*a]
            .abs()
            .partial_cmp(&basis.curvature[*b].abs())
            .unwrap()
    });
    for &m in &order {
        if span.len() >= dim {
            break;
        }
        push_vec(&mut span, &basis.vectors[m]);
    }
    let dim = span.len();
    if dim == 0 {
        return Ok(false);
    }

    // probe scale per direction from a cheap curvature estimate
    let pre: Vec<Result<f64>> = span
        .par_iter()
        .map(|phi| {
            let h = 1e-3;
            let shift = |sign: f64| -> Result<f64> {
                let xt: Vec<f64> = x
                    .iter()
                    .zip(phi)
                    .map(|(xi, pi)| xi + sign * h * pi)
                    .collect();
                project_once(&Coords::unpack(current, &xt))?.objective(cfg.quad)
            };
            Ok(((shift(1.0)? - 2.0 * *f_current + shift(-1.0)?) / (h * h)).abs())
        })
        .collect();
    let mut steps = Vec::with_capacity(dim);
    for c in pre {
        steps.push((1.5e-4 / c?.max(1e-6).sqrt()).clamp(1e-6, 0.05));
    }

    let probe = |coef: &[(usize, f64)]| -> Result<f64> {
        let mut xt = x.clone();
        for &(k, c) in coef {
            for (xi, pi) in xt.iter_mut().zip(&span[k]) {
                *xi += c * pi;
            }
        }
        project_once(&Coords::unpack(current, &xt))?.objective(cfg.quad)
    };

    // gradient restricted to the subspace comes from the full FD gradient
    let g_sub: Vec<f64> = span
        .iter()
        .map(|phi| grad.iter().zip(phi).map(|(g, p)| g * p).sum())
        .collect();

    // symmetric FD Hessian block
    let jobs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|i| (i..dim).map(move |j| (i, j)))
        .collect();
    let entries: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            if i == j {
                let fp = probe(&[(i, steps[i])])?;
                let fm = probe(&[(i, -steps[i])])?;
                Ok((fp - 2.0 * *f_current + fm) / (steps[i] * steps[i]))
            } else {
                let fpp = probe(&[(i, steps[i]), (j, steps[j])])?;
                let fpm = probe(&[(i, steps[i]), (j, -steps[j])])?;
                let fmp = probe(&[(i, -steps[i]), (j, steps[j])])?;
                let fmm = probe(&[(i, -steps[i]), (j, -steps[j])])?;
                Ok((fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]))
            }
        })
        .collect();
    let mut hess = vec![vec![0.0; dim]; dim];
    for (&(i, j), e) in jobs.iter().zip(entries) {
        let v = e?;
        hess[i][j] = v;
        hess[j][i] = v;
    }

    // damped solves, backing off on rejection
    let trace: f64 = (0..dim).map(|i| hess[i][i].abs()).sum();
    let mut lambda = 1e-4 * trace / dim as f64 + 1e-12;
    for _ in 0..6 {
        let mut a = hess.clone();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += lambda;
        }
        if let Some(delta) = solve_dense(&mut a, &g_sub) {
            let mut xt = x.clone();
            for (k, d) in delta.iter().enumerate() {
                for (xi, pi) in xt.iter_mut().zip(&span[k]) {
                    *xi -= d * pi;
                }
            }
            let hit = project_constraints(&Coords::unpack(current, &xt))
                .and_then(|p| p.objective(cfg.quad).map(|f| (p, f)))
                .ok()
                .filter(|(_, f)| *f < *f_current);
            if let Some((p, f_new)) = hit {
                *current = p;
                *f_current = f_new;
                history.push(f_new);
                return Ok(true);
            }
        }
        lambda *= 30.0;
    }
    Ok(false)
}

/// Dense symmetric solve by Gaussian elimination with partial pivoting;
/// sized for the small subspace systems only.
fn solve_dense(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if a[pivot][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, pivot);
        rhs.swap(k, pivot);
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in (k + 1)..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    Some(x)
}

/// Projected descent on the total square torsion.
///
/// Every accepted iterate is feasible (projected), and with the Armijo rule
/// the recorded history is non-increasing. The direction combines the
/// finite-difference gradient history through [`GradientMemory`]; when that
/// direction fails the sufficient-decrease test the raw gradient is tried,
/// and as a last resort the iterate itself is smoothed (accepted only on
/// decrease, so monotonicity holds throughout). Degenerate trial steps
/// (curvature collapse in the objective) count as rejections and shrink the
/// step.
pub fn relax(start: &DiscreteCurve, cfg: &RelaxConfig) -> Result<RelaxOutcome> {
    if start.nodes.len() < MIN_NODES {
        return Err(Error::NodeCount {
            n: start.nodes.len(),
            min: MIN_NODES,
        });
    }
    let mut current = project_constraints(start)?;
    let mut f_current = current.objective(cfg.quad)?;
    let mut history = vec![f_current];
    let mut step_raw = cfg.step_init;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut restarts_left = cfg.restarts;
    // previous point and gradient for the Barzilai-Borwein trial step
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut basis = ModeBasis::build(&current);
    let mut stale = true;
    let mut memory = GradientMemory::new(30);
    let mut sweep_cooldown = 0usize;
    let mut recent_steps: std::collections::VecDeque<Vec<f64>> = std::collections::VecDeque::new();

    // Armijo search along one candidate direction; returns the accepted
    // iterate and step when the sufficient-decrease test passes
    let try_direction = |x: &[f64],
                         f_now: f64,
                         current: &DiscreteCurve,
                         dir: &[f64],
                         g_dot_d: f64,
                         alpha0: f64,
                         backtracks: usize|
     -> Option<(DiscreteCurve, f64, f64)> {
        let mut alpha = alpha0;
        for _ in 0..backtracks {
            let trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi - alpha * di).collect();
            let candidate = Coords::unpack(current, &trial);
            if let Ok(projected) = project_constraints(&candidate) {
                if let Ok(f_new) = projected.objective(cfg.quad) {
                    if f_new <= f_now - cfg.armijo_c * alpha * g_dot_d {
                        return Some((projected, f_new, alpha));
                    }
                }
            }
            alpha *= 0.5;
            if matches!(cfg.step_rule, StepRule::Fixed { .. }) {
                return None;
            }
        }
        None
    };

    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    for _iter in 0..cfg.max_iters {
        iterations = _iter;
        if f_current <= cfg.f_target {
            termination = Termination::ObjectiveTarget;
            break;
        }
        let x = Coords::pack(&current);
        let (grad, _diag) = gradient(&current, &x, f_current, cfg)?;
        let grad_norm2: f64 = grad.iter().map(|g| g * g).sum();
        if grad_norm2.sqrt() <= cfg.tol_grad {
            termination = Termination::GradientSmall;
            break;
        }

        // Barzilai-Borwein trial step for the raw direction
        let bb = previous.as_ref().and_then(|(px, pg)| {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..x.len() {
                let dx = x[i] - px[i];
                let dg = grad[i] - pg[i];
                num += dx * dg;
                den += dg * dg;
            }
            (num > 0.0 && den > 0.0).then(|| (num / den).clamp(1e-12, 1e4))
        });

        if stale {
            basis.refresh(&current, &x, f_current, cfg)?;
            stale = false;
            if std::env::var_os("RELAX_TRACE").is_some() {
                eprintln!("refresh at iter {_iter}");
            }
        }

        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        // secant pair from the accepted move that led here
        if let Some((px, pg)) = &previous {
            let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grad.iter().zip(pg).map(|(a, b)| a - b).collect();
            memory.push(s, y);
        }
        // initial step along a direction from the curvature measured there
        let newton_alpha0 = |d: &[f64], g_dot_d: f64| -> f64 {
            let dn2 = dot(d, d);
            let dn = dn2.sqrt();
            let h = 1e-4;
            let probe = |sign: f64| -> Result<f64> {
                let xt: Vec<f64> = x
                    .iter()
                    .zip(d)
                    .map(|(xi, di)| xi + sign * h * di / dn)
                    .collect();
                project_once(&Coords::unpack(&current, &xt))?.objective(cfg.quad)
            };
            match (probe(1.0), probe(-1.0)) {
                (Ok(fp), Ok(fm)) => {
                    let c_d = (fp - 2.0 * f_current + fm) / (h * h);
                    if c_d > 0.0 {
                        (g_dot_d / (c_d * dn2)).clamp(1e-12, 10.0)
                    } else {
                        1.0
                    }
                }
                _ => 1.0,
            }
        };

        // direction cascade: secant-memory direction, then the bare basis
        // scaling (after dropping a misleading memory), then the raw
        // gradient with a Barzilai-Borwein step
        let mut accepted = None;
        let mut stage = 0usize;
        let d_mem = memory.direction(&grad, &basis);
        let g_dot_mem = dot(&grad, &d_mem);
        if g_dot_mem > 0.0 {
            let alpha0 = newton_alpha0(&d_mem, g_dot_mem);
            accepted = try_direction(
                &x,
                f_current,
                &current,
                &d_mem,
                g_dot_mem,
                alpha0,
                cfg.max_backtracks,
            );
        }
        if accepted.is_none() {
            stage = 1;
            memory.clear();
            let d_basis = basis.direction(&grad);
            let g_dot_basis = dot(&grad, &d_basis);
            if g_dot_basis > 0.0 {
                let alpha0 = newton_alpha0(&d_basis, g_dot_basis);
                accepted = try_direction(
                    &x,
                    f_current,
                    &current,
                    &d_basis,
                    g_dot_basis,
                    alpha0,
                    cfg.max_backtracks,
                );
            }
        }
        if accepted.is_none() {
            stage = 2;
            stale = true;
            accepted = try_direction(
                &x,
                f_current,
                &current,
                &grad,
                grad_norm2,
                bb.unwrap_or(step_raw),
                cfg.max_backtracks,
            )
            .inspect(|(_, _, alpha)| {
                step_raw = (alpha * cfg.step_growth).min(1e4);
            });
        }

        if std::env::var_os("RELAX_TRACE").is_some() {
            eprintln!("iter {_iter}: F={f_current:.4e} stage={stage} alpha={:.2e} mem={}",
                accepted.as_ref().map(|a| a.2).unwrap_or(f64::NAN), memory.pairs.len());
        }
        match accepted {
            Some((projected, f_new, _alpha)) => {
                previous = Some((x.clone(), grad.clone()));
                let f_before = f_current;
                let step_vec: Vec<f64> = Coords::pack(&projected)
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| a - b)
                    .collect();
                if step_vec.iter().any(|v| *v != 0.0) {
                    if recent_steps.len() == 8 {
                        recent_steps.pop_front();
                    }
                    recent_steps.push_back(step_vec);
                }
                current = projected;
                f_current = f_new;
                history.push(f_new);
                // weak relative progress: drain the shallow modes directly
                // (with a cooldown so sweeps stay occasional)
                if f_before - f_new < 0.02 * f_before && sweep_cooldown == 0 {
                    sweep_cooldown = 3;
                    // the next secant pair spans step plus refinement, which
                    // is still a valid (x, gradient) difference pair
                    if !soft_subspace_step(
                        &mut current,
                        &mut f_current,
                        &grad,
                        &basis,
                        &recent_steps,
                        &mut history,
                        cfg,
                    )? {
                        mode_sweep(&mut current, &mut f_current, &basis, &mut history, cfg)?;
                    }
                }
                sweep_cooldown = sweep_cooldown.saturating_sub(1);
            }
            None => {
                // iterate smoothing: de-noises a rough iterate; accepted
                // only on decrease, so monotonicity holds
                let mut smoothed = current.clone();
                let n = smoothed.nodes.len();
                for i in 2..n - 1 {
                    for k in 0..2 {
                        smoothed.nodes[i][k] = 0.25 * current.nodes[i - 1][k]
                            + 0.5 * current.nodes[i][k]
                            + 0.25 * current.nodes[i + 1][k];
                    }
                }
                let smoothed_hit = project_constraints(&smoothed)
                    .and_then(|p| p.objective(cfg.quad).map(|f| (p, f)))
                    .ok()
                    .filter(|(_, f)| *f < f_current);
                if let Some((projected, f_new)) = smoothed_hit {
                    current = projected;
                    f_current = f_new;
                    history.push(f_new);
                    previous = None;
                    stale = true;
                    memory.clear();
                    continue;
                }
                if restarts_left > 0 {
                    restarts_left -= 1;
                    // seeded nudge of the interior nodes to escape a flat spot
                    let scale = 1e-7 * current.length_target;
                    let mut nudged = current.clone();
                    for node in nudged.nodes[2..].iter_mut() {
                        node[0] += scale * rng.random_range(-1.0..1.0);
                        node[1] += scale * rng.random_range(-1.0..1.0);
                    }
                    if let Ok(projected) = project_constraints(&nudged) {
                        if let Ok(f_new) = projected.objective(cfg.quad) {
                            if f_new <= f_current + 1e-12 {
                                current = projected;
                                f_current = f_new;
                                history.push(f_new);
                                step_raw = cfg.step_init;
                                previous = None;
                                stale = true;
                                memory.clear();
                                continue;
                            }
                        }
                    }
                }
                termination = Termination::LineSearchFailed;
                break;
            }
        }
    }
    if f_current <= cfg.f_target {
        termination = Termination::ObjectiveTarget;
    }

    let arc = current.lift()?.reparameterize_arclength(1e-12)?;
    let report = verify_relaxed_elastic(&arc, cfg.certify, cfg.report_stations)?;
    Ok(RelaxOutcome {
        curve: current,
        history,
        iterations,
        termination,
        report,
    })
}

/// Central-difference gradient over the free coordinates, evaluated in
/// parallel (the objective is pure). The same probes yield the diagonal
/// second differences, returned alongside for step scaling.
fn gradient(
    dc: &DiscreteCurve,
    x: &[f64],
    f0: f64,
    cfg: &RelaxConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = cfg.grad_step;
    let entries: Vec<Result<(f64, f64)>> = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fp = Coords::unpack(dc, &xp).objective(cfg.quad)?;
            let fm = Coords::unpack(dc, &xm).objective(cfg.quad)?;
            Ok(((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)))
        })
        .collect();
    let mut grad = Vec::with_capacity(x.len());
    let mut diag = Vec::with_capacity(x.len());
    for e in entries {
        let (g, d) = e?;
        grad.push(g);
        diag.push(d);
    }
    Ok((grad, diag))
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere_circle_curve() -> CurveOnSurface {
        let u0 = std::f64::consts::FRAC_PI_2;
        CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::sphere(1.0),
            &u0.to_string(),
            "s",
            1.6 * PI,
            1.7 * PI,
        )
        .unwrap()
    }

    #[test]
    fn discretize_node_count_guard() {
        let curve = sphere_circle_curve();
        assert!(matches!(
            discretize(&curve, 8),
            Err(Error::NodeCount { n: 8, min: 12 })
        ));
    }

    #[test]
    fn discretize_great_circle_small_objective() {
        let curve = sphere_circle_curve();
        let dc = discretize(&curve, 32).unwrap();
        let f = dc.objective(QuadratureSpec::default()).unwrap();
        assert!(f <= 1e-8, "lift F = {f}");
    }

    #[test]
    fn discretize_helix_objective_within_one_percent() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let helix = CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::cylinder(1.0),
            &format!("{c}*s"),
            &format!("{c}*s"),
            4.0,
            4.2,
        )
        .unwrap();
        let dc = discretize(&helix, 32).unwrap();
        let f = dc.objective(QuadratureSpec::default()).unwrap();
        assert!((f - 1.0).abs() < 0.01, "helix lift F = {f}");
    }

    #[test]
    fn projection_idempotent_on_feasible_curve() {
        let dc = discretize(&sphere_circle_curve(), 24).unwrap();
        let feasible = project_constraints(&dc).unwrap();
        let again = project_constraints(&feasible).unwrap();
        let movement = feasible
            .nodes
            .iter()
            .zip(&again.nodes)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0f64, f64::max);
        assert!(movement <= 1e-12, "movement {movement}");
    }

    #[test]
    fn projection_restores_stretched_curve() {
        let mut dc = discretize(&sphere_circle_curve(), 24).unwrap();
        // stretch longitudes by 10%
        for node in dc.nodes.iter_mut() {
            node[1] *= 1.1;
        }
        dc.origin = dc.nodes[0];
        let projected = project_constraints(&dc).unwrap();
        let arc = projected.lift().unwrap().reparameterize_arclength(1e-12).unwrap();
        assert!(
            (arc.length() - dc.length_target).abs() <= 1e-7 * dc.length_target,
            "restored length {} vs {}",
            arc.length(),
            dc.length_target
        );
        // initial data untouched
        assert_eq!(projected.nodes[0], dc.origin);
    }

    #[test]
    fn projection_small_perturbation_small_movement() {
        let dc = discretize(&sphere_circle_curve(), 24).unwrap();
        let feasible = project_constraints(&dc).unwrap();
        let mut perturbed = feasible.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for node in perturbed.nodes[2..].iter_mut() {
            node[0] += 1e-3 * rng.random_range(-1.0..1.0);
            node[1] += 1e-3 * rng.random_range(-1.0..1.0);
        }
        let projected = project_constraints(&perturbed).unwrap();
        let movement = feasible
            .nodes
            .iter()
            .zip(&projected.nodes)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0f64, f64::max);
        assert!(movement <= 1e-2, "sup movement {movement}");
    }

    #[test]
    fn plane_start_converges_immediately() {
        let circle = CurveOnSurface::arc_length_from_exprs(
            SurfacePatch::plane(),
            "cos(s)",
            "sin(s)",
            3.0,
            3.3,
        )
        .unwrap();
        let dc = discretize(&circle, 16).unwrap();
        let cfg = RelaxConfig {
            max_iters: 50,
            ..RelaxConfig::default()
        };
        let outcome = relax(&dc, &cfg).unwrap();
        assert_eq!(outcome.termination, Termination::ObjectiveTarget);
        assert!(outcome.history[0] <= 1e-12);
        assert!(outcome.report.verdict);
    }
}
