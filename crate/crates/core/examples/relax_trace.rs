use torsion_elastica::curve::CurveOnSurface;
use torsion_elastica::relax::{discretize, project_constraints, DiscreteCurve};
use torsion_elastica::surface::SurfacePatch;
use std::f64::consts::{FRAC_PI_2, PI};

// standalone copy of the descent inner machinery for diagnosis
fn main() {
    let circle = CurveOnSurface::arc_length_from_exprs(
        SurfacePatch::sphere(1.0), &FRAC_PI_2.to_string(), "s", 1.6 * PI, 1.7 * PI,
    ).unwrap();
    let mut dc = discretize(&circle, 32).unwrap();
    let n = dc.nodes.len();
    for (i, node) in dc.nodes.iter_mut().enumerate() {
        let t = i as f64 / (n - 1) as f64 * PI;
        node[0] += 0.05 * (2.0 * t).sin() * t.sin();
        node[1] += 0.05 * (3.0 * t).sin() * t.sin() * t.sin();
    }
    let dc = project_constraints(&dc).unwrap();
    let quad = torsion_elastica::quadrature::QuadratureSpec { points: 16, panels: 8 };
    let f0 = dc.objective(quad).unwrap();
    println!("start F = {f0:.6e}");

    // examine the gradient spectrum-ish: gradient magnitude per node index
    let h = 1e-5;
    let grad_at = |dc: &DiscreteCurve| -> Vec<[f64;2]> {
        let mut g = vec![[0.0;2]; dc.nodes.len()];
        for i in 2..dc.nodes.len() {
            for k in 0..2 {
                let mut p = dc.clone(); p.nodes[i][k] += h;
                let mut m = dc.clone(); m.nodes[i][k] -= h;
                g[i][k] = (p.objective(quad).unwrap() - m.objective(quad).unwrap()) / (2.0*h);
            }
        }
        g
    };
    let g = grad_at(&dc);
    for i in (2..n).step_by(5) {
        println!("  node {i}: g = ({:+.3e}, {:+.3e})", g[i][0], g[i][1]);
    }
    // raw steepest descent with tiny fixed steps, no projection, watch F
    let mut cur = dc.clone();
    let mut f = f0;
    for outer in 0..8 {
        let g = grad_at(&cur);
        let gn2: f64 = g.iter().map(|v| v[0]*v[0]+v[1]*v[1]).sum();
        // exact-ish line search: try many alphas, pick best F after projection
        let mut best = (0.0, f);
        for p in -20..8 {
            let alpha = 2.0f64.powi(p) / gn2.sqrt();
            let mut t = cur.clone();
            for i in 2..n { for k in 0..2 { t.nodes[i][k] -= alpha * g[i][k]; } }
            if let Ok(pr) = project_constraints(&t) {
                if let Ok(fv) = pr.objective(quad) {
                    if fv < best.1 { best = (alpha, fv); }
                }
            }
        }
        let (alpha, fbest) = best;
        println!("outer {outer}: |g| = {:.3e}, best alpha = {:.3e}, F {:.6e} -> {:.6e}", gn2.sqrt(), alpha, f, fbest);
        if alpha == 0.0 { break; }
        for i in 2..n { for k in 0..2 { cur.nodes[i][k] -= alpha * g[i][k]; } }
        cur = project_constraints(&cur).unwrap();
        f = cur.objective(quad).unwrap();
    }
}
