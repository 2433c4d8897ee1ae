use torsion_elastica::curve::CurveOnSurface;
use torsion_elastica::relax::{discretize, project_constraints, relax, RelaxConfig};
use torsion_elastica::surface::SurfacePatch;
use std::f64::consts::{FRAC_PI_2, PI};

fn main() {
    let start = std::time::Instant::now();
    let circle = CurveOnSurface::arc_length_from_exprs(
        SurfacePatch::sphere(1.0),
        &FRAC_PI_2.to_string(),
        "s",
        1.6 * PI,
        1.7 * PI,
    )
    .unwrap();
    let mut dc = discretize(&circle, 32).unwrap();
    // smooth two-mode displacement of amplitude 0.05 in (u, v)
    let n = dc.nodes.len();
    for (i, node) in dc.nodes.iter_mut().enumerate() {
        let t = i as f64 / (n - 1) as f64 * std::f64::consts::PI;
        node[0] += 0.035 * (2.0 * t).sin() * t.sin();
        node[1] += 0.035 * (3.0 * t).sin() * t.sin() * t.sin();
    }
    let dc = project_constraints(&dc).unwrap();
    println!("start F = {:.6e}", dc.objective(Default::default()).unwrap());
    let cfg = RelaxConfig { max_iters: 500, f_target: 1e-6, ..Default::default() };
    let out = relax(&dc, &cfg).unwrap();
    println!("outer iters = {}, accepted steps = {}, terminal F = {:.6e}, termination {:?}", out.iterations, out.history.len() - 1, out.history.last().unwrap(), out.termination);
    println!("monotone = {}", out.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    println!("verdict = {}, sup_e_norm = {:.3e}, b_norm = {:?}", out.report.verdict, out.report.sup_e_normalized, out.report.b_normalized);
    println!("elapsed = {:.1?}", start.elapsed());
}
