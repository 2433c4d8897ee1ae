use torsion_elastica::curve::CurveOnSurface;
use torsion_elastica::relax::{discretize, project_constraints, relax, RelaxConfig};
use torsion_elastica::surface::SurfacePatch;
use torsion_elastica::quadrature::QuadratureSpec;
use std::f64::consts::{FRAC_PI_2, PI};

fn main() {
    let circle = CurveOnSurface::arc_length_from_exprs(
        SurfacePatch::sphere(1.0), &FRAC_PI_2.to_string(), "s", 1.6 * PI, 1.7 * PI,
    ).unwrap();
    let clean = project_constraints(&discretize(&circle, 32).unwrap()).unwrap();
    let mut dc = discretize(&circle, 32).unwrap();
    let n = dc.nodes.len();
    for (i, node) in dc.nodes.iter_mut().enumerate() {
        let t = i as f64 / (n - 1) as f64 * PI;
        node[0] += 0.05 * (2.0 * t).sin() * t.sin();
        node[1] += 0.05 * (3.0 * t).sin() * t.sin() * t.sin();
    }
    let dc = project_constraints(&dc).unwrap();
    let cfg = RelaxConfig { max_iters: 120, ..Default::default() };
    let out = relax(&dc, &cfg).unwrap();
    let stalled = out.curve;
    let quad = QuadratureSpec { points: 16, panels: 8 };
    println!("stalled F = {:.4e}, clean F = {:.4e}", stalled.objective(quad).unwrap(), clean.objective(quad).unwrap());
    for k in 0..=16 {
        let w = k as f64 / 16.0;
        let mut mix = stalled.clone();
        for i in 0..n {
            for c in 0..2 {
                mix.nodes[i][c] = (1.0 - w) * stalled.nodes[i][c] + w * clean.nodes[i][c];
            }
        }
        let proj = project_constraints(&mix).unwrap();
        println!("w = {w:.3}: F = {:.6e}", proj.objective(quad).unwrap());
    }
}
