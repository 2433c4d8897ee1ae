use torsion_elastica::curve::CurveOnSurface;
use torsion_elastica::relax::{discretize, project_constraints, relax, RelaxConfig};
use torsion_elastica::surface::SurfacePatch;
use torsion_elastica::quadrature::QuadratureSpec;
use std::f64::consts::{FRAC_PI_2, PI};

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
    let cfg = RelaxConfig { max_iters: 120, ..Default::default() };
    let out = relax(&dc, &cfg).unwrap();
    println!("stalled F(16x8)   = {:.6e}", out.history.last().unwrap());
    for (lbl, q) in [("16x8", QuadratureSpec{points:16,panels:8}),
                     ("32x32", QuadratureSpec{points:32,panels:32}),
                     ("8x31 (aligned)", QuadratureSpec{points:8,panels:31}),
                     ("16x31 (aligned)", QuadratureSpec{points:16,panels:31}),
                     ("16x62", QuadratureSpec{points:16,panels:62})] {
        println!("F({lbl}) = {:.6e}", out.curve.objective(q).unwrap());
    }
}
