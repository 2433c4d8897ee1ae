use torsion_elastica::curve::CurveOnSurface;
use torsion_elastica::relax::{discretize, project_constraints, relax, RelaxConfig};
use torsion_elastica::surface::SurfacePatch;
use torsion_elastica::quadrature::QuadratureSpec;
use std::f64::consts::{FRAC_PI_2, PI};

fn main() {
    let circle = CurveOnSurface::arc_length_from_exprs(
        SurfacePatch::sphere(1.0), &FRAC_PI_2.to_string(), "s", 1.6 * PI, 1.7 * PI,
    ).unwrap();
    // floor of the unperturbed circle polygon
    let clean = discretize(&circle, 32).unwrap();
    let proj = project_constraints(&clean).unwrap();
    for (label, q) in [("16x8", QuadratureSpec{points:16,panels:8}), ("32x8", QuadratureSpec{points:32,panels:8}), ("32x32", QuadratureSpec{points:32,panels:32})] {
        println!("clean circle polygon F({label}) = {:.3e}", proj.objective(q).unwrap());
    }

    // terminal curve of a relax run
    let mut dc = discretize(&circle, 32).unwrap();
    let n = dc.nodes.len();
    for (i, node) in dc.nodes.iter_mut().enumerate() {
        let t = i as f64 / (n - 1) as f64 * PI;
        node[0] += 0.05 * (2.0 * t).sin() * t.sin();
        node[1] += 0.05 * (3.0 * t).sin() * t.sin() * t.sin();
    }
    let dc = project_constraints(&dc).unwrap();
    let cfg = RelaxConfig { max_iters: 300, ..Default::default() };
    let out = relax(&dc, &cfg).unwrap();
    println!("terminal F(16x8) = {:.3e}", out.history.last().unwrap());
    for (label, q) in [("32x8", QuadratureSpec{points:32,panels:8}), ("32x32", QuadratureSpec{points:32,panels:32})] {
        println!("terminal F({label}) = {:.3e}", out.curve.objective(q).unwrap());
    }
    // kappa_g along the terminal curve
    let arc = out.curve.lift().unwrap().reparameterize_arclength(1e-12).unwrap();
    print!("terminal kg: ");
    for i in 0..16 {
        let s = arc.length() * i as f64 / 15.0;
        print!("{:+.4} ", torsion_elastica::darboux::darboux_state(&arc, s).unwrap().kg[0]);
    }
    println!();
    // u-profile of terminal nodes
    print!("terminal u: ");
    for i in (0..32).step_by(3) { print!("{:+.4} ", out.curve.nodes[i][0] - FRAC_PI_2); }
    println!();
}
