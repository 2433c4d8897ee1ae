use torsion_elastica::curve::CurveOnSurface;
use torsion_elastica::relax::{discretize, project_constraints};
use torsion_elastica::surface::SurfacePatch;
use torsion_elastica::quadrature::QuadratureSpec;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

fn main() {
    let circle = CurveOnSurface::arc_length_from_exprs(
        SurfacePatch::sphere(1.0), &FRAC_PI_2.to_string(), "s", 1.6 * PI, 1.7 * PI,
    ).unwrap();
    let dc = discretize(&circle, 32).unwrap();
    let quad = QuadratureSpec { points: 16, panels: 8 };

    let t = Instant::now();
    for _ in 0..100 { let _ = dc.lift().unwrap(); }
    println!("lift (from_points):    {:9.1?}/call", t.elapsed() / 100);

    let t = Instant::now();
    for _ in 0..100 { let _ = dc.objective(quad).unwrap(); }
    println!("objective:             {:9.1?}/call", t.elapsed() / 100);

    let t = Instant::now();
    for _ in 0..20 { let _ = project_constraints(&dc).unwrap(); }
    println!("project_constraints:   {:9.1?}/call", t.elapsed() / 20);

    let lift = dc.lift().unwrap();
    let t = Instant::now();
    for _ in 0..20 { let _ = lift.reparameterize_arclength(1e-13).unwrap(); }
    println!("reparameterize:        {:9.1?}/call", t.elapsed() / 20);
}
