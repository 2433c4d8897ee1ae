use torsion_elastica::curve::CurveOnSurface;
use torsion_elastica::relax::{discretize, project_constraints, relax, DiscreteCurve, RelaxConfig};
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
    let quad = QuadratureSpec { points: 16, panels: 8 };

    // run 60 iterations to reach the stall region
    let cfg = RelaxConfig { max_iters: 60, ..Default::default() };
    let out = relax(&dc, &cfg).unwrap();
    let stalled = out.curve.clone();
    let f_stall = stalled.objective(quad).unwrap();
    println!("after 60 iters: F = {f_stall:.6e}");

    // what does kappa_g look like along the stalled curve?
    let arc = stalled.lift().unwrap().reparameterize_arclength(1e-12).unwrap();
    print!("kg: ");
    for i in 0..16 {
        let s = arc.length() * i as f64 / 15.0;
        let st = torsion_elastica::darboux::darboux_state(&arc, s).unwrap();
        print!("{:+.3} ", st.kg[0]);
    }
    println!();

    // projected-composite gradient via FD
    let h = 1e-6;
    let f_tilde = |d: &DiscreteCurve| -> f64 {
        project_constraints(d).unwrap().objective(quad).unwrap()
    };
    let mut g_proj = vec![[0.0f64; 2]; n];
    for i in 2..n {
        for k in 0..2 {
            let mut p = stalled.clone(); p.nodes[i][k] += h;
            let mut m = stalled.clone(); m.nodes[i][k] -= h;
            g_proj[i][k] = (f_tilde(&p) - f_tilde(&m)) / (2.0 * h);
        }
    }
    // raw gradient
    let mut g_raw = vec![[0.0f64; 2]; n];
    for i in 2..n {
        for k in 0..2 {
            let mut p = stalled.clone(); p.nodes[i][k] += h;
            let mut m = stalled.clone(); m.nodes[i][k] -= h;
            g_raw[i][k] = (p.objective(quad).unwrap() - m.objective(quad).unwrap()) / (2.0 * h);
        }
    }
    let norm = |g: &Vec<[f64;2]>| g.iter().map(|v| v[0]*v[0] + v[1]*v[1]).sum::<f64>().sqrt();
    let dotg = |a: &Vec<[f64;2]>, b: &Vec<[f64;2]>| a.iter().zip(b).map(|(x,y)| x[0]*y[0]+x[1]*y[1]).sum::<f64>();
    println!("|g_raw| = {:.3e}, |g_proj| = {:.3e}, cos angle = {:.4}", norm(&g_raw), norm(&g_proj),
        dotg(&g_raw, &g_proj) / (norm(&g_raw) * norm(&g_proj)));

    // exact line search along both
    for (name, g) in [("raw", &g_raw), ("proj", &g_proj)] {
        let gn = norm(g);
        let mut best = (0.0, f_stall);
        for p in -26..6 {
            let alpha = 2.0f64.powi(p) / gn;
            let mut t = stalled.clone();
            for i in 2..n { for k in 0..2 { t.nodes[i][k] -= alpha * g[i][k]; } }
            if let Ok(pr) = project_constraints(&t) {
                if let Ok(fv) = pr.objective(quad) { if fv < best.1 { best = (alpha, fv); } }
            }
        }
        println!("{name}: exact line search F {f_stall:.6e} -> {:.6e} (alpha {:.3e})", best.1, best.0);
    }
}
