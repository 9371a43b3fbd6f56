//! Local solve by Picard iteration on the Duhamel integral equation for the
//! model problem i u_t = -eps lap(u) + lap^2(u) + |lap(u)|^2, small data.

use fonls::multiplier::Epsilon;
use fonls::solver::{solve_picard, SolverConfig};
use fonls::{Field, Grid};
use num_complex::Complex64;

fn main() {
    let grid = Grid::new(&[128], &[16.0]).unwrap();
    let u0 = Field::from_fn(grid.clone(), |x| {
        Complex64::new(0.01 * (-x[0] * x[0]).exp(), 0.0)
    });

    let cfg = SolverConfig {
        eps: Epsilon::Minus,
        nonlinearity: "|lap(u)|^2".into(),
        horizon: 0.1,
        substeps: 128,
        tol: 1e-9,
        max_iter: 25,
        delta: 0.25,
        energy: 1.0,
        contraction_target: 0.5,
        s0: 2.5,
        cube_side: 1.0,
    };
    let sol = solve_picard(&u0, &cfg).unwrap();
    let rep = &sol.report;

    println!(
        "accepted T = {} after {} halvings, {} iterations ({:?} route)",
        rep.accepted_horizon, rep.halvings, rep.iterations, rep.smoothing_route
    );
    println!("sup-t L2 increments per iterate:");
    for (k, d) in rep.increments.iter().enumerate() {
        println!("  d_{} = {:.3e}", k + 1, d);
    }
    println!("contraction ratios: {:?}", rep.ratios);

    println!("workspace functionals per iterate (sobolev / smoothing / maximal):");
    for (k, rec) in rep.lambda.iter().enumerate() {
        println!(
            "  u^{k}: {:.6e} / {:.6e} / {:.6e}{}",
            rec.sup_sobolev,
            rec.smoothing,
            rec.maximal,
            match rec.weighted {
                Some(w) => format!(" / weighted {w:.6e}"),
                None => String::new(),
            }
        );
    }

    let uf = sol.trace.fields().last().unwrap();
    println!(
        "|u(T)|_2 = {:.9e} (data {:.9e})",
        uf.l2_norm(),
        u0.l2_norm()
    );
}
