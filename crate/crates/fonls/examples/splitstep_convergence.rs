//! Strang split-step as an independent cross-check: agreement with the
//! Picard solution and the second-order self-convergence of the splitting.

use fonls::multiplier::Epsilon;
use fonls::solver::{solve_picard, solve_splitstep, SolverConfig};
use fonls::{Field, Grid};
use num_complex::Complex64;

fn main() {
    let grid = Grid::new(&[128], &[16.0]).unwrap();
    let u0 = Field::from_fn(grid.clone(), |x| {
        Complex64::new(0.1 * (-x[0] * x[0]).exp(), 0.0)
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

    let picard = solve_picard(&u0, &cfg).unwrap();
    let p_final = picard.trace.fields().last().unwrap();

    let mut finals = Vec::new();
    for substeps in [128usize, 256, 512, 1024] {
        let mut c = cfg.clone();
        c.substeps = substeps;
        let s = solve_splitstep(&u0, &c).unwrap();
        let f = s.trace.fields().last().unwrap().clone();
        println!(
            "split-step {} steps: |. - picard|_2 / |picard|_2 = {:.3e}",
            substeps,
            f.l2_distance(p_final).unwrap() / p_final.l2_norm()
        );
        finals.push(f);
    }

    // successive-difference Richardson exponents; Strang predicts 2
    for w in finals.windows(3) {
        let d1 = w[0].l2_distance(&w[1]).unwrap();
        let d2 = w[1].l2_distance(&w[2]).unwrap();
        println!("observed order: {:.3}", (d1 / d2).log2());
    }
}
