//! The linear group S(t) on a periodic box: unitarity, the group law, and
//! how fast a wave packet expands under the quartic dispersion.

use fonls::multiplier::{propagate, Epsilon};
use fonls::{Field, Grid};
use num_complex::Complex64;

fn main() {
    let grid = Grid::new(&[256], &[32.0]).unwrap();
    let u0 = Field::from_fn(grid.clone(), |x| {
        Complex64::new((-x[0] * x[0] / 4.0).exp(), 0.0)
    });
    println!("datum: Gaussian, |u0|_2 = {:.6}", u0.l2_norm());

    for eps in Epsilon::all() {
        let u1 = propagate(&u0, 0.7, eps).unwrap();
        let u2 = propagate(&u1, -0.2, eps).unwrap();
        let direct = propagate(&u0, 0.5, eps).unwrap();
        println!(
            "eps = {:+}: |S(0.7)u|_2 - |u|_2 = {:+.3e}, group-law defect = {:.3e}",
            eps.as_f64(),
            u1.l2_norm() - u0.l2_norm(),
            u2.l2_distance(&direct).unwrap()
        );
    }

    // the packet spreads: sup shrinks while mass is conserved
    let mut sup_row = String::new();
    for step in 0..5 {
        let t = step as f64 * 0.5;
        let u = propagate(&u0, t, Epsilon::Zero).unwrap();
        let sup = u.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        sup_row += &format!(" {sup:.4}");
    }
    println!("sup |u(t)| at t = 0, 0.5, ..., 2:{sup_row}");
}
