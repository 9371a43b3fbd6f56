//! Interpolated smoothing: no derivative on the solution, data in the
//! homogeneous -1/2 norm. Sweeping the horizon at unit cubes and the cube
//! side at unit horizon; the interpolation predicts exponents 1/3 and 1/6.

use fonls::lab::smoothing::verify_interpolated_smoothing;
use fonls::lab::RandomEnsembleSpec;
use fonls::multiplier::Epsilon;
use fonls::Grid;

fn main() {
    let grid = Grid::new(&[1024], &[32.0]).unwrap();
    let ens = RandomEnsembleSpec {
        count: 8,
        seed: 7,
        spectral_decay: 2.0,
        band_limit: 64,
        envelope_width: 2.0,
    };
    let rs = [1.0, 2.0, 4.0, 8.0];
    let ts = [0.25, 0.5, 1.0, 2.0];
    let (t_fit, r_fit) =
        verify_interpolated_smoothing(&grid, &ens, &rs, &ts, Epsilon::Zero).unwrap();

    println!("horizon sweep (R = 1):");
    for (t, y) in t_fit.xs.iter().zip(&t_fit.ys) {
        println!("  T = {t}: {y:.6}");
    }
    println!("  slope = {:.4}, predicted 1/3", t_fit.slope);

    println!("cube sweep (T = 1):");
    for (r, y) in r_fit.xs.iter().zip(&r_fit.ys) {
        println!("  R = {r}: {y:.6}");
    }
    println!("  slope = {:.4}, predicted 1/6", r_fit.slope);
}
