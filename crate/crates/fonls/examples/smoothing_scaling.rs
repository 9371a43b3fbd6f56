//! The localized half-derivative gain of the free evolution: the measured
//! cube-size scaling of |D^{3/2} S(t)u0| relative to |u0|_2, and the dual
//! form against the homogeneous -3/2 norm.

use fonls::lab::smoothing::{verify_homogeneous_smoothing, verify_homogeneous_smoothing_dual};
use fonls::lab::RandomEnsembleSpec;
use fonls::multiplier::Epsilon;
use fonls::Grid;

fn main() {
    let grid = Grid::new(&[1024], &[32.0]).unwrap();
    let rs = [1.0, 2.0, 4.0, 8.0];

    let ens = RandomEnsembleSpec {
        count: 8,
        seed: 7,
        spectral_decay: 2.0,
        band_limit: 64,
        envelope_width: 2.0,
    };
    let fit = verify_homogeneous_smoothing(&grid, &ens, &rs, 1.0, Epsilon::Zero).unwrap();
    println!("derivative gain, ratio means per cube side:");
    for (r, y) in fit.xs.iter().zip(&fit.ys) {
        println!("  R = {r}: {y:.6}");
    }
    println!(
        "slope = {:.4} (predicted 1/2), residual {:.3}",
        fit.slope, fit.max_residual
    );

    // the dual slope reflects how far the solution actually spreads, so it
    // wants rough wide-band data
    let rough = RandomEnsembleSpec {
        count: 8,
        seed: 7,
        spectral_decay: 0.0,
        band_limit: 256,
        envelope_width: 2.0,
    };
    let dual = verify_homogeneous_smoothing_dual(&grid, &rough, &rs, 1.0, Epsilon::Zero).unwrap();
    println!(
        "dual form: slope = {:.4} (predicted 1/2), residual {:.3}",
        dual.slope, dual.max_residual
    );
}
