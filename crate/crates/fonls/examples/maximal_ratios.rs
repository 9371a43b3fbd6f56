//! The cube-ell^2 maximal function of the free evolution against the Sobolev
//! size of the data, plus the one case where the ratio is exactly computable:
//! a plane wave, whose maximal function is constant per cube.

use fonls::cubes::{maximal_l2_norm, CubeDecomposition};
use fonls::lab::maximal::{plane_wave, verify_maximal_l2};
use fonls::lab::smoothing::free_trace;
use fonls::lab::RandomEnsembleSpec;
use fonls::multiplier::Epsilon;
use fonls::norms::sobolev_norm;
use fonls::Grid;

fn main() {
    let grid = Grid::new(&[512], &[32.0]).unwrap();
    let ens = RandomEnsembleSpec {
        count: 8,
        seed: 7,
        spectral_decay: 2.5,
        band_limit: 32,
        envelope_width: 2.0,
    };
    let svals = [0.5, 2.0];
    let report = verify_maximal_l2(&grid, &ens, &svals, 1.0, Epsilon::Zero, 33).unwrap();
    for (i, &s) in svals.iter().enumerate() {
        println!(
            "s = {s}: max ratio {:.4}, median {:.4}, max/median {:.3}",
            report.max_ratio[i],
            report.median_ratio[i],
            report.max_over_median(i)
        );
    }
    println!("(s = 2 sits above the n + 1/2 threshold; s = 0.5 does not)");

    // plane wave: |S(t)u0| = 1 everywhere and every cube contributes alike
    let u0 = plane_wave(&grid, &[5]).unwrap();
    let cubes = CubeDecomposition::new(&grid, 1.0).unwrap();
    let trace = free_trace(&u0, 1.0, 33, Epsilon::Zero).unwrap();
    let measured = maximal_l2_norm(&trace, &cubes).unwrap() / sobolev_norm(&u0, 2.0);
    let xi = 5.0 * std::f64::consts::PI / 32.0;
    let exact = (cubes.count() as f64).sqrt() / ((1.0 + xi * xi) * u0.l2_norm());
    println!("plane wave, s = 2: measured {measured:.12}, exact {exact:.12}");
}
