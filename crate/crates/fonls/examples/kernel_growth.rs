//! L1 size of the dyadic propagator kernels. The radial reduction gives a
//! one-dimensional transform per shell; the measured growth per shell
//! doubling should stay below the 2^{2n+1} envelope.

use fonls::lab::kernel::{kernel_l1_bound, kernel_l1_direct_zero_time, kernel_l1_bound_scaled};
use fonls::multiplier::Epsilon;

fn main() {
    let eps = Epsilon::Zero;

    println!("dim 1, t = 1:");
    let mut prev: Option<f64> = None;
    for k in 1..=3u32 {
        let b = kernel_l1_bound(k, 1.0, eps, 1).unwrap();
        let note = match prev {
            Some(p) => format!("  growth 2^{:.3}", (b / p).log2()),
            None => String::new(),
        };
        println!("  k = {k}: {b:10.4}{note}");
        prev = Some(b);
    }

    // the t = 0 transform route has an independent check: direct summation
    let fft = kernel_l1_bound_scaled(1, 0.0, eps, 1, 1.0, 1.0).unwrap();
    let direct = kernel_l1_direct_zero_time(1, 1.0).unwrap();
    println!("t = 0, k = 1: transform {fft:.6}, direct {direct:.6}");

    println!("dim 2, t = 1:");
    for k in 1..=2u32 {
        let b = kernel_l1_bound(k, 1.0, eps, 2).unwrap();
        println!("  k = {k}: {b:12.3}");
    }
}
