//! Dyadic-shell oscillatory integrals behind the kernel bounds: values at
//! small argument, the stationary-window envelope decay, and far-field
//! samples against cubic decay.

use fonls::lab::oscillatory::{
    envelope_scaling, far_field_samples, oscillatory_integral, stationary_radius,
    OscIntegralSpec, SHELL_CONSTANT,
};
use fonls::multiplier::Epsilon;

fn main() {
    let eps = Epsilon::Zero;
    let t = 1.0;

    for k in 1..=3u32 {
        let scale = (1u64 << k) as f64;
        let spec = OscIntegralSpec { k, t, r: 1e-3, eps };
        let small = oscillatory_integral(&spec).unwrap().norm();
        println!(
            "k = {k}: |I(t, r->0)| = {small:.3e} (bound {:.1}), stationary window r in [{:.1}, {:.1}]",
            1.5 * scale,
            stationary_radius(0.625 * scale, t, eps),
            stationary_radius(1.7 * scale, t, eps),
        );
    }

    let fit = envelope_scaling(2, t, eps).unwrap();
    println!(
        "envelope over the k = 2 stationary window: slope {:.4} (predicted -1/4) from {} points",
        fit.slope,
        fit.xs.len()
    );

    let (c3, samples) = far_field_samples(2, t, eps).unwrap();
    println!("far field, k = 2 (anchor r = {} 2^(3k)):", SHELL_CONSTANT);
    for (r, mag) in samples {
        println!("  r = {r:9.0}: |I| = {mag:.3e}, cubic bound {:.3e}", c3 / (r * r * r));
    }
}
