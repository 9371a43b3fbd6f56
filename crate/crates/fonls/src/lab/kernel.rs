//! L^1 bounds for the shell-localized propagator kernel.
//!
//! The kernel of the propagator restricted to the k-th dyadic shell is a
//! radial profile: in one dimension the half-line transform H(r) = int
//! psi_k(s) exp(-it omega(s)) exp(irs) ds, in two the Hankel profile with
//! J_0(rs) s ds in place of the plane wave. The L^1 mass inside the window
//! r <= 10 * SHELL_CONSTANT * 2^{3k} is integrated numerically; beyond the
//! window the profile decays superpolynomially, so the remainder is charged
//! to a cubic-decay envelope anchored at the window edge.
//!
//! The transforms are evaluated on an FFT grid: the shell integrand sampled
//! at a rate oversampling its fastest phase eightfold, zero-padded to a
//! fixed period so the radial resolution never depends on the shell. In two
//! dimensions J_0 makes a plain FFT unusable; the profile is split at a
//! fixed argument into a directly quadratured near field (J_0 from its
//! integral representation, the contract's choice) and a far field where
//! the first asymptotic correction terms of J_0 turn the profile into three
//! half-line transforms.

use super::oscillatory::{shell_window, SHELL_CONSTANT};
use crate::multiplier::Epsilon;
use crate::quad::{bessel_j0, gauss_legendre, trapezoid_uniform};
use crate::{FonlsError, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::{FRAC_PI_4, PI};

/// Zero-padded period of the half-line transforms; fixes the radial grid
/// spacing at 2 pi / S_PAD for every shell.
const S_PAD: f64 = 96.0;

/// The integration window ends this many times past the stationary cap.
const R_WINDOW_MULT: f64 = 10.0;

fn next_pow2(x: f64) -> usize {
    let mut n = 1usize;
    while (n as f64) < x {
        n <<= 1;
    }
    n
}

fn validate(k: u32, t: f64, dim: usize, rmax_factor: f64, resolution_factor: f64) -> Result<()> {
    let k_cap = match dim {
        1 => 4,
        2 => 3,
        _ => {
            return Err(FonlsError::Config(format!(
                "kernel bounds cover dimensions 1 and 2, got {dim}"
            )))
        }
    };
    if k < 1 || k > k_cap {
        return Err(FonlsError::Config(format!(
            "shell index {k} outside 1..={k_cap} for dimension {dim} \
             (larger shells need transforms beyond the memory budget)"
        )));
    }
    if !(t >= 0.0 && t <= 2.0) {
        return Err(FonlsError::Config(format!(
            "time {t} outside the supported window [0, 2]"
        )));
    }
    if !(rmax_factor >= 1.0 && rmax_factor <= 4.0) {
        return Err(FonlsError::Config(format!(
            "window factor {rmax_factor} outside [1, 4]"
        )));
    }
    if !(resolution_factor >= 1.0 && resolution_factor <= 4.0) {
        return Err(FonlsError::Config(format!(
            "resolution factor {resolution_factor} outside [1, 4]"
        )));
    }
    Ok(())
}

struct HalfLineTransform {
    dr: f64,
    m_max: usize,
    /// H(m dr) for m = 0..=m_max
    pos: Vec<Complex64>,
    /// H(-m dr), filled only when the caller needs the incoming half
    neg: Option<Vec<Complex64>>,
}

fn half_line_transform(
    k: u32,
    t: f64,
    eps: Epsilon,
    weight: &dyn Fn(f64) -> f64,
    r_need: f64,
    resolution_factor: f64,
    want_neg: bool,
) -> Result<HalfLineTransform> {
    let scale = (1u64 << k) as f64;
    let smax = 2.0 * scale;
    let e = eps.as_f64();
    // fastest phase on the shell plus a fixed margin for the window and the
    // algebraic weights, which vary on scale >= 1
    let fmax = 2.0 * e.abs() * t * smax + 4.0 * t * smax * smax * smax + 20.0;
    let ds_req = (2.0 * PI / fmax / 8.0).min(PI / (1.3 * r_need)) / resolution_factor;
    let n_fft = next_pow2(S_PAD / ds_req);
    let ds = S_PAD / n_fft as f64;
    let mut buf = vec![Complex64::default(); n_fft];
    let j_hi = ((smax / ds).ceil() as usize).min(n_fft - 1);
    for (j, slot) in buf.iter_mut().enumerate().take(j_hi + 1) {
        let s = j as f64 * ds;
        let w = shell_window(k, s);
        if w != 0.0 {
            let phase = -t * (e * s * s + s * s * s * s);
            *slot = Complex64::from_polar(w * weight(s), phase);
        }
    }
    FftPlanner::new().plan_fft_inverse(n_fft).process(&mut buf);
    let dr = 2.0 * PI / S_PAD;
    let m_max = (r_need / dr).floor() as usize;
    debug_assert!(m_max < n_fft / 2, "radial window exceeds the transform");
    let pos: Vec<Complex64> = buf[..=m_max].iter().map(|&h| h * ds).collect();
    let neg = want_neg.then(|| {
        (0..=m_max)
            .map(|m| if m == 0 { buf[0] } else { buf[n_fft - m] } * ds)
            .collect()
    });
    Ok(HalfLineTransform { dr, m_max, pos, neg })
}

/// Composite Gauss-Legendre nodes on the k-th shell, panels sized so the
/// phase of exp(-it omega) exp(i r s) advances at most ~1.2 radians per
/// panel for every |r| <= extra_rate. Returns (nodes, weights).
fn shell_panel_nodes(
    k: u32,
    t: f64,
    eps: Epsilon,
    extra_rate: f64,
    resolution_factor: f64,
) -> (Vec<f64>, Vec<f64>) {
    let scale = (1u64 << k) as f64;
    let e = eps.as_f64();
    let rate =
        |s: f64| (2.0 * e * t * s + 4.0 * t * s * s * s).abs() + extra_rate + 16.0 / scale;
    let budget = 1.2 / resolution_factor;
    let (gx, gw) = gauss_legendre(15);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut stack = vec![(0.5 * scale, 2.0 * scale, 0u32)];
    while let Some((a, b, depth)) = stack.pop() {
        let len = b - a;
        if depth < 40 && 0.5 * (rate(a) + rate(b)) * len > budget {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
            continue;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * len;
        for (&x, &w) in gx.iter().zip(gw.iter()) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

fn bound_dim1(
    k: u32,
    t: f64,
    eps: Epsilon,
    r_need: f64,
    resolution_factor: f64,
) -> Result<f64> {
    let ht = half_line_transform(k, t, eps, &|_| 1.0, r_need, resolution_factor, false)?;
    let mags: Vec<f64> = ht.pos.iter().map(|h| h.norm()).collect();
    let trap = trapezoid_uniform(&mags, ht.dr);
    let r_last = ht.m_max as f64 * ht.dr;
    let anchor = mags[ht.m_max] * r_last.powi(3);
    Ok(2.0 * trap + anchor / (r_last * r_last))
}

/// |profile(r)| on the near-field radial grid, by direct quadrature with
/// nodes shared across radii.
fn near_field_magnitudes(
    k: u32,
    t: f64,
    eps: Epsilon,
    rs: &[f64],
    resolution_factor: f64,
) -> Vec<f64> {
    let r_top = rs.last().copied().unwrap_or(0.0);
    let (sq, wq) = shell_panel_nodes(k, t, eps, r_top, resolution_factor);
    let e = eps.as_f64();
    let aq: Vec<Complex64> = sq
        .iter()
        .zip(wq.iter())
        .map(|(&s, &w)| {
            let phase = -t * (e * s * s + s * s * s * s);
            Complex64::from_polar(shell_window(k, s) * s * w, phase)
        })
        .collect();
    rs.iter()
        .map(|&r| {
            let total: Complex64 = sq
                .iter()
                .zip(aq.iter())
                .map(|(&s, &a)| a * bessel_j0(r * s))
                .sum();
            total.norm()
        })
        .collect()
}

fn trapezoid_nonuniform(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
        .sum()
}

fn bound_dim2(
    k: u32,
    t: f64,
    eps: Epsilon,
    r_need: f64,
    resolution_factor: f64,
) -> Result<f64> {
    let scale = (1u64 << k) as f64;
    let smax = 2.0 * scale;
    // past this radius the J_0 argument exceeds 20 over the whole shell,
    // where the three-term asymptotic form is accurate to ~1e-5
    let r_switch = 40.0 / scale;

    let dr_goal = 2.0 * PI / (8.0 * 1.3 * smax) / resolution_factor;
    let near_count = (r_switch / dr_goal).ceil() as usize + 1;
    let near_rs: Vec<f64> = (0..near_count)
        .map(|i| r_switch * i as f64 / (near_count - 1) as f64)
        .collect();
    let near_mags = near_field_magnitudes(k, t, eps, &near_rs, resolution_factor);

    let h0 = half_line_transform(k, t, eps, &|s| s.sqrt(), r_need, resolution_factor, true)?;
    let h1 =
        half_line_transform(k, t, eps, &|s| 1.0 / s.sqrt(), r_need, resolution_factor, true)?;
    let h2 =
        half_line_transform(k, t, eps, &|s| s.powf(-1.5), r_need, resolution_factor, true)?;
    let dr = h0.dr;
    let m_first = (r_switch / dr).floor() as usize + 1;
    let m_max = h0.m_max;
    let out_phase = Complex64::from_polar(1.0, -FRAC_PI_4);
    let in_phase = Complex64::from_polar(1.0, FRAC_PI_4);
    let h0n = h0.neg.as_ref().unwrap();
    let h1n = h1.neg.as_ref().unwrap();
    let h2n = h2.neg.as_ref().unwrap();
    let mut far_rs = Vec::with_capacity(m_max - m_first + 1);
    let mut far_mags = Vec::with_capacity(m_max - m_first + 1);
    for m in m_first..=m_max {
        let r = m as f64 * dr;
        let iq = Complex64::new(0.0, 1.0 / (8.0 * r));
        let p2 = 9.0 / (128.0 * r * r);
        let outgoing = h0.pos[m] - iq * h1.pos[m] - p2 * h2.pos[m];
        let incoming = h0n[m] + iq * h1n[m] - p2 * h2n[m];
        let profile = (2.0 / (PI * r)).sqrt() * 0.5 * (out_phase * outgoing + in_phase * incoming);
        far_rs.push(r);
        far_mags.push(profile.norm());
    }

    // integrate |profile(r)| r dr over the stitched grid, then close with
    // the cubic-decay envelope anchored at the window edge
    let near_f: Vec<f64> = near_rs
        .iter()
        .zip(near_mags.iter())
        .map(|(&r, &p)| p * r)
        .collect();
    let far_f: Vec<f64> = far_rs
        .iter()
        .zip(far_mags.iter())
        .map(|(&r, &p)| p * r)
        .collect();
    let mut area = trapezoid_nonuniform(&near_rs, &near_f) + trapezoid_nonuniform(&far_rs, &far_f);
    area += 0.5 * (near_f[near_count - 1] + far_f[0]) * (far_rs[0] - r_switch);
    let r_last = *far_rs.last().unwrap();
    let anchor = far_mags.last().unwrap() * r_last.powi(3);
    Ok(2.0 * PI * (area + anchor / r_last))
}

/// Numerical L^1 bound for the k-th shell kernel at time t in the given
/// dimension, with the default window and resolution.
pub fn kernel_l1_bound(k: u32, t: f64, eps: Epsilon, dim: usize) -> Result<f64> {
    kernel_l1_bound_scaled(k, t, eps, dim, 1.0, 1.0)
}

/// Same bound with the integration window stretched by `rmax_factor` and
/// all quadrature grids refined by `resolution_factor`; the value must be
/// insensitive to both, which is what the stability checks exercise.
pub fn kernel_l1_bound_scaled(
    k: u32,
    t: f64,
    eps: Epsilon,
    dim: usize,
    rmax_factor: f64,
    resolution_factor: f64,
) -> Result<f64> {
    validate(k, t, dim, rmax_factor, resolution_factor)?;
    let scale = (1u64 << k) as f64;
    let r_need = R_WINDOW_MULT * SHELL_CONSTANT * scale * scale * scale * rmax_factor;
    match dim {
        1 => bound_dim1(k, t, eps, r_need, resolution_factor),
        _ => bound_dim2(k, t, eps, r_need, resolution_factor),
    }
}

/// The one-dimensional bound at t = 0 by plain quadrature on the same
/// radial grid: no transform, each H(r) summed directly over shared shell
/// nodes. Cross-checks the FFT route.
pub fn kernel_l1_direct_zero_time(k: u32, rmax_factor: f64) -> Result<f64> {
    validate(k, 0.0, 1, rmax_factor, 1.0)?;
    let scale = (1u64 << k) as f64;
    let r_need = R_WINDOW_MULT * SHELL_CONSTANT * scale * scale * scale * rmax_factor;
    let dr = 2.0 * PI / S_PAD;
    let m_max = (r_need / dr).floor() as usize;
    let (sq, wq) = shell_panel_nodes(k, 0.0, Epsilon::Zero, r_need, 1.0);
    let aq: Vec<f64> = sq
        .iter()
        .zip(wq.iter())
        .map(|(&s, &w)| shell_window(k, s) * w)
        .collect();
    // march the radial grid by per-node phase rotations instead of fresh
    // exponentials; the drift over the whole window stays near roundoff
    let mut state: Vec<Complex64> = aq.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let rot: Vec<Complex64> = sq.iter().map(|&s| Complex64::from_polar(1.0, dr * s)).collect();
    let mut mags = Vec::with_capacity(m_max + 1);
    for _ in 0..=m_max {
        let total: Complex64 = state.iter().sum();
        mags.push(total.norm());
        for (st, &rt) in state.iter_mut().zip(rot.iter()) {
            *st *= rt;
        }
    }
    let trap = trapezoid_uniform(&mags, dr);
    let r_last = m_max as f64 * dr;
    let anchor = mags[m_max] * r_last.powi(3);
    Ok(2.0 * trap + anchor / (r_last * r_last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_arguments() {
        assert!(kernel_l1_bound(0, 1.0, Epsilon::Zero, 1).is_err());
        assert!(kernel_l1_bound(5, 1.0, Epsilon::Zero, 1).is_err());
        assert!(kernel_l1_bound(4, 1.0, Epsilon::Zero, 2).is_err());
        assert!(kernel_l1_bound(2, 3.0, Epsilon::Zero, 1).is_err());
        assert!(kernel_l1_bound(2, 1.0, Epsilon::Zero, 3).is_err());
        assert!(kernel_l1_bound_scaled(2, 1.0, Epsilon::Zero, 1, 0.5, 1.0).is_err());
    }

    #[test]
    fn next_pow2_rounds_up() {
        assert_eq!(next_pow2(1.0), 1);
        assert_eq!(next_pow2(3.0), 4);
        assert_eq!(next_pow2(4.0), 4);
        assert_eq!(next_pow2(1000.0), 1024);
    }

    #[test]
    fn first_shell_bound_is_finite_and_positive() {
        let b = kernel_l1_bound(1, 1.0, Epsilon::Zero, 1).unwrap();
        assert!(b.is_finite() && b > 0.0);
        // the shell holds unit-size frequencies, so the kernel mass at unit
        // time is order 10^2; sanity-pin the scale, not the digits
        assert!(b > 10.0 && b < 1e4, "k=1 bound {b}");
    }
}
