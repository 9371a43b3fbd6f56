//! Scaling-law checks for the cube-localized smoothing estimates.
//!
//! Three experiments, all of the same shape: build an ensemble of localized
//! random data, evolve it freely (or drive a zero-data problem with a
//! localized source), measure the cube-localized space-time norm against the
//! norm the estimate charges, and fit the measured ratios against the
//! geometric knob (cube side R or horizon T) on log-log axes. The estimates
//! are upper bounds, so fitted slopes may undershoot the predicted exponent
//! but must not exceed it beyond the stated bands.

use super::{
    complex_normal, ensemble_member, ensemble_member_with_rng, fit_power_law, linspace, mean,
    member_rng, RandomEnsembleSpec, ScalingFit,
};
use crate::cubes::{local_smoothing_norm, CubeDecomposition};
use crate::field::Field;
use crate::grid::Grid;
use crate::multiplier::{fractional_derivative, propagate, Epsilon};
use crate::norms::homogeneous_norm;
use crate::trace::SpaceTimeTrace;
use crate::{FonlsError, Result};
use num_complex::Complex64;
use rand::Rng;

/// Sampled instants per unit horizon (plus one for the endpoint); short
/// horizons keep at least half the unit count so the trapezoid in time never
/// degenerates.
pub fn time_sample_count(horizon: f64) -> usize {
    (96.0 * horizon.max(0.5)) as usize + 1
}

/// Free evolution S(t) u0 sampled on a uniform grid over [0, horizon].
pub fn free_trace(u0: &Field, horizon: f64, nt: usize, eps: Epsilon) -> Result<SpaceTimeTrace> {
    let times = linspace(0.0, horizon, nt);
    let fields: Result<Vec<Field>> = times.iter().map(|&t| propagate(u0, t, eps)).collect();
    SpaceTimeTrace::new(times, fields?)
}

fn derivative_trace(trace: &SpaceTimeTrace, gamma: f64) -> Result<SpaceTimeTrace> {
    if gamma == 0.0 {
        return Ok(trace.clone());
    }
    let fields: Result<Vec<Field>> = trace
        .fields()
        .iter()
        .map(|f| fractional_derivative(f, gamma))
        .collect();
    SpaceTimeTrace::new(trace.times().to_vec(), fields?)
}

/// Ensemble means of local_smoothing(D^gamma S(t)u0, R-cubes) / denom(u0),
/// one entry per R. The free trace is computed once per member and shared
/// across cube sides.
fn smoothing_ratio_means(
    grid: &Grid,
    ens: &RandomEnsembleSpec,
    rs: &[f64],
    horizon: f64,
    eps: Epsilon,
    gamma: f64,
    denom: &dyn Fn(&Field) -> Result<f64>,
) -> Result<Vec<f64>> {
    ens.validate()?;
    if rs.is_empty() {
        return Err(FonlsError::Config("need at least one cube side".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FonlsError::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let cubes: Result<Vec<CubeDecomposition>> =
        rs.iter().map(|&r| CubeDecomposition::new(grid, r)).collect();
    let cubes = cubes?;
    let nt = time_sample_count(horizon);
    let mut acc = vec![0.0_f64; rs.len()];
    for member in 0..ens.count {
        let u0 = ensemble_member(grid, ens, member)?;
        let d = denom(&u0)?;
        if !(d > 0.0 && d.is_finite()) {
            return Err(FonlsError::Numerical(format!(
                "member {member} has degenerate denominator {d}"
            )));
        }
        let trace = free_trace(&u0, horizon, nt, eps)?;
        let dtr = derivative_trace(&trace, gamma)?;
        for (i, cd) in cubes.iter().enumerate() {
            acc[i] += local_smoothing_norm(&dtr, cd)? / d;
        }
    }
    Ok(acc.into_iter().map(|s| s / ens.count as f64).collect())
}

/// Homogeneous smoothing: gain of half a derivative over the data class.
/// Measures local_smoothing(D^{3/2} S(t)u0, R-cubes) / |u0|_2 and fits the
/// ensemble means against R; the estimate predicts slope 1/2.
pub fn verify_homogeneous_smoothing(
    grid: &Grid,
    ens: &RandomEnsembleSpec,
    rs: &[f64],
    horizon: f64,
    eps: Epsilon,
) -> Result<ScalingFit> {
    let means = smoothing_ratio_means(grid, ens, rs, horizon, eps, 1.5, &|u0| Ok(u0.l2_norm()))?;
    fit_power_law(rs, &means)
}

/// Dual form of the homogeneous estimate: no derivative on the solution,
/// data measured in the homogeneous order -3/2 norm (mean-zero ensembles
/// only). Same predicted slope 1/2 in R.
pub fn verify_homogeneous_smoothing_dual(
    grid: &Grid,
    ens: &RandomEnsembleSpec,
    rs: &[f64],
    horizon: f64,
    eps: Epsilon,
) -> Result<ScalingFit> {
    let means =
        smoothing_ratio_means(grid, ens, rs, horizon, eps, 0.0, &|u0| homogeneous_norm(u0, -1.5))?;
    fit_power_law(rs, &means)
}

/// Interpolated smoothing: local_smoothing(S(t)u0) / |u0|_{-1/2 homogeneous}.
/// Returns (T-fit at unit cube side, R-fit at unit horizon); the estimate
/// predicts slopes 1/3 and 1/6. The unit scales are the defaults of the
/// localized norms, so both sweeps share a reference point.
pub fn verify_interpolated_smoothing(
    grid: &Grid,
    ens: &RandomEnsembleSpec,
    rs: &[f64],
    ts: &[f64],
    eps: Epsilon,
) -> Result<(ScalingFit, ScalingFit)> {
    let denom = |u0: &Field| homogeneous_norm(u0, -0.5);
    let mut t_means = Vec::with_capacity(ts.len());
    for &t in ts {
        let m = smoothing_ratio_means(grid, ens, &[1.0], t, eps, 0.0, &denom)?;
        t_means.push(m[0]);
    }
    let t_fit = fit_power_law(ts, &t_means)?;
    let r_means = smoothing_ratio_means(grid, ens, rs, 1.0, eps, 0.0, &denom)?;
    let r_fit = fit_power_law(rs, &r_means)?;
    Ok((t_fit, r_fit))
}

/// Smooth bump supported exactly on the unit cube [0,1)^n, peak value 1.
pub fn unit_cube_window(grid: &Grid) -> Field {
    Field::from_fn(grid.clone(), |x| {
        let mut w = 1.0;
        for &xi in x {
            if xi <= 0.0 || xi >= 1.0 {
                return Complex64::default();
            }
            w *= (4.0 - 1.0 / (xi * (1.0 - xi))).exp();
        }
        Complex64::new(w, 0.0)
    })
}

/// Zero-data evolution driven by the separable source F(t, x) = zeta(t) g(x),
/// marched by the incremental trapezoid rule on `zeta.len() - 1` fine steps.
/// The returned trace holds roughly 97 sampled instants (every fine step when
/// there are fewer), enough for the space-time quadratures downstream.
pub fn forced_trace(
    g: &Field,
    zeta: &[Complex64],
    horizon: f64,
    eps: Epsilon,
) -> Result<SpaceTimeTrace> {
    if zeta.len() < 2 {
        return Err(FonlsError::Config(
            "source modulation needs at least two samples".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FonlsError::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let steps = zeta.len() - 1;
    let dt = horizon / steps as f64;
    let grid = g.grid().clone();
    let n_total = grid.total_points();
    let e = eps.as_f64();
    let phase: Vec<Complex64> = (0..n_total)
        .map(|flat| {
            let xi2 = grid.freq_norm2(flat);
            Complex64::from_polar(1.0, -dt * (e * xi2 + xi2 * xi2))
        })
        .collect();
    let g_hat = g.spectrum();

    let coarse = steps.min(96);
    let sample_index: Vec<usize> = (0..=coarse)
        .map(|j| ((j * steps) as f64 / coarse as f64).round() as usize)
        .collect();

    let mut w_hat = vec![Complex64::default(); n_total];
    let mut times = Vec::with_capacity(coarse + 1);
    let mut fields = Vec::with_capacity(coarse + 1);
    let mut next_sample = 0usize;
    let half_dt = 0.5 * dt;
    let minus_i = Complex64::new(0.0, -1.0);
    for m in 0..=steps {
        if m > 0 {
            for (i, w) in w_hat.iter_mut().enumerate() {
                *w = phase[i] * (*w + half_dt * zeta[m - 1] * g_hat[i])
                    + half_dt * zeta[m] * g_hat[i];
            }
        }
        if next_sample <= coarse && sample_index[next_sample] == m {
            let spec: Vec<Complex64> = w_hat.iter().map(|&w| minus_i * w).collect();
            let f = Field::from_spectrum(grid.clone(), spec)?;
            if !f.is_finite() {
                return Err(FonlsError::BlowUp { t: m as f64 * dt });
            }
            times.push(m as f64 * dt);
            fields.push(f);
            next_sample += 1;
        }
    }
    SpaceTimeTrace::new(times, fields)
}

/// Per-horizon, per-member ratios of the inhomogeneous smoothing estimate:
/// sup over cubes of the space-time norm of D^2 u against the (single-cube)
/// space-time norm of the driving source. Members whose source vanishes are
/// excluded by construction (the ratio is left out of the returned row).
pub fn inhomogeneous_ratios(
    grid: &Grid,
    ens: &RandomEnsembleSpec,
    ts: &[f64],
    eps: Epsilon,
) -> Result<Vec<Vec<f64>>> {
    ens.validate()?;
    if ts.is_empty() {
        return Err(FonlsError::Config("need at least one horizon".into()));
    }
    let cubes = CubeDecomposition::new(grid, 1.0)?;
    let window = unit_cube_window(grid);
    let mut rows = Vec::with_capacity(ts.len());
    for &horizon in ts {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FonlsError::Config(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let steps = ((4096.0 * horizon) as usize).max(256);
        let mut row = Vec::with_capacity(ens.count);
        for member in 0..ens.count {
            let mut rng = member_rng(ens, member);
            let shape = ensemble_member_with_rng(grid, ens, &mut rng)?;
            let windowed: Vec<Complex64> = shape
                .samples()
                .iter()
                .zip(window.samples())
                .map(|(a, w)| a * w)
                .collect();
            let g = Field::from_samples(grid.clone(), windowed)?;
            // time modulation: a handful of tones well away from zero, so
            // the fine trapezoid resolves every beat over the horizon
            let mut tones = Vec::with_capacity(8);
            for _ in 0..8 {
                let nu: f64 = 20.0 + 180.0 * rng.gen::<f64>();
                let c = complex_normal(&mut rng);
                tones.push((nu, c));
            }
            let zeta: Vec<Complex64> = (0..=steps)
                .map(|m| {
                    let t = horizon * m as f64 / steps as f64;
                    tones
                        .iter()
                        .map(|&(nu, c)| c * Complex64::from_polar(1.0, nu * t))
                        .sum()
                })
                .collect();

            let g_l2 = g.l2_norm();
            let dt = horizon / steps as f64;
            let zeta_sq: Vec<f64> = zeta.iter().map(|z| z.norm_sqr()).collect();
            let zeta_l2 = crate::quad::trapezoid_uniform(&zeta_sq, dt).sqrt();
            let denom = g_l2 * zeta_l2;
            if denom == 0.0 {
                // a vanishing source drives nothing; skip the member
                continue;
            }

            let trace = forced_trace(&g, &zeta, horizon, eps)?;
            let d2 = derivative_trace(&trace, 2.0)?;
            let num = local_smoothing_norm(&d2, &cubes)?;
            row.push(num / denom);
        }
        if row.is_empty() {
            return Err(FonlsError::Numerical(format!(
                "all sources vanished at horizon {horizon}"
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Worst spread max/min of the ratios across members, over the horizons.
pub fn ratio_spread(rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .map(|row| {
            let mx = row.iter().cloned().fold(f64::MIN, f64::max);
            let mn = row.iter().cloned().fold(f64::MAX, f64::min);
            mx / mn
        })
        .fold(0.0_f64, f64::max)
}

/// Inhomogeneous smoothing: fit of the ensemble-mean ratios against the
/// horizon. The estimate predicts T^{1/4} as an upper bound, so the fitted
/// slope must stay below the band edge but may undershoot.
pub fn verify_inhomogeneous_smoothing(
    grid: &Grid,
    ens: &RandomEnsembleSpec,
    ts: &[f64],
    eps: Epsilon,
) -> Result<ScalingFit> {
    let rows = inhomogeneous_ratios(grid, ens, ts, eps)?;
    let means: Vec<f64> = rows.iter().map(|row| mean(row)).collect();
    fit_power_law(ts, &means)
}
