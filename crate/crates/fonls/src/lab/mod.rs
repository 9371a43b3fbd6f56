//! Measurement experiments for the linear estimates.
//!
//! Each submodule drives one family of checks: cube-localized smoothing
//! scaling laws, maximal functions over ensembles, the dyadic oscillatory
//! integrals and the kernel L^1 bound, and the coordinate-weight commutator
//! identities. This module owns what they share: reproducible random
//! ensembles and log-log scaling fits.

pub mod commutators;
pub mod kernel;
pub mod maximal;
pub mod oscillatory;
pub mod smoothing;

use crate::field::Field;
use crate::grid::Grid;
use crate::{FonlsError, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

fn default_envelope_width() -> f64 {
    2.5
}

/// A reproducible family of random initial data.
///
/// Member i is built from stream i of a counter-based generator, so members
/// are independent of each other and of the order they are requested in.
/// Spectrally: complex Gaussian coefficients on the band |m_j| <= band_limit,
/// damped by (1 + |xi|^2)^{-spectral_decay/2}, then localized in space by a
/// Gaussian envelope and projected to mean zero (cube-localized functionals
/// and negative-order norms both want compact support and no zero mode).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomEnsembleSpec {
    pub count: usize,
    pub seed: u64,
    /// Decay exponent sigma; keep sigma > s + n/2 so the H^s norms used as
    /// denominators stay finite as the band grows.
    pub spectral_decay: f64,
    /// Modes with any |m_j| above this are left empty.
    pub band_limit: usize,
    #[serde(default = "default_envelope_width")]
    pub envelope_width: f64,
}

impl RandomEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < 8 {
            return Err(FonlsError::Config(format!(
                "ensemble needs at least 8 members, got {}",
                self.count
            )));
        }
        if self.band_limit == 0 {
            return Err(FonlsError::Config("band_limit must be at least 1".into()));
        }
        if !(self.spectral_decay >= 0.0 && self.spectral_decay.is_finite()) {
            return Err(FonlsError::Config(format!(
                "spectral_decay must be >= 0, got {}",
                self.spectral_decay
            )));
        }
        if !(self.envelope_width > 0.0 && self.envelope_width.is_finite()) {
            return Err(FonlsError::Config(format!(
                "envelope_width must be positive, got {}",
                self.envelope_width
            )));
        }
        Ok(())
    }
}

/// Generator for one member: seed selects the family, stream the member.
pub fn member_rng(spec: &RandomEnsembleSpec, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(member as u64);
    rng
}

/// Standard complex Gaussian (unit variance per complex sample) via
/// Box-Muller. 1 - U keeps the log argument in (0, 1].
pub fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let radius = (-u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Complex64::from_polar(radius, angle)
}

/// Gaussian localization window e^{-|x|^2 / (2 width^2)}.
pub fn gaussian_envelope(grid: &Grid, width: f64) -> Field {
    Field::from_fn(grid.clone(), move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    })
}

/// Draw one member with an already-positioned generator; the caller may
/// keep drawing from `rng` afterwards (sources, tones) and stays on the
/// member's stream.
pub fn ensemble_member_with_rng(
    grid: &Grid,
    spec: &RandomEnsembleSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Field> {
    let b = spec.band_limit as i64;
    let half = spec.spectral_decay / 2.0;
    let n_total = grid.total_points();
    let mut coeffs = vec![Complex64::default(); n_total];
    // storage order fixes the draw order, so output is seed-deterministic
    for (flat, c) in coeffs.iter_mut().enumerate() {
        let idx = grid.axis_indices(flat);
        let in_band = (0..grid.dim()).all(|a| grid.mode(a, idx[a]).abs() <= b);
        if !in_band {
            continue;
        }
        let z = complex_normal(rng);
        *c = z * (1.0 + grid.freq_norm2(flat)).powf(-half);
    }
    let rough = Field::from_spectrum(grid.clone(), coeffs)?;
    let env = gaussian_envelope(grid, spec.envelope_width);
    let samples: Vec<Complex64> = rough
        .samples()
        .iter()
        .zip(env.samples())
        .map(|(a, e)| a * e)
        .collect();
    let localized = Field::from_samples(grid.clone(), samples)?;
    // subtract a multiple of the envelope so the mean vanishes without a
    // spectral discontinuity, then zero the residual roundoff in mode 0
    let fixed = localized.axpy(-localized.mean() / env.mean(), &env)?;
    let mut spectrum = fixed.spectrum();
    spectrum[0] = Complex64::default();
    Field::from_spectrum(grid.clone(), spectrum)
}

/// Member i of the ensemble on the given grid.
pub fn ensemble_member(grid: &Grid, spec: &RandomEnsembleSpec, member: usize) -> Result<Field> {
    spec.validate()?;
    if member >= spec.count {
        return Err(FonlsError::Config(format!(
            "member {member} requested from an ensemble of {}",
            spec.count
        )));
    }
    let mut rng = member_rng(spec, member);
    ensemble_member_with_rng(grid, spec, &mut rng)
}

/// A least-squares power law y ~ e^intercept * x^slope through positive data.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest |log y - fit| over the points.
    pub max_residual: f64,
}

/// Fit log y against log x. Needs >= 3 strictly increasing positive xs and
/// positive ys; anything else is a configuration error, not a fit.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(FonlsError::Config(format!(
            "fit needs matching lengths, got {} xs and {} ys",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(FonlsError::Config(format!(
            "fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    for w in xs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(FonlsError::Config(format!(
                "fit abscissas must increase strictly, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
            return Err(FonlsError::Config(format!(
                "fit needs positive finite data, got ({x}, {y})"
            )));
        }
    }
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| (y - (slope * x + intercept)).abs())
        .fold(0.0_f64, f64::max);
    Ok(ScalingFit {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        slope,
        intercept,
        max_residual,
    })
}

/// n equally spaced values from a to b inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_are_deterministic_and_distinct() {
        let g = Grid::new(&[128], &[16.0]).unwrap();
        let spec = RandomEnsembleSpec {
            count: 8,
            seed: 7,
            spectral_decay: 2.0,
            band_limit: 16,
            envelope_width: 2.0,
        };
        let a = ensemble_member(&g, &spec, 3).unwrap();
        let b = ensemble_member(&g, &spec, 3).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = ensemble_member(&g, &spec, 4).unwrap();
        assert!(a.l2_distance(&c).unwrap() > 1e-6);
    }

    #[test]
    fn members_are_mean_zero_and_localized() {
        let g = Grid::new(&[256], &[16.0]).unwrap();
        // the envelope tail at the half-box edge must sit below the trailing
        // mass guard: e^{-(L/2)^2 / w^2} well under 1e-10 needs w <= L/10.5
        let spec = RandomEnsembleSpec {
            count: 8,
            seed: 11,
            spectral_decay: 2.0,
            band_limit: 32,
            envelope_width: 1.4,
        };
        for member in 0..4 {
            let f = ensemble_member(&g, &spec, member).unwrap();
            assert!(f.mean().norm() <= 1e-14 * f.l2_norm());
            assert!(f.support_guard().is_ok());
        }
    }

    #[test]
    fn band_limit_is_respected() {
        let g = Grid::new(&[128], &[16.0]).unwrap();
        let spec = RandomEnsembleSpec {
            count: 8,
            seed: 5,
            spectral_decay: 1.0,
            band_limit: 100,
            envelope_width: 2.0,
        };
        // band wider than the grid: every mode may be filled, still finite
        let f = ensemble_member(&g, &spec, 0).unwrap();
        assert!(f.is_finite());
    }

    #[test]
    fn small_ensembles_are_rejected() {
        let g = Grid::new(&[64], &[8.0]).unwrap();
        let spec = RandomEnsembleSpec {
            count: 4,
            seed: 1,
            spectral_decay: 1.0,
            band_limit: 8,
            envelope_width: 1.0,
        };
        assert!(ensemble_member(&g, &spec, 0).is_err());
    }

    #[test]
    fn power_law_fit_recovers_exact_slopes() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|&x: &f64| 3.0 * x.powf(0.5)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0_f64.ln()).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        assert!(fit_power_law(&[1.0], &[1.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 1.0, 2.0], &[1.0, 1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]).is_err());
    }

    #[test]
    fn median_of_even_and_odd_lists() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
