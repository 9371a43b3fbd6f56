//! Complex fields sampled on a grid, with physical and spectral views.
//!
//! The physical samples are the source of truth. The forward transform
//! carries the 1/N^n factor, so the spectrum holds genuine Fourier
//! coefficients: f(x) = sum_m fhat_m e^{i xi_m . x} and Parseval reads
//! ||f||_2^2 = prod(2 L_j) * sum |fhat|^2.

use crate::grid::Grid;
use crate::{FonlsError, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                let dir = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                FftPlanner::new().plan_fft(len, dir)
            })
            .clone()
    })
}

/// Unscaled FFT along the last axis of a row-major (rows x len) buffer.
fn fft_rows(data: &mut [Complex64], len: usize, forward: bool) {
    let p = plan(len, forward);
    let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(len) {
        p.process_with_scratch(row, &mut scratch);
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Unscaled n-dimensional FFT of a row-major buffer shaped by `grid`.
fn fft_nd(grid: &Grid, data: &mut Vec<Complex64>, forward: bool) {
    match grid.dim() {
        1 => fft_rows(data, grid.points(0), forward),
        _ => {
            let (n0, n1) = (grid.points(0), grid.points(1));
            fft_rows(data, n1, forward);
            let mut t = transpose(data, n0, n1);
            fft_rows(&mut t, n0, forward);
            *data = transpose(&t, n1, n0);
        }
    }
}

/// The raw DFT references x + L rather than the centered coordinate, which
/// costs a phase e^{i pi m} = (-1)^m per axis on each coefficient. Flipping
/// the sign at odd index sums converts between the two; the map is its own
/// inverse, so the same pass serves both transform directions.
fn centered_signs(grid: &Grid, data: &mut [Complex64]) {
    match grid.dim() {
        1 => {
            for v in data.iter_mut().skip(1).step_by(2) {
                *v = -*v;
            }
        }
        _ => {
            let n1 = grid.points(1);
            for (i0, row) in data.chunks_exact_mut(n1).enumerate() {
                for v in row.iter_mut().skip(1 - i0 % 2).step_by(2) {
                    *v = -*v;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl Field {
    /// Field from physical samples in row-major storage order.
    pub fn from_samples(grid: Grid, samples: Vec<Complex64>) -> Result<Field> {
        if samples.len() != grid.total_points() {
            return Err(FonlsError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.total_points(),
                samples.len()
            )));
        }
        Ok(Field { grid, samples })
    }

    /// Field from Fourier coefficients in FFT storage order.
    pub fn from_spectrum(grid: Grid, mut spectrum: Vec<Complex64>) -> Result<Field> {
        if spectrum.len() != grid.total_points() {
            return Err(FonlsError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.total_points(),
                spectrum.len()
            )));
        }
        // inverse of (fft / N^n) is the unscaled inverse fft
        centered_signs(&grid, &mut spectrum);
        fft_nd(&grid, &mut spectrum, false);
        Ok(Field {
            grid,
            samples: spectrum,
        })
    }

    /// Zero field.
    pub fn zeros(grid: Grid) -> Field {
        let n = grid.total_points();
        Field {
            grid,
            samples: vec![Complex64::default(); n],
        }
    }

    /// Field built by evaluating `f` at every grid point (coordinates in
    /// storage order, length = dim).
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Field {
        let n = grid.total_points();
        let mut samples = Vec::with_capacity(n);
        let mut xs = vec![0.0; grid.dim()];
        for flat in 0..n {
            let idx = grid.axis_indices(flat);
            for (a, x) in xs.iter_mut().enumerate() {
                *x = grid.coord(a, idx[a]);
            }
            samples.push(f(&xs));
        }
        Field { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    /// Fourier coefficients (forward transform carries 1/N^n).
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut s = self.samples.clone();
        fft_nd(&self.grid, &mut s, true);
        let scale = 1.0 / self.grid.total_points() as f64;
        for v in &mut s {
            *v *= scale;
        }
        centered_signs(&self.grid, &mut s);
        s
    }

    /// L^2 norm with the box measure: sqrt(sum |f|^2 * h^n).
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.cell_volume();
        (self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    /// Mean value over the box (the zero Fourier coefficient).
    pub fn mean(&self) -> Complex64 {
        let n = self.samples.len() as f64;
        self.samples.iter().sum::<Complex64>() / n
    }

    pub fn is_finite(&self) -> bool {
        self.samples
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Field {
        Field {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| v.conj()).collect(),
        }
    }

    /// self + c * other.
    pub fn axpy(&self, c: Complex64, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(FonlsError::GridMismatch("axpy on different grids".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            samples,
        })
    }

    /// L^2 distance ||self - other||_2.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(FonlsError::GridMismatch(
                "distance on different grids".into(),
            ));
        }
        let w = self.grid.cell_volume();
        let s: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * w).sqrt())
    }

    /// Fraction of the |f|^2 mass outside the half box [-L/2, L/2)^n.
    pub fn mass_fraction_outside_half_box(&self) -> f64 {
        let g = &self.grid;
        let mut inside = 0.0;
        let mut total = 0.0;
        for (flat, v) in self.samples.iter().enumerate() {
            let idx = g.axis_indices(flat);
            let m = v.norm_sqr();
            total += m;
            let ok = (0..g.dim()).all(|a| {
                let x = g.coord(a, idx[a]);
                let l = g.half_length(a);
                x >= -l / 2.0 && x < l / 2.0
            });
            if ok {
                inside += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (total - inside) / total
        }
    }

    /// Enforce the periodization guard: mass outside [-L/2, L/2)^n must stay
    /// below 1e-10 of the total. Estimate experiments call this on every
    /// input so torus artifacts stay quantifiably negligible.
    pub fn support_guard(&self) -> Result<f64> {
        let frac = self.mass_fraction_outside_half_box();
        if frac >= 1e-10 {
            return Err(FonlsError::SupportGuard { frac });
        }
        Ok(frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn gaussian_1d(n: usize, l: f64, width: f64) -> Field {
        let g = Grid::new(&[n], &[l]).unwrap();
        Field::from_fn(g, |x| {
            Complex64::new((-x[0] * x[0] / (2.0 * width * width)).exp(), 0.0)
        })
    }

    #[test]
    fn round_trip_physical_spectral_physical() {
        let f = gaussian_1d(128, 10.0, 1.3);
        let back = Field::from_spectrum(f.grid().clone(), f.spectrum()).unwrap();
        let rel = f.l2_distance(&back).unwrap() / f.l2_norm();
        assert!(rel <= 1e-12, "round trip rel error {rel:.3e}");
    }

    #[test]
    fn parseval_with_box_measure() {
        let f = gaussian_1d(256, 8.0, 0.9);
        let l2 = f.l2_norm();
        let spec_sum: f64 = f.spectrum().iter().map(|v| v.norm_sqr()).sum();
        let spec_l2 = (f.grid().box_volume() * spec_sum).sqrt();
        assert!(
            (l2 - spec_l2).abs() <= 1e-12 * l2,
            "parseval defect {:.3e}",
            (l2 - spec_l2).abs() / l2
        );
    }

    #[test]
    fn parseval_2d() {
        let g = Grid::new(&[32, 64], &[4.0, 8.0]).unwrap();
        let f = Field::from_fn(g, |x| {
            Complex64::new(
                (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(),
                0.3 * (x[0] + 0.2 * x[1]).sin(),
            )
        });
        let l2 = f.l2_norm();
        let spec_sum: f64 = f.spectrum().iter().map(|v| v.norm_sqr()).sum();
        let spec_l2 = (f.grid().box_volume() * spec_sum).sqrt();
        assert!((l2 - spec_l2).abs() <= 1e-12 * l2);
    }

    #[test]
    fn single_mode_spectrum_is_a_delta() {
        let g = Grid::new(&[64], &[16.0]).unwrap();
        let k = g.freq(0, 3);
        let f = Field::from_fn(g, |x| Complex64::new(0.0, k * x[0]).exp());
        let spec = f.spectrum();
        assert!((spec[3] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let rest: f64 = spec
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 3)
            .map(|(_, v)| v.norm())
            .sum();
        assert!(rest < 1e-10);
    }

    #[test]
    fn guard_flags_wide_data() {
        let wide = gaussian_1d(128, 8.0, 6.0);
        assert!(wide.support_guard().is_err());
        let narrow = gaussian_1d(128, 8.0, 0.5);
        assert!(narrow.support_guard().is_ok());
    }
}
