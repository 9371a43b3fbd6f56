//! Periodic box discretization.
//!
//! The box is [-L_1, L_1) x ... x [-L_n, L_n) with periodic identification,
//! sampled on N_j equispaced points per axis (N_j a power of two). The dual
//! lattice per axis is xi = (pi/L) * m with integer m in [-N/2, N/2); storage
//! follows the usual FFT layout (m = i for i < N/2, m = i - N otherwise).

use crate::{FonlsError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: Vec<usize>,
    half_length: Vec<f64>,
}

impl Grid {
    /// New grid; `points[j]` must be a power of two >= 4 and `half_length[j] > 0`.
    pub fn new(points: &[usize], half_length: &[f64]) -> Result<Grid> {
        let dim = points.len();
        if dim == 0 || dim > 2 {
            return Err(FonlsError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if half_length.len() != dim {
            return Err(FonlsError::InvalidGrid(
                "points and half_length must have equal length".into(),
            ));
        }
        for (&n, &l) in points.iter().zip(half_length) {
            if n < 4 || !n.is_power_of_two() {
                return Err(FonlsError::InvalidGrid(format!(
                    "points per axis must be a power of two >= 4, got {n}"
                )));
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(FonlsError::InvalidGrid(format!(
                    "half length must be positive and finite, got {l}"
                )));
            }
        }
        Ok(Grid {
            dim,
            points: points.to_vec(),
            half_length: half_length.to_vec(),
        })
    }

    pub fn square(dim: usize, n: usize, l: f64) -> Result<Grid> {
        Grid::new(&vec![n; dim], &vec![l; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn half_length(&self, axis: usize) -> f64 {
        self.half_length[axis]
    }

    /// Sample spacing h = 2L/N on the given axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_length[axis] / self.points[axis] as f64
    }

    pub fn total_points(&self) -> usize {
        self.points.iter().product()
    }

    /// Cell volume h_1 * ... * h_n (the quadrature weight of one sample).
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Box volume (2 L_1) * ... * (2 L_n).
    pub fn box_volume(&self) -> f64 {
        self.half_length.iter().map(|l| 2.0 * l).product()
    }

    /// Signed integer mode m for storage index i on an axis (FFT layout).
    pub fn mode(&self, axis: usize, i: usize) -> i64 {
        let n = self.points[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Frequency xi = (pi/L) m for storage index i on an axis.
    pub fn freq(&self, axis: usize, i: usize) -> f64 {
        std::f64::consts::PI / self.half_length[axis] * self.mode(axis, i) as f64
    }

    /// Physical coordinate x = -L + h i for storage index i on an axis.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -self.half_length[axis] + self.spacing(axis) * i as f64
    }

    /// Decompose a flat storage index into per-axis indices (row-major,
    /// axis 0 slowest).
    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points[1], flat % self.points[1]],
        }
    }

    /// Frequency vector at a flat storage index (length = dim).
    pub fn freq_vec(&self, flat: usize) -> Vec<f64> {
        let idx = self.axis_indices(flat);
        (0..self.dim).map(|a| self.freq(a, idx[a])).collect()
    }

    /// |xi|^2 at a flat storage index.
    pub fn freq_norm2(&self, flat: usize) -> f64 {
        let idx = self.axis_indices(flat);
        (0..self.dim).map(|a| self.freq(a, idx[a]).powi(2)).sum()
    }

    /// Largest |xi| on the lattice (box corner, Nyquist modes included).
    pub fn freq_max(&self) -> f64 {
        (0..self.dim)
            .map(|a| {
                let m = self.points[a] as f64 / 2.0;
                (std::f64::consts::PI / self.half_length[a] * m).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// True if storage index i is the (unpaired) Nyquist mode m = -N/2.
    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.points[axis] / 2
    }
}
