//! Exact commutation identities between coordinate weights and the
//! propagator.
//!
//! Moving a coordinate weight x_j past S(t) costs derivative corrections
//! with polynomial-in-t coefficients; iterating gives the second-moment
//! version. Both identities are exact, so their numerical residuals measure
//! nothing but roundoff and the spectral truncation of the weighted fields,
//! provided the data (and its evolution over the times probed) stays well
//! inside the box where the coordinate weight is smooth and periodization
//! is invisible.

use crate::field::Field;
use crate::multiplier::{laplacian, partial_derivative, propagate, Epsilon};
use crate::Result;
use num_complex::Complex64;
use serde::Serialize;

/// One residual measurement: which identity, which axes, at what time.
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorRow {
    pub order: u8,
    pub axis_j: usize,
    /// second axis of the moment; equals axis_j on first-moment rows
    pub axis_k: usize,
    pub t: f64,
    pub eps: i8,
    pub residual: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub data_l2: f64,
    pub rows: Vec<CommutatorRow>,
}

impl CommutatorReport {
    /// Largest relative residual among rows of the given order.
    pub fn max_relative(&self, order: u8) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.order == order)
            .map(|r| r.relative)
            .fold(0.0, f64::max)
    }
}

/// Pointwise multiplication by the coordinate x_axis.
pub fn coordinate_multiply(f: &Field, axis: usize) -> Result<Field> {
    let grid = f.grid().clone();
    let samples: Vec<Complex64> = f
        .samples()
        .iter()
        .enumerate()
        .map(|(flat, &v)| {
            let idx = grid.axis_indices(flat);
            v * grid.coord(axis, idx[axis])
        })
        .collect();
    Field::from_samples(grid, samples)
}

fn unit_pair_index(dim: usize, j: usize, k: usize) -> Vec<u32> {
    let mut alpha = vec![0u32; dim];
    alpha[j] += 1;
    alpha[k] += 1;
    alpha
}

/// Measures both moment identities for every axis (and axis pair, j <= k),
/// every listed time, and every listed dispersion sign. The data must be
/// supported well inside the box; the trailing mass guard enforces that.
pub fn verify_commutator_identities(
    f: &Field,
    ts: &[f64],
    epses: &[Epsilon],
) -> Result<CommutatorReport> {
    f.support_guard()?;
    let dim = f.grid().dim();
    let data_l2 = f.l2_norm();

    let lap = laplacian(f)?;
    let bilap = laplacian(&lap)?;
    let mut unit = vec![0u32; dim];
    let mut dj = Vec::with_capacity(dim);
    let mut dj_lap = Vec::with_capacity(dim);
    let mut xf = Vec::with_capacity(dim);
    for j in 0..dim {
        unit.iter_mut().for_each(|a| *a = 0);
        unit[j] = 1;
        dj.push(partial_derivative(f, &unit)?);
        dj_lap.push(partial_derivative(&lap, &unit)?);
        xf.push(coordinate_multiply(f, j)?);
    }

    let mut rows = Vec::new();
    for &eps in epses {
        let e = eps.as_f64();
        for &t in ts {
            let sf = propagate(f, t, eps)?;
            let grad_coeff = Complex64::new(0.0, -2.0 * e * t);
            let third_coeff = Complex64::new(0.0, 4.0 * t);

            for j in 0..dim {
                let lhs = coordinate_multiply(&sf, j)?;
                let g = xf[j]
                    .axpy(third_coeff, &dj_lap[j])?
                    .axpy(grad_coeff, &dj[j])?;
                let rhs = propagate(&g, t, eps)?;
                let residual = lhs.l2_distance(&rhs)?;
                rows.push(CommutatorRow {
                    order: 1,
                    axis_j: j,
                    axis_k: j,
                    t,
                    eps: e as i8,
                    residual,
                    relative: residual / data_l2,
                });
            }

            for j in 0..dim {
                for k in j..dim {
                    let lhs =
                        coordinate_multiply(&coordinate_multiply(&sf, j)?, k)?;
                    let pair = unit_pair_index(dim, j, k);
                    let djk = partial_derivative(f, &pair)?;
                    let djk_lap = partial_derivative(&lap, &pair)?;
                    let djk_bilap = partial_derivative(&bilap, &pair)?;
                    let mut g = coordinate_multiply(&xf[j], k)?
                        .axpy(grad_coeff, &coordinate_multiply(&dj[j], k)?)?
                        .axpy(grad_coeff, &coordinate_multiply(&dj[k], j)?)?
                        .axpy(third_coeff, &coordinate_multiply(&dj_lap[j], k)?)?
                        .axpy(third_coeff, &coordinate_multiply(&dj_lap[k], j)?)?
                        .axpy(Complex64::new(-4.0 * e * e * t * t, 8.0 * t), &djk)?
                        .axpy(Complex64::new(16.0 * e * t * t, 0.0), &djk_lap)?
                        .axpy(Complex64::new(-16.0 * t * t, 0.0), &djk_bilap)?;
                    if j == k {
                        g = g.axpy(third_coeff, &lap)?.axpy(grad_coeff, f)?;
                    }
                    let rhs = propagate(&g, t, eps)?;
                    let residual = lhs.l2_distance(&rhs)?;
                    rows.push(CommutatorRow {
                        order: 2,
                        axis_j: j,
                        axis_k: k,
                        t,
                        eps: e as i8,
                        residual,
                        relative: residual / data_l2,
                    });
                }
            }
        }
    }
    Ok(CommutatorReport { data_l2, rows })
}
