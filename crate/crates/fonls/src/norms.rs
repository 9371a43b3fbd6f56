//! Sobolev, homogeneous and polynomially weighted norms.
//!
//! All integrals are the exact quadratures of the trigonometric interpolant:
//! spectral sums carry the box volume, physical sums the cell volume, so the
//! two routes agree to machine precision (Parseval).

use crate::field::Field;
use crate::multiplier::partial_derivative;
use crate::{FonlsError, Result};

/// Inhomogeneous Sobolev norm: sqrt( vol * sum (1+|xi|^2)^s |f_hat|^2 ).
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    let g = f.grid();
    let spec = f.spectrum();
    let mut acc = 0.0;
    for (flat, v) in spec.iter().enumerate() {
        let w = (1.0 + g.freq_norm2(flat)).powf(s);
        acc += w * v.norm_sqr();
    }
    (g.box_volume() * acc).sqrt()
}

/// Homogeneous norm: sqrt( vol * sum |xi|^{2s} |f_hat|^2 ).
///
/// The zero mode contributes nothing for s > 0 and its |0|^0 = 1 weight for
/// s = 0 (so s = 0 reproduces the plain L2 norm). For s < 0 the zero mode is
/// excluded, which is only meaningful on mean-zero data; a nonzero mean is
/// an error rather than a silent drop.
pub fn homogeneous_norm(f: &Field, s: f64) -> Result<f64> {
    let g = f.grid();
    let spec = f.spectrum();
    if s < 0.0 {
        let mean = spec[0].norm();
        let bound = 1e-12 * f.l2_norm().max(f64::MIN_POSITIVE);
        if mean > bound {
            return Err(FonlsError::MeanNotZero { mean, bound });
        }
    }
    let mut acc = 0.0;
    for (flat, v) in spec.iter().enumerate() {
        let xi2 = g.freq_norm2(flat);
        let w = if xi2 == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                continue; // 0 for s > 0, excluded for s < 0
            }
        } else {
            xi2.powf(s)
        };
        acc += w * v.norm_sqr();
    }
    Ok((g.box_volume() * acc).sqrt())
}

/// All multi-indices gamma in `dim` axes with |gamma| <= l, in a fixed
/// deterministic order (total order first, then lexicographic).
pub fn multi_indices(dim: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match dim {
        1 => {
            for k in 0..=l {
                out.push(vec![k]);
            }
        }
        2 => {
            for total in 0..=l {
                for a in (0..=total).rev() {
                    out.push(vec![a, total - a]);
                }
            }
        }
        _ => unreachable!("grids are 1d or 2d"),
    }
    out
}

/// d^gamma f for any order, composing the bounded-order spectral derivative
/// in chunks of total order <= 4 per application.
pub fn high_order_derivative(f: &Field, gamma: &[usize]) -> Result<Field> {
    let mut rem: Vec<usize> = gamma.to_vec();
    let mut cur = f.clone();
    loop {
        let mut chunk = vec![0usize; rem.len()];
        let mut budget = 4usize;
        for (c, r) in chunk.iter_mut().zip(rem.iter_mut()) {
            let take = (*r).min(budget);
            *c = take;
            *r -= take;
            budget -= take;
            if budget == 0 {
                break;
            }
        }
        if chunk.iter().all(|&c| c == 0) {
            return Ok(cur);
        }
        let chunk_u32: Vec<u32> = chunk.iter().map(|&c| c as u32).collect();
        cur = partial_derivative(&cur, &chunk_u32)?;
    }
}

/// Weighted Sobolev norm sum_{|gamma| <= l} ( int |d^gamma f|^2 |x|^j dx )^{1/2}
/// (a sum of square roots, not a root of sums).
///
/// Polynomial weights are not periodic, so the integrand must be supported
/// well inside the box: the mass fraction outside the half-size box is
/// checked first and a violation is an error.
pub fn weighted_norm(f: &Field, l: usize, j: usize) -> Result<f64> {
    f.support_guard()?;
    let g = f.grid().clone();
    let dim = g.dim();
    let cell = g.cell_volume();
    // |x|^j at every sample, once
    let n_total = g.total_points();
    let mut wgt = vec![0.0f64; n_total];
    for (flat, w) in wgt.iter_mut().enumerate() {
        let idx = g.axis_indices(flat);
        let r2: f64 = (0..dim).map(|a| g.coord(a, idx[a]).powi(2)).sum();
        *w = r2.powf(j as f64 / 2.0);
    }
    let mut total = 0.0;
    for gamma in multi_indices(dim, l) {
        let d = high_order_derivative(f, &gamma)?;
        let mut acc = 0.0;
        for (v, w) in d.samples().iter().zip(&wgt) {
            acc += v.norm_sqr() * w;
        }
        total += (acc * cell).sqrt();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::multiplier::MultiplierSymbol;
    use num_complex::Complex64;

    fn gaussian(g: &Grid, width: f64) -> Field {
        Field::from_fn(g.clone(), |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
        })
    }

    #[test]
    fn sobolev_zero_is_l2() {
        let g = Grid::new(&[128], &[16.0]).unwrap();
        let f = gaussian(&g, 1.3);
        assert!((sobolev_norm(&f, 0.0) - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn homogeneous_zero_is_l2_and_positive_orders_scale_modes() {
        let g = Grid::new(&[64], &[8.0]).unwrap();
        let f = gaussian(&g, 1.0);
        let h0 = homogeneous_norm(&f, 0.0).unwrap();
        assert!((h0 - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());

        let k = g.freq(0, 5);
        let mode = Field::from_fn(g.clone(), |x| Complex64::new(0.0, k * x[0]).exp());
        let h1 = homogeneous_norm(&mode, 1.0).unwrap();
        let expected = k * g.box_volume().sqrt();
        assert!((h1 - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn negative_order_requires_mean_zero() {
        let g = Grid::new(&[64], &[8.0]).unwrap();
        let f = gaussian(&g, 1.0);
        match homogeneous_norm(&f, -0.5) {
            Err(FonlsError::MeanNotZero { .. }) => {}
            other => panic!("expected MeanNotZero, got {other:?}"),
        }
        let k = g.freq(0, 3);
        let mode = Field::from_fn(g, |x| Complex64::new(0.0, k * x[0]).exp());
        let h = homogeneous_norm(&mode, -0.5).unwrap();
        assert!(h.is_finite() && h > 0.0);
    }

    #[test]
    fn multi_index_enumeration_is_complete() {
        assert_eq!(multi_indices(1, 3), vec![vec![0], vec![1], vec![2], vec![3]]);
        let m2 = multi_indices(2, 2);
        assert_eq!(m2.len(), 6);
        assert_eq!(m2[0], vec![0, 0]);
        assert!(m2.contains(&vec![1, 1]));
        assert!(m2.contains(&vec![0, 2]));
    }

    #[test]
    fn chunked_composition_matches_one_shot_symbol() {
        let g = Grid::new(&[256], &[20.0]).unwrap();
        let f = gaussian(&g, 1.5);
        let d5 = high_order_derivative(&f, &[5]).unwrap();
        let direct = MultiplierSymbol::new("d5", vec![true], move |xi: &[f64]| {
            Complex64::new(0.0, xi[0]).powu(5)
        });
        let expected = crate::multiplier::apply_multiplier(&f, &direct).unwrap();
        assert!(d5.l2_distance(&expected).unwrap() <= 1e-10 * expected.l2_norm());
    }

    #[test]
    fn weighted_norm_guards_support() {
        let g = Grid::new(&[128], &[8.0]).unwrap();
        let wide = gaussian(&g, 4.0);
        match weighted_norm(&wide, 1, 2) {
            Err(FonlsError::SupportGuard { .. }) => {}
            other => panic!("expected SupportGuard, got {other:?}"),
        }
    }

    #[test]
    fn weighted_norm_with_no_weight_and_no_derivatives_is_l2() {
        let g = Grid::new(&[128], &[16.0]).unwrap();
        let f = gaussian(&g, 1.0);
        let w = weighted_norm(&f, 0, 0).unwrap();
        assert!((w - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }
}
