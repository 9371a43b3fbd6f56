//! Decomposition of the periodic box into congruent cubes, and the
//! cube-localized space-time functionals built on it:
//!
//! * local smoothing:  sup over cubes of the L2 norm in time and space,
//! * l2-maximal:       l2 over cubes of the sup in time and space,
//! * l1-maximal:       l1 over cubes of the sup in time and space.

use crate::field::Field;
use crate::grid::Grid;
use crate::trace::SpaceTimeTrace;
use crate::{FonlsError, Result};

#[derive(Debug, Clone)]
pub struct CubeDecomposition {
    grid: Grid,
    side: f64,
    cubes_per_axis: Vec<usize>,
    /// sample index -> cube index
    assignment: Vec<u32>,
    count: usize,
}

impl CubeDecomposition {
    /// Split the box into cubes of the given side. The side must tile each
    /// axis exactly: 2 L_a / side is an integer.
    pub fn new(grid: &Grid, side: f64) -> Result<CubeDecomposition> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(FonlsError::Config(format!("cube side must be positive, got {side}")));
        }
        let dim = grid.dim();
        let mut cubes_per_axis = Vec::with_capacity(dim);
        for a in 0..dim {
            let ratio = 2.0 * grid.half_length(a) / side;
            let rounded = ratio.round();
            if (ratio - rounded).abs() > 1e-9 * ratio.max(1.0) || rounded < 1.0 {
                return Err(FonlsError::Config(format!(
                    "cube side {side} does not tile axis {a}: box extent {} over side is {ratio}",
                    2.0 * grid.half_length(a)
                )));
            }
            cubes_per_axis.push(rounded as usize);
        }
        let count: usize = cubes_per_axis.iter().product();
        let n_total = grid.total_points();
        let mut assignment = vec![0u32; n_total];
        for (flat, slot) in assignment.iter_mut().enumerate() {
            let idx = grid.axis_indices(flat);
            let mut cube = 0usize;
            for a in 0..dim {
                let offset = grid.coord(a, idx[a]) + grid.half_length(a);
                let c = ((offset / side).floor() as usize).min(cubes_per_axis[a] - 1);
                cube = cube * cubes_per_axis[a] + c;
            }
            *slot = cube as u32;
        }
        Ok(CubeDecomposition {
            grid: grid.clone(),
            side,
            cubes_per_axis,
            assignment,
            count,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn cubes_per_axis(&self) -> &[usize] {
        &self.cubes_per_axis
    }

    pub fn cube_of(&self, flat: usize) -> usize {
        self.assignment[flat] as usize
    }

    fn check_field(&self, f: &Field) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(FonlsError::GridMismatch(
                "field grid differs from the decomposition grid".into(),
            ));
        }
        Ok(())
    }

    /// Per-cube integral of |f|^2 (cell-volume quadrature).
    pub fn mass_per_cube(&self, f: &Field) -> Result<Vec<f64>> {
        self.check_field(f)?;
        let cell = self.grid.cell_volume();
        let mut out = vec![0.0f64; self.count];
        for (v, &c) in f.samples().iter().zip(&self.assignment) {
            out[c as usize] += v.norm_sqr();
        }
        for m in &mut out {
            *m *= cell;
        }
        Ok(out)
    }

    /// Per-cube sup of |f|.
    pub fn sup_per_cube(&self, f: &Field) -> Result<Vec<f64>> {
        self.check_field(f)?;
        let mut out = vec![0.0f64; self.count];
        for (v, &c) in f.samples().iter().zip(&self.assignment) {
            let a = v.norm();
            let slot = &mut out[c as usize];
            if a > *slot {
                *slot = a;
            }
        }
        Ok(out)
    }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0f64; n];
    for i in 0..n - 1 {
        let dt = times[i + 1] - times[i];
        w[i] += 0.5 * dt;
        w[i + 1] += 0.5 * dt;
    }
    w
}

/// sup over cubes of ( int_0^T int_Q |u|^2 dx dt )^{1/2}, the time integral
/// by the trapezoid rule over the trace instants.
pub fn local_smoothing_norm(trace: &SpaceTimeTrace, cubes: &CubeDecomposition) -> Result<f64> {
    if trace.len() < 2 {
        return Err(FonlsError::Config(
            "local smoothing needs at least two instants for the time integral".into(),
        ));
    }
    let w = trapezoid_weights(trace.times());
    let mut acc = vec![0.0f64; cubes.count()];
    for (f, &wt) in trace.fields().iter().zip(&w) {
        let mass = cubes.mass_per_cube(f)?;
        for (a, m) in acc.iter_mut().zip(&mass) {
            *a += wt * m;
        }
    }
    Ok(acc.iter().cloned().fold(0.0, f64::max).sqrt())
}

/// ( sum over cubes of sup over instants and cube points of |u|^2 )^{1/2}.
/// A single-instant trace gives the instantaneous version.
pub fn maximal_l2_norm(trace: &SpaceTimeTrace, cubes: &CubeDecomposition) -> Result<f64> {
    let sups = sup_over_time_per_cube(trace, cubes)?;
    Ok(sups.iter().map(|s| s * s).sum::<f64>().sqrt())
}

/// sum over cubes of sup over instants and cube points of |u|.
pub fn maximal_l1_norm(trace: &SpaceTimeTrace, cubes: &CubeDecomposition) -> Result<f64> {
    let sups = sup_over_time_per_cube(trace, cubes)?;
    Ok(sups.iter().sum())
}

/// Per-cube sup of |u| over all trace instants.
pub fn sup_over_time_per_cube(
    trace: &SpaceTimeTrace,
    cubes: &CubeDecomposition,
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0f64; cubes.count()];
    for f in trace.fields() {
        let sups = cubes.sup_per_cube(f)?;
        for (a, s) in acc.iter_mut().zip(&sups) {
            if *s > *a {
                *a = *s;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn bump(g: &Grid) -> Field {
        Field::from_fn(g.clone(), |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-r2 / 2.0).exp(), 0.3 * (-r2 / 3.0).exp())
        })
    }

    #[test]
    fn tiling_is_validated() {
        let g = Grid::new(&[64], &[16.0]).unwrap();
        assert_eq!(CubeDecomposition::new(&g, 2.0).unwrap().count(), 16);
        assert_eq!(CubeDecomposition::new(&g, 32.0).unwrap().count(), 1);
        assert!(CubeDecomposition::new(&g, 3.0).is_err());
        assert!(CubeDecomposition::new(&g, -1.0).is_err());
    }

    #[test]
    fn cube_masses_partition_the_total_mass() {
        let g = Grid::new(&[128, 64], &[16.0, 8.0]).unwrap();
        let f = bump(&g);
        let cubes = CubeDecomposition::new(&g, 4.0).unwrap();
        assert_eq!(cubes.count(), 8 * 4);
        let masses = cubes.mass_per_cube(&f).unwrap();
        let total: f64 = masses.iter().sum();
        let l2sq = f.l2_norm().powi(2);
        assert!((total - l2sq).abs() <= 1e-12 * l2sq);
    }

    #[test]
    fn constant_field_maximal_norms() {
        let g = Grid::new(&[64], &[16.0]).unwrap();
        let c = Complex64::new(0.6, -0.8); // |c| = 1
        let f = Field::from_fn(g.clone(), |_| c);
        let cubes = CubeDecomposition::new(&g, 2.0).unwrap();
        let tr = SpaceTimeTrace::new(vec![0.0], vec![f]).unwrap();
        let l2 = maximal_l2_norm(&tr, &cubes).unwrap();
        let l1 = maximal_l1_norm(&tr, &cubes).unwrap();
        assert!((l2 - (16.0f64).sqrt()).abs() <= 1e-12);
        assert!((l1 - 16.0).abs() <= 1e-12);
    }

    #[test]
    fn local_smoothing_of_static_field_scales_like_sqrt_t() {
        let g = Grid::new(&[128], &[16.0]).unwrap();
        let f = bump(&g);
        let cubes = CubeDecomposition::new(&g, 4.0).unwrap();
        let times: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let fields = vec![f.clone(); times.len()];
        let tr = SpaceTimeTrace::new(times, fields).unwrap();
        let v = local_smoothing_norm(&tr, &cubes).unwrap();
        let masses = cubes.mass_per_cube(&f).unwrap();
        let peak = masses.iter().cloned().fold(0.0, f64::max);
        assert!((v - peak.sqrt()).abs() <= 1e-12 * peak.sqrt());
    }

    #[test]
    fn maximal_sup_grows_with_more_instants() {
        let g = Grid::new(&[64], &[8.0]).unwrap();
        let cubes = CubeDecomposition::new(&g, 8.0).unwrap();
        let f1 = Field::from_fn(g.clone(), |_| Complex64::new(1.0, 0.0));
        let f2 = Field::from_fn(g.clone(), |_| Complex64::new(2.0, 0.0));
        let one = SpaceTimeTrace::new(vec![0.0], vec![f1.clone()]).unwrap();
        let two = SpaceTimeTrace::new(vec![0.0, 1.0], vec![f1, f2]).unwrap();
        let a = maximal_l1_norm(&one, &cubes).unwrap();
        let b = maximal_l1_norm(&two, &cubes).unwrap();
        assert!(a < b && (b - 2.0 * cubes.count() as f64).abs() <= 1e-12);
    }
}
