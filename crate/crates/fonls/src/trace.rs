//! A waveform sampled at a list of instants on a fixed grid.

use crate::field::Field;
use crate::grid::Grid;
use crate::{FonlsError, Result};

/// Time samples of a field, all on the same grid, times strictly increasing.
#[derive(Debug, Clone)]
pub struct SpaceTimeTrace {
    times: Vec<f64>,
    fields: Vec<Field>,
}

impl SpaceTimeTrace {
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<SpaceTimeTrace> {
        if times.len() != fields.len() {
            return Err(FonlsError::Config(format!(
                "trace has {} times but {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.is_empty() {
            return Err(FonlsError::Config("trace must hold at least one instant".into()));
        }
        if !times.iter().all(|t| t.is_finite()) {
            return Err(FonlsError::Config("trace times must be finite".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FonlsError::Config(
                "trace times must be strictly increasing".into(),
            ));
        }
        let g0 = fields[0].grid();
        if fields.iter().any(|f| f.grid() != g0) {
            return Err(FonlsError::GridMismatch(
                "all fields in a trace must share one grid".into(),
            ));
        }
        Ok(SpaceTimeTrace { times, fields })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires >= 1 instant
    }

    /// Restrict to the instants with t <= t_max (t_max inclusive up to a
    /// relative slack of 1e-12, so prefix extraction is robust to rounding).
    pub fn prefix(&self, t_max: f64) -> Result<SpaceTimeTrace> {
        let slack = 1e-12 * t_max.abs().max(1.0);
        let n = self.times.iter().take_while(|&&t| t <= t_max + slack).count();
        if n == 0 {
            return Err(FonlsError::Config(format!(
                "no trace instants at or before t = {t_max}"
            )));
        }
        SpaceTimeTrace::new(self.times[..n].to_vec(), self.fields[..n].to_vec())
    }
}
