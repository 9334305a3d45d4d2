//! SNR grids given on the command line as `start:stop:step` in dB.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::CliError;

pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Closed interval of SNR values in dB, walked in equal steps.
///
/// A single value `x` (or `x:x:step`) is a one-point grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SnrGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Result<Self, CliError> {
        if !(start_db.is_finite() && stop_db.is_finite() && step_db.is_finite()) {
            return Err(CliError::Usage("SNR grid values must be finite".into()));
        }
        if start_db > stop_db {
            return Err(CliError::Usage(format!(
                "SNR grid start {start_db} dB exceeds stop {stop_db} dB"
            )));
        }
        if !(step_db > 0.0) && start_db != stop_db {
            return Err(CliError::Usage(format!(
                "SNR grid step must be > 0, got {step_db}"
            )));
        }
        let grid = SnrGrid {
            start_db,
            stop_db,
            step_db,
        };
        let len = grid.raw_len();
        if !(len <= MAX_GRID_POINTS as f64) {
            return Err(CliError::Usage(format!(
                "SNR grid has {len} points, limit is {MAX_GRID_POINTS}"
            )));
        }
        Ok(grid)
    }

    /// -10 dB to 30 dB in quarter-dB steps.
    pub fn default_sweep() -> Self {
        SnrGrid {
            start_db: -10.0,
            stop_db: 30.0,
            step_db: 0.25,
        }
    }

    fn raw_len(&self) -> f64 {
        if self.start_db == self.stop_db {
            return 1.0;
        }
        // the tolerance keeps a stop value that is a whole number of steps away
        ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() + 1.0
    }

    pub fn len(&self) -> usize {
        self.raw_len() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid points in dB, each computed as `start + i * step` so rounding
    /// does not accumulate.
    pub fn points_db(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.start_db + i as f64 * self.step_db)
            .collect()
    }
}

impl FromStr for SnrGrid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad SNR grid value '{t}' in '{s}'")))
        };
        match parts.as_slice() {
            [single] => {
                let x = num(single)?;
                SnrGrid::new(x, x, 0.0)
            }
            [a, b, c] => SnrGrid::new(num(a)?, num(b)?, num(c)?),
            _ => Err(CliError::Usage(format!(
                "SNR grid '{s}' is not start:stop:step"
            ))),
        }
    }
}

impl fmt::Display for SnrGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start_db, self.stop_db, self.step_db)
    }
}

/// dB to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
