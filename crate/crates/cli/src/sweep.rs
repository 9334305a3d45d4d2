//! Resolved sweep settings shared by the analytic and simulate commands.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use scopt::channel::{Detector, DEFAULT_CHUNK_SIZE, NOISE_VARIANCE};
use scopt::scopt::{rf_approx, ScoptParams};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::grid::SnrGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Scsh,
    #[default]
    Scopt,
}

impl FromStr for Family {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scsh" => Ok(Family::Scsh),
            "scopt" => Ok(Family::Scopt),
            _ => Err(CliError::Usage(format!(
                "unknown family '{s}' (scsh|scopt)"
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Scsh => "scsh",
            Family::Scopt => "scopt",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!("unknown format '{s}' (csv|json)"))),
        }
    }
}

/// `K = 2^((rf - 2) / 2)`, the block size whose approximate spectral
/// efficiency is `rf`. Fails unless that is a whole number.
pub fn k_for_rf(rf: f64) -> Result<usize> {
    if !(rf >= 2.0) || !rf.is_finite() {
        return Err(CliError::Usage(format!(
            "--rf {rf} must be >= 2 for a permutation constellation"
        )));
    }
    let k = ((rf - 2.0) / 2.0).exp2().round();
    if k > 1e6 || (rf_approx(k as usize) - rf).abs() > 1e-9 {
        return Err(CliError::Usage(format!(
            "--rf {rf} does not map to an integer K"
        )));
    }
    Ok(k as usize)
}

/// SCOPT size: `k` levels per half block and duration `n`. `q` is known
/// only when `n` is a multiple of `k`, and is needed to build a constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScoptShape {
    pub k: usize,
    pub n: u64,
    pub q: Option<usize>,
}

impl ScoptShape {
    pub fn params(&self) -> Result<ScoptParams> {
        let q = self.q.ok_or_else(|| {
            CliError::Usage(format!(
                "n = {} is not a multiple of k = {}; a constellation needs integer q",
                self.n, self.k
            ))
        })?;
        Ok(ScoptParams::new(self.k, q)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub family: Family,
    pub k: Option<usize>,
    pub q: Option<usize>,
    pub rf: Option<f64>,
    pub n: Option<u64>,
    pub grid: SnrGrid,
    pub pdem: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub detector: Detector,
    pub workers: usize,
    pub chunk_size: u64,
    pub noise_variance: f64,
    pub out: PathBuf,
    pub format: Format,
}

impl SweepSpec {
    pub fn new(family: Family, out: impl Into<PathBuf>) -> Self {
        SweepSpec {
            family,
            k: None,
            q: None,
            rf: None,
            n: None,
            grid: SnrGrid::default_sweep(),
            pdem: Vec::new(),
            trials: 100_000,
            seed: 1,
            detector: Detector::Threshold,
            workers: 1,
            chunk_size: DEFAULT_CHUNK_SIZE,
            noise_variance: NOISE_VARIANCE,
            out: out.into(),
            format: Format::Csv,
        }
    }

    pub fn scopt_shape(&self) -> Result<ScoptShape> {
        let k = match (self.k, self.rf) {
            (Some(k), None) => k,
            (None, Some(rf)) => k_for_rf(rf)?,
            (Some(k), Some(rf)) => {
                if k_for_rf(rf)? != k {
                    return Err(CliError::Usage(format!("--k {k} and --rf {rf} disagree")));
                }
                k
            }
            (None, None) => return Err(CliError::Usage("scopt needs --k or --rf".into())),
        };
        if k == 0 {
            return Err(CliError::Usage("--k must be >= 1".into()));
        }
        match (self.q, self.n) {
            (Some(q), n) => {
                let from_q = (k as u64).checked_mul(q as u64).filter(|&v| v > 0);
                let Some(kq) = from_q else {
                    return Err(CliError::Usage("--q must be >= 1".into()));
                };
                if n.is_some_and(|n| n != kq) {
                    return Err(CliError::Usage(format!("--n must equal k*q = {kq}")));
                }
                Ok(ScoptShape {
                    k,
                    n: kq,
                    q: Some(q),
                })
            }
            (None, Some(n)) if n > 0 => {
                let q = (n % k as u64 == 0).then(|| (n / k as u64) as usize);
                Ok(ScoptShape { k, n, q })
            }
            _ => Err(CliError::Usage("scopt needs --q or --n >= 1".into())),
        }
    }

    pub fn scsh_shape(&self) -> Result<(f64, u64)> {
        let rf = self
            .rf
            .ok_or_else(|| CliError::Usage("scsh needs --rf".into()))?;
        if !(rf > 0.0 && rf.is_finite()) {
            return Err(CliError::Usage(format!("--rf {rf} must be > 0")));
        }
        match self.n {
            Some(n) if n > 0 => Ok((rf, n)),
            _ => Err(CliError::Usage("scsh needs --n >= 1".into())),
        }
    }

    pub fn check_pdem(&self) -> Result<()> {
        match self.pdem.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            Some(p) => Err(CliError::Usage(format!("--pdem {p} is outside (0, 1]"))),
            None => Ok(()),
        }
    }

    /// Directory and file stem of `--out`; sibling files share the stem.
    pub fn out_parts(&self) -> (PathBuf, String) {
        split_out(&self.out)
    }
}

pub(crate) fn split_out(out: &Path) -> (PathBuf, String) {
    let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    (dir, stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rf_labels_map_to_k() {
        assert_eq!(k_for_rf(2.0).unwrap(), 1);
        assert_eq!(k_for_rf(4.0).unwrap(), 2);
        assert_eq!(k_for_rf(6.0).unwrap(), 4);
        assert_eq!(k_for_rf(8.0).unwrap(), 8);
        assert!(k_for_rf(3.0).is_err());
        assert!(k_for_rf(1.0).is_err());
    }

    #[test]
    fn shapes() {
        let mut s = SweepSpec::new(Family::Scopt, "x.csv");
        s.k = Some(4);
        s.n = Some(30);
        assert_eq!(
            s.scopt_shape().unwrap(),
            ScoptShape {
                k: 4,
                n: 30,
                q: None
            }
        );
        assert!(s.scopt_shape().unwrap().params().is_err());
        s.q = Some(5);
        assert!(s.scopt_shape().is_err());
        s.n = None;
        assert_eq!(s.scopt_shape().unwrap().n, 20);
        s.k = None;
        s.rf = Some(6.0);
        assert_eq!(s.scopt_shape().unwrap().k, 4);
    }

    #[test]
    fn out_parts() {
        let s = SweepSpec::new(Family::Scsh, "res/curve.csv");
        assert_eq!(s.out_parts(), (PathBuf::from("res"), "curve".to_string()));
        let s = SweepSpec::new(Family::Scsh, "curve");
        assert_eq!(s.out_parts(), (PathBuf::new(), "curve".to_string()));
    }
}
