//! Parameter table for one SCOPT constellation.

use scopt::scopt::ScoptParams;
use scopt::scopt_analytic::RfMode;
use serde::Serialize;

use crate::error::Result;
use crate::sweep::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Info {
    pub k: usize,
    pub q: usize,
    pub n: u64,
    pub big_n: usize,
    pub log2_num_signals: f64,
    pub rf_exact: f64,
    pub rf_approx: f64,
    pub d_e: f64,
    pub rho_s0_exact: f64,
    pub rho_s0_exact_db: f64,
    pub rho_s0_approx: f64,
    pub rho_s0_approx_db: f64,
    /// Decimal, absent when it does not fit 128 bits.
    pub num_signals: Option<String>,
}

pub fn info(k: usize, q: usize) -> Result<Info> {
    let p = ScoptParams::new(k, q)?;
    let exact = RfMode::Exact.shannon_limit(k);
    let approx = RfMode::Approx.shannon_limit(k);
    Ok(Info {
        k,
        q,
        n: p.n(),
        big_n: p.big_n(),
        log2_num_signals: p.log2_num_signals(),
        rf_exact: p.rf_exact(),
        rf_approx: p.rf_approx(),
        d_e: p.d_e(),
        rho_s0_exact: exact,
        rho_s0_exact_db: 10.0 * exact.log10(),
        rho_s0_approx: approx,
        rho_s0_approx_db: 10.0 * approx.log10(),
        num_signals: p.num_signals().map(|m| m.to_string()),
    })
}

impl Info {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("info serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let rows = [
                    ("k", self.k.to_string()),
                    ("q", self.q.to_string()),
                    ("n", self.n.to_string()),
                    ("N", self.big_n.to_string()),
                    ("log2_M", fmt(self.log2_num_signals)),
                    ("rf_exact", fmt(self.rf_exact)),
                    ("rf_approx", fmt(self.rf_approx)),
                    ("d_e", fmt(self.d_e)),
                    ("rho_s0_exact", fmt(self.rho_s0_exact)),
                    ("rho_s0_exact_db", fmt(self.rho_s0_exact_db)),
                    ("rho_s0_approx", fmt(self.rho_s0_approx)),
                    ("rho_s0_approx_db", fmt(self.rho_s0_approx_db)),
                    ("num_signals", self.num_signals.clone().unwrap_or_default()),
                ];
                let mut out = String::from("field,value\n");
                for (name, value) in rows {
                    out.push_str(name);
                    out.push(',');
                    out.push_str(&value);
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_q50() {
        let i = info(1, 50).unwrap();
        assert_eq!((i.n, i.big_n), (50, 100));
        assert!((i.log2_num_signals - 50.0).abs() < 1e-12);
        assert!((i.rf_exact - 1.0).abs() < 1e-12);
        assert!((i.rf_approx - 2.0).abs() < 1e-12);
        assert_eq!(i.num_signals.as_deref(), Some("1125899906842624"));
    }

    #[test]
    fn k2_q25() {
        let i = info(2, 25).unwrap();
        assert_eq!(i.n, 50);
        assert!((i.rf_approx - 4.0).abs() < 1e-12);
        assert!((i.rho_s0_approx - 15.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_zero() {
        assert!(info(0, 3).is_err());
        assert!(info(3, 0).is_err());
    }
}
