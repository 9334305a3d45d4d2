//! Closed-form model of Shannon-type constellations: points on an
//! `N`-sphere with spherical decision regions.
//!
//! Nothing here is constructive; the constellation exists only through its
//! parameters (spectral efficiency `rf`, duration `n`, SNR `rho_s`).

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numerics::{u_of_y, upper_gamma_regularized, y_function, Decibel, Probability};

/// One operating point of a Shannon-type system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScshPoint {
    pub rf: f64,
    pub n: u64,
    pub rho_s: f64,
}

impl ScshPoint {
    pub fn new(rf: f64, n: u64, rho_s: f64) -> Result<Self> {
        check_rf(rf)?;
        check_n(n)?;
        check_positive("rho_s", rho_s)?;
        Ok(ScshPoint { rf, n, rho_s })
    }

    pub fn shannon_limit(&self) -> f64 {
        self.rf.exp2() - 1.0
    }

    /// `rho_s / rho_s0`.
    pub fn snr_ratio(&self) -> f64 {
        self.rho_s / self.shannon_limit()
    }

    pub fn med(&self) -> f64 {
        2.0 * (self.n as f64 * self.snr_ratio()).sqrt()
    }

    pub fn p_dem_shannon(&self) -> Probability {
        p_dem_shannon(self.n, self.rho_s, self.rf).expect("validated point")
    }

    pub fn p_dem_chernoff(&self) -> Probability {
        p_dem_chernoff(self.n, self.snr_ratio()).expect("validated point")
    }

    pub fn p_dem_exact_tail(&self) -> Probability {
        p_dem_exact_tail(self.n, self.snr_ratio()).expect("validated point")
    }
}

fn check_rf(rf: f64) -> Result<()> {
    if rf > 0.0 && rf.is_finite() {
        Ok(())
    } else {
        Err(domain("rf", rf, "finite and > 0"))
    }
}

fn check_n(n: u64) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(domain("n", 0.0, "n >= 1"))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(name, v, "finite and > 0"))
    }
}

fn check_p_dem(p: Probability) -> Result<()> {
    if p.value() > 0.0 {
        Ok(())
    } else {
        Err(domain("p_dem", p.value(), "0 < p_dem <= 1"))
    }
}

/// Minimum SNR `2^rf - 1` for reliable transmission at spectral efficiency `rf`.
pub fn shannon_limit(rf: f64) -> Result<f64> {
    check_rf(rf)?;
    Ok(rf.exp2() - 1.0)
}

/// `log2` of the number of signals `(1 + rho_s0)^n`, which is `n * rf`.
pub fn scsh_log2_num_signals(rf: f64, n: u64) -> Result<f64> {
    check_rf(rf)?;
    check_n(n)?;
    Ok(n as f64 * rf)
}

/// Minimum distance `2 sqrt(n rho_s / rho_s0)` between sphere-packed signals.
pub fn scsh_med(rho_s: f64, rho_s0: f64, n: u64) -> Result<f64> {
    check_positive("rho_s", rho_s)?;
    check_positive("rho_s0", rho_s0)?;
    check_n(n)?;
    Ok(2.0 * (n as f64 * rho_s / rho_s0).sqrt())
}

/// Shannon's sphere estimate `((1 + rho_s0) / (1 + rho_s))^n`, or 1 at or
/// below the Shannon limit.
pub fn p_dem_shannon(n: u64, rho_s: f64, rf: f64) -> Result<Probability> {
    check_n(n)?;
    check_positive("rho_s", rho_s)?;
    let rho_s0 = shannon_limit(rf)?;
    if rho_s <= rho_s0 {
        return Ok(Probability::ONE);
    }
    let exponent = (rho_s - rho_s0) / (1.0 + rho_s0);
    Ok(Probability::clamp((-(n as f64) * exponent.ln_1p()).exp()).value)
}

/// Chernoff estimate `exp(-n y(ratio))`, or 1 when `ratio <= 1`.
pub fn p_dem_chernoff(n: u64, ratio: f64) -> Result<Probability> {
    check_n(n)?;
    check_positive("ratio", ratio)?;
    if ratio <= 1.0 {
        return Ok(Probability::ONE);
    }
    let y = y_function(ratio)?;
    Ok(Probability::clamp((-(n as f64) * y).exp()).value)
}

/// Exact probability that the noise energy over `2n` coordinates of
/// variance 1/2 reaches `n * ratio`.
pub fn p_dem_exact_tail(n: u64, ratio: f64) -> Result<Probability> {
    check_n(n)?;
    check_positive("ratio", ratio)?;
    upper_gamma_regularized(n, n as f64 * ratio)
}

/// Energy loss obtained by inverting Shannon's sphere estimate:
/// `10 log10((2^rf p^(-1/n) - 1) / (2^rf - 1))`.
pub fn energy_loss_shannon(rf: f64, n: u64, p_dem: Probability) -> Result<Decibel> {
    check_rf(rf)?;
    check_n(n)?;
    check_p_dem(p_dem)?;
    let growth = (-p_dem.value().ln() / n as f64).exp();
    let levels = rf.exp2();
    Decibel::from_ratio((levels * growth - 1.0) / (levels - 1.0))
}

/// Energy loss obtained by inverting the Chernoff estimate through the
/// approximate inverse [`u_of_y`]: `10 log10(u(ln(1/p) / n))`.
pub fn energy_loss_chernoff(n: u64, p_dem: Probability) -> Result<Decibel> {
    check_n(n)?;
    check_p_dem(p_dem)?;
    let y = -p_dem.value().ln() / n as f64;
    Decibel::from_ratio(u_of_y(y)?)
}
