//! Special functions shared by the analytic models.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::Serialize;

use crate::error::{domain, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(domain("probability", value, "0 <= p <= 1"))
        }
    }

    /// Clamps a floating evaluation into `[0, 1]`, keeping the raw value.
    ///
    /// NaN maps to 1 and is reported as clamped.
    pub fn clamp(raw: f64) -> Clamped {
        let value = if raw.is_nan() {
            1.0
        } else {
            raw.clamp(0.0, 1.0)
        };
        Clamped {
            value: Probability(value),
            raw,
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Result of clamping a raw floating value into a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Clamped {
    pub value: Probability,
    pub raw: f64,
}

impl Clamped {
    pub fn was_clamped(&self) -> bool {
        self.raw.is_nan() || self.raw != self.value.0
    }
}

/// A power ratio in decibels.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Decibel(f64);

impl Decibel {
    pub fn new(db: f64) -> Result<Self> {
        if db.is_finite() {
            Ok(Decibel(db))
        } else {
            Err(domain("decibel", db, "finite"))
        }
    }

    pub fn from_ratio(ratio: f64) -> Result<Self> {
        if ratio > 0.0 && ratio.is_finite() {
            Ok(Decibel(10.0 * ratio.log10()))
        } else {
            Err(domain("ratio", ratio, "finite and > 0"))
        }
    }

    pub fn db(self) -> f64 {
        self.0
    }

    pub fn ratio(self) -> f64 {
        10f64.powf(self.0 / 10.0)
    }
}

impl fmt::Display for Decibel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dB", self.0)
    }
}

/// Upper tail of the standard normal distribution, `P(X > x)`.
pub fn q_function(x: f64) -> Probability {
    Probability::clamp(0.5 * libm::erfc(x * FRAC_1_SQRT_2)).value
}

/// `ln(m!)`. Summed exactly up to 256, log-gamma above.
pub fn log_factorial(m: u64) -> f64 {
    if m <= 256 {
        (2..=m).map(|k| (k as f64).ln()).sum()
    } else {
        libm::lgamma(m as f64 + 1.0)
    }
}

/// `y(u) = u - 1 - ln u`, the Chernoff exponent of the chi-square tail.
pub fn y_function(u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(domain("u", u, "finite and > 0"));
    }
    let t = u - 1.0;
    // ln_1p keeps the value accurate near u = 1
    Ok((t - t.ln_1p()).max(0.0))
}

/// Approximate inverse of [`y_function`] on `u >= 1`.
pub fn u_of_y(y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(domain("y", y, "finite and >= 0"));
    }
    let half = 0.5 * y;
    Ok(1.0 + half + (3.0 * y + half * half).sqrt())
}

/// Regularized upper incomplete gamma function for integer shape `n`,
/// i.e. the tail `P(Z >= x)` of the density `z^(n-1) e^(-z) / (n-1)!`.
///
/// Uses the finite sum `e^(-x) sum_{k<n} x^k / k!` when `x >= n`, and one
/// minus the complementary series `sum_{k>=n}` otherwise. Either series is
/// anchored at its largest term, computed in the log domain, with the other
/// terms accumulated as ratios to it, so large `n` and `x` neither overflow
/// nor require `n` iterations.
pub fn upper_gamma_regularized(n: u64, x: f64) -> Result<Probability> {
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    if !(x >= 0.0) {
        return Err(domain("x", x, ">= 0"));
    }
    if x == 0.0 {
        return Ok(Probability::ONE);
    }
    if x.is_infinite() {
        return Ok(Probability::ZERO);
    }
    if n == 1 {
        return Ok(Probability::clamp((-x).exp()).value);
    }

    const NEGLIGIBLE: f64 = 1e-18;
    let nf = n as f64;
    if x < nf {
        // lower tail is the small side: its terms decrease from k = n
        let log_first = log_poisson_term(n, x);
        let mut sum = 1.0;
        let mut ratio = 1.0;
        let mut k = n;
        loop {
            k += 1;
            ratio *= x / k as f64;
            sum += ratio;
            if ratio < NEGLIGIBLE * sum {
                break;
            }
        }
        let lower = (log_first + sum.ln()).exp();
        return Ok(Probability::clamp(1.0 - lower).value);
    }

    // x >= n: the largest term of the finite sum is the last one, k = n - 1.
    let last = n - 1;
    let log_last = log_poisson_term(last, x);
    let mut sum = 1.0;
    let mut ratio = 1.0;
    let mut k = last;
    while k > 0 {
        ratio *= k as f64 / x;
        sum += ratio;
        k -= 1;
        if ratio < NEGLIGIBLE * sum {
            break;
        }
    }
    Ok(Probability::clamp((log_last + sum.ln()).exp()).value)
}

/// `ln(x^k e^-x / k!)`, written as `-k*y(x/k) - stirling(k)` for large `k`
/// to avoid cancelling the three large terms against each other.
fn log_poisson_term(k: u64, x: f64) -> f64 {
    if k < 20 {
        return k as f64 * x.ln() - x - log_factorial(k);
    }
    let kf = k as f64;
    let r = x / kf;
    let t = r - 1.0;
    let exponent = kf * (t - t.ln_1p());
    let inv = 1.0 / kf;
    let inv2 = inv * inv;
    let stirling = 0.5 * (2.0 * PI * kf).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    -exponent - stirling
}
