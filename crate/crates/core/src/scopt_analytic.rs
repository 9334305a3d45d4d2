//! Closed-form error probability and energy loss of permutation
//! constellations, with a numeric inversion used to cross-check the
//! closed-form energy loss.
//!
//! Two distance conventions coexist. The closed-form expressions take the
//! distance `d` of [`med_scopt`], which grows with `sqrt(n)`. The simulated
//! channel sees an `n`-independent level spacing; its predictions are
//! [`per_coordinate_error`] and [`threshold_message_error`]. The two are
//! never mixed.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{q_function, Clamped, Decibel, Probability};
use crate::scopt::{med_scopt, rf_approx, rf_exact, ScoptParams};

/// Which form of the spectral efficiency sets the Shannon limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RfMode {
    /// `log2((2K)!) / K`
    #[default]
    Exact,
    /// `log2(4K^2)`
    Approx,
}

impl RfMode {
    pub fn rf(self, k: usize) -> f64 {
        match self {
            RfMode::Exact => rf_exact(k),
            RfMode::Approx => rf_approx(k),
        }
    }

    pub fn shannon_limit(self, k: usize) -> f64 {
        self.rf(k).exp2() - 1.0
    }
}

impl fmt::Display for RfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RfMode::Exact => "exact",
            RfMode::Approx => "approx",
        })
    }
}

impl FromStr for RfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(RfMode::Exact),
            "approx" => Ok(RfMode::Approx),
            other => Err(Error::Config(format!("unknown rf mode '{other}'"))),
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(domain("n", 0.0, "n >= 1"))
    } else {
        Ok(())
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d >= 0.0 {
        Ok(())
    } else {
        Err(domain("d", d, ">= 0"))
    }
}

fn check_open_probability(p: Probability) -> Result<()> {
    let v = p.value();
    if v > 1e-300 && v < 1.0 {
        Ok(())
    } else {
        Err(domain("p_dem", v, "1e-300 < p_dem < 1"))
    }
}

/// `1 - (1 - 2Q(d/2))^(2n)`: probability that at least one of `2n`
/// coordinates leaves its hypercube slab of half-width `d/2`.
pub fn p_dem_scopt_exact(n: u64, d: f64) -> Result<Probability> {
    check_n(n)?;
    check_distance(d)?;
    let tail = 2.0 * q_function(0.5 * d).value();
    let log_ok = 2.0 * n as f64 * (-tail).ln_1p();
    Ok(Probability::clamp(-log_ok.exp_m1()).value)
}

/// Union bound `4n Q(d/2)` before clamping.
pub fn p_dem_scopt_union_raw(n: u64, d: f64) -> Result<f64> {
    check_n(n)?;
    check_distance(d)?;
    Ok(4.0 * n as f64 * q_function(0.5 * d).value())
}

/// Union bound `4n Q(d/2)`, clamped to 1.
pub fn p_dem_scopt_union(n: u64, d: f64) -> Result<Clamped> {
    Ok(Probability::clamp(p_dem_scopt_union_raw(n, d)?))
}

/// Closed-form energy loss relative to the Shannon limit,
/// `10 log10((4K^2 - 1) Phi / (6 (2^rf - 1)))` with
/// `Phi = ln(Z / ln Z_L) / n`, `Z = (n / (p sqrt(2 pi)))^2`, `Z_L = ln Z`.
///
/// Defined only where `Z_L > 1` and `Phi > 0`. The value may be negative.
pub fn energy_loss_scopt(k: usize, n: u64, p_dem: Probability, mode: RfMode) -> Result<Decibel> {
    if k == 0 {
        return Err(domain("k", 0.0, "k >= 1"));
    }
    check_n(n)?;
    check_open_probability(p_dem)?;
    let nf = n as f64;
    let z_log = 2.0 * (nf / (p_dem.value() * (2.0 * std::f64::consts::PI).sqrt())).ln();
    // z_log is ln Z, i.e. Z_L
    if !(z_log > 1.0) {
        return Err(Error::Validity(format!(
            "Z_L = {z_log} <= 1 at n = {n}, p_dem = {p_dem}"
        )));
    }
    let phi = (z_log - z_log.ln().ln()) / nf;
    if !(phi > 0.0) {
        return Err(Error::Validity(format!(
            "Phi = {phi} <= 0 at n = {n}, p_dem = {p_dem}"
        )));
    }
    let kf = k as f64;
    let rho_s0 = mode.shannon_limit(k);
    Decibel::from_ratio((4.0 * kf * kf - 1.0) * phi / (6.0 * rho_s0))
}

/// Solves `4n Q(d/2) = p_dem` for the distance `d` by bisection.
pub fn invert_union_bound(n: u64, p_dem: Probability) -> Result<f64> {
    check_n(n)?;
    check_open_probability(p_dem)?;
    let log_target = p_dem.value().ln();
    let log_scale = (4.0 * n as f64).ln();
    let residual = |x: f64| log_scale + q_function(x).value().ln() - log_target;
    // residual(0) = ln(2n / p) > 0 and Q underflows long before 40
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let achieved = 4.0 * n as f64 * q_function(x).value();
    let rel = ((achieved - p_dem.value()) / p_dem.value()).abs();
    if rel > 1e-9 {
        return Err(Error::Validity(format!(
            "inversion stalled: relative residual {rel:e}"
        )));
    }
    Ok(2.0 * x)
}

/// Energy loss found by numerically inverting the union bound and mapping
/// the distance back to SNR through [`med_scopt`].
pub fn energy_loss_scopt_inverted(
    k: usize,
    n: u64,
    p_dem: Probability,
    mode: RfMode,
) -> Result<Decibel> {
    if k == 0 {
        return Err(domain("k", 0.0, "k >= 1"));
    }
    let d = invert_union_bound(n, p_dem)?;
    let rho_s = rho_for_distance(k, n, d);
    Decibel::from_ratio(rho_s / mode.shannon_limit(k))
}

/// Inverse of [`med_scopt`]: `rho_s = d^2 (4K^2 - 1) / (6n)`.
pub fn rho_for_distance(k: usize, n: u64, d: f64) -> f64 {
    let kf = k as f64;
    d * d * (4.0 * kf * kf - 1.0) / (6.0 * n as f64)
}

/// Symbol error rate of one coordinate of `2K`-PAM under the channel's
/// convention (levels scaled by `sqrt(rho_s)`, noise variance 1/2):
/// `2 (1 - 1/(2K)) Q(sqrt(3 rho_s / (4K^2 - 1)))`.
pub fn per_coordinate_error(k: usize, rho_s: f64) -> Probability {
    let kf = k as f64;
    let q = q_function(coordinate_margin(k, rho_s)).value();
    Probability::clamp(2.0 * (1.0 - 1.0 / (2.0 * kf)) * q).value
}

/// Half level spacing in noise standard deviations, `sqrt(3 rho_s / (4K^2 - 1))`.
pub fn coordinate_margin(k: usize, rho_s: f64) -> f64 {
    let kf = k as f64;
    (3.0 * rho_s / (4.0 * kf * kf - 1.0)).sqrt()
}

/// Message error rate of the per-coordinate threshold detector: any
/// coordinate quantized to the wrong level loses the message. Per block the
/// two edge levels err one-sided and the `2K - 2` interior levels two-sided.
pub fn threshold_message_error(params: &ScoptParams, rho_s: f64) -> Probability {
    let q = q_function(coordinate_margin(params.k(), rho_s)).value();
    let edge = (-q).ln_1p();
    let interior = (-2.0 * q).ln_1p();
    let per_block = 2.0 * edge + (params.block_len() - 2) as f64 * interior;
    let log_ok = params.q() as f64 * per_block;
    Probability::clamp(-log_ok.exp_m1()).value
}

/// An analytic operating point of a constructible constellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoptOperatingPoint {
    pub params: ScoptParams,
    pub rho_s: f64,
    pub p_dem: Option<Probability>,
}

impl ScoptOperatingPoint {
    pub fn new(params: ScoptParams, rho_s: f64) -> Result<Self> {
        if !(rho_s > 0.0) || !rho_s.is_finite() {
            return Err(domain("rho_s", rho_s, "finite and > 0"));
        }
        Ok(ScoptOperatingPoint {
            params,
            rho_s,
            p_dem: None,
        })
    }

    pub fn with_target(mut self, p_dem: Probability) -> Self {
        self.p_dem = Some(p_dem);
        self
    }

    /// Closed-form distance (grows with `sqrt(n)`).
    pub fn med(&self) -> f64 {
        med_scopt(self.rho_s, self.params.k(), self.params.n()).expect("validated point")
    }

    pub fn p_dem_union(&self) -> Clamped {
        p_dem_scopt_union(self.params.n(), self.med()).expect("validated point")
    }

    pub fn p_dem_exact(&self) -> Probability {
        p_dem_scopt_exact(self.params.n(), self.med()).expect("validated point")
    }

    pub fn per_coordinate_error(&self) -> Probability {
        per_coordinate_error(self.params.k(), self.rho_s)
    }

    pub fn threshold_message_error(&self) -> Probability {
        threshold_message_error(&self.params, self.rho_s)
    }

    /// Closed-form energy loss at the target probability.
    pub fn energy_loss(&self, mode: RfMode) -> Result<Decibel> {
        let p = self
            .p_dem
            .ok_or_else(|| Error::Config("operating point has no target p_dem".to_string()))?;
        energy_loss_scopt(self.params.k(), self.params.n(), p, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    const Q5: f64 = 2.866_515_718_791_939e-7;

    #[test]
    fn exact_expression_examples() {
        assert_eq!(p_dem_scopt_exact(50, 0.0).unwrap().value(), 1.0);
        assert_eq!(p_dem_scopt_exact(50, 100.0).unwrap().value(), 0.0);
        let v = p_dem_scopt_exact(50, 10.0).unwrap().value();
        assert!((v / 5.732_868_745_765_921e-5 - 1.0).abs() < 1e-9, "{v}");
        assert!(p_dem_scopt_exact(0, 1.0).is_err());
        assert!(p_dem_scopt_exact(3, -1.0).is_err());
    }

    #[test]
    fn union_bound_examples() {
        let d = med_scopt(1.0, 1, 50).unwrap();
        assert!((d - 10.0).abs() < 1e-12);
        let u = p_dem_scopt_union(50, d).unwrap();
        assert!(!u.was_clamped());
        assert!((u.value.value() / (200.0 * Q5) - 1.0).abs() < 1e-9);
        let zero = p_dem_scopt_union(50, 0.0).unwrap();
        assert!(zero.was_clamped());
        assert_eq!(zero.value.value(), 1.0);
        assert_eq!(zero.raw, 100.0);
    }

    #[test]
    fn union_bound_dominates_exact() {
        for n in [1u64, 5, 20, 50, 200, 1000] {
            for i in 0..=200 {
                let d = i as f64 * 0.1;
                let raw = p_dem_scopt_union_raw(n, d).unwrap();
                let exact = p_dem_scopt_exact(n, d).unwrap().value();
                assert!((0.0..=1.0).contains(&exact));
                if raw <= 1.0 {
                    assert!(raw >= exact * (1.0 - 1e-12), "n={n} d={d}");
                }
                // second-order binomial bound on the relative gap
                let q = q_function(0.5 * d).value();
                let first_order = 2.0 * n as f64 * q;
                if raw < 0.1 && exact > 0.0 {
                    let gap = (raw - exact) / exact;
                    assert!(
                        gap <= first_order / (1.0 - first_order) + 1e-9,
                        "n={n} d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn closed_form_energy_loss_regression() {
        let v = energy_loss_scopt(1, 50, p(1e-6), RfMode::Approx)
            .unwrap()
            .db();
        assert!((v - (-9.671_108_648_451_213)).abs() < 1e-9, "{v}");
        let v100 = energy_loss_scopt(1, 100, p(1e-6), RfMode::Approx)
            .unwrap()
            .db();
        assert!((v100 - (-12.500_704_914_036_755)).abs() < 1e-9, "{v100}");
        assert!(v100 < v);
    }

    #[test]
    fn closed_form_energy_loss_turns_negative() {
        let first = (1..=10_000u64)
            .find(|&n| {
                energy_loss_scopt(1, n, p(1e-6), RfMode::Exact)
                    .unwrap()
                    .db()
                    < 0.0
            })
            .unwrap();
        assert_eq!(first, 15);
    }

    #[test]
    fn closed_form_validity_region() {
        assert!(energy_loss_scopt(1, 10, Probability::ONE, RfMode::Exact).is_err());
        assert!(energy_loss_scopt(1, 10, Probability::ZERO, RfMode::Exact).is_err());
        // Z_L <= 1: n / (p sqrt(2 pi)) <= e^(1/2)
        assert!(matches!(
            energy_loss_scopt(1, 1, p(0.9), RfMode::Exact),
            Err(Error::Validity(_))
        ));
    }

    #[test]
    fn inversion_closes_the_loop() {
        let p0 = 200.0 * q_function(5.0).value();
        let d = invert_union_bound(50, p(p0)).unwrap();
        assert!((d - 10.0).abs() < 1e-8);
        let loss = energy_loss_scopt_inverted(1, 50, p(p0), RfMode::Approx)
            .unwrap()
            .db();
        assert!((loss - 10.0 * (1.0f64 / 3.0).log10()).abs() < 1e-8);
        let loss = energy_loss_scopt_inverted(1, 50, p(p0), RfMode::Exact)
            .unwrap()
            .db();
        assert!(loss.abs() < 1e-8);
    }

    #[test]
    fn inversion_accuracy_and_boundary() {
        for n in [1u64, 20, 50, 1000] {
            for e in 1..=14 {
                let target = 10f64.powi(-e);
                let d = invert_union_bound(n, p(target)).unwrap();
                let back = 4.0 * n as f64 * q_function(0.5 * d).value();
                assert!(((back - target) / target).abs() <= 1e-9);
            }
        }
        let near_one = invert_union_bound(1, p(1.0 - 1e-12)).unwrap();
        let d_at_one = invert_union_bound(1, p(0.999)).unwrap();
        assert!(near_one < d_at_one);
        assert!(invert_union_bound(1, Probability::ONE).is_err());
        // 4nQ(0) = 2n >= 2, so the admissible threshold is p -> 1 where d stays positive
        let d = invert_union_bound(1, p(0.9999999)).unwrap();
        assert!(d > 0.0 && d < 2.0);
    }

    #[test]
    fn decreasing_in_duration() {
        for &k in &[1usize, 2, 4] {
            for &rho in &[0.5, 1.0, 3.0] {
                let mut prev = f64::INFINITY;
                for n in 10..=1000u64 {
                    let d = med_scopt(rho, k, n).unwrap();
                    let v = p_dem_scopt_union(n, d).unwrap().value.value();
                    assert!(v <= prev, "k={k} rho={rho} n={n}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn per_coordinate_predictions() {
        // K = 1: both levels are edge levels, error Q(sqrt(rho))
        let v = per_coordinate_error(1, 5.41).value();
        assert!((v - q_function(5.41f64.sqrt()).value()).abs() < 1e-16);
        assert!((v - 0.010_010_858_003_838_2).abs() < 1e-12);
        let params = ScoptParams::new(1, 25).unwrap();
        let m = threshold_message_error(&params, 5.41).value();
        assert!((m - 0.395_325_619_393_893_6).abs() < 1e-12);
        let params = ScoptParams::new(1, 50).unwrap();
        let m = threshold_message_error(&params, 5.41).value();
        assert!((m - 0.634_368_893_438_621_6).abs() < 1e-12);
        // K = 2: (1/4)(Q + 2Q + 2Q + Q) = 1.5 Q
        let q = q_function(coordinate_margin(2, 9.0)).value();
        assert!((per_coordinate_error(2, 9.0).value() - 1.5 * q).abs() < 1e-16);
    }

    #[test]
    fn rf_mode_parse() {
        assert_eq!("exact".parse::<RfMode>().unwrap(), RfMode::Exact);
        assert_eq!("approx".parse::<RfMode>().unwrap(), RfMode::Approx);
        assert!("stirling".parse::<RfMode>().is_err());
        assert_eq!(RfMode::Approx.shannon_limit(1), 3.0);
        assert!((RfMode::Exact.shannon_limit(1) - 1.0).abs() < 1e-12);
    }
}
