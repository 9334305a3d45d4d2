//! Cross-checks between formulas, oracles and the simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scopt::channel::{
    detect_rank, simulate, Channel, ChannelConfig, Detector, MlDetector, NOISE_VARIANCE,
};
use scopt::numerics::Probability;
use scopt::scopt::{decode_block, encode_block, ScoptParams};
use scopt::scopt_analytic::{
    energy_loss_scopt, energy_loss_scopt_inverted, per_coordinate_error, threshold_message_error,
    RfMode,
};
use scopt::scsh::{p_dem_chernoff, p_dem_exact_tail};
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub observed: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Noise variance used by the Monte Carlo check. Anything other than
    /// the channel's 1/2 should make that check fail.
    pub noise_variance: f64,
    pub mc_trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            noise_variance: NOISE_VARIANCE,
            mc_trials: 1_000_000,
            seed: 2024,
            workers: 4,
        }
    }
}

fn outcome(name: &'static str, passed: bool, observed: String, expected: &str) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        observed,
        expected: expected.to_string(),
    }
}

/// Chernoff estimate never below the exact tail for n in 1..=200, ratio in (1, 10].
pub fn check_bound_ordering() -> Result<CheckOutcome> {
    let mut violations = 0u64;
    let mut worst = String::new();
    for n in 1..=200u64 {
        for i in 11..=100u32 {
            let r = f64::from(i) / 10.0;
            let chernoff = p_dem_chernoff(n, r)?.value();
            let tail = p_dem_exact_tail(n, r)?.value();
            if chernoff < tail {
                violations += 1;
                worst = format!(" (e.g. n={n} r={r}: {chernoff:e} < {tail:e})");
            }
        }
    }
    Ok(outcome(
        "bound_ordering",
        violations == 0,
        format!("{violations} violations{worst}"),
        "0 violations",
    ))
}

/// Every index of blocks with 2K up to 8, plus random indices at 2K = 16.
pub fn check_codec(random_trials: u64, seed: u64) -> Result<CheckOutcome> {
    let mut failures = 0u64;
    let mut checked = 0u64;
    for k in 1..=4usize {
        let size: u128 = (1..=2 * k as u128).product();
        for idx in 0..size {
            checked += 1;
            if decode_block(k, &encode_block(k, idx)?)? != idx {
                failures += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size: u128 = (1..=16u128).product();
    for _ in 0..random_trials {
        let idx = rng.random_range(0..size);
        checked += 1;
        if decode_block(8, &encode_block(8, idx)?)? != idx {
            failures += 1;
        }
    }
    Ok(outcome(
        "codec_roundtrip",
        failures == 0,
        format!("{failures} failures in {checked} roundtrips"),
        "0 failures",
    ))
}

/// Rank detector and brute-force ML pick the same levels on every trial.
pub fn check_rank_equals_ml(trials: u64, seed: u64) -> Result<CheckOutcome> {
    let mut mismatches = 0u64;
    let mut total = 0u64;
    for (k, q, rho) in [(1usize, 2usize, 1.0f64), (2, 1, 2.0)] {
        let params = ScoptParams::new(k, q)?;
        let channel = Channel::new(&params, rho, NOISE_VARIANCE)?;
        let ml = MlDetector::new(&params, rho)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k as u64) << 32));
        for _ in 0..trials {
            let msg = channel.sample_message(&mut rng)?;
            let rx = channel.transmit(&mut rng, &msg)?;
            let a = detect_rank(rx.as_slice(), &params)?;
            let b = ml.detect(rx.as_slice())?;
            total += 1;
            if a.levels() != b.levels() {
                mismatches += 1;
            }
        }
    }
    Ok(outcome(
        "rank_equals_ml",
        mismatches == 0,
        format!("{mismatches} mismatches in {total} trials"),
        "0 mismatches",
    ))
}

/// Simulated per-coordinate and message error at k=1, q=25, rho=5.41
/// against the independent-coordinate predictions, at 3 standard errors.
pub fn check_monte_carlo(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let params = ScoptParams::new(1, 25)?;
    let rho = 5.41;
    let cfg = ChannelConfig::new(rho, opts.mc_trials, opts.seed, Detector::Threshold)
        .with_workers(opts.workers)
        .with_noise_variance(opts.noise_variance);
    let report = simulate(&params, &cfg)?;
    let pc = per_coordinate_error(1, rho).value();
    let pm = threshold_message_error(&params, rho).value();
    let zc = (report.p_coordinate.p - pc).abs() / report.p_coordinate.standard_error(pc);
    let zm = (report.p_message.p - pm).abs() / report.p_message.standard_error(pm);
    Ok(vec![
        outcome(
            "mc_per_coordinate",
            zc <= 3.0,
            format!("{:.6e} ({zc:.2} standard errors)", report.p_coordinate.p),
            &format!("{pc:.6e} within 3 standard errors"),
        ),
        outcome(
            "mc_message",
            zm <= 3.0,
            format!("{:.6e} ({zm:.2} standard errors)", report.p_message.p),
            &format!("{pm:.6e} within 3 standard errors"),
        ),
    ])
}

/// Closed-form energy loss against the numeric inversion of the union bound.
pub fn check_closed_form_loss() -> Result<CheckOutcome> {
    let mut worst = (0.0f64, String::new());
    for k in [1usize, 2, 4, 8] {
        for n in [20u64, 50, 100, 1000] {
            for p in [1e-4, 1e-6, 1e-8] {
                let p = Probability::new(p)?;
                let closed = energy_loss_scopt(k, n, p, RfMode::Exact)?.db();
                let inverted = energy_loss_scopt_inverted(k, n, p, RfMode::Exact)?.db();
                let gap = (closed - inverted).abs();
                if gap > worst.0 {
                    worst = (gap, format!("k={k} n={n} p={}", p.value()));
                }
            }
        }
    }
    Ok(outcome(
        "closed_form_loss_vs_inversion",
        worst.0 <= 0.5,
        format!("max gap {:.3} dB at {}", worst.0, worst.1),
        "max gap <= 0.5 dB",
    ))
}

pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = vec![
        check_bound_ordering()?,
        check_codec(100_000, opts.seed)?,
        check_rank_equals_ml(10_000, opts.seed)?,
    ];
    checks.extend(check_monte_carlo(opts)?);
    checks.push(check_closed_form_loss()?);
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
