//! Monte Carlo AWGN simulation of permutation constellations.
//!
//! Transmitted coordinates are the normalized levels scaled by `sqrt(rho_s)`;
//! every coordinate receives independent Gaussian noise of variance 1/2, so
//! signal energy `n rho_s` faces mean noise energy `n`.
//!
//! Trials are split into fixed-size chunks. Chunk `c` draws from ChaCha8
//! stream `c` of the configured seed, so a report depends only on
//! `(seed, trials, chunk_size)` and never on scheduling or worker count.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::log_factorial;
use crate::scopt::{
    decode_block, encode_block, is_bijection, level_values, CoordinateVector, Message, Permutation,
    ScoptParams,
};

/// Enumeration limit for the brute-force maximum-likelihood detector.
pub const ML_ENUMERATION_LIMIT: u64 = 4096;

pub const DEFAULT_CHUNK_SIZE: u64 = 10_000;

/// Per-coordinate noise variance of the physical channel.
pub const NOISE_VARIANCE: f64 = 0.5;

/// Below this many errors the interval switches to Clopper-Pearson.
pub const EXACT_INTERVAL_BELOW: u64 = 30;

const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    /// Independent nearest-level quantization of every coordinate.
    Threshold,
    /// Per-block sort: the coordinate of rank `l` gets level `l`.
    Rank,
    /// Exhaustive nearest signal.
    MlBruteforce,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::Threshold => "threshold",
            Detector::Rank => "rank",
            Detector::MlBruteforce => "ml",
        })
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(Detector::Threshold),
            "rank" => Ok(Detector::Rank),
            "ml" | "ml_bruteforce" => Ok(Detector::MlBruteforce),
            other => Err(Error::Config(format!("unknown detector '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelConfig {
    pub rho_s: f64,
    pub trials: u64,
    pub seed: u64,
    pub detector: Detector,
    pub workers: usize,
    pub chunk_size: u64,
    /// Test hook; the physical channel uses [`NOISE_VARIANCE`].
    pub noise_variance: f64,
}

impl ChannelConfig {
    pub fn new(rho_s: f64, trials: u64, seed: u64, detector: Detector) -> Self {
        ChannelConfig {
            rho_s,
            trials,
            seed,
            detector,
            workers: 1,
            chunk_size: DEFAULT_CHUNK_SIZE,
            noise_variance: NOISE_VARIANCE,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn with_noise_variance(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_s > 0.0) || !self.rho_s.is_finite() {
            return Err(domain("rho_s", self.rho_s, "finite and > 0"));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".to_string()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".to_string()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk size must be >= 1".to_string()));
        }
        if !(self.noise_variance > 0.0) || !self.noise_variance.is_finite() {
            return Err(domain(
                "noise_variance",
                self.noise_variance,
                "finite and > 0",
            ));
        }
        Ok(())
    }
}

/// Level index decided for every received coordinate.
///
/// The threshold detector may produce blocks that are not permutations;
/// such blocks are invalid and decode to no message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    levels: Vec<usize>,
    block_len: usize,
}

impl Decision {
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[usize]> {
        self.levels.chunks(self.block_len)
    }

    pub fn invalid_blocks(&self) -> usize {
        self.blocks().filter(|b| !is_bijection(b)).count()
    }

    pub fn is_valid(&self) -> bool {
        self.invalid_blocks() == 0
    }

    /// Decodes every block; fails on the first invalid block.
    pub fn to_message(&self, params: &ScoptParams) -> Result<Message> {
        let indices = self
            .blocks()
            .map(|b| decode_block(params.k(), &Permutation::new(b.to_vec())?))
            .collect::<Result<Vec<_>>>()?;
        Message::new(params, indices)
    }
}

fn check_len(received: &[f64], params: &ScoptParams) -> Result<()> {
    if received.len() == params.big_n() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "received vector has {} coordinates, expected {}",
            received.len(),
            params.big_n()
        )))
    }
}

/// Nearest scaled level for one coordinate; midpoints go to the lower level.
fn quantize(x: f64, spacing: f64, top: usize) -> usize {
    let position = x / spacing + 0.5 * top as f64;
    let level = (position - 0.5).ceil();
    if level <= 0.0 {
        0
    } else if level >= top as f64 {
        top
    } else {
        level as usize
    }
}

fn threshold_into(received: &[f64], spacing: f64, block_len: usize, out: &mut [usize]) {
    let top = block_len - 1;
    for (o, &x) in out.iter_mut().zip(received) {
        *o = quantize(x, spacing, top);
    }
}

fn rank_into(received: &[f64], block_len: usize, out: &mut [usize], order: &mut Vec<usize>) {
    for (block, decided) in received.chunks(block_len).zip(out.chunks_mut(block_len)) {
        order.clear();
        order.extend(0..block_len);
        // stable sort: equal values keep coordinate order
        order.sort_by(|&a, &b| block[a].total_cmp(&block[b]));
        for (rank, &pos) in order.iter().enumerate() {
            decided[pos] = rank;
        }
    }
}

/// Per-coordinate nearest-level detection with levels scaled by `sqrt(rho_s)`.
pub fn detect_threshold(received: &[f64], params: &ScoptParams, rho_s: f64) -> Result<Decision> {
    check_len(received, params)?;
    if !(rho_s > 0.0) {
        return Err(domain("rho_s", rho_s, "> 0"));
    }
    let mut levels = vec![0; received.len()];
    threshold_into(
        received,
        rho_s.sqrt() * params.d_e(),
        params.block_len(),
        &mut levels,
    );
    Ok(Decision {
        levels,
        block_len: params.block_len(),
    })
}

/// Per-block rank detection; always yields a valid message.
pub fn detect_rank(received: &[f64], params: &ScoptParams) -> Result<Decision> {
    check_len(received, params)?;
    let mut levels = vec![0; received.len()];
    rank_into(received, params.block_len(), &mut levels, &mut Vec::new());
    Ok(Decision {
        levels,
        block_len: params.block_len(),
    })
}

/// Exhaustive nearest-signal detector over a precomputed signal table.
#[derive(Debug, Clone)]
pub struct MlDetector {
    params: ScoptParams,
    signals: Vec<Vec<f64>>,
    arrangements: Vec<Vec<usize>>,
}

impl MlDetector {
    pub fn new(params: &ScoptParams, rho_s: f64) -> Result<Self> {
        let total = ml_guard(params)?;
        let levels = level_values(params.k())?;
        let scale = rho_s.sqrt();
        let mut signals = Vec::with_capacity(total as usize);
        let mut arrangements = Vec::with_capacity(total as usize);
        for linear in 0..total {
            let msg = Message::from_linear(params, linear as u128)?;
            let mut arrangement = Vec::with_capacity(params.big_n());
            for &index in msg.block_indices() {
                arrangement.extend_from_slice(encode_block(params.k(), index)?.as_slice());
            }
            signals.push(arrangement.iter().map(|&l| levels[l] * scale).collect());
            arrangements.push(arrangement);
        }
        Ok(MlDetector {
            params: *params,
            signals,
            arrangements,
        })
    }

    fn nearest(&self, received: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (i, s) in self.signals.iter().enumerate() {
            let d2: f64 = s.iter().zip(received).map(|(a, b)| (a - b) * (a - b)).sum();
            // strict: ties keep the smallest message index
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        best
    }

    pub fn detect(&self, received: &[f64]) -> Result<Decision> {
        check_len(received, &self.params)?;
        Ok(Decision {
            levels: self.arrangements[self.nearest(received)].clone(),
            block_len: self.params.block_len(),
        })
    }
}

fn ml_guard(params: &ScoptParams) -> Result<u64> {
    match params.num_signals() {
        Some(t) if t <= ML_ENUMERATION_LIMIT as u128 => Ok(t as u64),
        other => Err(Error::EnumerationGuard {
            size: other.map_or_else(
                || {
                    let log10 = params.q() as f64 * log_factorial(params.block_len() as u64)
                        / std::f64::consts::LN_10;
                    format!("~1e{log10:.0}")
                },
                |t| t.to_string(),
            ),
            limit: ML_ENUMERATION_LIMIT,
        }),
    }
}

/// One-shot brute-force ML detection. Builds the signal table on every call;
/// use [`MlDetector`] for repeated detection.
pub fn detect_ml_bruteforce(
    received: &[f64],
    params: &ScoptParams,
    rho_s: f64,
) -> Result<Decision> {
    MlDetector::new(params, rho_s)?.detect(received)
}

/// Transmitter plus noise source for one operating point.
#[derive(Debug, Clone)]
pub struct Channel {
    params: ScoptParams,
    scaled_levels: Vec<f64>,
    noise_std: f64,
}

impl Channel {
    pub fn new(params: &ScoptParams, rho_s: f64, noise_variance: f64) -> Result<Self> {
        if !(rho_s > 0.0) || !rho_s.is_finite() {
            return Err(domain("rho_s", rho_s, "finite and > 0"));
        }
        if !(noise_variance > 0.0) {
            return Err(domain("noise_variance", noise_variance, "> 0"));
        }
        let scale = rho_s.sqrt();
        Ok(Channel {
            params: *params,
            scaled_levels: level_values(params.k())?
                .into_iter()
                .map(|l| l * scale)
                .collect(),
            noise_std: noise_variance.sqrt(),
        })
    }

    /// Uniform random arrangement per block (unbiased Fisher-Yates shuffle),
    /// written into `out` as level indices.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [usize]) {
        let len = self.params.block_len();
        for block in out.chunks_mut(len) {
            for (i, slot) in block.iter_mut().enumerate() {
                *slot = i;
            }
            block.shuffle(rng);
        }
    }

    pub fn sample_message<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Message> {
        let mut arrangement = vec![0; self.params.big_n()];
        self.sample_into(rng, &mut arrangement);
        Decision {
            levels: arrangement,
            block_len: self.params.block_len(),
        }
        .to_message(&self.params)
    }

    /// Scaled levels plus noise for a transmitted arrangement.
    pub fn transmit_into<R: Rng + ?Sized>(&self, rng: &mut R, sent: &[usize], out: &mut [f64]) {
        for (o, &l) in out.iter_mut().zip(sent) {
            let noise: f64 = rng.sample(StandardNormal);
            *o = self.scaled_levels[l] + self.noise_std * noise;
        }
    }

    pub fn transmit<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        msg: &Message,
    ) -> Result<CoordinateVector> {
        let mut sent = Vec::with_capacity(self.params.big_n());
        for &index in msg.block_indices() {
            sent.extend_from_slice(encode_block(self.params.k(), index)?.as_slice());
        }
        if sent.len() != self.params.big_n() {
            return Err(Error::InvalidMessage("wrong number of blocks".to_string()));
        }
        let mut out = vec![0.0; sent.len()];
        self.transmit_into(rng, &sent, &mut out);
        Ok(CoordinateVector::new(out))
    }
}

/// Binomial proportion with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub errors: u64,
    pub opportunities: u64,
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub interval: IntervalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Normal,
    ClopperPearson,
}

impl Estimate {
    pub fn new(errors: u64, opportunities: u64) -> Self {
        assert!(opportunities > 0 && errors <= opportunities);
        let n = opportunities as f64;
        let p = errors as f64 / n;
        if errors < EXACT_INTERVAL_BELOW {
            let (lower, upper) = clopper_pearson(errors, opportunities);
            Estimate {
                errors,
                opportunities,
                p,
                lower,
                upper,
                interval: IntervalKind::ClopperPearson,
            }
        } else {
            let half = Z_95 * (p * (1.0 - p) / n).sqrt();
            Estimate {
                errors,
                opportunities,
                p,
                lower: (p - half).max(0.0),
                upper: (p + half).min(1.0),
                interval: IntervalKind::Normal,
            }
        }
    }

    /// Standard error of the proportion under a reference probability.
    pub fn standard_error(&self, reference: f64) -> f64 {
        (reference * (1.0 - reference) / self.opportunities as f64).sqrt()
    }
}

/// `P(X <= x)` for `X ~ Binomial(n, p)`, summing the `x + 1` lowest terms.
fn binomial_cdf(x: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if x >= n { 1.0 } else { 0.0 };
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_n = log_factorial(n);
    (0..=x.min(n))
        .map(|k| {
            let ln_choose = ln_n - log_factorial(k) - log_factorial(n - k);
            (ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q).exp()
        })
        .sum::<f64>()
        .min(1.0)
}

fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact two-sided 95% interval, found by bisection on the binomial CDF.
fn clopper_pearson(errors: u64, n: u64) -> (f64, f64) {
    let alpha = 1.0 - 0.95;
    let p_hat = errors as f64 / n as f64;
    let upper = if errors == n {
        1.0
    } else {
        bisect_decreasing(|p| binomial_cdf(errors, n, p), 0.5 * alpha, p_hat, 1.0)
    };
    let lower = if errors == 0 {
        0.0
    } else {
        bisect_decreasing(
            |p| binomial_cdf(errors - 1, n, p),
            1.0 - 0.5 * alpha,
            0.0,
            p_hat,
        )
    };
    (lower, upper)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    trials: u64,
    message_errors: u64,
    block_errors: u64,
    coordinate_errors: u64,
    invalid_blocks: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            message_errors: self.message_errors + o.message_errors,
            block_errors: self.block_errors + o.block_errors,
            coordinate_errors: self.coordinate_errors + o.coordinate_errors,
            invalid_blocks: self.invalid_blocks + o.invalid_blocks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub params: ScoptParams,
    pub config: ChannelConfig,
    pub trials: u64,
    pub message_errors: u64,
    /// Blocks decided differently from what was sent (invalid ones included).
    pub block_errors: u64,
    pub coordinate_errors: u64,
    /// Threshold-detector blocks that were not permutations.
    pub invalid_blocks: u64,
    pub p_message: Estimate,
    pub p_block: Estimate,
    pub p_coordinate: Estimate,
    pub elapsed_secs: f64,
}

impl SimReport {
    /// Same report with the wall-clock field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> SimReport {
        SimReport {
            elapsed_secs: 0.0,
            ..self.clone()
        }
    }
}

enum Engine {
    Threshold { spacing: f64 },
    Rank,
    Ml(MlDetector),
}

fn run_chunk(
    params: &ScoptParams,
    channel: &Channel,
    engine: &Engine,
    seed: u64,
    chunk: u64,
    trials: u64,
) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let len = params.block_len();
    let mut sent = vec![0usize; params.big_n()];
    let mut received = vec![0.0f64; params.big_n()];
    let mut decided = vec![0usize; params.big_n()];
    let mut order = Vec::with_capacity(len);
    let mut counts = Counts::default();

    for _ in 0..trials {
        channel.sample_into(&mut rng, &mut sent);
        channel.transmit_into(&mut rng, &sent, &mut received);
        match engine {
            Engine::Threshold { spacing } => threshold_into(&received, *spacing, len, &mut decided),
            Engine::Rank => rank_into(&received, len, &mut decided, &mut order),
            Engine::Ml(ml) => decided.copy_from_slice(&ml.arrangements[ml.nearest(&received)]),
        }
        let mut wrong_blocks = 0;
        for (s, d) in sent.chunks(len).zip(decided.chunks(len)) {
            let wrong = s.iter().zip(d).filter(|(a, b)| a != b).count() as u64;
            if wrong > 0 {
                wrong_blocks += 1;
                counts.coordinate_errors += wrong;
                if !is_bijection(d) {
                    counts.invalid_blocks += 1;
                }
            }
        }
        counts.trials += 1;
        counts.block_errors += wrong_blocks;
        counts.message_errors += (wrong_blocks > 0) as u64;
    }
    counts
}

/// Runs `cfg.trials` independent transmissions and tallies detection errors.
pub fn simulate(params: &ScoptParams, cfg: &ChannelConfig) -> Result<SimReport> {
    cfg.validate()?;
    let coordinates = params.big_n() as u64;
    match cfg.trials.checked_mul(coordinates) {
        Some(total) if total <= 1 << 63 => {}
        _ => {
            return Err(Error::CounterOverflow {
                trials: cfg.trials,
                coordinates,
            })
        }
    }
    let engine = match cfg.detector {
        Detector::Threshold => Engine::Threshold {
            spacing: cfg.rho_s.sqrt() * params.d_e(),
        },
        Detector::Rank => Engine::Rank,
        Detector::MlBruteforce => Engine::Ml(MlDetector::new(params, cfg.rho_s)?),
    };
    let channel = Channel::new(params, cfg.rho_s, cfg.noise_variance)?;

    let start = Instant::now();
    let chunks = cfg.trials.div_ceil(cfg.chunk_size);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let counts = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let trials = cfg.chunk_size.min(cfg.trials - c * cfg.chunk_size);
                run_chunk(params, &channel, &engine, cfg.seed, c, trials)
            })
            .reduce(Counts::default, |a, b| a + b)
    });
    let elapsed_secs = start.elapsed().as_secs_f64();

    Ok(SimReport {
        params: *params,
        config: *cfg,
        trials: counts.trials,
        message_errors: counts.message_errors,
        block_errors: counts.block_errors,
        coordinate_errors: counts.coordinate_errors,
        invalid_blocks: counts.invalid_blocks,
        p_message: Estimate::new(counts.message_errors, counts.trials),
        p_block: Estimate::new(counts.block_errors, counts.trials * params.q() as u64),
        p_coordinate: Estimate::new(counts.coordinate_errors, counts.trials * coordinates),
        elapsed_secs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scopt::modulate;
    use crate::scopt_analytic::{per_coordinate_error, threshold_message_error};

    fn params(k: usize, q: usize) -> ScoptParams {
        ScoptParams::new(k, q).unwrap()
    }

    #[test]
    fn detectors_recover_noiseless_signals() {
        for &(k, q) in &[(1usize, 3usize), (2, 2), (3, 1), (4, 2)] {
            let p = params(k, q);
            let rho = 2.5f64;
            for linear in [0u128, 1, 5] {
                let msg = Message::from_linear(&p, linear % p.num_signals().unwrap()).unwrap();
                let rx = modulate(&p, &msg).unwrap().scaled(rho.sqrt());
                let t = detect_threshold(rx.as_slice(), &p, rho).unwrap();
                assert_eq!(t.to_message(&p).unwrap(), msg);
                let r = detect_rank(rx.as_slice(), &p).unwrap();
                assert_eq!(r.to_message(&p).unwrap(), msg);
                if p.num_signals().unwrap() <= ML_ENUMERATION_LIMIT as u128 {
                    let m = detect_ml_bruteforce(rx.as_slice(), &p, rho).unwrap();
                    assert_eq!(m.to_message(&p).unwrap(), msg);
                }
            }
        }
    }

    #[test]
    fn threshold_single_displacement() {
        let p = params(2, 1);
        let rho = 4.0f64;
        let msg = Message::new(&p, vec![0]).unwrap();
        let mut rx = modulate(&p, &msg).unwrap().scaled(rho.sqrt()).into_inner();
        let spacing = rho.sqrt() * p.d_e();
        rx[1] += 0.5 * spacing + 1e-9;
        let d = detect_threshold(&rx, &p, rho).unwrap();
        assert_eq!(d.levels(), &[0, 2, 2, 3]);
        assert_eq!(d.invalid_blocks(), 1);
        assert!(d.to_message(&p).is_err());
    }

    #[test]
    fn threshold_tie_goes_low() {
        let p = params(1, 1);
        let d = detect_threshold(&[0.0, 0.0], &p, 1.0).unwrap();
        assert_eq!(d.levels(), &[0, 0]);
        let p = params(2, 1);
        let d = detect_threshold(&[0.0, 0.0, 100.0, -100.0], &p, 1.0).unwrap();
        assert_eq!(d.levels(), &[1, 1, 3, 0]);
    }

    #[test]
    fn rank_always_valid_and_ties_by_position() {
        let p = params(2, 2);
        let d = detect_rank(&[5.0, 5.0, 5.0, 5.0, -1.0, 3.0, 3.0, -7.0], &p).unwrap();
        assert_eq!(d.levels(), &[0, 1, 2, 3, 1, 2, 3, 0]);
        assert!(d.is_valid());
    }

    #[test]
    fn ml_two_signal_boundary() {
        // two signals (-a, a) and (a, -a): decide by the sign of x2 - x1
        let p = params(1, 1);
        let d = detect_ml_bruteforce(&[0.3, 0.5], &p, 1.0).unwrap();
        assert_eq!(d.to_message(&p).unwrap().block_indices(), &[0]);
        let d = detect_ml_bruteforce(&[0.5, 0.3], &p, 1.0).unwrap();
        assert_eq!(d.to_message(&p).unwrap().block_indices(), &[1]);
        // on the hyperplane: smallest index wins
        let d = detect_ml_bruteforce(&[0.4, 0.4], &p, 1.0).unwrap();
        assert_eq!(d.to_message(&p).unwrap().block_indices(), &[0]);
    }

    #[test]
    fn ml_guard_rejects_large() {
        assert!(matches!(
            MlDetector::new(&params(2, 3), 1.0),
            Err(Error::EnumerationGuard { .. })
        ));
        let cfg = ChannelConfig::new(1.0, 10, 1, Detector::MlBruteforce);
        assert!(simulate(&params(4, 1), &cfg).is_err());
        assert!(MlDetector::new(&params(3, 1), 1.0).is_ok()); // 720
    }

    #[test]
    fn config_validation() {
        let p = params(1, 1);
        assert!(simulate(&p, &ChannelConfig::new(0.0, 10, 1, Detector::Rank)).is_err());
        assert!(simulate(&p, &ChannelConfig::new(1.0, 0, 1, Detector::Rank)).is_err());
        let cfg = ChannelConfig::new(1.0, 10, 1, Detector::Rank).with_workers(0);
        assert!(simulate(&p, &cfg).is_err());
        let cfg = ChannelConfig::new(1.0, u64::MAX / 2, 1, Detector::Rank);
        assert!(matches!(
            simulate(&params(2, 4), &cfg),
            Err(Error::CounterOverflow { .. })
        ));
        assert_eq!("ml".parse::<Detector>().unwrap(), Detector::MlBruteforce);
        assert!("soft".parse::<Detector>().is_err());
    }

    #[test]
    fn noiseless_limit() {
        let p = params(2, 2);
        for det in [Detector::Threshold, Detector::Rank, Detector::MlBruteforce] {
            let r = simulate(&p, &ChannelConfig::new(1e6, 10_000, 3, det)).unwrap();
            assert_eq!(r.message_errors, 0, "{det}");
            assert_eq!(r.coordinate_errors, 0);
            assert_eq!(r.p_message.lower, 0.0);
            assert!(r.p_message.upper > 0.0 && r.p_message.upper < 1e-3);
        }
    }

    #[test]
    fn deterministic_across_workers() {
        let p = params(2, 3);
        let base = ChannelConfig::new(2.0, 25_000, 99, Detector::Threshold).with_chunk_size(1000);
        let a = simulate(&p, &base).unwrap().without_timing();
        let b = simulate(&p, &base.with_workers(4)).unwrap();
        let b = SimReport {
            config: base,
            ..b.without_timing()
        };
        assert_eq!(a, b);
        let c = simulate(&p, &base.with_chunk_size(999)).unwrap();
        assert_ne!(a.coordinate_errors, c.coordinate_errors);
    }

    #[test]
    fn counters_consistent() {
        let p = params(2, 3);
        let r = simulate(&p, &ChannelConfig::new(1.0, 5000, 7, Detector::Threshold)).unwrap();
        assert!(r.message_errors <= r.block_errors);
        assert!(r.block_errors <= r.trials * 3);
        assert!(r.block_errors <= r.coordinate_errors);
        assert!(r.coordinate_errors <= r.trials * 12);
        assert!(r.invalid_blocks <= r.block_errors);
        assert!(r.invalid_blocks > 0);
        for e in [r.p_message, r.p_block, r.p_coordinate] {
            assert!(0.0 <= e.lower && e.lower <= e.p && e.p <= e.upper && e.upper <= 1.0);
        }
        let rank = simulate(&p, &ChannelConfig::new(1.0, 5000, 7, Detector::Rank)).unwrap();
        assert_eq!(rank.invalid_blocks, 0);
    }

    #[test]
    fn per_coordinate_rate_matches_pam() {
        for &(k, rho) in &[(1usize, 3.0), (2, 12.0), (4, 60.0)] {
            let p = params(k, 4);
            let trials = 1_000_000 / p.big_n() as u64 + 1;
            let cfg = ChannelConfig::new(rho, trials, 11, Detector::Threshold).with_workers(4);
            let r = simulate(&p, &cfg).unwrap();
            let want = per_coordinate_error(k, rho).value();
            assert!((1e-3..=1e-1).contains(&want), "k={k} want={want}");
            let se = r.p_coordinate.standard_error(want);
            assert!(
                (r.p_coordinate.p - want).abs() <= 3.0 * se,
                "k={k} got={} want={want}",
                r.p_coordinate.p
            );
            let want_msg = threshold_message_error(&p, rho).value();
            let se = r.p_message.standard_error(want_msg);
            assert!((r.p_message.p - want_msg).abs() <= 3.0 * se, "k={k}");
        }
    }

    #[test]
    fn rank_no_worse_than_threshold() {
        let p = params(2, 4);
        let t = simulate(&p, &ChannelConfig::new(6.0, 50_000, 5, Detector::Threshold)).unwrap();
        let r = simulate(&p, &ChannelConfig::new(6.0, 50_000, 5, Detector::Rank)).unwrap();
        let slack = 3.0
            * (t.p_message.standard_error(t.p_message.p).powi(2)
                + r.p_message.standard_error(r.p_message.p).powi(2))
            .sqrt();
        assert!(r.p_message.p <= t.p_message.p + slack);
    }

    #[test]
    fn clopper_pearson_known_values() {
        // 0 of 100: upper = 1 - 0.025^(1/100)
        let e = Estimate::new(0, 100);
        assert_eq!(e.interval, IntervalKind::ClopperPearson);
        assert!((e.upper - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
        // 10 of 100: R binom.test gives [0.04900469, 0.17622260]
        let e = Estimate::new(10, 100);
        assert!((e.lower - 0.049_004_69).abs() < 1e-7, "{}", e.lower);
        assert!((e.upper - 0.176_222_60).abs() < 1e-7, "{}", e.upper);
        let e = Estimate::new(100, 100);
        assert_eq!(e.upper, 1.0);
        let e = Estimate::new(500, 1000);
        assert_eq!(e.interval, IntervalKind::Normal);
        assert!((e.upper - e.p - Z_95 * (0.25f64 / 1000.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampled_messages_are_uniform() {
        let p = params(1, 2);
        let ch = Channel::new(&p, 1.0, NOISE_VARIANCE).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0u32; 4];
        for _ in 0..40_000 {
            let m = ch.sample_message(&mut rng).unwrap();
            counts[m.linear_index(&p).unwrap() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 4.0 * (10_000.0f64 * 0.75).sqrt());
        }
    }
}
