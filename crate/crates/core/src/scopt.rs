//! Permutation constellations built from PAM levels.
//!
//! A signal consists of `q` blocks. Each block has `2K` coordinates holding
//! the `2K` distinct levels `0.5 d_e (2(l - K) - 1)`, `l = 1..=2K`, in some
//! order; the order is the information. With `d_e = sqrt(6 / (4K^2 - 1))`
//! every coordinate has mean square 1/2, so a normalized signal has energy
//! `n = Kq` spread over `N = 2Kq` coordinates.
//!
//! Orderings are numbered by their lexicographic rank (factoradic / Lehmer
//! code), so a message is an array of `q` ranks in `[0, (2K)!)`.

use std::fmt;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::log_factorial;

/// Largest block length whose factorial fits in `u128`.
pub const MAX_CODEC_BLOCK_LEN: usize = 34;

/// Enumeration limit for [`brute_force_med`].
pub const MED_ENUMERATION_LIMIT: u64 = 10_000;

const fn factorial_table() -> [u128; MAX_CODEC_BLOCK_LEN + 1] {
    let mut f = [1u128; MAX_CODEC_BLOCK_LEN + 1];
    let mut i = 1;
    while i <= MAX_CODEC_BLOCK_LEN {
        f[i] = f[i - 1] * i as u128;
        i += 1;
    }
    f
}

const FACTORIALS: [u128; MAX_CODEC_BLOCK_LEN + 1] = factorial_table();

/// Shape of a constellation: `q` blocks of `2K` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ScoptParams {
    k: usize,
    q: usize,
}

impl ScoptParams {
    pub fn new(k: usize, q: usize) -> Result<Self> {
        if k == 0 {
            return Err(domain("k", 0.0, "k >= 1"));
        }
        if q == 0 {
            return Err(domain("q", 0.0, "q >= 1"));
        }
        Ok(ScoptParams { k, q })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Coordinates per block, `2K`.
    pub fn block_len(&self) -> usize {
        2 * self.k
    }

    /// Normalized signal duration `n = Kq`.
    pub fn n(&self) -> u64 {
        (self.k * self.q) as u64
    }

    /// Dimension `N = 2Kq`.
    pub fn big_n(&self) -> usize {
        2 * self.k * self.q
    }

    /// Spacing between adjacent normalized levels.
    pub fn d_e(&self) -> f64 {
        level_spacing(self.k)
    }

    pub fn log2_num_signals(&self) -> f64 {
        log2_num_signals(self)
    }

    pub fn rf_exact(&self) -> f64 {
        rf_exact(self.k)
    }

    pub fn rf_approx(&self) -> f64 {
        rf_approx(self.k)
    }

    /// `(2K)!`, when it fits the codec.
    pub fn block_cardinality(&self) -> Option<u128> {
        FACTORIALS.get(self.block_len()).copied()
    }

    /// Total number of signals `((2K)!)^q`, when it fits in `u128`.
    pub fn num_signals(&self) -> Option<u128> {
        let per_block = self.block_cardinality()?;
        (0..self.q).try_fold(1u128, |acc, _| acc.checked_mul(per_block))
    }

    fn check_codec(&self) -> Result<()> {
        if self.block_len() > MAX_CODEC_BLOCK_LEN {
            Err(Error::CodecLimit(self.block_len()))
        } else {
            Ok(())
        }
    }
}

/// `sqrt(6 / (4K^2 - 1))`.
fn level_spacing(k: usize) -> f64 {
    let k = k as f64;
    (6.0 / (4.0 * k * k - 1.0)).sqrt()
}

/// The `2K` normalized levels in ascending order.
pub fn level_values(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(domain("k", 0.0, "k >= 1"));
    }
    let half = 0.5 * level_spacing(k);
    let k = k as i64;
    Ok((1..=2 * k)
        .map(|l| half * (2 * (l - k) - 1) as f64)
        .collect())
}

/// One block's arrangement: `mapping[i]` is the level index (0 = lowest)
/// placed on coordinate `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        if is_bijection(&mapping) {
            Ok(Permutation(mapping))
        } else {
            Err(Error::InvalidPermutation {
                block_len: mapping.len(),
                mapping,
            })
        }
    }

    pub fn identity(len: usize) -> Self {
        Permutation((0..len).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

pub(crate) fn is_bijection(mapping: &[usize]) -> bool {
    let mut seen = vec![false; mapping.len()];
    for &m in mapping {
        match seen.get_mut(m) {
            Some(s) if !*s => *s = true,
            _ => return false,
        }
    }
    true
}

/// Permutation with lexicographic rank `index` among all orderings of `2K` levels.
pub fn encode_block(k: usize, index: u128) -> Result<Permutation> {
    let len = 2 * k;
    if k == 0 {
        return Err(domain("k", 0.0, "k >= 1"));
    }
    if len > MAX_CODEC_BLOCK_LEN {
        return Err(Error::CodecLimit(len));
    }
    let limit = FACTORIALS[len];
    if index >= limit {
        return Err(Error::IndexOutOfRange {
            index,
            block_len: len,
            limit,
        });
    }
    let mut remaining: Vec<usize> = (0..len).collect();
    let mut rest = index;
    let mut mapping = Vec::with_capacity(len);
    for i in 0..len {
        let weight = FACTORIALS[len - 1 - i];
        let digit = (rest / weight) as usize;
        rest %= weight;
        mapping.push(remaining.remove(digit));
    }
    Ok(Permutation(mapping))
}

/// Lexicographic rank of `perm`; inverse of [`encode_block`].
pub fn decode_block(k: usize, perm: &Permutation) -> Result<u128> {
    let len = 2 * k;
    if len > MAX_CODEC_BLOCK_LEN {
        return Err(Error::CodecLimit(len));
    }
    let mapping = perm.as_slice();
    if mapping.len() != len || !is_bijection(mapping) {
        return Err(Error::InvalidPermutation {
            block_len: len,
            mapping: mapping.to_vec(),
        });
    }
    Ok(rank_unchecked(mapping))
}

fn rank_unchecked(mapping: &[usize]) -> u128 {
    let len = mapping.len();
    let mut index = 0u128;
    for i in 0..len {
        let smaller_after = mapping[i + 1..].iter().filter(|&&m| m < mapping[i]).count();
        index += smaller_after as u128 * FACTORIALS[len - 1 - i];
    }
    index
}

/// One choice of arrangement per block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Message {
    block_indices: Vec<u128>,
}

impl Message {
    pub fn new(params: &ScoptParams, block_indices: Vec<u128>) -> Result<Self> {
        params.check_codec()?;
        if block_indices.len() != params.q() {
            return Err(Error::InvalidMessage(format!(
                "expected {} block indices, got {}",
                params.q(),
                block_indices.len()
            )));
        }
        let limit = FACTORIALS[params.block_len()];
        if let Some(&index) = block_indices.iter().find(|&&i| i >= limit) {
            return Err(Error::IndexOutOfRange {
                index,
                block_len: params.block_len(),
                limit,
            });
        }
        Ok(Message { block_indices })
    }

    /// The message at position `linear` in mixed-radix order, block 0 most
    /// significant.
    pub fn from_linear(params: &ScoptParams, linear: u128) -> Result<Self> {
        params.check_codec()?;
        let total = params
            .num_signals()
            .ok_or_else(|| Error::InvalidMessage("constellation size exceeds u128".to_string()))?;
        if linear >= total {
            return Err(Error::InvalidMessage(format!(
                "linear index {linear} >= {total}"
            )));
        }
        let radix = FACTORIALS[params.block_len()];
        let mut rest = linear;
        let mut block_indices = vec![0u128; params.q()];
        for slot in block_indices.iter_mut().rev() {
            *slot = rest % radix;
            rest /= radix;
        }
        Ok(Message { block_indices })
    }

    /// Inverse of [`Message::from_linear`].
    pub fn linear_index(&self, params: &ScoptParams) -> Option<u128> {
        let radix = params.block_cardinality()?;
        self.block_indices
            .iter()
            .try_fold(0u128, |acc, &i| acc.checked_mul(radix)?.checked_add(i))
    }

    pub fn block_indices(&self) -> &[u128] {
        &self.block_indices
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.block_indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Whole bits carried by one block, `floor(log2((2K)!))`.
///
/// Packing bits this way wastes `log2((2K)!) - bits_per_block(k)` bits per
/// block (see [`fractional_bit_loss`]).
pub fn bits_per_block(k: usize) -> Result<u32> {
    let len = 2 * k;
    if k == 0 || len > MAX_CODEC_BLOCK_LEN {
        return Err(Error::CodecLimit(len));
    }
    Ok(127 - FACTORIALS[len].leading_zeros())
}

pub fn fractional_bit_loss(k: usize) -> Result<f64> {
    Ok(rf_exact(k) * k as f64 - bits_per_block(k)? as f64)
}

/// Packs a bit string (MSB first per block) into block indices.
pub fn message_from_bits(params: &ScoptParams, bits: &[bool]) -> Result<Message> {
    let per_block = bits_per_block(params.k())? as usize;
    if bits.len() != per_block * params.q() {
        return Err(Error::InvalidMessage(format!(
            "expected {} bits, got {}",
            per_block * params.q(),
            bits.len()
        )));
    }
    let block_indices = bits
        .chunks(per_block)
        .map(|chunk| chunk.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128))
        .collect();
    Message::new(params, block_indices)
}

/// Inverse of [`message_from_bits`]; fails for indices that no bit string maps to.
pub fn message_to_bits(params: &ScoptParams, msg: &Message) -> Result<Vec<bool>> {
    let per_block = bits_per_block(params.k())?;
    let mut bits = Vec::with_capacity(per_block as usize * params.q());
    for &index in msg.block_indices() {
        if per_block < 128 && index >> per_block != 0 {
            return Err(Error::InvalidMessage(format!(
                "block index {index} needs more than {per_block} bits"
            )));
        }
        bits.extend((0..per_block).rev().map(|b| (index >> b) & 1 == 1));
    }
    Ok(bits)
}

/// Normalized coordinates of one signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateVector(Vec<f64>);

impl CoordinateVector {
    pub fn new(coords: Vec<f64>) -> Self {
        CoordinateVector(coords)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn scaled(&self, factor: f64) -> CoordinateVector {
        CoordinateVector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Maps a message to its normalized coordinates (energy `n`).
pub fn modulate(params: &ScoptParams, msg: &Message) -> Result<CoordinateVector> {
    if msg.block_indices().len() != params.q() {
        return Err(Error::InvalidMessage(format!(
            "expected {} block indices, got {}",
            params.q(),
            msg.block_indices().len()
        )));
    }
    let levels = level_values(params.k())?;
    let mut coords = Vec::with_capacity(params.big_n());
    for &index in msg.block_indices() {
        let perm = encode_block(params.k(), index)?;
        coords.extend(perm.as_slice().iter().map(|&l| levels[l]));
    }
    Ok(CoordinateVector(coords))
}

/// `q log2((2K)!)`.
pub fn log2_num_signals(params: &ScoptParams) -> f64 {
    params.q() as f64 * log_factorial(params.block_len() as u64) / std::f64::consts::LN_2
}

/// Spectral efficiency `log2((2K)!) / K`.
pub fn rf_exact(k: usize) -> f64 {
    log_factorial(2 * k as u64) / std::f64::consts::LN_2 / k as f64
}

/// Stirling-style approximation `log2(4K^2)`.
pub fn rf_approx(k: usize) -> f64 {
    (4.0 * (k as f64).powi(2)).log2()
}

/// Closed-form minimum distance `sqrt(6 n rho_s / (4K^2 - 1))`.
///
/// This scales with `sqrt(n)`; the coordinate-space minimum distance
/// computed by [`brute_force_med`] does not.
pub fn med_scopt(rho_s: f64, k: usize, n: u64) -> Result<f64> {
    if !(rho_s > 0.0) || !rho_s.is_finite() {
        return Err(domain("rho_s", rho_s, "finite and > 0"));
    }
    if k == 0 {
        return Err(domain("k", 0.0, "k >= 1"));
    }
    if n == 0 {
        return Err(domain("n", 0.0, "n >= 1"));
    }
    let kf = k as f64;
    Ok((6.0 * n as f64 * rho_s / (4.0 * kf * kf - 1.0)).sqrt())
}

/// Minimum pairwise distance found by exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedWitness {
    pub distance: f64,
    pub first: Message,
    pub second: Message,
}

/// Exhaustive minimum Euclidean distance between signals scaled by
/// `sqrt(rho_s)`. Limited to [`MED_ENUMERATION_LIMIT`] signals.
pub fn brute_force_med(params: &ScoptParams, rho_s: f64) -> Result<MedWitness> {
    if !(rho_s > 0.0) || !rho_s.is_finite() {
        return Err(domain("rho_s", rho_s, "finite and > 0"));
    }
    let total = match params.num_signals() {
        Some(t) if t <= MED_ENUMERATION_LIMIT as u128 => t,
        other => {
            return Err(Error::EnumerationGuard {
                size: other.map_or_else(|| "> 2^128".to_string(), |t| t.to_string()),
                limit: MED_ENUMERATION_LIMIT,
            })
        }
    };
    let scale = rho_s.sqrt();
    let signals = (0..total)
        .map(|i| {
            let msg = Message::from_linear(params, i)?;
            let coords = modulate(params, &msg)?.scaled(scale).into_inner();
            Ok((msg, coords))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..signals.len() {
        for j in i + 1..signals.len() {
            let d2: f64 = signals[i]
                .1
                .iter()
                .zip(&signals[j].1)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if best.is_none_or(|(b, _, _)| d2 < b) {
                best = Some((d2, i, j));
            }
        }
    }
    let (d2, i, j) =
        best.ok_or_else(|| Error::InvalidMessage("constellation has a single signal".to_string()))?;
    Ok(MedWitness {
        distance: d2.sqrt(),
        first: signals[i].0.clone(),
        second: signals[j].0.clone(),
    })
}
