//! Channel models feeding the decoders: the q-ary symmetric channel (hard
//! symbols for the flip decoder) and binary-modulated AWGN (log-likelihood
//! ratio vectors for the sum-product decoder), plus the mapping from channel
//! parameter to initial message error probability.
//!
//! Randomness is drawn from per-trial counter-derived streams so that trials
//! can be split across workers and merged without changing any result.

use crate::galois::{GField, ProbVector, Symbol};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;

/// Clamp for log-likelihood ratios; generous compared to any plausible
/// operating point but small enough to exponentiate safely.
pub const LLR_CLAMP: f64 = 40.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    /// Symbol error probability outside `[0, (q-1)/q]`.
    BadErrorProb { epsilon: f64, q: usize },
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::BadErrorProb { epsilon, q } => {
                write!(f, "symbol error probability {epsilon} outside [0, {}/{q}]", q - 1)
            }
        }
    }
}

impl std::error::Error for ChannelError {}

/// A channel operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// Each symbol is replaced, with probability `epsilon`, by a uniformly
    /// chosen different symbol.
    QSymmetric { epsilon: f64 },
    /// Antipodal modulation of the symbol bits over AWGN; `rate` is the code
    /// rate used for the energy-per-information-bit accounting.
    AwgnBpsk { ebn0_db: f64, rate: f64 },
}

impl ChannelModel {
    /// Initial message error probability seen by the analysis.
    ///
    /// For the symmetric channel this is `epsilon` itself. For AWGN it is the
    /// hard-decision symbol error probability `1 - (1 - Q(sqrt(2 R Eb/N0)))^p`
    /// with `Q` the Gaussian tail — the chart is a hard-decision analysis, so
    /// its operating point is the hard-decision error rate even when the soft
    /// decoder runs below it.
    pub fn initial_error_prob(&self, field: &GField) -> f64 {
        match *self {
            ChannelModel::QSymmetric { epsilon } => epsilon,
            ChannelModel::AwgnBpsk { ebn0_db, rate } => {
                let ebn0 = 10f64.powf(ebn0_db / 10.0);
                let bit_err = gaussian_tail((2.0 * rate * ebn0).sqrt());
                1.0 - (1.0 - bit_err).powi(field.ext_degree() as i32)
            }
        }
    }
}

/// Deterministic per-trial random stream: one seed, one stream index.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sends `codeword` through the q-ary symmetric channel.
pub fn qsc_transmit(
    codeword: &[Symbol],
    epsilon: f64,
    field: &GField,
    rng: &mut impl Rng,
) -> Result<Vec<Symbol>, ChannelError> {
    let q = field.order();
    let limit = (q as f64 - 1.0) / q as f64;
    if !(0.0..=limit).contains(&epsilon) {
        return Err(ChannelError::BadErrorProb { epsilon, q });
    }
    Ok(codeword
        .iter()
        .map(|&x| {
            if rng.random::<f64>() < epsilon {
                // Uniform over the q-1 other symbols: offset by a nonzero
                // field element.
                let off = rng.random_range(1..q) as Symbol;
                field.add(x, off)
            } else {
                x
            }
        })
        .collect())
}

/// A log-likelihood ratio vector for one received symbol: entry `i-1` is
/// `ln(p_0 / p_i)` for symbol `i` against symbol 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Llrv {
    values: Vec<f64>,
}

impl Llrv {
    pub fn new(values: Vec<f64>) -> Self {
        Llrv { values }
    }

    /// Number of entries, `q - 1`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ratio for symbol `i` (1-based field element).
    pub fn get(&self, symbol: Symbol) -> f64 {
        self.values[symbol as usize - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Normalized probability vector over all q symbols. Log masses are
    /// shifted by their maximum before exponentiating, so arbitrarily large
    /// ratios stay finite and keep their ordering.
    pub fn to_prob_vector(&self) -> ProbVector {
        // Log mass of symbol 0 is 0, of symbol i is -l_i.
        let peak = self.values.iter().fold(0.0f64, |m, &l| m.max(-l));
        let mut entries = Vec::with_capacity(self.values.len() + 1);
        entries.push((-peak).exp());
        entries.extend(self.values.iter().map(|&l| (-l - peak).exp()));
        let mut v = ProbVector::new(entries);
        v.normalize();
        v
    }

    /// Inverse of [`Llrv::to_prob_vector`], up to the probability floor.
    pub fn from_prob_vector(v: &ProbVector) -> Self {
        let p0 = v[0];
        let values = (1..v.len()).map(|i| (p0 / v[i]).ln()).collect();
        Llrv { values }
    }
}

/// Maps a field element to its `p` bits, most significant first.
pub fn symbol_to_bits(x: Symbol, ext_degree: u32) -> impl Iterator<Item = bool> {
    (0..ext_degree).rev().map(move |b| (x >> b) & 1 == 1)
}

/// Inverse of [`symbol_to_bits`].
pub fn bits_to_symbol(bits: &[bool]) -> Symbol {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as Symbol)
}

/// Modulates each symbol's bits antipodally, adds white Gaussian noise at the
/// variance implied by `ebn0_db` and `rate`, and returns one LLRV per symbol.
///
/// Bit energy is 1, so the noise variance per bit is `1 / (2 R Eb/N0)`. The
/// symbol likelihood is the product of per-bit likelihoods, which makes each
/// LLRV entry the sum of the per-bit LLRs where that symbol has a one bit.
pub fn awgn_llrv(
    codeword: &[Symbol],
    ebn0_db: f64,
    rate: f64,
    field: &GField,
    rng: &mut impl Rng,
) -> Vec<Llrv> {
    let q = field.order();
    let p = field.ext_degree();
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    let sigma2 = 1.0 / (2.0 * rate * ebn0);
    let sigma = sigma2.sqrt();

    codeword
        .iter()
        .map(|&x| {
            // Per-bit LLR ln P(y|0)/P(y|1) = 2y/sigma^2 under 0 -> +1.
            let bit_llrs: Vec<f64> = symbol_to_bits(x, p)
                .map(|bit| {
                    let tx = if bit { -1.0 } else { 1.0 };
                    let noise: f64 = rng.sample(StandardNormal);
                    let y = tx + sigma * noise;
                    (2.0 * y / sigma2).clamp(-LLR_CLAMP, LLR_CLAMP)
                })
                .collect();
            // Sums of clamped per-bit ratios; bounded by p * LLR_CLAMP, and
            // deliberately not clamped again so symbol ordering survives.
            let values = (1..q)
                .map(|sym| {
                    let mut l = 0.0;
                    for (b, bit) in symbol_to_bits(sym as Symbol, p).enumerate() {
                        if bit {
                            l += bit_llrs[b];
                        }
                    }
                    l
                })
                .collect();
            Llrv::new(values)
        })
        .collect()
}

/// Gaussian upper-tail probability Q(x) = P(N(0,1) > x).
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Complementary error function, Chebyshev fit with relative error below
/// 1.2e-7 everywhere — far tighter than any tolerance used on top of it.
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587
                                        + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}
