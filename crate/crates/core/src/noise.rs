//! Correlated dichotomous (telegraph) noise driving the polarisation jumps.
//!
//! Jumps have fixed magnitude `Δφ`; their signs form a stationary two-state
//! Markov chain that repeats the previous sign with probability
//! `p = (C + 1) / 2`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::polarization::RotationJump;

/// Identity of the pseudo-random generator and seed-splitting scheme.
///
/// Written into every output file header; changing either part changes the
/// simulated data, so bump the version suffix when that happens.
pub const GENERATOR_ID: &str = "chacha8/rand_chacha-0.9/splitmix64-v1";

/// Correlation parameter `C = 2p - 1 ∈ [-1, 1]` between consecutive jumps.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CorrelationParameter(f64);

impl CorrelationParameter {
    pub const WHITE: Self = Self(0.0);

    pub fn new(c: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&c) {
            Ok(Self(c))
        } else {
            Err(Error::domain("c", c, "-1 <= C <= 1"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Probability that a jump repeats the previous jump's sign.
    pub fn repeat_probability(self) -> f64 {
        (0.5 * (self.0 + 1.0)).clamp(0.0, 1.0)
    }
}

impl TryFrom<f64> for CorrelationParameter {
    type Error = Error;

    fn try_from(c: f64) -> Result<Self> {
        Self::new(c)
    }
}

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for work item `index` under `master`.
///
/// Pure in its arguments, so any trajectory can be regenerated in isolation.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

pub fn stream_rng(stream_seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed)
}

/// Fills `out` with jump signs (`true` = positive) drawn from the chain.
pub fn fill_signs<R: Rng + ?Sized>(rng: &mut R, repeat_probability: f64, out: &mut [bool]) {
    let Some((first, rest)) = out.split_first_mut() else {
        return;
    };
    *first = rng.random::<bool>();
    let mut prev = *first;
    for slot in rest {
        let repeat = rng.random_bool(repeat_probability);
        prev = if repeat { prev } else { !prev };
        *slot = prev;
    }
}

/// A realised sequence of rotation jumps together with the seed that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSequence {
    jumps: Vec<RotationJump>,
    seed: u64,
}

impl JumpSequence {
    pub fn from_jumps(jumps: Vec<RotationJump>, seed: u64) -> Self {
        Self { jumps, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn jumps(&self) -> &[RotationJump] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn signs(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(|j| j.sign())
    }
}

impl std::ops::Deref for JumpSequence {
    type Target = [RotationJump];

    fn deref(&self) -> &[RotationJump] {
        &self.jumps
    }
}

pub fn generate_jump_sequence(
    n_blocks: usize,
    delta_phi: f64,
    c: CorrelationParameter,
    stream_seed: u64,
) -> Result<JumpSequence> {
    if n_blocks == 0 {
        return Err(Error::domain("n_blocks", 0.0, "n_blocks >= 1"));
    }
    if !(delta_phi > 0.0 && delta_phi.is_finite()) {
        return Err(Error::domain("delta_phi", delta_phi, "0 < delta_phi < inf"));
    }
    let mut signs = vec![false; n_blocks];
    fill_signs(&mut stream_rng(stream_seed), c.repeat_probability(), &mut signs);
    let jumps = signs
        .into_iter()
        .map(|positive| RotationJump(if positive { delta_phi } else { -delta_phi }))
        .collect();
    Ok(JumpSequence::from_jumps(jumps, stream_seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub c_hat: f64,
    pub stderr: f64,
    pub pairs: usize,
}

/// Mean of `sign(jump_{k+m}) · sign(jump_k)` over all lag-`m` pairs.
///
/// Estimates `C^m` for the stationary chain.
pub fn lag_correlation(sequences: &[JumpSequence], lag: usize) -> Result<CorrelationEstimate> {
    if sequences.is_empty() {
        return Err(Error::Invalid("empty ensemble".into()));
    }
    if lag == 0 {
        return Err(Error::Invalid("lag must be at least 1".into()));
    }
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for seq in sequences {
        let signs: Vec<f64> = seq.signs().collect();
        for w in signs.windows(lag + 1) {
            let prod = w[0] * w[lag];
            n += 1;
            sum += prod;
            sum_sq += prod * prod;
        }
    }
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 lag-{lag} pairs, found {n}")));
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(CorrelationEstimate {
        c_hat: mean,
        stderr: (var / nf).sqrt(),
        pairs: n,
    })
}

/// Lag-1 sign correlation, the direct estimate of `C`.
///
/// For the Markov chain the lag-1 products are independent repeat/flip
/// indicators, so the standard error is exact.
pub fn empirical_correlation(sequences: &[JumpSequence]) -> Result<CorrelationEstimate> {
    lag_correlation(sequences, 1)
}
