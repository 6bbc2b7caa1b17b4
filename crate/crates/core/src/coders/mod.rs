//! Information-encoding strategies.
//!
//! Each strategy maps a prefix of the payload stream to one candidate token
//! of a slot's [`Distribution`] ([`encode_step`]) and maps an observed token
//! back to that prefix ([`decode_step`]). Block, Huffman and ADG derive the
//! mapping from the distribution and therefore need the same predictor on
//! both sides; Bins hashes token surfaces and needs no model to decode.

mod adg;
mod bins;
mod block;
mod huffman;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitio::BitStream;
use crate::error::{Error, Result};
use crate::textmodel::{Distribution, Entry, TokenId, Vocabulary, QUANTUM_SCALE};

pub use adg::{adg_groups, AdgGroups};
pub use bins::{bins_subset, fnv1a64, validate_bins_partition, PartitionReport};
pub use huffman::{huffman_code, HuffmanCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Block,
    Huffman,
    Adg,
    Bins,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Block,
        Strategy::Huffman,
        Strategy::Adg,
        Strategy::Bins,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Block => "block",
            Strategy::Huffman => "huffman",
            Strategy::Adg => "adg",
            Strategy::Bins => "bins",
        }
    }

    /// Whether decoding needs the embed-time predictor.
    pub fn needs_model(self) -> bool {
        self != Strategy::Bins
    }

    /// Whether the probability threshold applies.
    pub fn uses_threshold(self) -> bool {
        self != Strategy::Bins
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "block" => Ok(Strategy::Block),
            "huffman" => Ok(Strategy::Huffman),
            "adg" => Ok(Strategy::Adg),
            "bins" => Ok(Strategy::Bins),
            other => Err(Error::InvalidConfig(format!("unknown strategy {other:?}"))),
        }
    }
}

pub const DEFAULT_MAX_BLOCK_BITS: u32 = 8;
pub const MAX_BINS_BITS: u32 = 24;

/// Shared coding parameters. Both parties must use identical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub strategy: Strategy,
    /// Only candidates with probability strictly above this may carry bits
    /// (Block, Huffman, ADG).
    pub t_p: f64,
    /// Cap on the fixed code width (Block, ADG).
    pub max_block_bits: u32,
    /// Bits per token; the vocabulary splits into `2^bins_bits` subsets.
    pub bins_bits: u32,
    /// Prepended to every surface before hashing (Bins).
    pub salt: Vec<u8>,
}

impl EncoderConfig {
    fn with(strategy: Strategy, t_p: f64) -> Self {
        EncoderConfig {
            strategy,
            t_p,
            max_block_bits: DEFAULT_MAX_BLOCK_BITS,
            bins_bits: 1,
            salt: Vec::new(),
        }
    }

    pub fn block(t_p: f64) -> Self {
        Self::with(Strategy::Block, t_p)
    }

    pub fn huffman(t_p: f64) -> Self {
        Self::with(Strategy::Huffman, t_p)
    }

    pub fn adg(t_p: f64) -> Self {
        Self::with(Strategy::Adg, t_p)
    }

    pub fn bins(bits: u32, salt: impl Into<Vec<u8>>) -> Self {
        EncoderConfig {
            bins_bits: bits,
            salt: salt.into(),
            ..Self::with(Strategy::Bins, 0.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.t_p) {
            return Err(Error::InvalidConfig(format!(
                "t_p {} outside [0, 1)",
                self.t_p
            )));
        }
        if !(1..=16).contains(&self.max_block_bits) {
            return Err(Error::InvalidConfig(format!(
                "max_block_bits {} outside 1..=16",
                self.max_block_bits
            )));
        }
        if !(1..=MAX_BINS_BITS).contains(&self.bins_bits) {
            return Err(Error::InvalidConfig(format!(
                "bins bits {} outside 1..={MAX_BINS_BITS}",
                self.bins_bits
            )));
        }
        Ok(())
    }

    /// `t_p` on the 10^-6 grid used by distributions.
    pub fn threshold_micros(&self) -> u32 {
        (self.t_p * f64::from(QUANTUM_SCALE)).round() as u32
    }
}

/// Outcome of one embedding step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub token: TokenId,
    /// Exactly the bits the token carries, padding included.
    pub bits: Vec<bool>,
    /// How many of the trailing `bits` were zero padding past the payload end.
    pub padding: usize,
    /// Bins only: the chosen subset had no candidate in the distribution.
    pub degraded: bool,
}

/// Candidates that pass the threshold; a prefix of the canonical order.
pub fn usable<'a>(config: &EncoderConfig, dist: &'a Distribution) -> &'a [Entry] {
    let threshold = config.threshold_micros();
    let n = dist.entries().partition_point(|e| e.micros > threshold);
    &dist.entries()[..n]
}

/// `floor(log2 u)` capped at `max_block_bits`; zero when `u <= 1`.
pub(crate) fn fixed_width(u: usize, max_bits: u32) -> u32 {
    if u <= 1 {
        0
    } else {
        (usize::BITS - 1 - u.leading_zeros()).min(max_bits)
    }
}

pub(crate) fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter()
        .fold(0usize, |acc, &b| acc << 1 | usize::from(b))
}

pub(crate) fn index_to_bits(index: usize, width: u32) -> Vec<bool> {
    (0..width).rev().map(|i| index >> i & 1 == 1).collect()
}

/// Picks the token for one masked slot, consuming the bit prefix it carries.
pub fn encode_step(
    config: &EncoderConfig,
    dist: &Distribution,
    stream: &mut BitStream,
    vocab: &Vocabulary,
) -> Result<StepResult> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let padding_before = stream.padding_read();
    let (token, bits, degraded) = match config.strategy {
        Strategy::Block => {
            let (t, b) = block::encode(config, dist, stream);
            (t, b, false)
        }
        Strategy::Huffman => {
            let (t, b) = huffman::encode(config, dist, stream);
            (t, b, false)
        }
        Strategy::Adg => {
            let (t, b) = adg::encode(config, dist, stream);
            (t, b, false)
        }
        Strategy::Bins => bins::encode(config, dist, stream, vocab)?,
    };
    Ok(StepResult {
        token,
        bits,
        padding: stream.padding_read() - padding_before,
        degraded,
    })
}

/// Recovers the bits carried by `observed`.
///
/// Block, Huffman and ADG need the embed-time `dist` and a vocabulary to
/// resolve `observed`; Bins needs neither. A token the encoder could never
/// have chosen yields [`Error::InconsistentMarkedText`].
pub fn decode_step(
    config: &EncoderConfig,
    dist: &Distribution,
    observed: &str,
    vocab: Option<&Vocabulary>,
) -> Result<Vec<bool>> {
    if config.strategy == Strategy::Bins {
        return Ok(bins::decode(config, observed));
    }
    let vocab = vocab.ok_or_else(|| {
        Error::InvalidConfig(format!("{} decoding needs a vocabulary", config.strategy))
    })?;
    let id = vocab
        .id(observed)
        .ok_or_else(|| Error::inconsistent(format!("{observed:?} is not in the vocabulary")))?;
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    match config.strategy {
        Strategy::Block => block::decode(config, dist, id),
        Strategy::Huffman => huffman::decode(config, dist, id),
        Strategy::Adg => adg::decode(config, dist, id),
        Strategy::Bins => unreachable!(),
    }
    .map_err(|e| match e {
        Error::InconsistentMarkedText { reason, position } => Error::InconsistentMarkedText {
            position,
            reason: format!("{observed:?} {reason}"),
        },
        other => other,
    })
}

/// Decoding for the degenerate case shared by Block, Huffman and ADG: only
/// the top candidate can have been emitted, carrying no bits.
pub(crate) fn decode_top_only(dist: &Distribution, id: TokenId) -> Result<Vec<bool>> {
    if dist.top().map(|e| e.token) == Some(id) {
        Ok(Vec::new())
    } else {
        Err(Error::inconsistent(
            "is not the top candidate of a zero-bit slot",
        ))
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn strategy_names() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("arith".parse::<Strategy>().is_err());
    }

    #[test]
    fn usable_is_strict_prefix() {
        let d = dist(&[0.5, 0.3, 0.15, 0.05]);
        assert_eq!(usable(&EncoderConfig::block(0.1), &d).len(), 3);
        assert_eq!(usable(&EncoderConfig::block(0.15), &d).len(), 2);
        assert_eq!(usable(&EncoderConfig::block(0.0), &d).len(), 4);
    }

    #[test]
    fn fixed_width_values() {
        assert_eq!(fixed_width(0, 8), 0);
        assert_eq!(fixed_width(1, 8), 0);
        assert_eq!(fixed_width(2, 8), 1);
        assert_eq!(fixed_width(3, 8), 1);
        assert_eq!(fixed_width(4, 8), 2);
        assert_eq!(fixed_width(64, 8), 6);
        assert_eq!(fixed_width(1000, 8), 8);
    }

    #[test]
    fn validate_rejects_out_of_range() {
        assert!(EncoderConfig::block(1.0).validate().is_err());
        assert!(EncoderConfig::block(-0.1).validate().is_err());
        assert!(EncoderConfig::bins(0, []).validate().is_err());
        assert!(EncoderConfig::bins(2, [1, 2]).validate().is_ok());
    }

    #[test]
    fn empty_distribution_errors() {
        let v = vocab(3);
        let mut s = BitStream::from_bit_str("1");
        let err = encode_step(
            &EncoderConfig::block(0.0),
            &Distribution::default(),
            &mut s,
            &v,
        );
        assert!(matches!(err, Err(Error::EmptyDistribution)));
    }
}
