//! Bins coding: a salted hash splits the vocabulary into `2^r` subsets and
//! each emitted token carries its subset index.

use super::{bits_to_index, index_to_bits, EncoderConfig};
use crate::bitio::BitStream;
use crate::error::{Error, Result};
use crate::textmodel::{Distribution, TokenId, Vocabulary};

const FNV_OFFSET_BASIS: u64 = 14_695_981_039_346_656_037;
const FNV_PRIME: u64 = 1_099_511_628_211;

/// FNV-1a 64 over `salt` followed by `surface`.
pub fn fnv1a64(salt: &[u8], surface: &str) -> u64 {
    salt.iter()
        .chain(surface.as_bytes())
        .fold(FNV_OFFSET_BASIS, |h, &b| {
            (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
        })
}

/// Subset index of `surface` among `2^bits` subsets.
pub fn bins_subset(salt: &[u8], surface: &str, bits: u32) -> usize {
    (fnv1a64(salt, surface) & ((1u64 << bits) - 1)) as usize
}

/// Sizes of each subset over the emittable vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionReport {
    pub sizes: Vec<usize>,
}

/// Checks that every one of the `2^bits` subsets holds at least one real
/// vocabulary word, so every bit pattern can be emitted.
pub fn validate_bins_partition(
    vocab: &Vocabulary,
    bits: u32,
    salt: &[u8],
) -> Result<PartitionReport> {
    if !(1..=super::MAX_BINS_BITS).contains(&bits) {
        return Err(Error::InvalidConfig(format!(
            "bins bits {bits} out of range"
        )));
    }
    let subsets = 1usize << bits;
    let mut sizes = vec![0usize; subsets];
    for id in vocab.word_ids() {
        sizes[bins_subset(salt, vocab.surface(id), bits)] += 1;
    }
    if let Some(subset) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::UncoverableSubset { subset, subsets });
    }
    Ok(PartitionReport { sizes })
}

pub(super) fn encode(
    config: &EncoderConfig,
    dist: &Distribution,
    stream: &mut BitStream,
    vocab: &Vocabulary,
) -> Result<(TokenId, Vec<bool>, bool)> {
    let r = config.bins_bits;
    let bits = stream.read_prefix(r as usize);
    let want = bits_to_index(&bits);
    let subset_of = |id: TokenId| bins_subset(&config.salt, vocab.surface(id), r);

    if let Some(e) = dist.entries().iter().find(|e| subset_of(e.token) == want) {
        return Ok((e.token, bits, false));
    }
    // No candidate of the needed subset: fall back to its lowest-id word.
    vocab
        .word_ids()
        .find(|&id| subset_of(id) == want)
        .map(|id| (id, bits, true))
        .ok_or(Error::UncoverableSubset {
            subset: want,
            subsets: 1 << r,
        })
}

pub(super) fn decode(config: &EncoderConfig, observed: &str) -> Vec<bool> {
    let r = config.bins_bits;
    index_to_bits(bins_subset(&config.salt, observed, r), r)
}
