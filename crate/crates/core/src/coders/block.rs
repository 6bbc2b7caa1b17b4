//! Fixed-width block coding: the top `2^k` usable candidates each carry a
//! distinct `k`-bit index.

use super::{bits_to_index, decode_top_only, fixed_width, index_to_bits, usable, EncoderConfig};
use crate::bitio::BitStream;
use crate::error::{Error, Result};
use crate::textmodel::{Distribution, TokenId};

pub(super) fn encode(
    config: &EncoderConfig,
    dist: &Distribution,
    stream: &mut BitStream,
) -> (TokenId, Vec<bool>) {
    let pool = usable(config, dist);
    let k = fixed_width(pool.len(), config.max_block_bits);
    if k == 0 {
        return (dist.entries()[0].token, Vec::new());
    }
    let bits = stream.read_prefix(k as usize);
    (pool[bits_to_index(&bits)].token, bits)
}

pub(super) fn decode(
    config: &EncoderConfig,
    dist: &Distribution,
    observed: TokenId,
) -> Result<Vec<bool>> {
    let pool = usable(config, dist);
    let k = fixed_width(pool.len(), config.max_block_bits);
    if k == 0 {
        return decode_top_only(dist, observed);
    }
    pool[..1 << k]
        .iter()
        .position(|e| e.token == observed)
        .map(|i| index_to_bits(i, k))
        .ok_or_else(|| Error::inconsistent(format!("is not among the {} block candidates", 1 << k)))
}
