//! Adaptive dynamic grouping.
//!
//! The usable candidates are dealt, in canonical order, into `2^g` groups,
//! each time into the currently lightest group (ties to the lowest index).
//! A `g`-bit group index selects the group, and the group's most probable
//! member is emitted.

use super::{bits_to_index, decode_top_only, fixed_width, index_to_bits, usable, EncoderConfig};
use crate::bitio::BitStream;
use crate::error::{Error, Result};
use crate::textmodel::{Distribution, Entry, TokenId};

/// A balanced partition of the usable candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdgGroups {
    width: u32,
    groups: Vec<Vec<Entry>>,
}

impl AdgGroups {
    /// Greedy balanced grouping of `pool` into `2^width` groups.
    pub fn build(pool: &[Entry], width: u32) -> Self {
        let count = 1usize << width;
        let mut groups: Vec<Vec<Entry>> = vec![Vec::new(); count];
        let mut mass = vec![0u64; count];
        for e in pool {
            let lightest = (0..count).min_by_key(|&g| (mass[g], g)).unwrap();
            groups[lightest].push(*e);
            mass[lightest] += u64::from(e.micros);
        }
        AdgGroups { width, groups }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn groups(&self) -> &[Vec<Entry>] {
        &self.groups
    }

    pub fn masses(&self) -> Vec<u64> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|e| u64::from(e.micros)).sum())
            .collect()
    }

    /// Token emitted for group `index`.
    fn head(&self, index: usize) -> TokenId {
        self.groups[index][0].token
    }

    /// Checks that the groups are non-empty, disjoint, cover exactly `pool`,
    /// and that their masses differ by at most the largest entry.
    pub fn is_balanced_partition_of(&self, pool: &[Entry]) -> bool {
        let mut members: Vec<TokenId> = self.groups.iter().flatten().map(|e| e.token).collect();
        let mut expected: Vec<TokenId> = pool.iter().map(|e| e.token).collect();
        members.sort_unstable();
        expected.sort_unstable();
        let disjoint_cover = members == expected;
        let non_empty = self.groups.iter().all(|g| !g.is_empty());
        let masses = self.masses();
        let spread = masses.iter().max().unwrap() - masses.iter().min().unwrap();
        let largest = pool.iter().map(|e| u64::from(e.micros)).max().unwrap_or(0);
        disjoint_cover && non_empty && spread <= largest
    }
}

/// The grouping used for `dist` under `config`, or `None` when at most one
/// candidate is usable.
pub fn adg_groups(config: &EncoderConfig, dist: &Distribution) -> Option<AdgGroups> {
    let pool = usable(config, dist);
    let g = fixed_width(pool.len(), config.max_block_bits);
    (g > 0).then(|| AdgGroups::build(pool, g))
}

pub(super) fn encode(
    config: &EncoderConfig,
    dist: &Distribution,
    stream: &mut BitStream,
) -> (TokenId, Vec<bool>) {
    match adg_groups(config, dist) {
        Some(groups) => {
            let bits = stream.read_prefix(groups.width as usize);
            (groups.head(bits_to_index(&bits)), bits)
        }
        None => (dist.entries()[0].token, Vec::new()),
    }
}

pub(super) fn decode(
    config: &EncoderConfig,
    dist: &Distribution,
    observed: TokenId,
) -> Result<Vec<bool>> {
    let Some(groups) = adg_groups(config, dist) else {
        return decode_top_only(dist, observed);
    };
    (0..groups.groups.len())
        .find(|&i| groups.head(i) == observed)
        .map(|i| index_to_bits(i, groups.width))
        .ok_or_else(|| Error::inconsistent("does not lead any ADG group"))
}
