use std::cmp::Ordering;

use super::vocab::TokenId;
use crate::error::{Error, Result};

/// Probabilities are stored as integer multiples of 10^-6.
pub const QUANTUM_SCALE: u32 = 1_000_000;

/// Default cap on the number of candidates kept per slot.
pub const DEFAULT_TOP_K: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub token: TokenId,
    /// Probability in units of 10^-6.
    pub micros: u32,
}

impl Entry {
    pub fn probability(&self) -> f64 {
        f64::from(self.micros) / f64::from(QUANTUM_SCALE)
    }
}

/// Canonical candidate list for one masked slot.
///
/// Entries are sorted by probability descending then token id ascending,
/// carry no duplicate ids, and their quantized probabilities sum to exactly
/// [`QUANTUM_SCALE`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Distribution {
    entries: Vec<Entry>,
}

fn canonical_order(a: &Entry, b: &Entry) -> Ordering {
    b.micros.cmp(&a.micros).then(a.token.cmp(&b.token))
}

impl Distribution {
    /// Wraps already-quantized entries, sorting them canonically.
    ///
    /// Fails unless the ids are unique, every probability is positive, and
    /// the total is exactly one.
    pub fn from_quantized(mut entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        entries.sort_by(canonical_order);
        let mut ids: Vec<TokenId> = entries.iter().map(|e| e.token).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != entries.len() {
            return Err(Error::InvalidConfig(
                "duplicate token in distribution".into(),
            ));
        }
        if entries.iter().any(|e| e.micros == 0) {
            return Err(Error::InvalidConfig("zero-probability entry".into()));
        }
        let total: u64 = entries.iter().map(|e| u64::from(e.micros)).sum();
        if total != u64::from(QUANTUM_SCALE) {
            return Err(Error::InvalidConfig(format!(
                "probabilities sum to {total} micros"
            )));
        }
        Ok(Distribution { entries })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest-probability entry.
    pub fn top(&self) -> Option<&Entry> {
        self.entries.first()
    }

    pub fn position(&self, token: TokenId) -> Option<usize> {
        self.entries.iter().position(|e| e.token == token)
    }

    pub fn micros_of(&self, token: TokenId) -> Option<u32> {
        self.entries
            .iter()
            .find(|e| e.token == token)
            .map(|e| e.micros)
    }

    /// Checks the canonical-form invariants; used by tests and debug
    /// assertions.
    pub fn is_canonical(&self) -> bool {
        let sorted = self
            .entries
            .windows(2)
            .all(|w| canonical_order(&w[0], &w[1]) == Ordering::Less);
        let total: u64 = self.entries.iter().map(|e| u64::from(e.micros)).sum();
        sorted && total == u64::from(QUANTUM_SCALE) && self.entries.iter().all(|e| e.micros > 0)
    }
}

/// Turns raw scores into a [`Distribution`]: keeps the `top_k` best entries
/// (ties by id), renormalizes, quantizes to 10^-6, and hands any rounding
/// residual to the highest-probability entry.
///
/// Non-positive and non-finite scores are discarded; if nothing positive
/// remains the result is [`Error::EmptyDistribution`].
pub fn canonicalize(raw: &[(TokenId, f64)], top_k: usize) -> Result<Distribution> {
    let mut kept: Vec<(TokenId, f64)> = raw
        .iter()
        .copied()
        .filter(|(_, p)| p.is_finite() && *p > 0.0)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    // Keep the first (highest) occurrence of any repeated id.
    let mut seen = std::collections::HashSet::with_capacity(kept.len());
    kept.retain(|(t, _)| seen.insert(*t));
    kept.truncate(top_k.max(1));

    let sum: f64 = kept.iter().map(|(_, p)| p).sum();
    let scale = f64::from(QUANTUM_SCALE);
    let mut entries: Vec<Entry> = kept
        .iter()
        .map(|&(token, p)| Entry {
            token,
            micros: (p / sum * scale).round() as u32,
        })
        .filter(|e| e.micros > 0)
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let total: i64 = entries.iter().map(|e| i64::from(e.micros)).sum();
    let residual = i64::from(QUANTUM_SCALE) - total;
    let head = i64::from(entries[0].micros) + residual;
    debug_assert!(head > 0, "residual exceeds the top entry");
    entries[0].micros = head.max(1) as u32;
    entries.sort_by(canonical_order);
    Ok(Distribution { entries })
}
