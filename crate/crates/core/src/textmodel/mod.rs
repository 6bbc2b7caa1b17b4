//! Tokenization, vocabularies, and masked-token predictors.
//!
//! The embedding and extraction loops only need a deterministic conditional
//! distribution for each masked slot. [`NGramModel`] supplies one from
//! bidirectional n-gram counts; [`ExternalPredictor`] forwards the query to
//! another process over a line-delimited JSON protocol.

mod distribution;
mod external;
mod format;
mod ngram;
mod tokenize;
mod vocab;

use std::fmt;

pub use distribution::{canonicalize, Distribution, Entry, DEFAULT_TOP_K, QUANTUM_SCALE};
pub use external::ExternalPredictor;
pub use format::{load_model, read_model, save_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use ngram::{build_model, NGram, NGramModel};
pub use tokenize::tokenize;
pub use vocab::{TokenId, Vocabulary, OOV};

use crate::error::Result;

/// Textual form of a masked slot.
pub const MASK: &str = "[MASK]";

/// A token sequence where some slots are still unfilled.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaskedText {
    slots: Vec<Option<String>>,
}

impl MaskedText {
    pub fn new(slots: Vec<Option<String>>) -> Self {
        MaskedText { slots }
    }

    /// A text with every slot filled.
    pub fn filled<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MaskedText {
            slots: tokens.into_iter().map(|t| Some(t.into())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Option<String>] {
        &self.slots
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.slots.get(index).and_then(|s| s.as_deref())
    }

    pub fn is_masked(&self, index: usize) -> bool {
        matches!(self.slots.get(index), Some(None))
    }

    pub fn set(&mut self, index: usize, token: impl Into<String>) {
        self.slots[index] = Some(token.into());
    }

    pub fn mask(&mut self, index: usize) {
        self.slots[index] = None;
    }

    pub fn mask_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_none()).count()
    }

    /// Indices of the masked slots, ascending.
    pub fn masked_indices(&self) -> Vec<usize> {
        (0..self.slots.len())
            .filter(|&i| self.slots[i].is_none())
            .collect()
    }

    /// The filled tokens, or `None` while any slot is still masked.
    pub fn into_tokens(self) -> Option<Vec<String>> {
        self.slots.into_iter().collect()
    }

    /// Surfaces with [`MASK`] in place of unfilled slots.
    pub fn surfaces(&self) -> Vec<&str> {
        self.slots
            .iter()
            .map(|s| s.as_deref().unwrap_or(MASK))
            .collect()
    }
}

impl fmt::Display for MaskedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surfaces().join(" "))
    }
}

/// A deterministic masked-token predictor.
///
/// Implementations must return identical distributions for identical inputs;
/// extraction relies on replaying the embed-time queries.
pub trait Predictor {
    fn vocabulary(&self) -> &Vocabulary;

    /// Canonical candidate distribution for the masked slot `index`.
    fn predict(&self, masked: &MaskedText, index: usize) -> Result<Distribution>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn vocabulary(&self) -> &Vocabulary {
        (**self).vocabulary()
    }

    fn predict(&self, masked: &MaskedText, index: usize) -> Result<Distribution> {
        (**self).predict(masked, index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_text_basics() {
        let mut m = MaskedText::new(vec![Some("i".into()), None, Some(".".into())]);
        assert_eq!(m.to_string(), "i [MASK] .");
        assert_eq!(m.masked_indices(), [1]);
        assert!(m.is_masked(1));
        assert!(!m.is_masked(0));
        assert!(!m.is_masked(9));
        assert!(m.clone().into_tokens().is_none());
        m.set(1, "do");
        assert_eq!(m.mask_count(), 0);
        assert_eq!(m.into_tokens().unwrap(), ["i", "do", "."]);
    }
}
