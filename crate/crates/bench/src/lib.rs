//! Shared fixtures for the benchmarks.

use textrdh::harness::synthetic_corpus;
use textrdh::{
    build_model, gen_key, init_masked, tokenize, KeyMode, MaskedText, NGramModel, PositionKey,
};

/// A trigram model over a fixed synthetic corpus plus one cover sentence.
pub struct Fixture {
    pub corpus: Vec<String>,
    pub model: NGramModel,
    pub cover: Vec<String>,
    pub key: PositionKey,
}

impl Fixture {
    /// Builds the fixture from roughly `corpus_bytes` of synthetic text.
    pub fn new(corpus_bytes: usize) -> Self {
        let corpus = synthetic_corpus(5, corpus_bytes);
        let model = build_model(&corpus, 3, 1).expect("synthetic corpus builds");
        let cover = tokenize("i know what the police will do .");
        let key = gen_key(cover.len(), cover.len() * 6, 1, KeyMode::Random).expect("valid key");
        Fixture {
            corpus,
            model,
            cover,
            key,
        }
    }

    pub fn masked(&self) -> MaskedText {
        init_masked(&self.cover, &self.key).expect("key matches cover")
    }
}
