//! Bidirectional n-gram masked-token predictor.
//!
//! Forward counts condition a token on the tokens to its left, backward
//! counts on the tokens to its right (the backward table is the forward
//! table of the reversed corpus). A masked slot is scored by the geometric
//! mean of the two add-one smoothed conditionals.

use std::collections::HashMap;

use super::distribution::{canonicalize, Distribution, DEFAULT_TOP_K};
use super::tokenize::tokenize;
use super::vocab::{TokenId, Vocabulary, OOV};
use super::{MaskedText, Predictor};
use crate::error::{Error, Result};

/// One count-table row: `count` occurrences of `token` after `context`.
///
/// Contexts are stored nearest-last, in the reading direction of the table
/// (left-to-right for forward, right-to-left for backward).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NGram {
    pub context: Vec<TokenId>,
    pub token: TokenId,
    pub count: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Followers {
    /// Sum of counts over real (non-`<oov>`) tokens.
    total: u64,
    /// Sorted by token id.
    counts: Vec<(TokenId, u32)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct CountTable {
    contexts: HashMap<Vec<TokenId>, Followers>,
}

impl CountTable {
    fn from_ngrams(ngrams: impl IntoIterator<Item = NGram>) -> Self {
        let mut merged: HashMap<Vec<TokenId>, HashMap<TokenId, u32>> = HashMap::new();
        for g in ngrams {
            let slot = merged
                .entry(g.context)
                .or_default()
                .entry(g.token)
                .or_insert(0);
            *slot = slot.saturating_add(g.count);
        }
        let contexts = merged
            .into_iter()
            .map(|(ctx, followers)| {
                let mut counts: Vec<(TokenId, u32)> =
                    followers.into_iter().filter(|&(_, c)| c > 0).collect();
                counts.sort_unstable();
                let total = counts
                    .iter()
                    .filter(|(t, _)| *t != TokenId::OOV)
                    .map(|&(_, c)| u64::from(c))
                    .sum();
                (ctx, Followers { total, counts })
            })
            .filter(|(_, f)| !f.counts.is_empty())
            .collect();
        CountTable { contexts }
    }

    fn ngrams(&self) -> Vec<NGram> {
        let mut out: Vec<NGram> = self
            .contexts
            .iter()
            .flat_map(|(ctx, f)| {
                f.counts.iter().map(move |&(token, count)| NGram {
                    context: ctx.clone(),
                    token,
                    count,
                })
            })
            .collect();
        out.sort_by(|a, b| ngram_key(a).cmp(ngram_key(b)));
        out
    }

    fn count(&self, context: &[TokenId], token: TokenId) -> u32 {
        self.contexts
            .get(context)
            .and_then(|f| {
                f.counts
                    .binary_search_by_key(&token, |&(t, _)| t)
                    .ok()
                    .map(|i| f.counts[i].1)
            })
            .unwrap_or(0)
    }

    fn observed(&self, context: &[TokenId]) -> Option<&Followers> {
        self.contexts.get(context).filter(|f| f.total > 0)
    }
}

/// Lexicographic key of a row: context ids followed by the token id.
pub(crate) fn ngram_key(g: &NGram) -> impl Iterator<Item = TokenId> + Clone + '_ {
    g.context.iter().copied().chain(std::iter::once(g.token))
}

/// Immutable bidirectional n-gram model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramModel {
    vocab: Vocabulary,
    order: usize,
    forward: CountTable,
    backward: CountTable,
}

fn check_order(order: usize) -> Result<()> {
    if (2..=255).contains(&order) {
        Ok(())
    } else {
        Err(Error::InvalidOrder(order))
    }
}

/// Counts n-grams of every length `1..=order` over the tokenized `corpus`
/// records. Words seen fewer than `min_count` times fold into `<oov>`.
///
/// Vocabulary ids follow `<oov>` in order of descending frequency, ties by
/// surface. N-grams never cross record boundaries.
pub fn build_model<S: AsRef<str>>(
    corpus: &[S],
    order: usize,
    min_count: u32,
) -> Result<NGramModel> {
    check_order(order)?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let records: Vec<Vec<String>> = corpus.iter().map(|r| tokenize(r.as_ref())).collect();

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for tok in records.iter().flatten() {
        *freq.entry(tok.as_str()).or_insert(0) += 1;
    }
    let min_count = u64::from(min_count.max(1));
    let mut words: Vec<(&str, u64)> = freq
        .into_iter()
        .filter(|&(w, c)| c >= min_count && w != OOV)
        .collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    if words.is_empty() {
        return Err(Error::DegenerateVocabulary { size: 1 });
    }
    let vocab = Vocabulary::new(words.iter().map(|(w, _)| w.to_string()))?;

    let mut forward = Vec::new();
    let mut backward = Vec::new();
    for record in &records {
        let ids: Vec<TokenId> = record
            .iter()
            .map(|t| vocab.id(t).unwrap_or(TokenId::OOV))
            .collect();
        count_ngrams(&ids, order, &mut forward);
        let reversed: Vec<TokenId> = ids.iter().rev().copied().collect();
        count_ngrams(&reversed, order, &mut backward);
    }
    Ok(NGramModel {
        vocab,
        order,
        forward: CountTable::from_ngrams(forward),
        backward: CountTable::from_ngrams(backward),
    })
}

fn count_ngrams(ids: &[TokenId], order: usize, out: &mut Vec<NGram>) {
    for j in 0..ids.len() {
        for len in 0..order.min(j + 1) {
            out.push(NGram {
                context: ids[j - len..j].to_vec(),
                token: ids[j],
                count: 1,
            });
        }
    }
}

impl NGramModel {
    /// Assembles a model from explicit count rows. Duplicate rows are summed.
    pub fn from_counts(
        vocab: Vocabulary,
        order: usize,
        forward: Vec<NGram>,
        backward: Vec<NGram>,
    ) -> Result<Self> {
        check_order(order)?;
        for g in forward.iter().chain(&backward) {
            if g.context.len() >= order {
                return Err(Error::InvalidConfig(format!(
                    "context of length {} exceeds order {order}",
                    g.context.len()
                )));
            }
            if ngram_key(g).any(|t| t.index() >= vocab.len()) {
                return Err(Error::InvalidConfig(
                    "token id out of vocabulary range".into(),
                ));
            }
        }
        Ok(NGramModel {
            vocab,
            order,
            forward: CountTable::from_ngrams(forward),
            backward: CountTable::from_ngrams(backward),
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of tokens counted (unigram total, `<oov>` included).
    pub fn total_tokens(&self) -> u64 {
        self.forward
            .contexts
            .get(&[][..])
            .map(|f| f.counts.iter().map(|&(_, c)| u64::from(c)).sum())
            .unwrap_or(0)
    }

    /// Forward rows in lexicographic (context, token) order.
    pub fn forward_ngrams(&self) -> Vec<NGram> {
        self.forward.ngrams()
    }

    /// Backward rows in lexicographic (context, token) order.
    pub fn backward_ngrams(&self) -> Vec<NGram> {
        self.backward.ngrams()
    }

    pub fn forward_count(&self, context: &[TokenId], token: TokenId) -> u32 {
        self.forward.count(context, token)
    }

    pub fn backward_count(&self, context: &[TokenId], token: TokenId) -> u32 {
        self.backward.count(context, token)
    }

    /// Number of tokens a slot can be filled with (`<oov>` excluded).
    fn support(&self) -> usize {
        self.vocab.len() - 1
    }

    fn id_of(&self, surface: &str) -> TokenId {
        self.vocab.id(surface).unwrap_or(TokenId::OOV)
    }

    /// Longest observed suffix of `context` (nearest-last), at least one token.
    fn side<'a>(&'a self, table: &'a CountTable, context: &[TokenId]) -> Option<&'a Followers> {
        (1..=context.len())
            .rev()
            .find_map(|len| table.observed(&context[context.len() - len..]))
    }

    fn smoothed(&self, f: &Followers) -> Vec<f64> {
        let denom = (f.total + self.support() as u64) as f64;
        let mut out = vec![1.0 / denom; self.vocab.len()];
        out[0] = 0.0;
        for &(t, c) in &f.counts {
            if t != TokenId::OOV {
                out[t.index()] = (f64::from(c) + 1.0) / denom;
            }
        }
        out
    }

    /// Full normalized distribution for the masked slot `index`, indexed by
    /// token id (`<oov>` gets zero).
    ///
    /// Each side conditions on up to `order - 1` adjacent filled tokens; a
    /// masked slot or the text boundary cuts the context short, and unseen
    /// contexts back off to their longest observed suffix. A side with no
    /// usable context drops out of the fusion; with neither side available
    /// the smoothed unigram distribution is returned.
    pub fn probabilities(&self, masked: &MaskedText, index: usize) -> Result<Vec<f64>> {
        if !masked.is_masked(index) {
            return Err(Error::NotMaskedSlot { index });
        }
        let width = self.order - 1;
        let slots = masked.slots();

        let mut left: Vec<TokenId> = slots[..index]
            .iter()
            .rev()
            .map_while(|s| s.as_deref())
            .take(width)
            .map(|s| self.id_of(s))
            .collect();
        left.reverse();
        let mut right: Vec<TokenId> = slots[index + 1..]
            .iter()
            .map_while(|s| s.as_deref())
            .take(width)
            .map(|s| self.id_of(s))
            .collect();
        right.reverse();

        let fwd = self.side(&self.forward, &left);
        let bwd = self.side(&self.backward, &right);
        let mut scores = match (fwd, bwd) {
            (Some(f), Some(b)) => {
                let mut s = self.smoothed(f);
                for (x, y) in s.iter_mut().zip(self.smoothed(b)) {
                    *x = (*x * y).sqrt();
                }
                s
            }
            (Some(f), None) | (None, Some(f)) => self.smoothed(f),
            (None, None) => match self.forward.observed(&[]) {
                Some(u) => self.smoothed(u),
                None => {
                    let mut s = vec![1.0; self.vocab.len()];
                    s[0] = 0.0;
                    s
                }
            },
        };
        let sum: f64 = scores.iter().sum();
        for s in &mut scores {
            *s /= sum;
        }
        Ok(scores)
    }

    /// Canonical distribution for the masked slot `index`, truncated to `top_k`.
    pub fn predict_top_k(
        &self,
        masked: &MaskedText,
        index: usize,
        top_k: usize,
    ) -> Result<Distribution> {
        let probs = self.probabilities(masked, index)?;
        let raw: Vec<(TokenId, f64)> = probs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &p)| (TokenId(i as u32), p))
            .collect();
        canonicalize(&raw, top_k)
    }
}

impl Predictor for NGramModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn predict(&self, masked: &MaskedText, index: usize) -> Result<Distribution> {
        self.predict_top_k(masked, index, DEFAULT_TOP_K)
    }
}
