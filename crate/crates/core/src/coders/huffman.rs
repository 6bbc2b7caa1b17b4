//! Canonical Huffman coding over the usable candidates.
//!
//! Code lengths come from the usual bottom-up merge, always combining the two
//! lightest nodes with ties broken by the smallest token id inside each node.
//! Codewords are then assigned canonically: shorter codes first, within one
//! length in (probability desc, id asc) order, counting upward from zero.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{decode_top_only, usable, EncoderConfig};
use crate::bitio::BitStream;
use crate::error::{Error, Result};
use crate::textmodel::{Distribution, Entry, TokenId};

/// Canonical prefix code, one codeword per usable candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanCode {
    /// In canonical assignment order.
    codes: Vec<(TokenId, Vec<bool>)>,
}

impl HuffmanCode {
    /// Builds the code for `entries` (at least two, canonical order).
    pub fn build(entries: &[Entry]) -> Self {
        assert!(entries.len() >= 2, "a Huffman code needs two symbols");
        let lengths = code_lengths(entries);

        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by(|&a, &b| {
            lengths[a]
                .cmp(&lengths[b])
                .then(entries[b].micros.cmp(&entries[a].micros))
                .then(entries[a].token.cmp(&entries[b].token))
        });

        let mut codes = Vec::with_capacity(entries.len());
        let mut code: u128 = 0;
        let mut prev_len = lengths[order[0]];
        for (n, &i) in order.iter().enumerate() {
            let len = lengths[i];
            if n > 0 {
                code = (code + 1) << (len - prev_len);
            }
            prev_len = len;
            let word = (0..len).rev().map(|b| code >> b & 1 == 1).collect();
            codes.push((entries[i].token, word));
        }
        HuffmanCode { codes }
    }

    pub fn codes(&self) -> &[(TokenId, Vec<bool>)] {
        &self.codes
    }

    pub fn codeword(&self, token: TokenId) -> Option<&[bool]> {
        self.codes
            .iter()
            .find(|(t, _)| *t == token)
            .map(|(_, w)| w.as_slice())
    }

    /// No codeword is a prefix of another.
    pub fn is_prefix_free(&self) -> bool {
        self.codes.iter().enumerate().all(|(i, (_, a))| {
            self.codes
                .iter()
                .enumerate()
                .all(|(j, (_, b))| i == j || !b.starts_with(a))
        })
    }

    /// Kraft sum `Σ 2^-len` as an exact fraction `(numerator, 2^max_len)`.
    pub fn kraft_sum(&self) -> (u128, u128) {
        let max_len = self.codes.iter().map(|(_, w)| w.len()).max().unwrap_or(0);
        let num = self
            .codes
            .iter()
            .map(|(_, w)| 1u128 << (max_len - w.len()))
            .sum();
        (num, 1u128 << max_len)
    }

    /// Reads bits from `stream` until they spell a codeword.
    fn read_symbol(&self, stream: &mut BitStream) -> (TokenId, Vec<bool>) {
        let mut bits = Vec::new();
        loop {
            bits.push(stream.read_bit());
            if let Some((t, _)) = self.codes.iter().find(|(_, w)| *w == bits) {
                return (*t, bits);
            }
        }
    }
}

fn code_lengths(entries: &[Entry]) -> Vec<usize> {
    // Node = (mass, smallest token id inside); leaves are 0..n, merges follow.
    let n = entries.len();
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, TokenId, usize)>> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| Reverse((u64::from(e.micros), e.token, i)))
        .collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((m1, id1, a)) = heap.pop().unwrap();
        let Reverse((m2, id2, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((m1 + m2, id1.min(id2), next)));
        next += 1;
    }
    (0..n)
        .map(|leaf| {
            let mut depth = 0;
            let mut node = leaf;
            while parent[node] != usize::MAX {
                node = parent[node];
                depth += 1;
            }
            depth
        })
        .collect()
}

/// The code used for `dist` under `config`, or `None` when at most one
/// candidate is usable (the slot then carries no bits).
pub fn huffman_code(config: &EncoderConfig, dist: &Distribution) -> Option<HuffmanCode> {
    let pool = usable(config, dist);
    (pool.len() >= 2).then(|| HuffmanCode::build(pool))
}

pub(super) fn encode(
    config: &EncoderConfig,
    dist: &Distribution,
    stream: &mut BitStream,
) -> (TokenId, Vec<bool>) {
    match huffman_code(config, dist) {
        Some(code) => code.read_symbol(stream),
        None => (dist.entries()[0].token, Vec::new()),
    }
}

pub(super) fn decode(
    config: &EncoderConfig,
    dist: &Distribution,
    observed: TokenId,
) -> Result<Vec<bool>> {
    match huffman_code(config, dist) {
        Some(code) => code
            .codeword(observed)
            .map(<[bool]>::to_vec)
            .ok_or_else(|| Error::inconsistent("has no Huffman codeword")),
        None => decode_top_only(dist, observed),
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{decode_step, encode_step};
    use super::*;

    fn render(code: &HuffmanCode, v: &crate::textmodel::Vocabulary) -> Vec<(String, String)> {
        code.codes()
            .iter()
            .map(|(t, w)| {
                (
                    v.surface(*t).to_string(),
                    w.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn dyadic_example() {
        let d = dist(&[0.5, 0.25, 0.125, 0.125]);
        let v = vocab(4);
        let cfg = EncoderConfig::huffman(0.0);
        let code = huffman_code(&cfg, &d).unwrap();
        let got = render(&code, &v);
        let want = [("a", "0"), ("b", "10"), ("c", "110"), ("d", "111")];
        assert_eq!(got, want.map(|(a, b)| (a.to_string(), b.to_string())));

        let mut s = BitStream::from_bit_str("1101");
        let step = encode_step(&cfg, &d, &mut s, &v).unwrap();
        assert_eq!(v.surface(step.token), "c");
        assert_eq!(step.bits, [true, true, false]);
        assert_eq!(
            decode_step(&cfg, &d, "c", Some(&v)).unwrap(),
            [true, true, false]
        );
    }

    #[test]
    fn tie_rule_prefers_small_ids() {
        // Four equal masses: merges are {1,2}, {3,4}, then the pair; all codes
        // have length 2 and are assigned in id order.
        let d = dist(&[0.25; 4]);
        let v = vocab(4);
        let code = huffman_code(&EncoderConfig::huffman(0.0), &d).unwrap();
        let got: Vec<String> = render(&code, &v).into_iter().map(|(_, w)| w).collect();
        assert_eq!(got, ["00", "01", "10", "11"]);
    }

    #[test]
    fn prefix_free_and_complete() {
        let d = dist(&[0.4, 0.2, 0.15, 0.1, 0.1, 0.05]);
        let code = huffman_code(&EncoderConfig::huffman(0.0), &d).unwrap();
        assert!(code.is_prefix_free());
        let (num, den) = code.kraft_sum();
        assert_eq!(num, den);
    }

    #[test]
    fn exhausted_stream_pads_with_zeros() {
        let d = dist(&[0.5, 0.25, 0.125, 0.125]);
        let v = vocab(4);
        let mut s = BitStream::from_bit_str("11");
        let step = encode_step(&EncoderConfig::huffman(0.0), &d, &mut s, &v).unwrap();
        assert_eq!(v.surface(step.token), "c");
        assert_eq!(step.padding, 1);
    }

    #[test]
    fn threshold_limits_pool() {
        let d = dist(&[0.5, 0.25, 0.125, 0.125]);
        let v = vocab(4);
        let cfg = EncoderConfig::huffman(0.2);
        assert_eq!(huffman_code(&cfg, &d).unwrap().codes().len(), 2);
        assert!(decode_step(&cfg, &d, "c", Some(&v)).is_err());
    }
}
