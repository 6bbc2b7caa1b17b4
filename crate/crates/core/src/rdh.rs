//! The reversible hiding protocol.
//!
//! * [`init_masked`] spreads the cover over `m` slots per the key and masks
//!   the rest.
//! * [`fill`] / [`embed`] visit slots left to right, asking the predictor
//!   about each masked slot given everything filled so far, and let the coder
//!   pick a token that carries the next payload bits.
//! * [`extract`] rebuilds the same sequence of partially filled texts from
//!   the marked text alone, so every predictor query sees exactly the context
//!   it saw while embedding.
//! * [`reconstruct`] reads the cover back off the key positions.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitio::{bits_to_bytes, bytes_to_bits, frame, unframe, BitStream};
use crate::coders::{decode_step, encode_step, validate_bins_partition, EncoderConfig, Strategy};
use crate::error::{Error, Result};
use crate::textmodel::{Distribution, MaskedText, Predictor};

/// Generated token sequence carrying cover and payload.
pub type MarkedText = Vec<String>;

/// Strictly increasing 1-based slots that hold the cover tokens, and the
/// length `m` of the marked text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KeyFile", into = "KeyFile")]
pub struct PositionKey {
    positions: Vec<usize>,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct KeyFile {
    n: usize,
    m: usize,
    positions: Vec<usize>,
}

impl TryFrom<KeyFile> for PositionKey {
    type Error = Error;

    fn try_from(f: KeyFile) -> Result<Self> {
        if f.n != f.positions.len() {
            return Err(Error::InvalidKey(format!(
                "n = {} but {} positions listed",
                f.n,
                f.positions.len()
            )));
        }
        PositionKey::new(f.positions, f.m)
    }
}

impl From<PositionKey> for KeyFile {
    fn from(k: PositionKey) -> Self {
        KeyFile {
            n: k.positions.len(),
            m: k.m,
            positions: k.positions,
        }
    }
}

impl PositionKey {
    pub fn new(positions: Vec<usize>, m: usize) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidKey("no positions".into()));
        }
        if positions[0] < 1 {
            return Err(Error::InvalidKey("positions are 1-based".into()));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidKey(
                "positions must be strictly increasing".into(),
            ));
        }
        let last = *positions.last().unwrap();
        if last > m {
            return Err(Error::KeyOutOfRange {
                position: last,
                len: m,
            });
        }
        Ok(PositionKey { positions, m })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Cover length.
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Marked-text length.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether the 1-based `slot` holds a cover token.
    pub fn contains(&self, slot: usize) -> bool {
        self.positions.binary_search(&slot).is_ok()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("key serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidKey(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyMode {
    /// `p_j = ceil(j * m / n)`.
    Even,
    /// `n` distinct slots drawn uniformly by a seeded generator.
    Random,
}

impl FromStr for KeyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(KeyMode::Even),
            "random" => Ok(KeyMode::Random),
            other => Err(Error::InvalidConfig(format!("unknown key mode {other:?}"))),
        }
    }
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyMode::Even => "even",
            KeyMode::Random => "random",
        })
    }
}

/// Deterministic key for a cover of `n` tokens in a text of `m` slots.
pub fn gen_key(n: usize, m: usize, seed: u64, mode: KeyMode) -> Result<PositionKey> {
    if n == 0 {
        return Err(Error::InvalidKey(
            "cover must have at least one token".into(),
        ));
    }
    if n > m {
        return Err(Error::CoverLongerThanMarked { n, m });
    }
    let positions = match mode {
        KeyMode::Even => {
            let mut out: Vec<usize> = Vec::with_capacity(n);
            for j in 1..=n {
                let p = (j * m).div_ceil(n);
                let p = out.last().map_or(p, |&prev| p.max(prev + 1));
                out.push(p);
            }
            out
        }
        KeyMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = rand::seq::index::sample(&mut rng, m, n).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|p| p + 1).collect()
        }
    };
    PositionKey::new(positions, m)
}

/// Places `cover[j]` at slot `p_j` and masks every other slot.
pub fn init_masked<S: AsRef<str>>(cover: &[S], key: &PositionKey) -> Result<MaskedText> {
    if cover.len() != key.n() {
        return Err(Error::KeyCoverMismatch {
            key: key.n(),
            cover: cover.len(),
        });
    }
    let mut slots = vec![None; key.m()];
    for (tok, &p) in cover.iter().zip(key.positions()) {
        slots[p - 1] = Some(tok.as_ref().to_string());
    }
    Ok(MaskedText::new(slots))
}

/// Reads the cover off the key positions.
pub fn reconstruct<S: AsRef<str>>(marked: &[S], key: &PositionKey) -> Result<Vec<String>> {
    let last = *key.positions().last().unwrap();
    if last > marked.len() {
        return Err(Error::KeyOutOfRange {
            position: last,
            len: marked.len(),
        });
    }
    Ok(key
        .positions()
        .iter()
        .map(|&p| marked[p - 1].as_ref().to_string())
        .collect())
}

/// One filled slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotLog {
    /// 1-based slot.
    pub position: usize,
    pub token: String,
    /// Bits the token carries, padding included.
    pub bits: Vec<bool>,
    pub padding: usize,
    pub degraded: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EmbedReport {
    /// Bits the marked text carries, padding included.
    pub capacity: usize,
    /// Payload (stream) bits carried, padding excluded.
    pub bits_embedded: usize,
    /// The stream ran out before the last masked slot was filled.
    pub exhausted: bool,
    /// Bins slots that fell back to a token outside the candidate list.
    pub degraded_slots: usize,
    pub slots: Vec<SlotLog>,
}

impl EmbedReport {
    pub fn padding_bits(&self) -> usize {
        self.capacity - self.bits_embedded
    }
}

/// Fills every masked slot left to right, drawing bits from `stream`.
///
/// Runs to the end of the text whatever the stream length: once the stream
/// is exhausted the remaining slots carry zero padding.
pub fn fill<P: Predictor + ?Sized>(
    masked: &MaskedText,
    predictor: &P,
    config: &EncoderConfig,
    stream: &mut BitStream,
) -> Result<(MarkedText, EmbedReport)> {
    config.validate()?;
    let vocab = predictor.vocabulary();
    if config.strategy == Strategy::Bins {
        validate_bins_partition(vocab, config.bins_bits, &config.salt)?;
    }
    let mut state = masked.clone();
    let mut report = EmbedReport::default();
    for i in 0..state.len() {
        if !state.is_masked(i) {
            continue;
        }
        let dist = predictor.predict(&state, i)?;
        let step = encode_step(config, &dist, stream, vocab)?;
        let token = vocab.surface(step.token).to_string();
        state.set(i, token.clone());
        report.capacity += step.bits.len();
        report.bits_embedded += step.bits.len() - step.padding;
        report.degraded_slots += usize::from(step.degraded);
        report.slots.push(SlotLog {
            position: i + 1,
            token,
            bits: step.bits,
            padding: step.padding,
            degraded: step.degraded,
        });
    }
    report.exhausted = stream.is_exhausted();
    let marked = state.into_tokens().expect("every slot filled");
    Ok((marked, report))
}

/// Embeds an already framed `payload`, failing if the text cannot carry all
/// of it.
///
/// Bins capacity is known up front (`r` bits per masked slot). For the
/// distribution-driven strategies it depends on the tokens actually chosen,
/// so the embedding run itself is the capacity check.
pub fn embed<P: Predictor + ?Sized>(
    masked: &MaskedText,
    predictor: &P,
    config: &EncoderConfig,
    payload: &BitStream,
) -> Result<(MarkedText, EmbedReport)> {
    if config.strategy == Strategy::Bins {
        let have = masked.mask_count() * config.bins_bits as usize;
        if payload.len() > have {
            return Err(Error::InsufficientCapacity {
                need: payload.len(),
                have,
            });
        }
    }
    let mut stream = payload.clone();
    let (marked, report) = fill(masked, predictor, config, &mut stream)?;
    if stream.remaining() > 0 {
        return Err(Error::InsufficientCapacity {
            need: payload.len(),
            have: report.capacity,
        });
    }
    Ok((marked, report))
}

/// Recovers every bit the marked text carries (frame header, body and
/// padding), replaying the embedding left to right.
///
/// `predictor` must be the embed-time predictor for Block, Huffman and ADG;
/// Bins ignores it.
pub fn extract_bits<S: AsRef<str>>(
    marked: &[S],
    key: &PositionKey,
    predictor: Option<&dyn Predictor>,
    config: &EncoderConfig,
) -> Result<BitStream> {
    config.validate()?;
    if marked.len() != key.m() {
        return Err(Error::inconsistent(format!(
            "marked text has {} tokens, key expects {}",
            marked.len(),
            key.m()
        )));
    }
    let cover = reconstruct(marked, key)?;
    let mut bits = BitStream::new();

    if config.strategy == Strategy::Bins {
        let none = Distribution::default();
        for (i, tok) in marked.iter().enumerate() {
            if !key.contains(i + 1) {
                bits.extend_from_slice(&decode_step(config, &none, tok.as_ref(), None)?);
            }
        }
        return Ok(bits);
    }

    let predictor = predictor.ok_or_else(|| {
        Error::InvalidConfig(format!(
            "{} extraction needs the embed-time model",
            config.strategy
        ))
    })?;
    let vocab = predictor.vocabulary();
    let mut state = init_masked(&cover, key)?;
    for (i, tok) in marked.iter().enumerate() {
        if key.contains(i + 1) {
            continue;
        }
        let dist = predictor.predict(&state, i)?;
        let carried = decode_step(config, &dist, tok.as_ref(), Some(vocab))
            .map_err(|e| e.at_position(i + 1))?;
        bits.extend_from_slice(&carried);
        state.set(i, tok.as_ref());
    }
    Ok(bits)
}

/// Recovers the framed payload body.
pub fn extract<S: AsRef<str>>(
    marked: &[S],
    key: &PositionKey,
    predictor: Option<&dyn Predictor>,
    config: &EncoderConfig,
) -> Result<BitStream> {
    unframe(&extract_bits(marked, key, predictor, config)?)
}

/// Byte-level convenience: frames `payload`, checks the cover against the
/// predictor's vocabulary, and embeds.
pub fn hide<S: AsRef<str>, P: Predictor + ?Sized>(
    cover: &[S],
    key: &PositionKey,
    predictor: &P,
    config: &EncoderConfig,
    payload: &[u8],
) -> Result<(MarkedText, EmbedReport)> {
    let vocab = predictor.vocabulary();
    if let Some(unknown) = cover.iter().find(|t| !vocab.contains_word(t.as_ref())) {
        return Err(Error::UnknownToken(unknown.as_ref().to_string()));
    }
    let masked = init_masked(cover, key)?;
    let framed = frame(&bytes_to_bits(payload))?;
    embed(&masked, predictor, config, &framed)
}

/// Byte-level inverse of [`hide`].
pub fn reveal<S: AsRef<str>>(
    marked: &[S],
    key: &PositionKey,
    predictor: Option<&dyn Predictor>,
    config: &EncoderConfig,
) -> Result<Vec<u8>> {
    Ok(bits_to_bytes(&extract(marked, key, predictor, config)?))
}
