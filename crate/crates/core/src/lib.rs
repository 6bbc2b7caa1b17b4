//! Reversible data hiding in text.
//!
//! A cover text is spread over the slots of a longer text by a secret
//! position key; every other slot is filled, left to right, with a token
//! chosen by a masked-token predictor so that the choice encodes payload
//! bits. The receiver reads the cover back off the key positions and
//! recovers the payload by replaying the same choices.
//!
//! ```
//! use textrdh::{build_model, EncoderConfig, PositionKey, hide, reveal, reconstruct};
//!
//! let corpus = ["the cat sat on the mat .", "a dog sat on a log ."];
//! let model = build_model(&corpus, 2, 1).unwrap();
//! let cover: Vec<String> = ["the", "cat", "."].iter().map(|s| s.to_string()).collect();
//! let key = PositionKey::new(vec![1, 30, 60], 60).unwrap();
//! let config = EncoderConfig::bins(1, *b"salt");
//!
//! let (marked, _report) = hide(&cover, &key, &model, &config, b"hi").unwrap();
//! assert_eq!(reveal(&marked, &key, None, &config).unwrap(), b"hi");
//! assert_eq!(reconstruct(&marked, &key).unwrap(), cover);
//! ```

pub mod bitio;
pub mod coders;
mod error;
pub mod harness;
pub mod rdh;
pub mod textmodel;

pub use bitio::{bits_to_bytes, bytes_to_bits, frame, unframe, BitStream};
pub use coders::{
    decode_step, encode_step, validate_bins_partition, EncoderConfig, StepResult, Strategy,
};
pub use error::{Error, Result};
pub use rdh::{
    embed, extract, extract_bits, fill, gen_key, hide, init_masked, reconstruct, reveal,
    EmbedReport, KeyMode, MarkedText, PositionKey, SlotLog,
};
pub use textmodel::{
    build_model, canonicalize, load_model, save_model, tokenize, Distribution, ExternalPredictor,
    MaskedText, NGramModel, Predictor, TokenId, Vocabulary,
};
