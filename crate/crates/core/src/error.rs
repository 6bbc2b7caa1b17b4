use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The `Display` text of each variant starts with a stable phrase so callers
/// (and the CLI) can match on it; [`Error::code`] gives a short slug for
/// machine consumption.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("degenerate vocabulary: {size} token(s) after frequency filtering")]
    DegenerateVocabulary { size: usize },
    #[error("invalid model order {0}: must be between 2 and 255")]
    InvalidOrder(usize),
    #[error("not a masked slot: index {index}")]
    NotMaskedSlot { index: usize },
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("predictor unavailable: {0}")]
    PredictorUnavailable(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("unsupported model version {0}")]
    UnsupportedModelVersion(u16),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("truncated payload: header declares {declared} bits, {available} available")]
    TruncatedPayload { declared: u64, available: usize },
    #[error("payload too long to frame: {0} bits")]
    PayloadTooLong(usize),
    #[error("uncoverable subset: increase vocabulary or reduce r (subset {subset} of {subsets} is empty)")]
    UncoverableSubset { subset: usize, subsets: usize },
    #[error("inconsistent marked text{}: {reason}", at_slot(position))]
    InconsistentMarkedText {
        /// 1-based slot in the marked text, when known.
        position: Option<usize>,
        reason: String,
    },
    #[error("cover longer than marked text: n = {n}, m = {m}")]
    CoverLongerThanMarked { n: usize, m: usize },
    #[error("key/cover length mismatch: key has {key} positions, cover has {cover} tokens")]
    KeyCoverMismatch { key: usize, cover: usize },
    #[error("insufficient capacity: need {need}, have {have}")]
    InsufficientCapacity { need: usize, have: usize },
    #[error("key out of range: position {position} exceeds marked length {len}")]
    KeyOutOfRange { position: usize, len: usize },
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("insufficient corpus: {available} usable cover windows, {required} required")]
    InsufficientCorpus { available: usize, required: usize },
    #[error("unknown token {0:?}: not in the model vocabulary")]
    UnknownToken(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short, stable identifier for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyCorpus => "empty_corpus",
            Error::DegenerateVocabulary { .. } => "degenerate_vocabulary",
            Error::InvalidOrder(_) => "invalid_order",
            Error::NotMaskedSlot { .. } => "not_masked_slot",
            Error::EmptyDistribution => "empty_distribution",
            Error::PredictorUnavailable(_) => "predictor_unavailable",
            Error::ProtocolViolation(_) => "protocol_violation",
            Error::UnsupportedModelVersion(_) => "unsupported_model_version",
            Error::CorruptModel(_) => "corrupt_model",
            Error::TruncatedPayload { .. } => "truncated_payload",
            Error::PayloadTooLong(_) => "payload_too_long",
            Error::UncoverableSubset { .. } => "uncoverable_subset",
            Error::InconsistentMarkedText { .. } => "inconsistent_marked_text",
            Error::CoverLongerThanMarked { .. } => "cover_longer_than_marked",
            Error::KeyCoverMismatch { .. } => "key_cover_mismatch",
            Error::InsufficientCapacity { .. } => "insufficient_capacity",
            Error::KeyOutOfRange { .. } => "key_out_of_range",
            Error::InvalidKey(_) => "invalid_key",
            Error::InsufficientCorpus { .. } => "insufficient_corpus",
            Error::UnknownToken(_) => "unknown_token",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn inconsistent(reason: impl Into<String>) -> Self {
        Error::InconsistentMarkedText {
            position: None,
            reason: reason.into(),
        }
    }

    /// Attaches a 1-based slot position to an inconsistency error.
    pub(crate) fn at_position(self, slot: usize) -> Self {
        match self {
            Error::InconsistentMarkedText { reason, .. } => Error::InconsistentMarkedText {
                position: Some(slot),
                reason,
            },
            other => other,
        }
    }
}

fn at_slot(position: &Option<usize>) -> String {
    position
        .map(|p| format!(" at position {p}"))
        .unwrap_or_default()
}
