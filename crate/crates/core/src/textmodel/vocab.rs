use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Surface of the bucket every filtered corpus word maps to.
pub const OOV: &str = "<oov>";

/// Dense identifier of a vocabulary entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(pub u32);

impl TokenId {
    pub const OOV: TokenId = TokenId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Ordered token list with reverse lookup.
///
/// Id 0 is always the [`OOV`] bucket; ids are dense and surfaces unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    surfaces: Vec<String>,
    lookup: HashMap<String, TokenId>,
}

impl Vocabulary {
    /// Builds a vocabulary of `<oov>` followed by `words` in the given order.
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut surfaces = vec![OOV.to_string()];
        surfaces.extend(words.into_iter().map(Into::into));
        Self::from_surfaces(surfaces)
    }

    /// Builds a vocabulary from the full id-ordered surface list, which must
    /// start with `<oov>`.
    pub(crate) fn from_surfaces(surfaces: Vec<String>) -> Result<Self> {
        if surfaces.len() < 2 {
            return Err(Error::DegenerateVocabulary {
                size: surfaces.len(),
            });
        }
        if surfaces[0] != OOV {
            return Err(Error::InvalidConfig(format!(
                "vocabulary must start with {OOV}"
            )));
        }
        if surfaces.len() > u32::MAX as usize {
            return Err(Error::InvalidConfig("vocabulary too large".into()));
        }
        let mut lookup = HashMap::with_capacity(surfaces.len());
        for (i, s) in surfaces.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!(
                    "vocabulary entry {s:?} is empty or contains whitespace"
                )));
            }
            if lookup.insert(s.clone(), TokenId(i as u32)).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate vocabulary entry {s:?}"
                )));
            }
        }
        Ok(Vocabulary { surfaces, lookup })
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn id(&self, surface: &str) -> Option<TokenId> {
        self.lookup.get(surface).copied()
    }

    /// Panics if `id` is out of range.
    pub fn surface(&self, id: TokenId) -> &str {
        &self.surfaces[id.index()]
    }

    pub fn get(&self, id: TokenId) -> Option<&str> {
        self.surfaces.get(id.index()).map(String::as_str)
    }

    /// True when `surface` is a real (non-bucket) entry.
    pub fn contains_word(&self, surface: &str) -> bool {
        matches!(self.id(surface), Some(id) if id != TokenId::OOV)
    }

    /// All surfaces in id order, `<oov>` first.
    pub fn surfaces(&self) -> &[String] {
        &self.surfaces
    }

    /// Ids of the tokens that may appear in a marked text (everything but
    /// `<oov>`).
    pub fn word_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        (1..self.surfaces.len() as u32).map(TokenId)
    }
}
