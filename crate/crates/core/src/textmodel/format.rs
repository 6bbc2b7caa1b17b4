//! Binary model file.
//!
//! ```text
//! "RDHM"            magic
//! u16               version
//! u8                order
//! u32               vocabulary size, then per entry: u32 byte length + UTF-8
//! table × 2         forward, then backward:
//!   u32             row count, then per row (sorted by context ids ++ token id):
//!   u8              context length L
//!   u32 × L         context ids
//!   u32             token id
//!   u32             count
//! ```
//!
//! All integers are big-endian.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::ngram::{ngram_key, NGram, NGramModel};
use super::vocab::{TokenId, Vocabulary};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"RDHM";
pub const MODEL_VERSION: u16 = 1;

/// Serializes `model` into `out`.
pub fn write_model<W: Write>(model: &NGramModel, mut out: W) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&MODEL_VERSION.to_be_bytes());
    buf.push(model.order() as u8);
    let surfaces = model.vocabulary().surfaces();
    buf.extend_from_slice(&(surfaces.len() as u32).to_be_bytes());
    for s in surfaces {
        buf.extend_from_slice(&(s.len() as u32).to_be_bytes());
        buf.extend_from_slice(s.as_bytes());
    }
    for table in [model.forward_ngrams(), model.backward_ngrams()] {
        buf.extend_from_slice(&(table.len() as u32).to_be_bytes());
        for g in &table {
            buf.push(g.context.len() as u8);
            for id in &g.context {
                buf.extend_from_slice(&id.0.to_be_bytes());
            }
            buf.extend_from_slice(&g.token.0.to_be_bytes());
            buf.extend_from_slice(&g.count.to_be_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn save_model(model: &NGramModel, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_model(model, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<NGramModel> {
    let bytes = fs::read(path)?;
    read_model(&bytes[..])
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::CorruptModel("unexpected end of file".into()))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Parses a model from `input`.
pub fn read_model<R: Read>(mut input: R) -> Result<NGramModel> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut cur = Cursor {
        data: &data,
        pos: 0,
    };

    if cur.take(4).ok() != Some(&MODEL_MAGIC[..]) {
        return Err(Error::CorruptModel("bad magic".into()));
    }
    let version = cur.u16()?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedModelVersion(version));
    }
    let order = usize::from(cur.u8()?);

    let vocab_len = cur.u32()? as usize;
    let mut surfaces = Vec::with_capacity(vocab_len.min(1 << 20));
    for _ in 0..vocab_len {
        let len = cur.u32()? as usize;
        let s = std::str::from_utf8(cur.take(len)?)
            .map_err(|_| Error::CorruptModel("vocabulary entry is not UTF-8".into()))?;
        surfaces.push(s.to_string());
    }
    let vocab = Vocabulary::from_surfaces(surfaces)
        .map_err(|e| Error::CorruptModel(format!("vocabulary: {e}")))?;

    let mut tables = Vec::with_capacity(2);
    for _ in 0..2 {
        let rows = cur.u32()? as usize;
        let mut table: Vec<NGram> = Vec::with_capacity(rows.min(1 << 20));
        for _ in 0..rows {
            let ctx_len = usize::from(cur.u8()?);
            let context = (0..ctx_len)
                .map(|_| cur.u32().map(TokenId))
                .collect::<Result<Vec<_>>>()?;
            let token = TokenId(cur.u32()?);
            let count = cur.u32()?;
            let row = NGram {
                context,
                token,
                count,
            };
            if count == 0 {
                return Err(Error::CorruptModel("zero count row".into()));
            }
            if let Some(prev) = table.last() {
                if ngram_key(prev).cmp(ngram_key(&row)) != std::cmp::Ordering::Less {
                    return Err(Error::CorruptModel("count rows out of order".into()));
                }
            }
            table.push(row);
        }
        tables.push(table);
    }
    if cur.pos != data.len() {
        return Err(Error::CorruptModel("trailing bytes".into()));
    }
    let backward = tables.pop().unwrap();
    let forward = tables.pop().unwrap();
    NGramModel::from_counts(vocab, order, forward, backward).map_err(|e| match e {
        Error::InvalidOrder(o) => Error::CorruptModel(format!("order {o}")),
        other => Error::CorruptModel(other.to_string()),
    })
}
