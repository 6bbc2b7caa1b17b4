//! Payload bits, framing, and prefix reads.
//!
//! Bytes expand MSB-first. A framed payload starts with its body length as a
//! 32-bit big-endian header, so the receiver can discard whatever padding the
//! marked text carried past the end.

use std::fmt;

use crate::error::{Error, Result};

/// Length of the frame header in bits.
pub const HEADER_BITS: usize = 32;

/// A bit sequence with a read cursor.
///
/// Reads past the end are padded with zeros and flag the stream exhausted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitStream {
    bits: Vec<bool>,
    cursor: usize,
    padding: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitStream {
            bits,
            cursor: 0,
            padding: 0,
        }
    }

    /// Parses a string of `0`/`1` characters; anything else is skipped.
    pub fn from_bit_str(s: &str) -> Self {
        Self::from_bits(
            s.chars()
                .filter_map(|c| match c {
                    '0' => Some(false),
                    '1' => Some(true),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.cursor
    }

    /// True once any read has run past the end.
    pub fn is_exhausted(&self) -> bool {
        self.padding > 0
    }

    /// Zero bits handed out beyond the end so far.
    pub fn padding_read(&self) -> usize {
        self.padding
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend_from_slice(&mut self, bits: &[bool]) {
        self.bits.extend_from_slice(bits);
    }

    /// Returns the next `k` bits, advancing the cursor. Any shortfall is
    /// filled with zeros and counted as padding.
    pub fn read_prefix(&mut self, k: usize) -> Vec<bool> {
        let take = k.min(self.remaining());
        let mut out = self.bits[self.cursor..self.cursor + take].to_vec();
        self.cursor += take;
        if take < k {
            self.padding += k - take;
            out.resize(k, false);
        }
        out
    }

    pub fn read_bit(&mut self) -> bool {
        self.read_prefix(1)[0]
    }

    /// Packs the bits MSB-first; a final partial byte is zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.bits
            .chunks(8)
            .map(|chunk| {
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)))
            })
            .collect()
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Expands `data` MSB-first.
pub fn bytes_to_bits(data: &[u8]) -> BitStream {
    BitStream::from_bits(
        data.iter()
            .flat_map(|&byte| (0..8).rev().map(move |i| byte >> i & 1 == 1))
            .collect(),
    )
}

/// Inverse of [`bytes_to_bits`] for whole bytes.
pub fn bits_to_bytes(bits: &BitStream) -> Vec<u8> {
    bits.to_bytes()
}

/// Prepends the 32-bit big-endian body length to `payload`.
pub fn frame(payload: &BitStream) -> Result<BitStream> {
    let len = u32::try_from(payload.len()).map_err(|_| Error::PayloadTooLong(payload.len()))?;
    let mut bits = Vec::with_capacity(HEADER_BITS + payload.len());
    bits.extend((0..HEADER_BITS).rev().map(|i| len >> i & 1 == 1));
    bits.extend_from_slice(payload.bits());
    Ok(BitStream::from_bits(bits))
}

/// Reads the header and returns exactly the body it declares, ignoring any
/// trailing padding.
pub fn unframe(stream: &BitStream) -> Result<BitStream> {
    let bits = stream.bits();
    if bits.len() < HEADER_BITS {
        return Err(Error::TruncatedPayload {
            declared: HEADER_BITS as u64,
            available: bits.len(),
        });
    }
    let declared = bits[..HEADER_BITS]
        .iter()
        .fold(0u64, |acc, &b| acc << 1 | u64::from(b));
    let available = bits.len() - HEADER_BITS;
    if declared > available as u64 {
        return Err(Error::TruncatedPayload {
            declared,
            available,
        });
    }
    Ok(BitStream::from_bits(
        bits[HEADER_BITS..HEADER_BITS + declared as usize].to_vec(),
    ))
}
