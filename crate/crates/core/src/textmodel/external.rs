//! Adapter for predictors living in another process.
//!
//! One JSON object per line in each direction:
//!
//! ```text
//! → {"tokens": ["i", "[MASK]", "do"], "mask_index": 1, "top_k": 64}
//! ← {"candidates": [["know", 0.1234], ["have", 0.05]]}
//! ```
//!
//! Candidate order is irrelevant; the response is canonicalized locally after
//! dropping tokens the local vocabulary does not know.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::distribution::{canonicalize, Distribution};
use super::vocab::{TokenId, Vocabulary};
use super::{MaskedText, Predictor};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct Request<'a> {
    tokens: Vec<&'a str>,
    mask_index: usize,
    top_k: usize,
}

#[derive(Deserialize)]
struct Response {
    candidates: Vec<(String, f64)>,
}

struct Channel {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    child: Option<Child>,
}

pub struct ExternalPredictor {
    vocab: Vocabulary,
    top_k: usize,
    channel: Mutex<Channel>,
}

fn unavailable(e: impl std::fmt::Display) -> Error {
    Error::PredictorUnavailable(e.to_string())
}

impl ExternalPredictor {
    /// Wraps an already-open byte channel.
    pub fn from_streams<R, W>(reader: R, writer: W, vocab: Vocabulary, top_k: usize) -> Self
    where
        R: BufRead + Send + 'static,
        W: Write + Send + 'static,
    {
        ExternalPredictor {
            vocab,
            top_k,
            channel: Mutex::new(Channel {
                reader: Box::new(reader),
                writer: Box::new(writer),
                child: None,
            }),
        }
    }

    /// Opens `endpoint`, either `tcp://host:port` or `exec:<shell command>`
    /// (the command's standard streams carry the protocol).
    pub fn connect(endpoint: &str, vocab: Vocabulary, top_k: usize) -> Result<Self> {
        if let Some(addr) = endpoint.strip_prefix("tcp://") {
            let stream = TcpStream::connect(addr).map_err(unavailable)?;
            let reader = BufReader::new(stream.try_clone().map_err(unavailable)?);
            Ok(Self::from_streams(reader, stream, vocab, top_k))
        } else if let Some(cmd) = endpoint.strip_prefix("exec:") {
            let mut child = Command::new("sh")
                .arg("-c")
                .arg(cmd)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()
                .map_err(unavailable)?;
            let stdin = child.stdin.take().ok_or_else(|| unavailable("no stdin"))?;
            let stdout = child
                .stdout
                .take()
                .ok_or_else(|| unavailable("no stdout"))?;
            let mut p = Self::from_streams(BufReader::new(stdout), stdin, vocab, top_k);
            p.channel.get_mut().unwrap().child = Some(child);
            Ok(p)
        } else {
            Err(Error::InvalidConfig(format!(
                "endpoint {endpoint:?} must start with tcp:// or exec:"
            )))
        }
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    /// Sends one request for slot `index` and canonicalizes the answer.
    pub fn query(&self, masked: &MaskedText, index: usize) -> Result<Distribution> {
        if !masked.is_masked(index) {
            return Err(Error::NotMaskedSlot { index });
        }
        let request = Request {
            tokens: masked.surfaces(),
            mask_index: index,
            top_k: self.top_k,
        };
        let mut line = serde_json::to_string(&request).expect("request serializes");
        line.push('\n');

        let mut channel = self.channel.lock().unwrap_or_else(|e| e.into_inner());
        channel
            .writer
            .write_all(line.as_bytes())
            .map_err(unavailable)?;
        channel.writer.flush().map_err(unavailable)?;
        let mut reply = String::new();
        let n = channel.reader.read_line(&mut reply).map_err(unavailable)?;
        drop(channel);
        if n == 0 {
            return Err(unavailable("connection closed"));
        }
        self.parse_reply(&reply)
    }

    fn parse_reply(&self, reply: &str) -> Result<Distribution> {
        let response: Response = serde_json::from_str(reply.trim_end())
            .map_err(|e| Error::ProtocolViolation(e.to_string()))?;
        let mut raw = Vec::with_capacity(response.candidates.len());
        for (surface, p) in response.candidates {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProtocolViolation(format!(
                    "probability {p} for {surface:?} outside [0, 1]"
                )));
            }
            match self.vocab.id(&surface) {
                Some(id) if id != TokenId::OOV => raw.push((id, p)),
                _ => {}
            }
        }
        canonicalize(&raw, self.top_k)
    }
}

impl Predictor for ExternalPredictor {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn predict(&self, masked: &MaskedText, index: usize) -> Result<Distribution> {
        self.query(masked, index)
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        let channel = self.channel.get_mut().unwrap_or_else(|e| e.into_inner());
        if let Some(child) = channel.child.as_mut() {
            // Closing stdin lets a well-behaved predictor exit on its own.
            channel.writer = Box::new(std::io::sink());
            let _ = child.wait();
        }
    }
}
