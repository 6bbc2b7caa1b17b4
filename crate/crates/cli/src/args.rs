use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use textrdh::{EncoderConfig, KeyMode, Strategy};

#[derive(Debug, Parser)]
#[command(name = "textrdh", version, about = "Reversible data hiding in text")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an n-gram predictor on a corpus (one record per line).
    BuildModel {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 1)]
        min_count: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Generate a position key.
    Keygen {
        /// Cover length.
        #[arg(long)]
        n: usize,
        /// Marked-text length.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = KeyMode::Random)]
        mode: KeyMode,
        #[command(flatten)]
        out: Output,
    },
    /// Hide a payload file in a generated text carrying the cover.
    Embed {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        payload: PathBuf,
        #[command(flatten)]
        predictor: PredictorArgs,
        #[command(flatten)]
        coder: CoderArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Recover the payload bytes from a marked text.
    Extract {
        #[arg(long)]
        marked: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        predictor: PredictorArgs,
        #[command(flatten)]
        coder: CoderArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Recover the cover text from a marked text.
    Recover {
        #[arg(long)]
        marked: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Run the bpw / proxy-perplexity grid and write a CSV table.
    Eval {
        /// TOML experiment configuration.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Overrides the corpus named in the configuration.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Also write a JSON report with the trend checks.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

/// Either a built-in model file or an external predictor endpoint.
#[derive(Debug, Args)]
pub struct PredictorArgs {
    /// Model file written by `build-model`.
    #[arg(long, conflicts_with_all = ["endpoint", "vocab"])]
    pub model: Option<PathBuf>,
    /// External predictor: `tcp://host:port` or `exec:<command>`.
    #[arg(long, requires = "vocab")]
    pub endpoint: Option<String>,
    /// Vocabulary for the external predictor, one token per line.
    #[arg(long, requires = "endpoint")]
    pub vocab: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoderArgs {
    #[arg(long)]
    pub strategy: Strategy,
    /// Probability threshold (block, huffman, adg).
    #[arg(long, default_value_t = 0.02)]
    pub tp: f64,
    /// Bits per token (bins).
    #[arg(long, default_value_t = 1)]
    pub bins_bits: u32,
    /// Hash salt as hex (bins; required, may be empty).
    #[arg(long, value_parser = parse_hex, required_if_eq("strategy", "bins"))]
    pub salt: Option<Salt>,
    /// Cap on fixed code width (block, adg).
    #[arg(long, default_value_t = textrdh::coders::DEFAULT_MAX_BLOCK_BITS)]
    pub max_block_bits: u32,
}

impl CoderArgs {
    pub fn config(&self) -> textrdh::Result<EncoderConfig> {
        let config = EncoderConfig {
            strategy: self.strategy,
            t_p: self.tp,
            max_block_bits: self.max_block_bits,
            bins_bits: self.bins_bits,
            salt: self.salt.clone().map(|s| s.0).unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone)]
pub struct Salt(pub Vec<u8>);

fn parse_hex(s: &str) -> Result<Salt, hex::FromHexError> {
    hex::decode(s).map(Salt)
}
