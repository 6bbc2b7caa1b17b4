//! `textrdh` command-line tool.
//!
//! Every failure prints one line `error: <code>: <message>` to stderr and
//! exits with 2 (usage), 3 (capacity), 4 (inconsistent input) or 5 (I/O).
//! On success the only stdout line is the path of the written artifact.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use textrdh::Error;

use args::{Cli, Command};
use commands::OutputExists;

/// A request the tool cannot act on as given.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Usage(pub String);

const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_INCONSISTENT: u8 = 4;
const EXIT_IO: u8 = 5;

fn classify(err: &Error) -> u8 {
    match err {
        Error::InsufficientCapacity { .. } | Error::PayloadTooLong(_) => EXIT_CAPACITY,
        Error::InconsistentMarkedText { .. }
        | Error::TruncatedPayload { .. }
        | Error::KeyOutOfRange { .. }
        | Error::KeyCoverMismatch { .. } => EXIT_INCONSISTENT,
        Error::Io(_)
        | Error::PredictorUnavailable(_)
        | Error::ProtocolViolation(_)
        | Error::CorruptModel(_)
        | Error::UnsupportedModelVersion(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Cause code and exit status for an error chain.
fn cause(err: &anyhow::Error) -> (&'static str, u8) {
    for e in err.chain() {
        if let Some(e) = e.downcast_ref::<Error>() {
            return (e.code(), classify(e));
        }
        if e.is::<OutputExists>() {
            return ("output_exists", EXIT_USAGE);
        }
        if e.is::<Usage>() {
            return ("usage", EXIT_USAGE);
        }
        if e.is::<std::io::Error>() {
            return ("io", EXIT_IO);
        }
    }
    ("error", EXIT_USAGE)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::BuildModel {
            corpus,
            order,
            min_count,
            out,
        } => commands::build(&corpus, order, min_count, &out),
        Command::Keygen {
            n,
            m,
            seed,
            mode,
            out,
        } => commands::keygen(n, m, seed, mode, &out),
        Command::Embed {
            cover,
            key,
            payload,
            predictor,
            coder,
            out,
        } => commands::embed(&cover, &key, &payload, &predictor, &coder, &out),
        Command::Extract {
            marked,
            key,
            predictor,
            coder,
            out,
        } => commands::extract(&marked, &key, &predictor, &coder, &out),
        Command::Recover { marked, key, out } => commands::recover(&marked, &key, &out),
        Command::Eval {
            config,
            model,
            corpus,
            report,
            out,
        } => commands::eval(&config, &model, corpus.as_deref(), report.as_deref(), &out),
    }
}

/// Clap's multi-line parse errors, folded into the one-line format.
fn usage_error(err: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    if matches!(
        err.kind(),
        ErrorKind::DisplayHelp
            | ErrorKind::DisplayVersion
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
    ) {
        err.exit();
    }
    let text = err.to_string();
    let body = text.split("\n\n").next().unwrap_or_default();
    let body = body.trim_start_matches("error: ");
    eprintln!(
        "error: usage: {}",
        body.split_whitespace().collect::<Vec<_>>().join(" ")
    );
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => return usage_error(err),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, status) = cause(&err);
            let message = err
                .chain()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(": ");
            eprintln!("error: {code}: {}", message.replace('\n', " "));
            ExitCode::from(status)
        }
    }
}
