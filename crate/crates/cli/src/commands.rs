use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use textrdh::harness::{metrics_table, run_grid, ExperimentConfig, GridReport};
use textrdh::textmodel::DEFAULT_TOP_K;
use textrdh::{
    build_model, gen_key, hide, load_model, reconstruct, reveal, save_model, tokenize,
    ExternalPredictor, KeyMode, NGramModel, PositionKey, Predictor, Vocabulary,
};

use crate::args::{CoderArgs, Output, PredictorArgs};

/// Raised when an output file exists and `--force` was not given.
#[derive(Debug, thiserror::Error)]
#[error("output exists: {0} (pass --force to overwrite)")]
pub struct OutputExists(pub PathBuf);

enum LoadedPredictor {
    Model(NGramModel),
    External(ExternalPredictor),
}

impl LoadedPredictor {
    fn get(&self) -> &dyn Predictor {
        match self {
            LoadedPredictor::Model(m) => m,
            LoadedPredictor::External(e) => e,
        }
    }
}

fn load_predictor(args: &PredictorArgs) -> Result<Option<LoadedPredictor>> {
    if let Some(path) = &args.model {
        let model =
            load_model(path).with_context(|| format!("loading model {}", path.display()))?;
        return Ok(Some(LoadedPredictor::Model(model)));
    }
    if let (Some(endpoint), Some(vocab_path)) = (&args.endpoint, &args.vocab) {
        let text = read_text(vocab_path)?;
        let vocab = Vocabulary::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))?;
        let predictor = ExternalPredictor::connect(endpoint, vocab, DEFAULT_TOP_K)?;
        return Ok(Some(LoadedPredictor::External(predictor)));
    }
    Ok(None)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_key(path: &Path) -> Result<PositionKey> {
    Ok(PositionKey::from_json(&read_text(path)?)?)
}

/// Writes `contents` to the requested output and prints its path.
fn write_output(out: &Output, contents: impl AsRef<[u8]>) -> Result<()> {
    write_file(&out.out, out.force, contents)?;
    println!("{}", out.out.display());
    Ok(())
}

fn write_file(path: &Path, force: bool, contents: impl AsRef<[u8]>) -> Result<()> {
    if !force && path.exists() {
        return Err(OutputExists(path.to_path_buf()).into());
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn check_writable(path: &Path, force: bool) -> Result<()> {
    if !force && path.exists() {
        return Err(OutputExists(path.to_path_buf()).into());
    }
    Ok(())
}

fn corpus_records(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect())
}

pub fn build(corpus: &Path, order: usize, min_count: u32, out: &Output) -> Result<()> {
    check_writable(&out.out, out.force)?;
    let model = build_model(&corpus_records(corpus)?, order, min_count)?;
    save_model(&model, &out.out)?;
    eprintln!(
        "model: order {}, {} tokens, vocabulary {}",
        model.order(),
        model.total_tokens(),
        model.vocabulary().len()
    );
    println!("{}", out.out.display());
    Ok(())
}

pub fn keygen(n: usize, m: usize, seed: u64, mode: KeyMode, out: &Output) -> Result<()> {
    let key = gen_key(n, m, seed, mode)?;
    write_output(out, key.to_json() + "\n")
}

pub fn embed(
    cover: &Path,
    key: &Path,
    payload: &Path,
    predictor: &PredictorArgs,
    coder: &CoderArgs,
    out: &Output,
) -> Result<()> {
    check_writable(&out.out, out.force)?;
    let config = coder.config()?;
    let key = read_key(key)?;
    let cover = tokenize(&read_text(cover)?);
    let payload = fs::read(payload).with_context(|| format!("reading {}", payload.display()))?;
    let Some(predictor) = load_predictor(predictor)? else {
        bail!(crate::Usage("embedding needs --model or --endpoint".into()));
    };
    let (marked, report) = hide(&cover, &key, predictor.get(), &config, &payload)?;
    eprintln!(
        "capacity {} bits, embedded {} bits, exhausted {}, degraded slots {}",
        report.capacity, report.bits_embedded, report.exhausted, report.degraded_slots
    );
    write_output(out, marked.join(" ") + "\n")
}

pub fn extract(
    marked: &Path,
    key: &Path,
    predictor: &PredictorArgs,
    coder: &CoderArgs,
    out: &Output,
) -> Result<()> {
    check_writable(&out.out, out.force)?;
    let config = coder.config()?;
    let key = read_key(key)?;
    let marked = tokenize(&read_text(marked)?);
    let loaded = if config.strategy.needs_model() {
        let p = load_predictor(predictor)?;
        if p.is_none() {
            bail!(crate::Usage(format!(
                "{} extraction needs --model or --endpoint",
                config.strategy
            )));
        }
        p
    } else {
        None
    };
    let payload = reveal(
        &marked,
        &key,
        loaded.as_ref().map(LoadedPredictor::get),
        &config,
    )?;
    write_output(out, payload)
}

pub fn recover(marked: &Path, key: &Path, out: &Output) -> Result<()> {
    let key = read_key(key)?;
    let marked = tokenize(&read_text(marked)?);
    let cover = reconstruct(&marked, &key)?;
    write_output(out, cover.join(" ") + "\n")
}

pub fn eval(
    config_path: &Path,
    model: &Path,
    corpus: Option<&Path>,
    report: Option<&Path>,
    out: &Output,
) -> Result<()> {
    check_writable(&out.out, out.force)?;
    if let Some(r) = report {
        check_writable(r, out.force)?;
    }
    let config = ExperimentConfig::from_toml(&read_text(config_path)?)?;
    let corpus_path = match corpus.or(config.corpus.as_deref()) {
        Some(p) => p.to_path_buf(),
        None => bail!(crate::Usage(
            "no corpus: set `corpus` in the configuration or pass --corpus".into()
        )),
    };
    let model = load_model(model).with_context(|| format!("loading model {}", model.display()))?;
    let rows = run_grid(&config, &model, &corpus_records(&corpus_path)?)?;
    let grid_report = GridReport::new(&config, &rows);
    for check in &grid_report.checks {
        if check.status != textrdh::harness::CheckStatus::Pass {
            eprintln!("{:?}: {} {}", check.status, check.name, check.detail);
        }
    }
    if let Some(r) = report {
        write_file(r, out.force, grid_report.to_json() + "\n")?;
    }
    write_output(out, metrics_table(&rows))
}
