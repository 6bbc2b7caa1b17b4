//! Batch experiments: bits-per-word and proxy perplexity over a grid of
//! coding parameters, plus the monotone trends the coding schemes predict.

mod synth;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use synth::synthetic_corpus;

use crate::bitio::BitStream;
use crate::coders::{EncoderConfig, Strategy, DEFAULT_MAX_BLOCK_BITS};
use crate::error::{Error, Result};
use crate::rdh::{fill, gen_key, init_masked, EmbedReport, KeyMode};
use crate::textmodel::{tokenize, MaskedText, NGramModel};

/// Relative slack allowed before a Huffman row below its Block row is
/// flagged.
pub const HUFFMAN_TOLERANCE: f64 = 0.02;

/// Payload bits drawn per masked slot; no strategy can consume this many
/// (Huffman codewords over at most 64 candidates are shorter), so runs never
/// exhaust the stream.
const PAYLOAD_BITS_PER_SLOT: usize = 64;

/// Experiment grid. Every `(strategy, t_p, ratio)` cell is measured on the
/// same `samples` cover texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Training and cover corpus, one record per line. Optional when the
    /// caller supplies the corpus directly.
    pub corpus: Option<PathBuf>,
    /// Inclusive range of cover lengths `n`.
    pub n_min: usize,
    pub n_max: usize,
    /// Marked-to-cover length ratios `m / n`.
    pub ratios: Vec<usize>,
    /// Thresholds for Block, Huffman and ADG.
    pub thresholds: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub samples: usize,
    pub seed: u64,
    pub bins_bits: u32,
    #[serde(with = "hex::serde")]
    pub salt: Vec<u8>,
    pub max_block_bits: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus: None,
            n_min: 4,
            n_max: 8,
            ratios: vec![3, 4, 5],
            thresholds: vec![0.02, 0.03, 0.04],
            strategies: Strategy::ALL.to_vec(),
            samples: 200,
            seed: 0,
            bins_bits: 1,
            salt: Vec::new(),
            max_block_bits: DEFAULT_MAX_BLOCK_BITS,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_min == 0 || self.n_min > self.n_max {
            return fail(format!(
                "cover length range {}..={} is empty or zero",
                self.n_min, self.n_max
            ));
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|&r| r < 1) {
            return fail("ratios must be positive integers".into());
        }
        if self.thresholds.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return fail("thresholds must lie in (0, 1)".into());
        }
        if self.strategies.is_empty() {
            return fail("no strategies".into());
        }
        if self.strategies.iter().any(|s| s.uses_threshold()) && self.thresholds.is_empty() {
            return fail("threshold-based strategies need at least one threshold".into());
        }
        if self.samples == 0 {
            return fail("sample count must be at least 1".into());
        }
        self.encoder(Strategy::Bins, 0.0).validate()
    }

    fn encoder(&self, strategy: Strategy, t_p: f64) -> EncoderConfig {
        EncoderConfig {
            strategy,
            t_p,
            max_block_bits: self.max_block_bits,
            bins_bits: self.bins_bits,
            salt: self.salt.clone(),
        }
    }

    /// Grid cells in reporting order: strategy, then threshold, then ratio.
    /// Bins ignores the threshold and gets one row per ratio.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &strategy in &self.strategies {
            let thresholds: Vec<Option<f64>> = if strategy.uses_threshold() {
                self.thresholds.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for t_p in thresholds {
                for &ratio in &self.ratios {
                    cells.push(Cell {
                        strategy,
                        t_p,
                        ratio,
                    });
                }
            }
        }
        cells
    }
}

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub strategy: Strategy,
    pub t_p: Option<f64>,
    pub ratio: usize,
}

/// Aggregated measurements for one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub strategy: Strategy,
    pub t_p: Option<f64>,
    pub ratio: usize,
    pub mean_bpw: f64,
    pub mean_proxy_ppl: f64,
    pub samples: usize,
}

/// Payload bits carried per marked-text word, padding excluded.
pub fn measure_bpw(report: &EmbedReport, m: usize) -> f64 {
    assert!(m >= 1, "marked text must be non-empty");
    report.bits_embedded as f64 / m as f64
}

/// `exp(-mean log p(w_i | rest))` under the n-gram model, where each word is
/// scored with every other slot filled. This stands in for an external
/// language-model perplexity and is only comparable across runs that share
/// the model.
///
/// Words outside the vocabulary score `1 / |V|`, `|V|` excluding `<oov>`.
pub fn proxy_perplexity<S: AsRef<str>>(model: &NGramModel, text: &[S]) -> Result<f64> {
    if text.is_empty() {
        return Err(Error::InvalidConfig("perplexity of an empty text".into()));
    }
    let vocab = model.vocabulary();
    let floor = 1.0 / (vocab.len() - 1) as f64;
    let mut masked = MaskedText::filled(text.iter().map(AsRef::as_ref));
    let mut log_sum = 0.0;
    for (i, word) in text.iter().enumerate() {
        masked.mask(i);
        let p = match vocab.id(word.as_ref()) {
            Some(id) if id.index() != 0 => model.probabilities(&masked, i)?[id.index()],
            _ => floor,
        };
        masked.set(i, word.as_ref());
        log_sum += p.ln();
    }
    Ok((-log_sum / text.len() as f64).exp())
}

/// One sampled cover text with its derived key seed and payload.
struct Sample {
    cover: Vec<String>,
    key_seed: u64,
    payload: Vec<bool>,
}

/// Start offsets of every window of `n` consecutive in-vocabulary tokens.
fn windows(records: &[Vec<String>], model: &NGramModel, n: usize) -> Vec<(usize, usize)> {
    let vocab = model.vocabulary();
    let mut out = Vec::new();
    for (r, record) in records.iter().enumerate() {
        let mut run = 0;
        for (i, tok) in record.iter().enumerate() {
            run = if vocab.contains_word(tok) { run + 1 } else { 0 };
            if run >= n {
                out.push((r, i + 1 - n));
            }
        }
    }
    out
}

fn draw_samples(
    config: &ExperimentConfig,
    model: &NGramModel,
    records: &[Vec<String>],
) -> Result<Vec<Sample>> {
    let mut by_n = HashMap::new();
    for n in config.n_min..=config.n_max {
        let w = windows(records, model, n);
        if w.len() < config.samples {
            return Err(Error::InsufficientCorpus {
                available: w.len(),
                required: config.samples,
            });
        }
        by_n.insert(n, w);
    }
    let max_slots = config.n_max * config.ratios.iter().max().unwrap();
    Ok((0..config.samples)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(s as u64);
            let n = rng.gen_range(config.n_min..=config.n_max);
            let pool = &by_n[&n];
            let (r, start) = pool[rng.gen_range(0..pool.len())];
            let payload = (0..max_slots * PAYLOAD_BITS_PER_SLOT)
                .map(|_| rng.gen())
                .collect();
            Sample {
                cover: records[r][start..start + n].to_vec(),
                key_seed: rng.gen(),
                payload,
            }
        })
        .collect())
}

/// Result of one embedding inside the grid.
#[derive(Debug, Clone)]
pub struct Trial {
    pub cover: Vec<String>,
    pub marked: Vec<String>,
    pub report: EmbedReport,
    pub bpw: f64,
    pub proxy_ppl: f64,
}

fn run_cell(
    config: &ExperimentConfig,
    cell: Cell,
    model: &NGramModel,
    samples: &[Sample],
) -> Result<Vec<Trial>> {
    let encoder = config.encoder(cell.strategy, cell.t_p.unwrap_or(0.0));
    samples
        .iter()
        .map(|s| {
            let n = s.cover.len();
            let m = n * cell.ratio;
            let key = gen_key(n, m, s.key_seed, KeyMode::Random)?;
            let masked = init_masked(&s.cover, &key)?;
            let mut stream = BitStream::from_bits(s.payload.clone());
            let (marked, report) = fill(&masked, model, &encoder, &mut stream)?;
            debug_assert!(!report.exhausted);
            Ok(Trial {
                bpw: measure_bpw(&report, m),
                proxy_ppl: proxy_perplexity(model, &marked)?,
                cover: s.cover.clone(),
                marked,
                report,
            })
        })
        .collect()
}

/// Runs the grid and keeps every individual trial, grouped per cell in
/// [`ExperimentConfig::cells`] order.
pub fn run_grid_trials(
    config: &ExperimentConfig,
    model: &NGramModel,
    corpus: &[String],
) -> Result<Vec<(Cell, Vec<Trial>)>> {
    config.validate()?;
    let records: Vec<Vec<String>> = corpus.iter().map(|r| tokenize(r)).collect();
    let samples = draw_samples(config, model, &records)?;
    config
        .cells()
        .into_par_iter()
        .map(|cell| Ok((cell, run_cell(config, cell, model, &samples)?)))
        .collect()
}

/// Mean bpw and proxy perplexity per cell, in [`ExperimentConfig::cells`]
/// order. Deterministic for a given seed.
pub fn run_grid(
    config: &ExperimentConfig,
    model: &NGramModel,
    corpus: &[String],
) -> Result<Vec<MetricsRow>> {
    Ok(run_grid_trials(config, model, corpus)?
        .into_iter()
        .map(|(cell, trials)| {
            let k = trials.len() as f64;
            MetricsRow {
                strategy: cell.strategy,
                t_p: cell.t_p,
                ratio: cell.ratio,
                mean_bpw: trials.iter().map(|t| t.bpw).sum::<f64>() / k,
                mean_proxy_ppl: trials.iter().map(|t| t.proxy_ppl).sum::<f64>() / k,
                samples: trials.len(),
            }
        })
        .collect())
}

/// Comma-separated table with a header line.
pub fn metrics_table(rows: &[MetricsRow]) -> String {
    let mut out = String::from("strategy,t_p,ratio,mean_bpw,mean_proxy_ppl,samples\n");
    for r in rows {
        let t_p = r.t_p.map_or_else(|| "-".to_string(), |t| t.to_string());
        writeln!(
            out,
            "{},{},{},{:.6},{:.4},{}",
            r.strategy, t_p, r.ratio, r.mean_bpw, r.mean_proxy_ppl, r.samples
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    /// A hard expectation does not hold.
    Fail,
    /// A soft expectation does not hold; reported, not fatal.
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

fn find(
    rows: &[MetricsRow],
    strategy: Strategy,
    t_p: Option<f64>,
    ratio: usize,
) -> Option<&MetricsRow> {
    rows.iter()
        .find(|r| r.strategy == strategy && r.t_p == t_p && r.ratio == ratio)
}

/// Sorted distinct thresholds and ratios present in `rows`.
fn axes(rows: &[MetricsRow]) -> (Vec<f64>, Vec<usize>) {
    let mut tps: Vec<f64> = rows.iter().filter_map(|r| r.t_p).collect();
    tps.sort_by(f64::total_cmp);
    tps.dedup();
    let mut ratios: Vec<usize> = rows.iter().map(|r| r.ratio).collect();
    ratios.sort_unstable();
    ratios.dedup();
    (tps, ratios)
}

/// Checks `values` pairwise along an axis; `ok(prev, next)` must hold for
/// every adjacent pair.
fn monotone(
    values: &[(String, f64)],
    ok: impl Fn(f64, f64) -> bool,
) -> std::result::Result<(), String> {
    for w in values.windows(2) {
        if !ok(w[0].1, w[1].1) {
            return Err(format!(
                "{}={:.6} then {}={:.6}",
                w[0].0, w[0].1, w[1].0, w[1].1
            ));
        }
    }
    Ok(())
}

/// Evaluates the expected trends of the metric table.
///
/// Hard: bpw strictly falls as `t_p` rises (threshold strategies) and
/// strictly rises with the ratio (all strategies). Soft: Huffman bpw at least
/// Block bpw within [`HUFFMAN_TOLERANCE`]; proxy perplexity non-increasing in
/// `t_p` and in the ratio.
pub fn check_trends(rows: &[MetricsRow]) -> Vec<TrendCheck> {
    let (tps, ratios) = axes(rows);
    let strategies: Vec<Strategy> = Strategy::ALL
        .into_iter()
        .filter(|s| rows.iter().any(|r| r.strategy == *s))
        .collect();
    let mut checks = Vec::new();
    let mut push = |name: String, hard: bool, outcome: std::result::Result<(), String>| {
        let (status, detail) = match outcome {
            Ok(()) => (CheckStatus::Pass, String::new()),
            Err(d) => (
                if hard {
                    CheckStatus::Fail
                } else {
                    CheckStatus::Flag
                },
                d,
            ),
        };
        checks.push(TrendCheck {
            name,
            status,
            detail,
        });
    };

    for &s in strategies.iter().filter(|s| s.uses_threshold()) {
        for &ratio in &ratios {
            let along_tp = |f: fn(&MetricsRow) -> f64| -> Vec<(String, f64)> {
                tps.iter()
                    .filter_map(|&t| {
                        find(rows, s, Some(t), ratio).map(|r| (format!("t_p {t}"), f(r)))
                    })
                    .collect()
            };
            push(
                format!("bpw decreasing in t_p ({s}, m/n={ratio})"),
                true,
                monotone(&along_tp(|r| r.mean_bpw), |a, b| b < a),
            );
            push(
                format!("proxy-PPL non-increasing in t_p ({s}, m/n={ratio})"),
                false,
                monotone(&along_tp(|r| r.mean_proxy_ppl), |a, b| b <= a),
            );
        }
    }
    for &s in &strategies {
        let row_tps: Vec<Option<f64>> = if s.uses_threshold() {
            tps.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for t_p in row_tps {
            let label = t_p.map_or_else(|| s.to_string(), |t| format!("{s}, t_p={t}"));
            let along_ratio = |f: fn(&MetricsRow) -> f64| -> Vec<(String, f64)> {
                ratios
                    .iter()
                    .filter_map(|&q| find(rows, s, t_p, q).map(|r| (format!("m/n {q}"), f(r))))
                    .collect()
            };
            push(
                format!("bpw increasing in m/n ({label})"),
                true,
                monotone(&along_ratio(|r| r.mean_bpw), |a, b| b > a),
            );
            if s.uses_threshold() {
                push(
                    format!("proxy-PPL non-increasing in m/n ({label})"),
                    false,
                    monotone(&along_ratio(|r| r.mean_proxy_ppl), |a, b| b <= a),
                );
            }
        }
    }
    for &t in &tps {
        for &ratio in &ratios {
            let (Some(h), Some(b)) = (
                find(rows, Strategy::Huffman, Some(t), ratio),
                find(rows, Strategy::Block, Some(t), ratio),
            ) else {
                continue;
            };
            let ok = h.mean_bpw >= b.mean_bpw * (1.0 - HUFFMAN_TOLERANCE);
            push(
                format!("Huffman bpw >= Block bpw (t_p={t}, m/n={ratio})"),
                false,
                if ok {
                    Ok(())
                } else {
                    Err(format!(
                        "huffman {:.6} < block {:.6}",
                        h.mean_bpw, b.mean_bpw
                    ))
                },
            );
        }
    }
    checks
}

/// Structured report written next to the table.
#[derive(Debug, Clone, Serialize)]
pub struct GridReport<'a> {
    pub config: &'a ExperimentConfig,
    pub rows: &'a [MetricsRow],
    pub checks: Vec<TrendCheck>,
}

impl<'a> GridReport<'a> {
    pub fn new(config: &'a ExperimentConfig, rows: &'a [MetricsRow]) -> Self {
        GridReport {
            config,
            rows,
            checks: check_trends(rows),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::build_model;

    fn row(strategy: Strategy, t_p: Option<f64>, ratio: usize, bpw: f64, ppl: f64) -> MetricsRow {
        MetricsRow {
            strategy,
            t_p,
            ratio,
            mean_bpw: bpw,
            mean_proxy_ppl: ppl,
            samples: 1,
        }
    }

    #[test]
    fn bpw_examples() {
        let report = EmbedReport {
            capacity: 9,
            bits_embedded: 9,
            ..EmbedReport::default()
        };
        assert_eq!(measure_bpw(&report, 12), 0.75);
        assert_eq!(measure_bpw(&EmbedReport::default(), 7), 0.0);
        let padded = EmbedReport {
            capacity: 12,
            bits_embedded: 9,
            ..EmbedReport::default()
        };
        assert_eq!(measure_bpw(&padded, 12), 0.75);
    }

    #[test]
    fn perplexity_of_uniform_model_is_vocabulary_size() {
        // One-word records: no context is ever observed and the unigram
        // counts are equal, so every prediction is uniform.
        let model = build_model(&["a", "b", "c", "d", "e"], 2, 1).unwrap();
        let ppl = proxy_perplexity(&model, &["e", "a", "c"]).unwrap();
        assert!((ppl - 5.0).abs() < 1e-9, "{ppl}");
    }

    #[test]
    fn perplexity_of_delta_model_is_one() {
        let text = vec!["x"; 200_000].join(" ");
        let model = build_model(&[text.as_str(), "y"], 2, 1).unwrap();
        let ppl = proxy_perplexity(&model, &["x", "x", "x"]).unwrap();
        assert!((ppl - 1.0).abs() < 1e-4, "{ppl}");
    }

    #[test]
    fn perplexity_matches_log_sum() {
        let model = build_model(&["a b a b a b a c"], 2, 1).unwrap();
        let text = ["a", "b"];
        let mut m = MaskedText::filled(text);
        m.mask(0);
        let p0 = model.probabilities(&m, 0).unwrap()[1];
        let mut m = MaskedText::filled(text);
        m.mask(1);
        let p1 = model.probabilities(&m, 1).unwrap()[2];
        let expected = (-(p0.ln() + p1.ln()) / 2.0).exp();
        assert!((proxy_perplexity(&model, &text).unwrap() - expected).abs() < 1e-12);
        assert!(proxy_perplexity(&model, &[] as &[&str]).is_err());
    }

    #[test]
    fn config_from_toml() {
        let c = ExperimentConfig::from_toml("samples = 10\nseed = 3\nsalt = \"00ff\"\n").unwrap();
        assert_eq!(c.samples, 10);
        assert_eq!(c.salt, [0, 255]);
        assert_eq!(c.ratios, [3, 4, 5]);
        assert!(ExperimentConfig::from_toml("samples = 0").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("thresholds = [1.5]").is_err());
        assert!(ExperimentConfig::from_toml("n_min = 9").is_err());
    }

    #[test]
    fn cells_order() {
        let c = ExperimentConfig {
            strategies: vec![Strategy::Bins, Strategy::Block],
            thresholds: vec![0.02, 0.03],
            ratios: vec![3, 4],
            ..ExperimentConfig::default()
        };
        let cells: Vec<_> = c
            .cells()
            .into_iter()
            .map(|c| (c.strategy, c.t_p, c.ratio))
            .collect();
        assert_eq!(
            cells,
            [
                (Strategy::Bins, None, 3),
                (Strategy::Bins, None, 4),
                (Strategy::Block, Some(0.02), 3),
                (Strategy::Block, Some(0.02), 4),
                (Strategy::Block, Some(0.03), 3),
                (Strategy::Block, Some(0.03), 4),
            ]
        );
    }

    #[test]
    fn small_grid_runs_and_is_deterministic() {
        let corpus = synthetic_corpus(5, 60_000);
        let model = build_model(&corpus, 3, 1).unwrap();
        let config = ExperimentConfig {
            samples: 12,
            seed: 9,
            ..ExperimentConfig::default()
        };
        let rows = run_grid(&config, &model, &corpus).unwrap();
        assert_eq!(rows.len(), 3 * 3 * 3 + 3);
        assert_eq!(rows, run_grid(&config, &model, &corpus).unwrap());
        for r in rows.iter().filter(|r| r.strategy == Strategy::Bins) {
            let expected = (r.ratio - 1) as f64 / r.ratio as f64;
            assert!((r.mean_bpw - expected).abs() < 1e-12);
        }
        let table = metrics_table(&rows);
        assert!(table.starts_with("strategy,t_p,ratio,mean_bpw,mean_proxy_ppl,samples\n"));
        assert_eq!(table.lines().count(), rows.len() + 1);
    }

    #[test]
    fn insufficient_corpus() {
        let corpus = vec!["i do .".to_string()];
        let model = build_model(&corpus, 2, 1).unwrap();
        let err = run_grid(&ExperimentConfig::default(), &model, &corpus).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientCorpus {
                available: 0,
                required: 200
            }
        ));
        assert!(err.to_string().starts_with("insufficient corpus"));
    }

    #[test]
    fn trend_statuses() {
        let rows = vec![
            row(Strategy::Block, Some(0.02), 3, 1.0, 10.0),
            row(Strategy::Block, Some(0.03), 3, 0.8, 11.0),
            row(Strategy::Block, Some(0.02), 4, 1.1, 9.0),
            row(Strategy::Block, Some(0.03), 4, 0.8, 8.0),
        ];
        let checks = check_trends(&rows);
        let status = |name: &str| checks.iter().find(|c| c.name == name).unwrap().status;
        assert_eq!(
            status("bpw decreasing in t_p (block, m/n=3)"),
            CheckStatus::Pass
        );
        assert_eq!(
            status("proxy-PPL non-increasing in t_p (block, m/n=3)"),
            CheckStatus::Flag
        );
        assert_eq!(
            status("bpw increasing in m/n (block, t_p=0.03)"),
            CheckStatus::Fail
        );
        assert_eq!(
            status("proxy-PPL non-increasing in m/n (block, t_p=0.02)"),
            CheckStatus::Pass
        );
    }
}
