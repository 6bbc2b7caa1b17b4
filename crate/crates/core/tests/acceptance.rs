//! Acceptance suite: one status line per criterion.
//!
//! Runs without the libtest harness so every line is printed; the process
//! exits non-zero if any hard criterion fails. `FLAG` marks a soft criterion
//! that did not hold.

use std::cell::RefCell;
use std::fmt;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textrdh::coders::{adg_groups, huffman_code, usable};
use textrdh::harness::{
    check_trends, metrics_table, run_grid, run_grid_trials, synthetic_corpus, CheckStatus,
    ExperimentConfig,
};
use textrdh::textmodel::{read_model, write_model, Entry, QUANTUM_SCALE};
use textrdh::{
    build_model, bytes_to_bits, decode_step, encode_step, extract_bits, fill, frame, gen_key, hide,
    init_masked, reconstruct, reveal, tokenize, BitStream, Distribution, EncoderConfig, Error,
    KeyMode, MaskedText, NGramModel, PositionKey, Predictor, Strategy, TokenId, Vocabulary,
};

const CORPUS_SEED: u64 = 2024;
const CORPUS_BYTES: usize = 1 << 20;
const INSTANCES_PER_STRATEGY: usize = 500;
const TIME_LIMIT: Duration = Duration::from_secs(300);

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Flag,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Flag => "FLAG",
        })
    }
}

#[derive(Default)]
struct Outcome {
    failed: bool,
}

impl Outcome {
    fn report(&mut self, name: &str, status: Status, detail: impl fmt::Display) {
        println!("{status} | {name} | {detail}");
        self.failed |= status == Status::Fail;
    }

    fn hard(&mut self, name: &str, ok: bool, detail: impl fmt::Display) {
        self.report(name, if ok { Status::Pass } else { Status::Fail }, detail);
    }
}

/// Wraps the model and keeps every distribution it hands out.
struct Recording<'a> {
    inner: &'a NGramModel,
    seen: RefCell<Vec<Distribution>>,
}

impl Predictor for Recording<'_> {
    fn vocabulary(&self) -> &Vocabulary {
        self.inner.vocabulary()
    }

    fn predict(&self, masked: &MaskedText, index: usize) -> textrdh::Result<Distribution> {
        let d = self.inner.predict(masked, index)?;
        self.seen.borrow_mut().push(d.clone());
        Ok(d)
    }
}

/// Coder settings used for the reversibility instances: the most capacious
/// setting of each strategy (no threshold; 16 Bins subsets).
fn suite_config(strategy: Strategy) -> EncoderConfig {
    match strategy {
        Strategy::Bins => EncoderConfig::bins(4, *b"acceptance"),
        s => EncoderConfig {
            strategy: s,
            ..EncoderConfig::block(0.0)
        },
    }
}

struct Instance {
    cover: Vec<String>,
    key: PositionKey,
    payload: Vec<u8>,
}

fn in_vocab_windows(records: &[Vec<String>], vocab: &Vocabulary, n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (r, rec) in records.iter().enumerate() {
        let mut run = 0;
        for (i, t) in rec.iter().enumerate() {
            run = if vocab.contains_word(t) { run + 1 } else { 0 };
            if run >= n {
                out.push((r, i + 1 - n));
            }
        }
    }
    out
}

fn instances(records: &[Vec<String>], vocab: &Vocabulary, stream: u64) -> Vec<Instance> {
    let windows: Vec<Vec<(usize, usize)>> = (0..=8)
        .map(|n| in_vocab_windows(records, vocab, n))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    rng.set_stream(stream);
    (0..INSTANCES_PER_STRATEGY)
        .map(|_| {
            let n = rng.gen_range(4..=8);
            let ratio = *[3, 4, 5].choose(&mut rng).unwrap();
            let (r, s) = windows[n][rng.gen_range(0..windows[n].len())];
            let len = rng.gen_range(1..=64);
            let payload = (0..len).map(|_| rng.gen()).collect();
            Instance {
                cover: records[r][s..s + n].to_vec(),
                key: gen_key(n, n * ratio, rng.gen(), KeyMode::Random).unwrap(),
                payload,
            }
        })
        .collect()
}

struct SuiteResult {
    passed: usize,
    capacity_short: usize,
    other_errors: Vec<String>,
    raw_exact: usize,
    distributions: Vec<(Strategy, Distribution)>,
}

fn reversibility_suite(model: &NGramModel, records: &[Vec<String>]) -> SuiteResult {
    let mut result = SuiteResult {
        passed: 0,
        capacity_short: 0,
        other_errors: Vec::new(),
        raw_exact: 0,
        distributions: Vec::new(),
    };
    for (si, strategy) in Strategy::ALL.into_iter().enumerate() {
        let config = suite_config(strategy);
        let recorder = Recording {
            inner: model,
            seen: RefCell::default(),
        };
        let predictor: Option<&dyn Predictor> =
            strategy.needs_model().then_some(model as &dyn Predictor);
        for inst in instances(records, model.vocabulary(), si as u64) {
            // Literal criterion: framed payload in, identical payload and cover out.
            match hide(&inst.cover, &inst.key, &recorder, &config, &inst.payload) {
                Ok((marked, _)) => {
                    let payload_ok = reveal(&marked, &inst.key, predictor, &config).ok()
                        == Some(inst.payload.clone());
                    let cover_ok = reconstruct(&marked, &inst.key).ok() == Some(inst.cover.clone());
                    if payload_ok && cover_ok {
                        result.passed += 1;
                    } else {
                        result
                            .other_errors
                            .push(format!("{strategy}: round trip mismatch"));
                    }
                }
                Err(Error::InsufficientCapacity { .. }) => result.capacity_short += 1,
                Err(e) => result.other_errors.push(format!("{strategy}: {e}")),
            }

            // Capacity-bounded variant: every bit the text carries comes back.
            let framed = frame(&bytes_to_bits(&inst.payload)).unwrap();
            let masked = init_masked(&inst.cover, &inst.key).unwrap();
            let mut stream = framed.clone();
            let (marked, report) = fill(&masked, &recorder, &config, &mut stream).unwrap();
            let mut expected = framed.into_bits();
            expected.resize(expected.len().max(report.capacity), false);
            expected.truncate(report.capacity);
            let bits = extract_bits(&marked, &inst.key, predictor, &config).unwrap();
            if bits.bits() == expected && reconstruct(&marked, &inst.key).unwrap() == inst.cover {
                result.raw_exact += 1;
            }
        }
        if matches!(strategy, Strategy::Huffman | Strategy::Adg) {
            result
                .distributions
                .extend(recorder.seen.take().into_iter().map(|d| (strategy, d)));
        }
    }
    result
}

/// Non-increasing compositions of 16 into at most six parts.
fn grid_partitions() -> Vec<Vec<u32>> {
    fn rec(left: u32, max: u32, parts: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(parts.clone());
            return;
        }
        if parts.len() == 6 {
            return;
        }
        for p in (1..=left.min(max)).rev() {
            parts.push(p);
            rec(left - p, p, parts, out);
            parts.pop();
        }
    }
    let mut out = Vec::new();
    rec(16, 16, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive encode/decode check on the 1/16 grid. Returns
/// (distributions, checks, mismatches).
fn coder_oracle() -> (usize, usize, usize) {
    let vocab = Vocabulary::new((0..64).map(|i| format!("w{i:02}"))).unwrap();
    let quantum = QUANTUM_SCALE / 16;
    let layouts: [fn(usize) -> u32; 2] = [|i| i as u32 + 1, |i| 60 - 9 * i as u32];
    let mut configs: Vec<EncoderConfig> = Vec::new();
    for t_p in [0.0, 0.02, 0.0625, 0.1, 0.3] {
        configs.push(EncoderConfig::block(t_p));
        configs.push(EncoderConfig::huffman(t_p));
        configs.push(EncoderConfig::adg(t_p));
        configs.push(EncoderConfig {
            max_block_bits: 1,
            ..EncoderConfig::block(t_p)
        });
    }
    for r in 1..=3 {
        configs.push(EncoderConfig::bins(r, *b"oracle"));
    }
    let prefixes: Vec<Vec<bool>> = (0..=8)
        .flat_map(|len| {
            (0..1u32 << len).map(move |v| (0..len).rev().map(|b| v >> b & 1 == 1).collect())
        })
        .collect();

    let (mut dists, mut checks, mut mismatches) = (0, 0, 0);
    for parts in grid_partitions() {
        for layout in layouts {
            // Equal masses are ordered by ascending id, so sort ids within ties.
            let mut entries: Vec<Entry> = parts
                .iter()
                .enumerate()
                .map(|(i, &p)| Entry {
                    token: TokenId(layout(i)),
                    micros: p * quantum,
                })
                .collect();
            entries.sort_by(|a, b| b.micros.cmp(&a.micros).then(a.token.cmp(&b.token)));
            let dist = Distribution::from_quantized(entries).unwrap();
            dists += 1;
            for config in &configs {
                for prefix in &prefixes {
                    let mut stream = BitStream::from_bits(prefix.clone());
                    let step = encode_step(config, &dist, &mut stream, &vocab).unwrap();
                    let mut padded = prefix.clone();
                    padded.resize(padded.len().max(step.bits.len()), false);
                    let consumed_ok = step.bits == padded[..step.bits.len()]
                        && step.padding == step.bits.len().saturating_sub(prefix.len());
                    let decoded =
                        decode_step(config, &dist, vocab.surface(step.token), Some(&vocab));
                    checks += 1;
                    if !consumed_ok || decoded.ok() != Some(step.bits.clone()) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    (dists, checks, mismatches)
}

const REFERENCE_ROWS: [&str; 10] = [
    "I was going to try to do the same for myself .",
    "I have no way to really do the same without him .",
    "I do this , but I do not do this now .",
    "I know what the police will do if he comes here .",
    "I do it . you always do it . I know .",
    "I have no one willing to do a little crazy thing .",
    "I did the same thing you do for the same reason .",
    "I did . but you can do that for her too .",
    "I know the way they can do it to me now .",
    "I know what I have to do to keep her safe .",
];

fn main() -> ExitCode {
    let started = Instant::now();
    let mut outcome = Outcome::default();

    let corpus = synthetic_corpus(CORPUS_SEED, CORPUS_BYTES);
    let corpus_bytes: usize = corpus.iter().map(|r| r.len() + 1).sum();
    let model = build_model(&corpus, 3, 1).unwrap();
    let records: Vec<Vec<String>> = corpus.iter().map(|r| tokenize(r)).collect();
    println!(
        "corpus: synthetic, {corpus_bytes} bytes; model: order 3, vocabulary {}",
        model.vocabulary().len()
    );

    // Reversibility.
    let suite_start = Instant::now();
    let suite = reversibility_suite(&model, &records);
    let suite_time = suite_start.elapsed();
    let total = 4 * INSTANCES_PER_STRATEGY;
    outcome.hard(
        "reversibility: 2000 instances, payload 1-64 bytes, byte-exact payload and token-exact cover",
        suite.passed == total && suite_time < TIME_LIMIT,
        format_args!(
            "{}/{total} passed; {} lacked capacity for the framed payload; {} other failures{}; {:.1}s",
            suite.passed,
            suite.capacity_short,
            suite.other_errors.len(),
            suite.other_errors.first().map(|e| format!(" (first: {e})")).unwrap_or_default(),
            suite_time.as_secs_f64()
        ),
    );
    outcome.hard(
        "reversibility (capacity-bounded): every carried bit and the cover recovered on the same instances",
        suite.raw_exact == total,
        format_args!("{}/{total}", suite.raw_exact),
    );

    // Masking vector.
    let key = PositionKey::new(vec![1, 7, 12], 12).unwrap();
    let masked = init_masked(&["I", "do", "."], &key).unwrap();
    let expected = "I [MASK] [MASK] [MASK] [MASK] [MASK] do [MASK] [MASK] [MASK] [MASK] .";
    outcome.hard(
        "masked-text vector: c={I,do,.}, p={1,7,12}, m=12",
        masked.to_string() == expected,
        &masked,
    );

    // Reconstruction vectors.
    let recovered = REFERENCE_ROWS
        .iter()
        .filter(|row| {
            reconstruct(&tokenize(row), &key).ok()
                == Some(vec!["i".into(), "do".into(), ".".into()])
        })
        .count();
    let short_row = reconstruct(&tokenize("I always do it for a living ."), &key);
    outcome.hard(
        "reference marked texts reconstruct to \"i do .\"",
        recovered == REFERENCE_ROWS.len() && matches!(short_row, Err(Error::KeyOutOfRange { .. })),
        format_args!(
            "{recovered}/{} twelve-token rows; the 8-token row gives {}",
            REFERENCE_ROWS.len(),
            short_row.map_or_else(|e| e.code().to_string(), |_| "no error".into())
        ),
    );

    // Bins capacity law.
    let mut law_ok = true;
    let mut law_detail = Vec::new();
    let mut means = Vec::new();
    for r in [1, 2] {
        let config = ExperimentConfig {
            strategies: vec![Strategy::Bins],
            bins_bits: r,
            salt: b"law".to_vec(),
            samples: 200,
            seed: 3,
            ..ExperimentConfig::default()
        };
        for (cell, trials) in run_grid_trials(&config, &model, &corpus).unwrap() {
            let exact = trials
                .iter()
                .all(|t| t.report.bits_embedded == (t.marked.len() - t.cover.len()) * r as usize);
            let mean = trials.iter().map(|t| t.bpw).sum::<f64>() / trials.len() as f64;
            let target = (cell.ratio - 1) as f64 * f64::from(r) / cell.ratio as f64;
            law_ok &= exact && (mean - target).abs() < 1e-12;
            law_detail.push(format!("r={r} m/n={} bpw={mean:.6}", cell.ratio));
            means.push(mean);
        }
    }
    let doubled = (0..3).all(|i| (means[i + 3] - 2.0 * means[i]).abs() < 1e-12);
    outcome.hard(
        "Bins capacity law: bpw = (m-n)r/m exactly, doubled at r=2",
        law_ok && doubled,
        law_detail.join(", "),
    );

    // bpw and proxy-perplexity trends.
    let grid_config = ExperimentConfig {
        samples: 200,
        seed: 11,
        ..ExperimentConfig::default()
    };
    let grid_start = Instant::now();
    let rows = run_grid(&grid_config, &model, &corpus).unwrap();
    let grid_time = grid_start.elapsed();
    for line in metrics_table(&rows).lines() {
        println!("    {line}");
    }
    let checks = check_trends(&rows);
    let bpw_checks: Vec<_> = checks
        .iter()
        .filter(|c| c.name.starts_with("bpw") && !c.name.contains("(bins"))
        .collect();
    let bpw_failures: Vec<_> = bpw_checks
        .iter()
        .filter(|c| c.status != CheckStatus::Pass)
        .collect();
    outcome.hard(
        "bpw strictly decreasing in t_p and increasing in m/n (Block, Huffman, ADG; 200 samples)",
        bpw_failures.is_empty(),
        format_args!(
            "{}/{} monotonicity checks hold{}; grid {:.1}s",
            bpw_checks.len() - bpw_failures.len(),
            bpw_checks.len(),
            bpw_failures
                .first()
                .map(|c| format!(" (first failure: {} {})", c.name, c.detail))
                .unwrap_or_default(),
            grid_time.as_secs_f64()
        ),
    );
    let huffman: Vec<_> = checks
        .iter()
        .filter(|c| c.name.starts_with("Huffman"))
        .collect();
    let huffman_flags = huffman
        .iter()
        .filter(|c| c.status != CheckStatus::Pass)
        .count();
    outcome.report(
        "Huffman bpw >= Block bpw within 2% (soft)",
        if huffman_flags == 0 {
            Status::Pass
        } else {
            Status::Flag
        },
        format_args!(
            "{}/{} cells hold",
            huffman.len() - huffman_flags,
            huffman.len()
        ),
    );
    let ppl: Vec<_> = checks
        .iter()
        .filter(|c| c.name.starts_with("proxy-PPL"))
        .collect();
    let ppl_flags: Vec<_> = ppl
        .iter()
        .filter(|c| c.status != CheckStatus::Pass)
        .collect();
    outcome.report(
        "proxy-PPL non-increasing in t_p and in m/n (soft)",
        if ppl_flags.is_empty() {
            Status::Pass
        } else {
            Status::Flag
        },
        format_args!(
            "{}/{} trend checks hold{}",
            ppl.len() - ppl_flags.len(),
            ppl.len(),
            ppl_flags
                .first()
                .map(|c| format!(" (first flag: {} {})", c.name, c.detail))
                .unwrap_or_default()
        ),
    );

    // Coder oracle.
    let (dists, oracle_checks, mismatches) = coder_oracle();
    outcome.hard(
        "coder oracle: decode inverts encode on every 1/16-grid distribution (<=6 tokens) and prefix (<=8 bits)",
        mismatches == 0,
        format_args!("{dists} distributions, {oracle_checks} encode/decode pairs, {mismatches} mismatches"),
    );

    // Huffman and ADG laws on everything the reversibility suite built.
    let (mut trees, mut tree_faults, mut groupings, mut grouping_faults) = (0, 0, 0, 0);
    for (strategy, dist) in &suite.distributions {
        let config = suite_config(*strategy);
        match strategy {
            Strategy::Huffman => {
                if let Some(code) = huffman_code(&config, dist) {
                    trees += 1;
                    let (num, den) = code.kraft_sum();
                    if !code.is_prefix_free() || num > den {
                        tree_faults += 1;
                    }
                }
            }
            _ => {
                if let Some(groups) = adg_groups(&config, dist) {
                    groupings += 1;
                    if !groups.is_balanced_partition_of(usable(&config, dist)) {
                        grouping_faults += 1;
                    }
                }
            }
        }
    }
    outcome.hard(
        "Huffman prefix-free with Kraft sum <= 1; ADG groups a disjoint balanced cover",
        tree_faults == 0 && grouping_faults == 0 && trees > 0 && groupings > 0,
        format_args!("{trees} trees ({tree_faults} faults), {groupings} groupings ({grouping_faults} faults)"),
    );

    // Determinism.
    let mut repeats = 0;
    let mut divergent = 0;
    for (si, strategy) in Strategy::ALL.into_iter().enumerate() {
        let config = suite_config(strategy);
        for inst in instances(&records, model.vocabulary(), si as u64)
            .iter()
            .take(50)
        {
            let masked = init_masked(&inst.cover, &inst.key).unwrap();
            let framed = frame(&bytes_to_bits(&inst.payload)).unwrap();
            let a = fill(&masked, &model, &config, &mut framed.clone())
                .unwrap()
                .0;
            let b = fill(&masked, &model, &config, &mut framed.clone())
                .unwrap()
                .0;
            repeats += 1;
            divergent += usize::from(a.join(" ").into_bytes() != b.join(" ").into_bytes());
        }
    }
    let mut first = Vec::new();
    write_model(&model, &mut first).unwrap();
    let reloaded = read_model(first.as_slice()).unwrap();
    let mut second = Vec::new();
    write_model(&reloaded, &mut second).unwrap();
    let model_ok = first == second && reloaded == model;
    outcome.hard(
        "determinism: repeated embeds byte-identical; model save/load byte-identical",
        divergent == 0 && model_ok,
        format_args!(
            "{repeats} repeated embeds, {divergent} differ; model file {} bytes, round trip {}",
            first.len(),
            if model_ok { "identical" } else { "differs" }
        ),
    );

    println!("total {:.1}s", started.elapsed().as_secs_f64());
    if outcome.failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
