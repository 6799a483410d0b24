use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use log::{info, warn};
use metamr::checkpoint::{self, Checkpoint};
use metamr::config::RunConfig;
use metamr::corpus::{load_amr_corpus, load_graphs, write_amr_corpus, CorpusEntry};
use metamr::report::{comparison_tsv, deltas_tsv, eval_report, read_summaries, training_log, Summary};
use metamr::synthetic::{load_spec, write_synthetic};
use metamr::tsv::{load_parallel_tsv, write_parallel_tsv};
use metamr::Rayon;
use metamr_core::autodiff::AutodiffError;
use metamr_core::data::{build_vocab, encode_datasets, encode_pairs, group_by_language, RawPair, SyntheticSpec};
use metamr_core::eval::{compare_runs, empty_graph, evaluate, evaluate_kshot, DecodeConfig, EvalError, FinetuneConfig, TestItem};
use metamr_core::linearize::{preprocess, restore as restore_graph};
use metamr_core::meta::{self, Mode, TrainError};
use metamr_core::model::{ModelConfig, ModelError, Seq2Seq};
use metamr_core::smatch::{aggregate, score_pairs};

use crate::{CompareArgs, EvalArgs, GenArgs, IoArgs, LinearizeArgs, ModeArg, SmatchArgs, TrainArgs};

/// Training produced a NaN or infinity.
#[derive(Debug, thiserror::Error)]
#[error("numerical abort: {0}")]
pub struct NumericAbort(String);

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<NumericAbort>().is_some() {
        3
    } else {
        2
    }
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn smatch(a: SmatchArgs) -> Result<()> {
    let cand = load_graphs(&a.candidate)?;
    let gold = load_graphs(&a.gold)?;
    ensure!(
        cand.len() == gold.len(),
        "{} candidate graphs but {} gold graphs",
        cand.len(),
        gold.len()
    );
    ensure!(!cand.is_empty(), "no graphs to score");
    let pairs: Vec<_> = cand.into_iter().zip(gold).collect();
    let scores = score_pairs(&Rayon, &pairs, a.restarts, a.seed);
    let total = aggregate(&scores)?;
    println!("{:.4} {:.4} {:.4}", total.precision, total.recall, total.f1);
    if let Some(path) = a.report {
        let mut out = String::from("index\tmatched\ttotal_left\ttotal_right\tprecision\trecall\tf1\n");
        for (i, s) in scores.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                s.matched, s.total_left, s.total_right, s.precision, s.recall, s.f1
            );
        }
        write(&path, out)?;
    }
    Ok(())
}

fn test_items(pairs: &[RawPair]) -> Result<Vec<TestItem>> {
    pairs
        .iter()
        .map(|p| {
            let gold = restore_graph(&p.target)
                .with_context(|| format!("gold graph for `{}` ({})", p.source.join(" "), p.language))?;
            Ok(TestItem {
                language: p.language.clone(),
                source: p.source.clone(),
                gold,
            })
        })
        .collect()
}

fn non_finite(e: &TrainError<ModelError>) -> bool {
    matches!(
        e,
        TrainError::Learner(ModelError::Autodiff(AutodiffError::NonFinite { .. }))
    )
}

pub fn train(a: TrainArgs) -> Result<()> {
    ensure!(a.data_dir.is_dir(), "data directory {} not found", a.data_dir.display());
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::from_json("{}")?,
    };
    let train_pairs = load_parallel_tsv(&a.data_dir.join("train.tsv"))?;
    let dev_pairs = load_parallel_tsv(&a.data_dir.join("dev.tsv"))?;
    let test_path = a.data_dir.join("test.tsv");
    let test_pairs = if test_path.exists() {
        load_parallel_tsv(&test_path)?
    } else {
        Vec::new()
    };
    ensure!(!train_pairs.is_empty(), "train.tsv is empty");

    // Held-out languages only occur in dev/test; their tokens still get ids.
    let all: Vec<RawPair> = train_pairs.iter().chain(&dev_pairs).chain(&test_pairs).cloned().collect();
    let (src_vocab, tgt_vocab) = build_vocab(&all, cfg.min_count);
    let datasets = encode_datasets(&train_pairs, &src_vocab, &tgt_vocab);
    cfg.resolve(datasets.len())?;

    let dev_languages: Vec<String> = match &cfg.dev.languages {
        Some(l) => l.clone(),
        None => datasets.iter().map(|d| d.language.clone()).collect(),
    };
    let mut dev_items = Vec::new();
    for group in group_by_language(&dev_pairs) {
        if dev_languages.contains(&group.language) {
            let take = group.examples.len().min(cfg.dev.max_per_language);
            dev_items.push(test_items(&group.examples[..take])?);
        }
    }
    ensure!(!dev_items.is_empty(), "dev.tsv has no rows for the dev languages {dev_languages:?}");

    let model = Seq2Seq::new(ModelConfig {
        src_vocab: src_vocab.len(),
        tgt_vocab: tgt_vocab.len(),
        embed_dim: cfg.model.embed_dim,
        hidden_dim: cfg.model.hidden_dim,
    })?;
    let init = model.init_params(cfg.model.seed);
    let mode = match a.mode {
        ModeArg::Maml => Mode::Maml,
        ModeArg::Joint => Mode::Joint,
    };
    let decode = DecodeConfig {
        max_len: cfg.dev.max_len,
        restarts: cfg.dev.restarts,
    };
    info!(
        "{} training: {} languages, {} parameters",
        mode.as_str(),
        datasets.len(),
        model.num_params()
    );
    let dev = |step: usize, params: &[f64]| -> Result<f64, ModelError> {
        let mut scores = Vec::new();
        for items in &dev_items {
            let (s, _) = evaluate(&Rayon, &model, params, &src_vocab, &tgt_vocab, items, &decode, 0).map_err(|e| match e {
                EvalError::Model(m) => m,
                _ => ModelError::EmptyBatch,
            })?;
            scores.push(s);
        }
        let f1 = aggregate(&scores).map(|s| s.f1).unwrap_or(0.0);
        info!("step {step}: dev smatch {f1:.4}");
        Ok(f1)
    };
    let outcome = meta::train(mode, &model, &Rayon, &datasets, &cfg.train, init, dev).map_err(|e| {
        if non_finite(&e) {
            anyhow!(NumericAbort(e.to_string()))
        } else {
            anyhow!(e)
        }
    })?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let ck = Checkpoint::new(src_vocab, tgt_vocab, model, outcome.best.clone());
    checkpoint::save(&a.out.join("model.ckpt"), &ck)?;
    write(&a.out.join("train.log"), training_log(mode.as_str(), cfg.to_json(), &outcome))?;
    info!(
        "best dev smatch {:?} at step {}, stopped at {}",
        outcome.best_dev, outcome.best_step, outcome.stopped_at
    );
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let ck = checkpoint::load(&a.checkpoint)?;
    let label = match a.label {
        Some(l) => l,
        None => a
            .checkpoint
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into()),
    };
    let mut groups = group_by_language(&load_parallel_tsv(&a.test)?);
    if !a.languages.is_empty() {
        groups.retain(|g| a.languages.contains(&g.language));
    }
    ensure!(!groups.is_empty(), "no test rows to evaluate");
    let pool = match &a.shots {
        Some(p) if a.k > 0 => load_parallel_tsv(p)?,
        _ => Vec::new(),
    };
    let finetune = FinetuneConfig {
        lr: a.lr,
        epochs: a.epochs,
        ..FinetuneConfig::default()
    };
    let decode = DecodeConfig {
        max_len: a.max_len,
        restarts: a.restarts,
    };
    let mut reports = Vec::new();
    for g in &groups {
        let shots: Vec<RawPair> = pool.iter().filter(|p| p.language == g.language).cloned().collect();
        let shots = encode_pairs(&shots, &ck.src_vocab, &ck.tgt_vocab);
        let items = test_items(&g.examples)?;
        let report = evaluate_kshot(
            &Rayon,
            &ck.model,
            &ck.params,
            &ck.src_vocab,
            &ck.tgt_vocab,
            &items,
            &shots,
            a.k,
            &finetune,
            &decode,
            a.seed,
        )
        .with_context(|| format!("evaluating {}", g.language))?;
        let s = Summary::from_report(&label, &report);
        println!(
            "{}\t{}\tk={}\t{:.4} {:.4} {:.4}",
            s.label, s.language, s.k, s.precision, s.recall, s.f1
        );
        reports.push(report);
    }
    write(&a.out, eval_report(&label, &reports))
}

pub fn gen_synthetic(a: GenArgs) -> Result<()> {
    let spec = match &a.spec {
        Some(p) => load_spec(p)?,
        None => SyntheticSpec::default(),
    };
    let (_, manifest) = write_synthetic(&spec, &a.out_dir)?;
    for (name, s) in &manifest.splits {
        info!("{name}: {} rows", s.rows);
    }
    Ok(())
}

fn load_corpus_logged(path: &Path) -> Result<Vec<CorpusEntry>> {
    let (corpus, warnings) = load_amr_corpus(path)?;
    for w in &warnings {
        warn!("{}:{}: skipped record: {}", path.display(), w.line, w.message);
    }
    if !warnings.is_empty() {
        warn!("{} records skipped", warnings.len());
    }
    Ok(corpus.entries)
}

pub fn linearize(a: LinearizeArgs) -> Result<()> {
    let entries = load_corpus_logged(&a.input)?;
    let mut pairs = Vec::with_capacity(entries.len());
    for e in &entries {
        let lin = preprocess(&e.graph).with_context(|| format!("record at line {}", e.line))?;
        pairs.push(RawPair {
            language: e.meta("lang").unwrap_or(&a.language).to_string(),
            source: e.sentence.split_whitespace().map(str::to_string).collect(),
            target: lin.tokens,
        });
    }
    ensure!(
        pairs.iter().all(|p| !p.source.is_empty()),
        "a record has an empty sentence"
    );
    write(&a.out, write_parallel_tsv(&pairs))
}

pub fn restore(a: IoArgs) -> Result<()> {
    let pairs = load_parallel_tsv(&a.input)?;
    let entries: Vec<CorpusEntry> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let graph = restore_graph(&p.target).unwrap_or_else(|_| {
                warn!("row {}: unrestorable, writing the empty graph", i + 1);
                empty_graph()
            });
            CorpusEntry {
                metadata: vec![
                    ("snt".to_string(), p.source.join(" ")),
                    ("lang".to_string(), p.language.clone()),
                ],
                sentence: p.source.join(" "),
                graph,
                line: i + 1,
            }
        })
        .collect();
    write(&a.out, write_amr_corpus(&entries))
}

pub fn normalize(a: IoArgs) -> Result<()> {
    let entries = load_corpus_logged(&a.input)?;
    write(&a.out, write_amr_corpus(&entries))
}

pub fn compare(a: CompareArgs) -> Result<()> {
    let mut cells = Vec::new();
    for p in &a.reports {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let summaries = read_summaries(&text).with_context(|| p.display().to_string())?;
        cells.extend(summaries.iter().map(Summary::cell));
    }
    let table = compare_runs(&cells)?;
    if table.rows.is_empty() {
        bail!("empty comparison");
    }
    write(&a.out, comparison_tsv(&table))?;
    if let Some(d) = &a.deltas {
        write(d, deltas_tsv(&table))?;
    }
    Ok(())
}
