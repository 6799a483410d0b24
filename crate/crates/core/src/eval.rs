//! k-shot evaluation: fine-tune a copy on k target-language shots, decode the
//! test set greedily, repair each hypothesis into a graph and score it.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::{derive_seed, Executor};
use crate::linearize::restore;
use crate::model::{Example, ModelError, Seq2Seq, Vocab};
use crate::penman::{serialize_penman, AmrGraph};
use crate::smatch::{aggregate, score_pairs, SmatchScore};

/// Concept of the placeholder graph scored for unrestorable output.
pub const EMPTY_CONCEPT: &str = "amr-empty";

pub fn empty_graph() -> AmrGraph {
    AmrGraph::single("v0", EMPTY_CONCEPT)
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{k} shots requested but the pool has {have}")]
    InsufficientShots { k: usize, have: usize },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("comparison grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FinetuneConfig {
    pub lr: f64,
    pub epochs: usize,
    /// Upper bound on the batch size; the effective size is `min(k, max_batch)`.
    pub max_batch: usize,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig {
            lr: 1e-5,
            epochs: 1,
            max_batch: 8,
        }
    }
}

/// Fine-tunes a copy of `params` on `k` shots drawn from `pool`.
///
/// The shots are a seed-determined sample of the pool; each epoch visits them
/// in a fresh seed-determined order with plain SGD. `k = 0` returns an
/// unchanged copy.
pub fn kshot_finetune(
    model: &Seq2Seq,
    params: &[f64],
    pool: &[Example],
    k: usize,
    config: &FinetuneConfig,
    seed: u64,
) -> Result<Vec<f64>, EvalError> {
    if pool.len() < k {
        return Err(EvalError::InsufficientShots { k, have: pool.len() });
    }
    let mut theta = params.to_vec();
    if k == 0 {
        return Ok(theta);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shots: Vec<&Example> = sample(&mut rng, pool.len(), k).into_iter().map(|i| &pool[i]).collect();
    let batch = k.min(config.max_batch.max(1));
    for _ in 0..config.epochs {
        shots.shuffle(&mut rng);
        for chunk in shots.chunks(batch) {
            let (_, grad) = model.loss_and_grad(&theta, chunk)?;
            for (t, g) in theta.iter_mut().zip(&grad) {
                *t -= config.lr * g;
            }
        }
    }
    Ok(theta)
}

/// One test sentence with its gold graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TestItem {
    pub language: String,
    pub source: Vec<String>,
    pub gold: AmrGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub source: String,
    pub hypothesis: String,
    /// PENMAN text of the graph that was scored.
    pub graph: String,
    pub restored: bool,
    pub matched: usize,
    pub total_left: usize,
    pub total_right: usize,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub language: String,
    pub k: usize,
    pub score: SmatchScore,
    pub records: Vec<EvalRecord>,
    pub lr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeConfig {
    pub max_len: usize,
    pub restarts: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            max_len: 128,
            restarts: crate::smatch::DEFAULT_RESTARTS,
        }
    }
}

/// Decodes and scores `test`, which must be non-empty and single-language.
///
/// Every hypothesis yields a graph: output that cannot be restored is scored
/// as [`empty_graph`]. Decoding and scoring fan out over `exec`; the corpus
/// score is the micro-average of the records.
#[allow(clippy::too_many_arguments)]
pub fn evaluate<X: Executor>(
    exec: &X,
    model: &Seq2Seq,
    params: &[f64],
    src_vocab: &Vocab,
    tgt_vocab: &Vocab,
    test: &[TestItem],
    decode: &DecodeConfig,
    seed: u64,
) -> Result<(SmatchScore, Vec<EvalRecord>), EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let hyps = exec.map(test, |_, item| {
        let ex = Example::encode::<String>(&item.language, &item.source, &[], src_vocab, tgt_vocab);
        model
            .generate_greedy(params, &ex.source, decode.max_len)
            .map(|ids| tgt_vocab.decode(&ids))
    });
    let mut graphs = Vec::with_capacity(test.len());
    let mut meta = Vec::with_capacity(test.len());
    for (item, hyp) in test.iter().zip(hyps) {
        let tokens = hyp?;
        let (graph, restored) = match restore(&tokens) {
            Ok(g) => (g, true),
            Err(_) => (empty_graph(), false),
        };
        meta.push((tokens.join(" "), restored));
        graphs.push((graph, item.gold.clone()));
    }
    let scores = score_pairs(exec, &graphs, decode.restarts, derive_seed(seed, 0x5eed));
    let corpus = aggregate(&scores).map_err(|_| EvalError::EmptyTestSet)?;
    let records = test
        .iter()
        .zip(meta)
        .zip(graphs.iter().zip(&scores))
        .map(|((item, (hypothesis, restored)), ((graph, _), s))| EvalRecord {
            source: item.source.join(" "),
            hypothesis,
            graph: serialize_penman(graph).unwrap_or_default(),
            restored,
            matched: s.matched,
            total_left: s.total_left,
            total_right: s.total_right,
            f1: s.f1,
        })
        .collect();
    Ok((corpus, records))
}

/// Fine-tunes on `k` shots from `pool` (if any) and evaluates `test`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_kshot<X: Executor>(
    exec: &X,
    model: &Seq2Seq,
    params: &[f64],
    src_vocab: &Vocab,
    tgt_vocab: &Vocab,
    test: &[TestItem],
    pool: &[Example],
    k: usize,
    finetune: &FinetuneConfig,
    decode: &DecodeConfig,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let language = test.first().ok_or(EvalError::EmptyTestSet)?.language.clone();
    let adapted = kshot_finetune(model, params, pool, k, finetune, seed)?;
    let (score, records) = evaluate(exec, model, &adapted, src_vocab, tgt_vocab, test, decode, seed)?;
    Ok(EvalReport {
        language,
        k,
        score,
        records,
        lr: finetune.lr,
        seed,
    })
}

/// One cell of the comparison grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub model: String,
    pub language: String,
    pub k: usize,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub model: String,
    pub k: usize,
    /// One value per language column.
    pub values: Vec<f64>,
    pub avg: f64,
}

/// Rows are model × k (ordered by k, then by first appearance of the model);
/// columns are languages in first-appearance order plus the unweighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub languages: Vec<String>,
    pub rows: Vec<GridRow>,
    /// Same shape as `rows`, minus the first model's row at the same k.
    pub deltas: Vec<GridRow>,
}

fn first_appearance<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

pub fn compare_runs(cells: &[Cell]) -> Result<ComparisonTable, EvalError> {
    if cells.is_empty() {
        return Err(EvalError::GridMismatch("no reports".into()));
    }
    let models = first_appearance(cells.iter().map(|c| c.model.as_str()));
    let languages = first_appearance(cells.iter().map(|c| c.language.as_str()));
    let mut ks: Vec<usize> = cells.iter().map(|c| c.k).collect();
    ks.sort_unstable();
    ks.dedup();

    let mut grid: BTreeMap<(&str, usize, &str), f64> = BTreeMap::new();
    for c in cells {
        if grid.insert((&c.model, c.k, &c.language), c.f1).is_some() {
            return Err(EvalError::GridMismatch(alloc::format!(
                "duplicate cell {} k={} {}",
                c.model,
                c.k,
                c.language
            )));
        }
    }
    let expected = models.len() * ks.len() * languages.len();
    if grid.len() != expected {
        return Err(EvalError::GridMismatch(alloc::format!(
            "{} cells for {} models x {} k values x {} languages",
            grid.len(),
            models.len(),
            ks.len(),
            languages.len()
        )));
    }

    let row = |model: &str, k: usize| -> GridRow {
        let values: Vec<f64> = languages.iter().map(|l| grid[&(model, k, l.as_str())]).collect();
        let avg = values.iter().sum::<f64>() / values.len() as f64;
        GridRow {
            model: model.to_string(),
            k,
            values,
            avg,
        }
    };
    let mut rows = Vec::new();
    let mut deltas = Vec::new();
    for &k in &ks {
        let base = row(&models[0], k);
        for m in &models {
            let r = row(m, k);
            deltas.push(GridRow {
                model: r.model.clone(),
                k,
                values: r.values.iter().zip(&base.values).map(|(a, b)| a - b).collect(),
                avg: r.avg - base.avg,
            });
            rows.push(r);
        }
    }
    Ok(ComparisonTable {
        languages,
        rows,
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::model::{ModelConfig, EOS};
    use crate::penman::parse_penman;
    use alloc::format;
    use alloc::vec;

    fn tiny() -> (Seq2Seq, Vec<f64>, Vocab, Vocab) {
        let mut src = Vocab::new();
        src.add_language("xx");
        for t in ["a", "b"] {
            src.insert(t);
        }
        let mut tgt = Vocab::new();
        for t in ["(", ")", "c0", "c1"] {
            tgt.insert(t);
        }
        let model = Seq2Seq::new(ModelConfig {
            src_vocab: src.len(),
            tgt_vocab: tgt.len(),
            embed_dim: 4,
            hidden_dim: 6,
        })
        .unwrap();
        let p = model.init_params(3);
        (model, p, src, tgt)
    }

    fn item(src: &str, gold: &str) -> TestItem {
        TestItem {
            language: "xx".into(),
            source: src.split_whitespace().map(String::from).collect(),
            gold: parse_penman(gold).unwrap(),
        }
    }

    #[test]
    fn zero_shot_is_a_copy() {
        let (m, p, _, _) = tiny();
        assert_eq!(kshot_finetune(&m, &p, &[], 0, &FinetuneConfig::default(), 1).unwrap(), p);
    }

    #[test]
    fn shot_shortage() {
        let (m, p, _, _) = tiny();
        assert!(matches!(
            kshot_finetune(&m, &p, &[], 2, &FinetuneConfig::default(), 1),
            Err(EvalError::InsufficientShots { k: 2, have: 0 })
        ));
    }

    #[test]
    fn finetune_lowers_loss_and_is_seeded() {
        let (m, p, src, tgt) = tiny();
        let pool: Vec<Example> = (0..8)
            .map(|i| {
                let w = if i % 2 == 0 { "a" } else { "b" };
                let c = format!("c{}", i % 2);
                Example::encode("xx", &[w], &["(", c.as_str(), ")"], &src, &tgt)
            })
            .collect();
        let cfg = FinetuneConfig {
            lr: 0.5,
            epochs: 5,
            max_batch: 8,
        };
        let a = kshot_finetune(&m, &p, &pool, 8, &cfg, 7).unwrap();
        let b = kshot_finetune(&m, &p, &pool, 8, &cfg, 7).unwrap();
        assert_eq!(a, b);
        let refs: Vec<&Example> = pool.iter().collect();
        assert!(m.loss(&a, &refs).unwrap() < m.loss(&p, &refs).unwrap());
    }

    #[test]
    fn immediate_eos_scores_dummy_graph() {
        let (m, mut p, src, tgt) = tiny();
        let bias = m.block("out.bias").unwrap().range();
        p[bias.start + EOS] = 100.0;
        let test = vec![item("a", "(v / c0)"), item("b a", "(v / c1 :ARG0 (w / c0))")];
        let (score, records) = evaluate(&Sequential, &m, &p, &src, &tgt, &test, &DecodeConfig::default(), 0).unwrap();
        assert!(records.iter().all(|r| !r.restored && r.hypothesis.is_empty()));
        assert!(records.iter().all(|r| r.graph == "(v0 / amr-empty)"));
        // The dummy graph contributes its instance and TOP triples.
        assert_eq!(score.total_left, 4);
        assert_eq!(score.total_right, 2 + 4);
        assert_eq!(score.matched, 2);
        let m_sum: usize = records.iter().map(|r| r.matched).sum();
        let l_sum: usize = records.iter().map(|r| r.total_left).sum();
        let r_sum: usize = records.iter().map(|r| r.total_right).sum();
        assert_eq!(SmatchScore::from_counts(m_sum, l_sum, r_sum).f1, score.f1);
    }

    #[test]
    fn zero_shot_reports_repeat() {
        let (m, p, src, tgt) = tiny();
        let test = vec![item("a b", "(v / c0)")];
        let run = || {
            evaluate_kshot(
                &Sequential,
                &m,
                &p,
                &src,
                &tgt,
                &test,
                &[],
                0,
                &FinetuneConfig::default(),
                &DecodeConfig { max_len: 12, restarts: 4 },
                5,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
        assert!(matches!(
            evaluate(&Sequential, &m, &p, &src, &tgt, &[], &DecodeConfig::default(), 0),
            Err(EvalError::EmptyTestSet)
        ));
    }

    fn grid(models: &[&str], ks: &[usize], langs: &[&str], f: impl Fn(usize, usize, usize) -> f64) -> Vec<Cell> {
        let mut out = Vec::new();
        for (mi, m) in models.iter().enumerate() {
            for (ki, &k) in ks.iter().enumerate() {
                for (li, l) in langs.iter().enumerate() {
                    out.push(Cell {
                        model: m.to_string(),
                        language: l.to_string(),
                        k,
                        f1: f(mi, ki, li),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn comparison_shape() {
        let langs = ["de", "es", "it", "ko", "hr"];
        let cells = grid(&["baseline", "maml"], &[0, 32, 128], &langs, |m, k, l| (m + k + l) as f64 / 10.0);
        let t = compare_runs(&cells).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert_eq!(t.languages.len() + 1, 6);
        assert_eq!(t.rows[0].model, "baseline");
        assert_eq!(t.rows[1].k, 0);
        assert_eq!(t.rows[2].k, 32);
        let r = &t.rows[3];
        assert!((r.avg - r.values.iter().sum::<f64>() / 5.0).abs() < 1e-15);
        assert!(t.deltas.iter().step_by(2).all(|d| d.values.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn identical_models_zero_deltas() {
        let cells = grid(&["a", "b"], &[0, 32], &["x", "y"], |_, k, l| (k * 3 + l) as f64);
        let t = compare_runs(&cells).unwrap();
        assert!(t.deltas.iter().all(|d| d.avg == 0.0 && d.values.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn ragged_grid_rejected() {
        let mut cells = grid(&["a", "b"], &[0, 32], &["x", "y"], |_, _, _| 0.5);
        cells.pop();
        assert!(matches!(compare_runs(&cells), Err(EvalError::GridMismatch(_))));
        let mut dup = grid(&["a"], &[0], &["x"], |_, _, _| 0.5);
        dup.push(dup[0].clone());
        assert!(matches!(compare_runs(&dup), Err(EvalError::GridMismatch(_))));
    }
}
