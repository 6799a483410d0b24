//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Run with `cargo test -p metamr --test acceptance`. Pass criterion numbers
//! (`-- 1 5 9`) to run a subset.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use common::{ok, p, read};
use metamr::report::{read_summaries, Summary};
use metamr_core::autodiff::grad_check;
use metamr_core::exec::Sequential;
use metamr_core::fuzz::{random_graph, random_tokens, random_tree};
use metamr_core::linearize::{preprocess, restore};
use metamr_core::meta::{
    joint_step, maml_train, outer_step, scheduled_rate, Episode, LanguageDataset, Learner, ScalarQuadratic, TrainConfig,
};
use metamr_core::model::{Example, ModelConfig, ModelError, Seq2Seq, BOS, EOS};
use metamr_core::penman::validate;
use metamr_core::smatch::{aggregate, compute_smatch, compute_smatch_exact};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c1_smatch_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let (mut equal, mut exceeded) = (0, 0);
    for i in 0..200u64 {
        let a = random_graph(&mut r, 6);
        let b = random_graph(&mut r, 6);
        let exact = compute_smatch_exact(&a, &b).map_err(|e| e.to_string())?;
        let climb = compute_smatch(&a, &b, 8, i);
        equal += usize::from(climb.matched == exact.matched);
        exceeded += usize::from(climb.matched > exact.matched);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        equal >= 190 && exceeded == 0 && secs < 10.0,
        format!("{equal}/200 optimal, {exceeded} above exact, {secs:.2}s"),
    )
}

fn c2_smatch_symmetry() -> Outcome {
    let mut r = rng(2);
    let mut not_one = 0;
    let mut asymmetric = 0;
    for i in 0..100u64 {
        let a = random_graph(&mut r, 8);
        let b = random_graph(&mut r, 8);
        not_one += usize::from(compute_smatch(&a, &a, 4, i).f1 != 1.0);
        let ab = compute_smatch(&a, &b, 4, i);
        let ba = compute_smatch(&b, &a, 4, i);
        asymmetric += usize::from(ab.precision != ba.recall || ab.recall != ba.precision);
    }
    check(
        not_one == 0 && asymmetric == 0,
        format!("{not_one} self-scores below 1, {asymmetric} asymmetric pairs of 100"),
    )
}

fn c3_round_trip() -> Outcome {
    let mut r = rng(3);
    let mut scores = Vec::new();
    for i in 0..500u64 {
        let g = random_tree(&mut r, 10);
        let lin = preprocess(&g).map_err(|e| e.to_string())?;
        let back = restore(&lin.tokens).map_err(|e| e.to_string())?;
        scores.push(compute_smatch(&back, &g, 4, i));
    }
    let corpus = aggregate(&scores).map_err(|e| e.to_string())?;

    // Every fuzzed sequence carries at least one concept-like token, the
    // precondition for restore to be total.
    let concepts = ["dog", "want-01", "boy", "x"];
    let mut failures = 0;
    for _ in 0..1000 {
        let mut tokens = random_tokens(&mut r, 40);
        if !tokens.iter().any(|t| t.starts_with(char::is_alphabetic)) {
            let at = r.gen_range(0..=tokens.len());
            tokens.insert(at, concepts.choose(&mut r).unwrap().to_string());
        }
        match restore(&tokens) {
            Ok(g) if validate(&g).is_empty() => {}
            _ => failures += 1,
        }
    }
    check(
        format!("{:.4}", corpus.f1) == "1.0000" && failures == 0,
        format!("corpus smatch {:.4} on 500 trees, {failures}/1000 fuzzed restores failed", corpus.f1),
    )
}

fn random_example(r: &mut ChaCha8Rng, src: usize, tgt: usize) -> Example {
    let mut source: Vec<usize> = (0..r.gen_range(1..5)).map(|_| r.gen_range(4..src)).collect();
    source.push(EOS);
    let mut target = vec![BOS];
    target.extend((0..r.gen_range(1..5)).map(|_| r.gen_range(4..tgt)));
    target.push(EOS);
    Example { language: "x".into(), source, target }
}

fn c4_gradients() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut blocks = 0;
    for seed in 0..20u64 {
        let mut r = rng(400 + seed);
        let config = ModelConfig {
            src_vocab: r.gen_range(6..12),
            tgt_vocab: r.gen_range(6..12),
            embed_dim: r.gen_range(2..6),
            hidden_dim: r.gen_range(2..7),
        };
        let model = Seq2Seq::new(config).map_err(|e| e.to_string())?;
        let params = model.init_params(seed);
        let batch: Vec<Example> = (0..3).map(|_| random_example(&mut r, config.src_vocab, config.tgt_vocab)).collect();
        let refs: Vec<&Example> = batch.iter().collect();
        let tensors = model.block_tensors(&params);
        blocks = tensors.len();
        let err = grad_check(
            |tape, vars| {
                model.loss_on(tape, vars, &refs).map_err(|e| match e {
                    ModelError::Autodiff(a) => a,
                    other => panic!("{other}"),
                })
            },
            &tensors,
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max(err);
    }
    check(worst < 1e-4, format!("max relative error {worst:.2e} over {blocks} blocks, 20 seeds"))
}

/// First-order MAML on the scalar quadratic family in closed form: `P` SGD
/// steps from `Θ` towards the support mean `m` give `m + (1 - α)^P (Θ - m)`,
/// and the query gradient there is the distance to the query mean.
fn fomaml_oracle(theta: f64, tasks: &[(Vec<f64>, Vec<f64>)], alpha: f64, p: usize, beta: f64) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let total: f64 = tasks
        .iter()
        .map(|(s, q)| {
            let m = mean(s);
            m + (1.0 - alpha).powi(p as i32) * (theta - m) - mean(q)
        })
        .sum();
    theta - beta * total
}

fn c5_fomaml_oracle() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = r.gen_range(0.001..0.9);
        let beta = r.gen_range(0.001..1.0);
        let steps = r.gen_range(0..=3);
        let languages = r.gen_range(1..=4);
        let k = r.gen_range(1..=4);
        let theta: f64 = r.gen_range(-3.0..3.0);
        let tasks: Vec<(Vec<f64>, Vec<f64>)> = (0..languages)
            .map(|_| {
                let s = (0..k).map(|_| r.gen_range(-5.0..5.0)).collect();
                let q = (0..k).map(|_| r.gen_range(-5.0..5.0)).collect();
                (s, q)
            })
            .collect();
        let episodes: Vec<Episode<'_, f64>> = tasks
            .iter()
            .map(|(s, q)| Episode { language: "x", support: s.iter().collect(), query: q.iter().collect() })
            .collect();
        let got = outer_step(&ScalarQuadratic, &Sequential, &[theta], &episodes, alpha, steps, beta)
            .map_err(|e| e.to_string())?
            .params[0];
        worst = worst.max((got - fomaml_oracle(theta, &tasks, alpha, steps, beta)).abs());
    }
    check(worst <= 1e-10, format!("max deviation {worst:.2e} over 100 draws"))
}

fn c6_zero_step_collapse() -> Outcome {
    let model = Seq2Seq::new(ModelConfig { src_vocab: 12, tgt_vocab: 10, embed_dim: 6, hidden_dim: 8 })
        .map_err(|e| e.to_string())?;
    let mut differing = 0;
    for seed in 0..10u64 {
        let mut r = rng(600 + seed);
        let theta = model.init_params(seed);
        let support: Vec<Example> = (0..12).map(|_| random_example(&mut r, 12, 10)).collect();
        let query: Vec<Example> = (0..12).map(|_| random_example(&mut r, 12, 10)).collect();
        let episodes: Vec<Episode<'_, Example>> = (0..4)
            .map(|i| Episode {
                language: "x",
                support: support[3 * i..3 * i + 3].iter().collect(),
                query: query[3 * i..3 * i + 3].iter().collect(),
            })
            .collect();
        let maml = outer_step(&model, &Sequential, &theta, &episodes, 0.5, 0, 0.05).map_err(|e| e.to_string())?;
        let union: Vec<&Example> = query.iter().collect();
        let joint = joint_step(&model, &Sequential, &theta, &union, 3, 0.05).map_err(|e| e.to_string())?;
        differing += maml.params.iter().zip(&joint.params).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
    }
    check(differing == 0, format!("{differing} differing parameter bits over 10 seeds"))
}

/// Records every example handed to the learner.
struct Counting {
    seen: Mutex<Vec<f64>>,
}

impl Learner for Counting {
    type Example = f64;
    type Error = core::convert::Infallible;

    fn loss_and_grad(&self, params: &[f64], batch: &[&f64]) -> Result<(f64, Vec<f64>), Self::Error> {
        self.seen.lock().unwrap().extend(batch.iter().copied());
        ScalarQuadratic.loss_and_grad(params, batch)
    }
}

fn c7_batch_identity() -> Outcome {
    let datasets: Vec<LanguageDataset<f64>> = (0..14)
        .map(|l| LanguageDataset {
            language: format!("l{l}"),
            examples: (0..40).map(|i| (l * 1000 + i) as f64).collect(),
        })
        .collect();
    let config = TrainConfig { k: 8, num_languages: 14, total_steps: 1, warmup_steps: 0, ..TrainConfig::default() };
    let learner = Counting { seen: Mutex::new(Vec::new()) };
    maml_train(&learner, &Sequential, &datasets, &config, vec![0.0], |_, _| Ok(0.0)).map_err(|e| e.to_string())?;
    let seen = learner.seen.into_inner().unwrap();
    let distinct: BTreeSet<u64> = seen.iter().map(|x| x.to_bits()).collect();
    let languages: BTreeSet<u64> = seen.iter().map(|x| (*x as u64) / 1000).collect();
    check(
        config.batch_size() == 224 && seen.len() == 224 && distinct.len() == 224 && languages.len() == 14,
        format!(
            "configured N={}, consumed {} examples ({} distinct) from {} languages",
            config.batch_size(),
            seen.len(),
            distinct.len(),
            languages.len()
        ),
    )
}

fn c8_scheduler() -> Outcome {
    let (peak, warmup, total) = (3e-5, 1500, 30000);
    let mut worst: f64 = 0.0;
    for s in 0..=total {
        let want = if s <= warmup {
            peak * s as f64 / warmup as f64
        } else {
            peak * (total - s) as f64 / (total - warmup) as f64
        };
        worst = worst.max((scheduled_rate(s, peak, warmup, total) - want).abs());
    }
    let at0 = scheduled_rate(0, peak, warmup, total);
    let at_peak = scheduled_rate(warmup, peak, warmup, total);
    check(
        at0 == 0.0 && at_peak == peak && worst <= 1e-12,
        format!("rate(0)={at0}, rate(1500)={at_peak:e}, max deviation {worst:.1e}"),
    )
}

const DESK_SPEC: &str = r#"{"train_size": 300, "dev_size": 200, "test_size": 100}"#;

const DESK_CONFIG: &str = r#"{
  "train": {"alpha": 0.1, "beta": 0.2, "k": 4, "total_steps": 3000, "warmup_steps": 150,
            "eval_interval": 250, "patience_steps": 100000, "seed": 1},
  "model": {"embed_dim": 32, "hidden_dim": 64, "seed": 0},
  "dev": {"max_per_language": 20, "max_len": 40, "restarts": 4}
}"#;

fn corpus_f1(summaries: &[Summary]) -> f64 {
    let (m, l, r) = summaries
        .iter()
        .fold((0, 0, 0), |a, s| (a.0 + s.matched, a.1 + s.total_left, a.2 + s.total_right));
    if l + r == 0 {
        0.0
    } else {
        2.0 * m as f64 / (l + r) as f64
    }
}

fn c9_desk_experiment() -> Outcome {
    let start = Instant::now();
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-desk");
    let _ = fs::remove_dir_all(&root);
    let data = root.join("data");
    fs::create_dir_all(&data).map_err(|e| e.to_string())?;
    fs::write(root.join("spec.json"), DESK_SPEC).map_err(|e| e.to_string())?;
    fs::write(root.join("config.json"), DESK_CONFIG).map_err(|e| e.to_string())?;
    ok(["gen-synthetic", "--spec", p(&root.join("spec.json")), "--out-dir", p(&data)]);

    let mut notes = Vec::new();
    let mut passed = true;
    let mut reports = Vec::new();
    let mut held_out: Vec<(String, usize, f64)> = Vec::new();
    for mode in ["maml", "joint"] {
        let out = root.join(mode);
        ok([
            "train", "--mode", mode, "--config", p(&root.join("config.json")),
            "--data-dir", p(&data), "--out", p(&out),
        ]);
        let ckpt = out.join("model.ckpt");

        let seen = out.join("seen.jsonl");
        ok([
            "eval", "--checkpoint", p(&ckpt), "--test", p(&data.join("dev.tsv")),
            "--languages", "l0,l1,l2,l3,l4,l5", "--out", p(&seen), "--label", mode,
            "--max-len", "40", "--restarts", "4",
        ]);
        let text = fs::read_to_string(&seen).map_err(|e| e.to_string())?;
        let dev_f1 = corpus_f1(&read_summaries(&text).map_err(|e| e.to_string())?);
        passed &= dev_f1 >= 0.90;
        notes.push(format!("{mode} seen dev {dev_f1:.4}"));

        for k in [0usize, 32, 128] {
            let report = out.join(format!("k{k}.jsonl"));
            let k_arg = k.to_string();
            ok([
                "eval", "--checkpoint", p(&ckpt), "--test", p(&data.join("test.tsv")),
                "--shots", p(&data.join("dev.tsv")), "--k", &k_arg, "--languages", "l6,l7",
                "--lr", "0.3", "--epochs", "3", "--max-len", "40", "--restarts", "4",
                "--seed", "3", "--label", mode, "--out", p(&report),
            ]);
            if mode == "maml" {
                let text = fs::read_to_string(&report).map_err(|e| e.to_string())?;
                for s in read_summaries(&text).map_err(|e| e.to_string())? {
                    held_out.push((s.language, k, s.f1));
                }
            }
            reports.push(report);
        }
    }
    for lang in ["l6", "l7"] {
        let f = |k: usize| held_out.iter().find(|(l, kk, _)| l == lang && *kk == k).map(|x| x.2).unwrap_or(f64::NAN);
        let (zero, shots) = (f(0), f(32));
        passed &= shots >= zero + 0.05;
        notes.push(format!("maml {lang} k=0 {zero:.4} k=32 {shots:.4}"));
    }

    let grid = root.join("grid.tsv");
    let mut args = vec!["compare".to_string(), "--reports".to_string()];
    args.extend(reports.iter().map(|r| p(r).to_string()));
    args.extend(["--out".to_string(), p(&grid).to_string()]);
    ok(&args);
    let table = fs::read_to_string(&grid).map_err(|e| e.to_string())?;
    let rows = table.lines().count();
    passed &= rows == 1 + 6 && table.starts_with("model\tk\tl6\tl7\tavg");
    println!("desk-scale comparison grid ({}):\n{table}", grid.display());

    let secs = start.elapsed().as_secs_f64();
    passed &= secs < 1800.0;
    notes.push(format!("{} grid rows, {secs:.0}s", rows - 1));
    check(passed, notes.join("; "))
}

fn c10_early_stopping() -> Outcome {
    let data = [LanguageDataset { language: "x".to_string(), examples: (0..16).map(f64::from).collect() }];
    let mut notes = Vec::new();
    let mut passed = true;
    for (patience, interval, total) in [(750usize, 50usize, 20_000usize), (7500, 500, 30_000)] {
        let config = TrainConfig {
            alpha: 0.1,
            beta: 0.01,
            k: 2,
            num_languages: 1,
            total_steps: total,
            warmup_steps: total / 20,
            eval_interval: interval,
            patience_steps: patience,
            ..TrainConfig::default()
        };
        let out = maml_train(&ScalarQuadratic, &Sequential, &data, &config, vec![0.0], |_, _| Ok(0.5))
            .map_err(|e| e.to_string())?;
        let gap = out.stopped_at - out.best_step;
        passed &= out.early_stopped && gap <= patience + interval && out.stopped_at < total;
        notes.push(format!("patience {patience}: best {} stopped {}", out.best_step, out.stopped_at));
    }
    check(passed, notes.join("; "))
}

fn c11_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let data = root.join("data");
    fs::write(root.join("spec.json"), r#"{"train_size": 60, "dev_size": 40, "test_size": 20}"#).map_err(|e| e.to_string())?;
    fs::write(
        root.join("config.json"),
        r#"{"train": {"alpha": 0.1, "beta": 0.2, "k": 4, "total_steps": 30, "warmup_steps": 3, "eval_interval": 10},
            "model": {"embed_dim": 8, "hidden_dim": 12}, "dev": {"max_per_language": 5, "max_len": 20}}"#,
    )
    .map_err(|e| e.to_string())?;
    ok(["gen-synthetic", "--spec", p(&root.join("spec.json")), "--out-dir", p(&data)]);

    let run = |name: &str, threads: &str, mode: &str| -> Vec<Vec<u8>> {
        let out = root.join(name);
        ok([
            "--threads", threads, "train", "--mode", mode, "--config", p(&root.join("config.json")),
            "--data-dir", p(&data), "--out", p(&out),
        ]);
        let report = out.join("k8.jsonl");
        ok([
            "--threads", threads, "eval", "--checkpoint", p(&out.join("model.ckpt")), "--test", p(&data.join("test.tsv")),
            "--shots", p(&data.join("dev.tsv")), "--k", "8", "--lr", "0.1", "--seed", "4", "--label", "m",
            "--out", p(&report),
        ]);
        [out.join("train.log"), out.join("model.ckpt"), report].iter().map(|f| read(f)).collect()
    };
    let mut identical = true;
    for mode in ["maml", "joint"] {
        let a = run(&format!("{mode}-a"), "2", mode);
        let b = run(&format!("{mode}-b"), "2", mode);
        let c = run(&format!("{mode}-c"), "1", mode);
        identical &= a == b && a == c;
    }
    check(
        identical,
        "train.log, model.ckpt and k=8 report byte-identical across reruns and thread counts, both modes".to_string(),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    (1, "smatch hill-climb vs exact", c1_smatch_oracle),
    (2, "smatch reflexivity and symmetry", c2_smatch_symmetry),
    (3, "linearization round trip and restore totality", c3_round_trip),
    (4, "gradient check", c4_gradients),
    (5, "first-order MAML closed form", c5_fomaml_oracle),
    (6, "zero-step MAML equals joint", c6_zero_step_collapse),
    (7, "episode batch size", c7_batch_identity),
    (8, "learning-rate schedule", c8_scheduler),
    (9, "desk-scale experiment", c9_desk_experiment),
    (10, "early stopping", c10_early_stopping),
    (11, "CLI determinism", c11_determinism),
];

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run) in CRITERIA {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = Duration::as_secs_f64(&start.elapsed());
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{took:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail} [{took:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
