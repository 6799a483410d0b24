//! First-order MAML over per-language episodes, the joint-learning baseline,
//! and the shared linear warm-up/decay learning-rate schedule.
//!
//! One MAML outer step copies Θ per language, adapts each copy on its support
//! set with plain SGD for `P` steps, takes the query-set gradient at the
//! adapted parameters, and subtracts the scheduled rate times the *sum* of
//! those gradients from Θ. Second-order terms are dropped.
//!
//! The joint baseline draws one batch uniformly from the concatenation of all
//! languages. Its gradient is accumulated over consecutive chunks of `K`
//! examples and summed, the same reduction the outer step applies across
//! languages; with `P = 0` the two updates coincide bit for bit.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::Executor;
use crate::model::{Example, ModelError, Seq2Seq};

/// Something trainable with a flat parameter vector.
pub trait Learner: Sync {
    type Example: Sync;
    type Error: fmt::Debug + fmt::Display + Send;

    /// Mean loss over `batch` and its gradient.
    fn loss_and_grad(&self, params: &[f64], batch: &[&Self::Example]) -> Result<(f64, Vec<f64>), Self::Error>;
}

impl Learner for Seq2Seq {
    type Example = Example;
    type Error = ModelError;

    fn loss_and_grad(&self, params: &[f64], batch: &[&Example]) -> Result<(f64, Vec<f64>), ModelError> {
        Seq2Seq::loss_and_grad(self, params, batch)
    }
}

/// One-parameter task family with loss `mean ½(θ - s)²` over targets `s`.
///
/// Adaptation and outer updates have closed forms, which makes it the
/// reference problem for checking the trainer arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarQuadratic;

impl Learner for ScalarQuadratic {
    type Example = f64;
    type Error = core::convert::Infallible;

    fn loss_and_grad(&self, params: &[f64], batch: &[&f64]) -> Result<(f64, Vec<f64>), Self::Error> {
        let theta = params[0];
        let n = batch.len() as f64;
        let loss = batch.iter().map(|s| 0.5 * (theta - **s) * (theta - **s)).sum::<f64>() / n;
        let grad = batch.iter().map(|s| theta - **s).sum::<f64>() / n;
        Ok((loss, vec![grad]))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    /// Inner-loop SGD rate.
    pub alpha: f64,
    /// Peak outer-loop (and joint) rate.
    pub beta: f64,
    /// Examples per support set and per query set.
    pub k: usize,
    /// Inner adaptation steps.
    pub adaptation_steps: usize,
    pub num_languages: usize,
    /// Languages sampled per step; `None` uses all of them.
    pub languages_per_step: Option<usize>,
    pub total_steps: usize,
    pub warmup_steps: usize,
    pub eval_interval: usize,
    pub patience_steps: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 1e-5,
            beta: 3e-5,
            k: 8,
            adaptation_steps: 1,
            num_languages: 14,
            languages_per_step: None,
            total_steps: 30_000,
            warmup_steps: 1_500,
            eval_interval: 500,
            patience_steps: 7_500,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn active_languages(&self) -> usize {
        self.languages_per_step
            .map_or(self.num_languages, |l| l.min(self.num_languages))
    }

    /// Examples consumed per step: `2 · K · min(I, languages_per_step)`.
    pub fn batch_size(&self) -> usize {
        2 * self.k * self.active_languages()
    }

    pub fn validate(&self) -> Result<(), String> {
        let rate_ok = |r: f64| r.is_finite() && r > 0.0;
        if !rate_ok(self.alpha) || !rate_ok(self.beta) {
            return Err("learning rates must be positive and finite".into());
        }
        if self.k == 0 {
            return Err("k must be at least 1".into());
        }
        if self.num_languages == 0 {
            return Err("num_languages must be at least 1".into());
        }
        if let Some(l) = self.languages_per_step {
            if l == 0 || l > self.num_languages {
                return Err("languages_per_step must be in 1..=num_languages".into());
            }
        }
        if self.eval_interval == 0 {
            return Err("eval_interval must be at least 1".into());
        }
        if self.warmup_steps > self.total_steps {
            return Err("warmup_steps exceeds total_steps".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TrainError<E: fmt::Debug + fmt::Display> {
    #[error("language `{language}` has {have} examples, {need} required")]
    InsufficientData {
        language: String,
        need: usize,
        have: usize,
    },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("no episodes to train on")]
    NoEpisodes,
    #[error(transparent)]
    Learner(E),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageDataset<E> {
    pub language: String,
    pub examples: Vec<E>,
}

/// Support and query draw for one language.
#[derive(Debug, Clone)]
pub struct Episode<'a, E> {
    pub language: &'a str,
    pub support: Vec<&'a E>,
    pub query: Vec<&'a E>,
}

/// Draws `2k` distinct examples; the first `k` form the support set.
pub fn sample_episode<'a, E, X: fmt::Debug + fmt::Display>(
    dataset: &'a LanguageDataset<E>,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Episode<'a, E>, TrainError<X>> {
    let have = dataset.examples.len();
    if have < 2 * k {
        return Err(TrainError::InsufficientData {
            language: dataset.language.clone(),
            need: 2 * k,
            have,
        });
    }
    let picks = sample(rng, have, 2 * k).into_vec();
    let (s, q) = picks.split_at(k);
    Ok(Episode {
        language: &dataset.language,
        support: s.iter().map(|&i| &dataset.examples[i]).collect(),
        query: q.iter().map(|&i| &dataset.examples[i]).collect(),
    })
}

/// `P` full-batch SGD steps on `support` from a copy of `theta`.
pub fn inner_adapt<L: Learner>(
    learner: &L,
    theta: &[f64],
    support: &[&L::Example],
    alpha: f64,
    steps: usize,
) -> Result<Vec<f64>, L::Error> {
    let mut phi = theta.to_vec();
    for _ in 0..steps {
        let (_, grad) = learner.loss_and_grad(&phi, support)?;
        for (p, g) in phi.iter_mut().zip(&grad) {
            *p -= alpha * g;
        }
    }
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub params: Vec<f64>,
    /// Loss per episode or chunk, in input order.
    pub losses: Vec<f64>,
}

fn sum_in_order(len: usize, grads: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for g in grads {
        for (a, x) in acc.iter_mut().zip(g) {
            *a += x;
        }
    }
    acc
}

fn apply(theta: &[f64], grad: &[f64], rate: f64) -> Vec<f64> {
    theta.iter().zip(grad).map(|(t, g)| t - rate * g).collect()
}

/// One first-order MAML update of `theta` at learning rate `rate`.
pub fn outer_step<L: Learner, X: Executor>(
    learner: &L,
    exec: &X,
    theta: &[f64],
    episodes: &[Episode<'_, L::Example>],
    alpha: f64,
    adaptation_steps: usize,
    rate: f64,
) -> Result<StepOutcome, TrainError<L::Error>> {
    if episodes.is_empty() {
        return Err(TrainError::NoEpisodes);
    }
    let results = exec.map(episodes, |_, ep| {
        let phi = inner_adapt(learner, theta, &ep.support, alpha, adaptation_steps)?;
        learner.loss_and_grad(&phi, &ep.query)
    });
    let mut losses = Vec::with_capacity(results.len());
    let mut grads = Vec::with_capacity(results.len());
    for r in results {
        let (l, g) = r.map_err(TrainError::Learner)?;
        losses.push(l);
        grads.push(g);
    }
    let total = sum_in_order(theta.len(), &grads);
    Ok(StepOutcome {
        params: apply(theta, &total, rate),
        losses,
    })
}

/// One joint-learning update: gradients of consecutive `chunk`-sized slices of
/// `batch` are summed in order.
pub fn joint_step<L: Learner, X: Executor>(
    learner: &L,
    exec: &X,
    theta: &[f64],
    batch: &[&L::Example],
    chunk: usize,
    rate: f64,
) -> Result<StepOutcome, TrainError<L::Error>> {
    if batch.is_empty() || chunk == 0 {
        return Err(TrainError::NoEpisodes);
    }
    let chunks: Vec<&[&L::Example]> = batch.chunks(chunk).collect();
    let results = exec.map(&chunks, |_, c| learner.loss_and_grad(theta, c));
    let mut losses = Vec::with_capacity(results.len());
    let mut grads = Vec::with_capacity(results.len());
    for r in results {
        let (l, g) = r.map_err(TrainError::Learner)?;
        losses.push(l);
        grads.push(g);
    }
    let total = sum_in_order(theta.len(), &grads);
    Ok(StepOutcome {
        params: apply(theta, &total, rate),
        losses,
    })
}

/// Linear warm-up from 0 to `peak` over `[0, warmup]`, then linear decay to 0
/// at `total`.
pub fn scheduled_rate(step: usize, peak: f64, warmup: usize, total: usize) -> f64 {
    if step <= warmup {
        if warmup == 0 {
            peak
        } else {
            peak * (step as f64 / warmup as f64)
        }
    } else if step >= total {
        0.0
    } else {
        peak * ((total - step) as f64 / (total - warmup) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// `(language, query loss)` for MAML; `("joint", batch loss)` for the baseline.
    pub losses: Vec<(String, f64)>,
    pub rate: f64,
    pub dev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Parameters with the best dev score (the final ones if never evaluated).
    pub best: Vec<f64>,
    pub best_step: usize,
    pub best_dev: Option<f64>,
    /// Last step executed.
    pub stopped_at: usize,
    pub early_stopped: bool,
    pub log: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Maml,
    Joint,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Maml => "maml",
            Mode::Joint => "joint",
        }
    }
}

/// Tracks the best dev score and decides when patience runs out.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
        }
    }

    /// Records a dev score; returns true if it is a new best.
    pub fn observe(&mut self, step: usize, score: f64) -> bool {
        let improved = self.best.is_none_or(|(_, b)| score > b);
        if improved {
            self.best = Some((step, score));
        }
        improved
    }

    /// True once more than `patience` steps passed since the best score.
    pub fn exhausted(&self, step: usize) -> bool {
        self.best
            .is_some_and(|(best_step, _)| step - best_step > self.patience)
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}

fn check_datasets<E, X: fmt::Debug + fmt::Display>(
    datasets: &[LanguageDataset<E>],
    config: &TrainConfig,
) -> Result<(), TrainError<X>> {
    config.validate().map_err(TrainError::InvalidConfig)?;
    if datasets.len() != config.num_languages {
        return Err(TrainError::InvalidConfig(alloc::format!(
            "num_languages is {} but {} datasets were given",
            config.num_languages,
            datasets.len()
        )));
    }
    Ok(())
}

/// Uniform draw of `n` distinct examples from the concatenation of `datasets`.
pub fn sample_joint_batch<'a, E>(
    datasets: &'a [LanguageDataset<E>],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<&'a E>> {
    let total: usize = datasets.iter().map(|d| d.examples.len()).sum();
    if total < n {
        return None;
    }
    let mut picks = sample(rng, total, n).into_vec();
    picks.sort_unstable();
    let mut out = Vec::with_capacity(n);
    let mut base = 0;
    let mut it = picks.into_iter().peekable();
    for d in datasets {
        let end = base + d.examples.len();
        while let Some(&i) = it.peek() {
            if i >= end {
                break;
            }
            out.push(&d.examples[i - base]);
            it.next();
        }
        base = end;
    }
    Some(out)
}

/// Runs MAML or joint training for `config.total_steps` steps, evaluating
/// `dev` every `eval_interval` steps (and after the last step) and stopping
/// once the dev score has not improved for more than `patience_steps`.
///
/// `dev` receives the step number and the current parameters and returns a
/// score where higher is better.
pub fn train<L, X, D>(
    mode: Mode,
    learner: &L,
    exec: &X,
    datasets: &[LanguageDataset<L::Example>],
    config: &TrainConfig,
    init: Vec<f64>,
    mut dev: D,
) -> Result<TrainOutcome, TrainError<L::Error>>
where
    L: Learner,
    X: Executor,
    D: FnMut(usize, &[f64]) -> Result<f64, L::Error>,
{
    check_datasets(datasets, config)?;
    let k = config.k;
    match mode {
        Mode::Maml => {
            for d in datasets {
                if d.examples.len() < 2 * k {
                    return Err(TrainError::InsufficientData {
                        language: d.language.clone(),
                        need: 2 * k,
                        have: d.examples.len(),
                    });
                }
            }
        }
        Mode::Joint => {
            let have: usize = datasets.iter().map(|d| d.examples.len()).sum();
            if have < config.batch_size() {
                return Err(TrainError::InsufficientData {
                    language: "joint".to_string(),
                    need: config.batch_size(),
                    have,
                });
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta = init;
    let mut best = theta.clone();
    let mut stopper = EarlyStopping::new(config.patience_steps);
    let mut log = Vec::with_capacity(config.total_steps);
    let mut stopped_at = 0;
    let mut early_stopped = false;

    for step in 1..=config.total_steps {
        let rate = scheduled_rate(step, config.beta, config.warmup_steps, config.total_steps);
        let losses = match mode {
            Mode::Maml => {
                let chosen = choose_languages(datasets.len(), config.active_languages(), &mut rng);
                let episodes = chosen
                    .iter()
                    .map(|&i| sample_episode(&datasets[i], k, &mut rng))
                    .collect::<Result<Vec<_>, _>>()?;
                let out = outer_step(
                    learner,
                    exec,
                    &theta,
                    &episodes,
                    config.alpha,
                    config.adaptation_steps,
                    rate,
                )?;
                theta = out.params;
                episodes
                    .iter()
                    .zip(out.losses)
                    .map(|(e, l)| (e.language.to_string(), l))
                    .collect()
            }
            Mode::Joint => {
                let batch = sample_joint_batch(datasets, config.batch_size(), &mut rng)
                    .expect("size checked above");
                let out = joint_step(learner, exec, &theta, &batch, k, rate)?;
                theta = out.params;
                let mean = out.losses.iter().sum::<f64>() / out.losses.len() as f64;
                vec![("joint".to_string(), mean)]
            }
        };
        stopped_at = step;
        let evaluate = step % config.eval_interval == 0 || step == config.total_steps;
        let mut dev_score = None;
        if evaluate {
            let score = dev(step, &theta).map_err(TrainError::Learner)?;
            dev_score = Some(score);
            if stopper.observe(step, score) {
                best.clone_from(&theta);
            }
        }
        log.push(StepRecord {
            step,
            losses,
            rate,
            dev: dev_score,
        });
        if evaluate && stopper.exhausted(step) {
            early_stopped = true;
            break;
        }
    }
    let (best_step, best_dev) = match stopper.best() {
        Some((s, d)) => (s, Some(d)),
        None => {
            best = theta;
            (stopped_at, None)
        }
    };
    Ok(TrainOutcome {
        best,
        best_step,
        best_dev,
        stopped_at,
        early_stopped,
        log,
    })
}

/// Indices of the languages trained this step, ascending. All of them unless
/// `active < total`, in which case a uniform subset is drawn.
fn choose_languages(total: usize, active: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if active >= total {
        return (0..total).collect();
    }
    let mut picks = sample(rng, total, active).into_vec();
    picks.sort_unstable();
    picks
}

pub fn maml_train<L, X, D>(
    learner: &L,
    exec: &X,
    datasets: &[LanguageDataset<L::Example>],
    config: &TrainConfig,
    init: Vec<f64>,
    dev: D,
) -> Result<TrainOutcome, TrainError<L::Error>>
where
    L: Learner,
    X: Executor,
    D: FnMut(usize, &[f64]) -> Result<f64, L::Error>,
{
    train(Mode::Maml, learner, exec, datasets, config, init, dev)
}

pub fn joint_train<L, X, D>(
    learner: &L,
    exec: &X,
    datasets: &[LanguageDataset<L::Example>],
    config: &TrainConfig,
    init: Vec<f64>,
    dev: D,
) -> Result<TrainOutcome, TrainError<L::Error>>
where
    L: Learner,
    X: Executor,
    D: FnMut(usize, &[f64]) -> Result<f64, L::Error>,
{
    train(Mode::Joint, learner, exec, datasets, config, init, dev)
}
