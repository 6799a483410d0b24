//! Language grouping, vocabulary construction and the synthetic language
//! family used for desk-scale experiments.
//!
//! A synthetic family shares one list of random "pivot" sentences over a base
//! vocabulary `w0..w{V-1}`. Pivot token `wi` denotes concept `ci`, and a
//! sentence of length `n` denotes a chain `c_a :ARG0 (c_b :ARG1 (c_c ...))`
//! with alternating roles. Every language renders the pivot through its own
//! bijective cipher, optionally swapping adjacent words, so all languages
//! share targets row for row.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::derive_seed;
use crate::linearize::preprocess;
use crate::meta::LanguageDataset;
use crate::model::{Example, Vocab};
use crate::penman::AmrGraph;

/// One sentence/target pair in token space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPair {
    pub language: String,
    pub source: Vec<String>,
    /// Linearized graph tokens.
    pub target: Vec<String>,
}

impl RawPair {
    pub fn new(language: &str, source: &str, target: &str) -> Self {
        RawPair {
            language: language.to_string(),
            source: source.split_whitespace().map(str::to_string).collect(),
            target: target.split_whitespace().map(str::to_string).collect(),
        }
    }
}

/// Partitions pairs by language, ordering languages by first appearance.
pub fn group_by_language(pairs: &[RawPair]) -> Vec<LanguageDataset<RawPair>> {
    let mut out: Vec<LanguageDataset<RawPair>> = Vec::new();
    let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
    for p in pairs {
        let i = *slot.entry(&p.language).or_insert_with(|| {
            out.push(LanguageDataset {
                language: p.language.clone(),
                examples: Vec::new(),
            });
            out.len() - 1
        });
        out[i].examples.push(p.clone());
    }
    out
}

fn ranked(counts: BTreeMap<&str, usize>, min_count: usize) -> Vec<&str> {
    let mut v: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    // BTreeMap iteration is lexicographic and the sort is stable.
    v.sort_by_key(|&(_, c)| core::cmp::Reverse(c));
    v.into_iter().map(|(t, _)| t).collect()
}

/// Source and target vocabularies over `pairs`.
///
/// Tokens are ordered by descending frequency with lexicographic tie-breaks;
/// tokens seen fewer than `min_count` times are left out and map to UNK.
/// Every language tag is added to the source side right after the special
/// tokens, in sorted language order.
pub fn build_vocab(pairs: &[RawPair], min_count: usize) -> (Vocab, Vocab) {
    let mut src_counts = BTreeMap::new();
    let mut tgt_counts = BTreeMap::new();
    let mut languages = BTreeSet::new();
    for p in pairs {
        languages.insert(p.language.as_str());
        for t in &p.source {
            *src_counts.entry(t.as_str()).or_insert(0) += 1;
        }
        for t in &p.target {
            *tgt_counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut src = Vocab::new();
    for l in languages {
        src.add_language(l);
    }
    for t in ranked(src_counts, min_count) {
        src.insert(t);
    }
    let mut tgt = Vocab::new();
    for t in ranked(tgt_counts, min_count) {
        tgt.insert(t);
    }
    (src, tgt)
}

pub fn encode_pairs(pairs: &[RawPair], src: &Vocab, tgt: &Vocab) -> Vec<Example> {
    pairs
        .iter()
        .map(|p| Example::encode(&p.language, &p.source, &p.target, src, tgt))
        .collect()
}

/// Groups and encodes in one pass.
pub fn encode_datasets(pairs: &[RawPair], src: &Vocab, tgt: &Vocab) -> Vec<LanguageDataset<Example>> {
    group_by_language(pairs)
        .into_iter()
        .map(|d| LanguageDataset {
            examples: encode_pairs(&d.examples, src, tgt),
            language: d.language,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CipherKind {
    /// Pivot tokens unchanged.
    Identity,
    /// Pivot token `wi` becomes `{code}_{π(i)}`, a surface alphabet private
    /// to the language.
    Substitution,
    /// Pivot token `wi` becomes `w{π(i)}` over the shared base vocabulary.
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LanguageTransform {
    pub cipher: CipherKind,
    /// Swap words pairwise: (0 1)(2 3)...
    #[cfg_attr(feature = "serde", serde(default))]
    pub swap: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SyntheticSpec {
    pub seed: u64,
    pub num_languages: usize,
    pub vocab_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// The last `held_out` languages appear only in dev and test.
    pub held_out: usize,
    /// Pivot sentences per split.
    pub train_size: usize,
    pub dev_size: usize,
    pub test_size: usize,
    /// Per-language transforms. Missing entries default to identity for the
    /// first language and substitution for the rest.
    pub transforms: Vec<LanguageTransform>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 0,
            num_languages: 8,
            vocab_size: 12,
            min_len: 2,
            max_len: 4,
            held_out: 2,
            train_size: 400,
            dev_size: 100,
            test_size: 100,
            transforms: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("synthetic spec: {0}")]
    Invalid(String),
}

impl SyntheticSpec {
    pub fn language_code(i: usize) -> String {
        format!("l{i}")
    }

    pub fn languages(&self) -> Vec<String> {
        (0..self.num_languages).map(Self::language_code).collect()
    }

    pub fn held_out_languages(&self) -> Vec<String> {
        (self.num_languages - self.held_out..self.num_languages)
            .map(Self::language_code)
            .collect()
    }

    pub fn training_languages(&self) -> Vec<String> {
        (0..self.num_languages - self.held_out).map(Self::language_code).collect()
    }

    pub fn transform(&self, i: usize) -> LanguageTransform {
        self.transforms.get(i).copied().unwrap_or(LanguageTransform {
            cipher: if i == 0 {
                CipherKind::Identity
            } else {
                CipherKind::Substitution
            },
            swap: false,
        })
    }

    /// Number of distinct pivot sentences the length range admits.
    pub fn sentence_space(&self) -> usize {
        (self.min_len..=self.max_len)
            .map(|n| self.vocab_size.saturating_pow(n as u32))
            .fold(0usize, usize::saturating_add)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |m: &str| Err(SpecError::Invalid(m.to_string()));
        if self.num_languages == 0 {
            return bad("num_languages must be at least 1");
        }
        if self.held_out >= self.num_languages {
            return bad("held_out must be smaller than num_languages");
        }
        if self.vocab_size == 0 {
            return bad("vocab_size must be at least 1");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad("sentence length range must satisfy 1 <= min_len <= max_len");
        }
        if self.transforms.len() > self.num_languages {
            return bad("more transforms than languages");
        }
        let needed = self.train_size + self.dev_size + self.test_size;
        if needed > self.sentence_space() / 2 {
            return bad("splits need more than half of all distinct pivot sentences");
        }
        Ok(())
    }
}

/// Generated splits; every split lists languages in order, each with the same
/// pivot rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub train: Vec<RawPair>,
    pub dev: Vec<RawPair>,
    pub test: Vec<RawPair>,
}

impl SyntheticCorpus {
    pub fn all_pairs(&self) -> impl Iterator<Item = &RawPair> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }
}

pub fn pivot_token(i: usize) -> String {
    format!("w{i}")
}

pub fn pivot_concept(i: usize) -> String {
    format!("c{i}")
}

/// Linearized chain graph for a pivot sentence of base-vocabulary indices.
pub fn pivot_target(pivot: &[usize]) -> Vec<String> {
    let mut g = AmrGraph::single("v0", &pivot_concept(pivot[0]));
    for (n, &w) in pivot.iter().enumerate().skip(1) {
        let var = format!("v{n}");
        g.add_node(&var, &pivot_concept(w));
        let role = if n % 2 == 1 { ":ARG0" } else { ":ARG1" };
        g.add_edge(&format!("v{}", n - 1), role, &var);
    }
    preprocess(&g).expect("chain graphs are well formed").tokens
}

struct Cipher {
    code: String,
    kind: CipherKind,
    swap: bool,
    map: Vec<usize>,
}

impl Cipher {
    fn new(spec: &SyntheticSpec, i: usize) -> Self {
        let t = spec.transform(i);
        let mut map: Vec<usize> = (0..spec.vocab_size).collect();
        if t.cipher != CipherKind::Identity {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 1 + i as u64));
            map.shuffle(&mut rng);
        }
        Cipher {
            code: SyntheticSpec::language_code(i),
            kind: t.cipher,
            swap: t.swap,
            map,
        }
    }

    fn render(&self, pivot: &[usize]) -> Vec<String> {
        let mut words: Vec<String> = pivot
            .iter()
            .map(|&w| match self.kind {
                CipherKind::Identity => pivot_token(w),
                CipherKind::Permutation => pivot_token(self.map[w]),
                CipherKind::Substitution => format!("{}_{}", self.code, self.map[w]),
            })
            .collect();
        if self.swap {
            for pair in words.chunks_mut(2) {
                pair.reverse();
            }
        }
        words
    }
}

/// Builds the train/dev/test splits for `spec`.
///
/// Pivots are distinct across all three splits. Held-out languages only
/// appear in dev and test; dev doubles as the k-shot pool.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus, SpecError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let needed = spec.train_size + spec.dev_size + spec.test_size;
    let mut seen = BTreeSet::new();
    let mut pivots = Vec::with_capacity(needed);
    while pivots.len() < needed {
        let n = rng.gen_range(spec.min_len..=spec.max_len);
        let s: Vec<usize> = (0..n).map(|_| rng.gen_range(0..spec.vocab_size)).collect();
        if seen.insert(s.clone()) {
            pivots.push(s);
        }
    }
    let (train_p, rest) = pivots.split_at(spec.train_size);
    let (dev_p, test_p) = rest.split_at(spec.dev_size);
    let ciphers: Vec<Cipher> = (0..spec.num_languages).map(|i| Cipher::new(spec, i)).collect();
    let targets = |ps: &[Vec<usize>]| -> Vec<Vec<String>> { ps.iter().map(|p| pivot_target(p)).collect() };

    let render = |ps: &[Vec<usize>], langs: &[Cipher]| -> Vec<RawPair> {
        let tgts = targets(ps);
        langs
            .iter()
            .flat_map(|c| {
                ps.iter().zip(&tgts).map(move |(p, t)| RawPair {
                    language: c.code.clone(),
                    source: c.render(p),
                    target: t.clone(),
                })
            })
            .collect()
    };
    let seen_langs = &ciphers[..spec.num_languages - spec.held_out];
    Ok(SyntheticCorpus {
        train: render(train_p, seen_langs),
        dev: render(dev_p, &ciphers),
        test: render(test_p, &ciphers),
    })
}
