//! Writing a synthetic language family to disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use metamr_core::data::{generate_synthetic, group_by_language, RawPair, SpecError, SyntheticCorpus, SyntheticSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::tsv::write_parallel_tsv;

pub const SPLITS: [&str; 3] = ["train", "dev", "test"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub file: String,
    pub rows: usize,
    /// Rows per language.
    pub languages: BTreeMap<String, usize>,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: SyntheticSpec,
    pub training_languages: Vec<String>,
    pub held_out_languages: Vec<String>,
    pub splits: BTreeMap<String, SplitInfo>,
}

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("spec: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn load_spec(path: &Path) -> Result<SyntheticSpec, SyntheticError> {
    let text = fs::read_to_string(path).map_err(|source| SyntheticError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn split_info(file: &str, pairs: &[RawPair], text: &str) -> SplitInfo {
    SplitInfo {
        file: file.to_string(),
        rows: pairs.len(),
        languages: group_by_language(pairs)
            .into_iter()
            .map(|d| (d.language, d.examples.len()))
            .collect(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
    }
}

/// Generates the family and writes `train.tsv`, `dev.tsv`, `test.tsv` and
/// `manifest.json` into `dir`, creating it if needed.
pub fn write_synthetic(spec: &SyntheticSpec, dir: &Path) -> Result<(SyntheticCorpus, Manifest), SyntheticError> {
    let corpus = generate_synthetic(spec)?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SyntheticError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut splits = BTreeMap::new();
    for (name, pairs) in SPLITS.iter().zip([&corpus.train, &corpus.dev, &corpus.test]) {
        let file = format!("{name}.tsv");
        let text = write_parallel_tsv(pairs);
        let path = dir.join(&file);
        fs::write(&path, &text).map_err(io(&path))?;
        splits.insert(name.to_string(), split_info(&file, pairs, &text));
    }
    let manifest = Manifest {
        spec: spec.clone(),
        training_languages: spec.training_languages(),
        held_out_languages: spec.held_out_languages(),
        splits,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(io(&path))?;
    Ok((corpus, manifest))
}
