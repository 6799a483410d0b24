//! JSON run configuration for `metamr train`.
//!
//! Every field is optional. Omitted trainer fields take their usual defaults,
//! except `train.num_languages`, which is filled in from the training data.

use std::fs;
use std::path::{Path, PathBuf};

use metamr_core::eval::FinetuneConfig;
use metamr_core::meta::TrainConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    /// Initialization seed.
    pub seed: u64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            embed_dim: 32,
            hidden_dim: 64,
            seed: 0,
        }
    }
}

/// How the dev score used for model selection is computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DevSection {
    /// Dev languages; `None` means every training language present in dev.
    pub languages: Option<Vec<String>>,
    /// Sentences scored per language (the first ones in file order).
    pub max_per_language: usize,
    pub max_len: usize,
    pub restarts: usize,
}

impl Default for DevSection {
    fn default() -> Self {
        DevSection {
            languages: None,
            max_per_language: 50,
            max_len: 64,
            restarts: metamr_core::smatch::DEFAULT_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub model: ModelSection,
    pub dev: DevSection,
    /// Fine-tuning defaults recorded for later `metamr eval` runs.
    pub finetune: FinetuneConfig,
    pub min_count: usize,
    /// Set when the file gave `train.num_languages` explicitly.
    #[serde(skip)]
    pub num_languages_given: bool,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let given = value.pointer("/train/num_languages").is_some();
        let mut cfg: RunConfig = serde_json::from_value(value)?;
        cfg.num_languages_given = given;
        if cfg.min_count == 0 {
            cfg.min_count = 1;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Fills data-dependent defaults and validates the result.
    pub fn resolve(&mut self, training_languages: usize) -> Result<(), ConfigError> {
        if !self.num_languages_given {
            self.train.num_languages = training_languages;
        }
        self.train.validate().map_err(ConfigError::Invalid)?;
        if self.train.num_languages != training_languages {
            return Err(ConfigError::Invalid(format!(
                "train.num_languages is {} but the data has {training_languages} training languages",
                self.train.num_languages
            )));
        }
        if self.model.embed_dim == 0 || self.model.hidden_dim == 0 {
            return Err(ConfigError::Invalid("model dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let mut cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg.train.beta, 3e-5);
        assert_eq!(cfg.train.warmup_steps, 1500);
        assert_eq!(cfg.min_count, 1);
        cfg.resolve(6).unwrap();
        assert_eq!(cfg.train.num_languages, 6);
    }

    #[test]
    fn explicit_language_count_must_match() {
        let mut cfg = RunConfig::from_json(r#"{"train": {"num_languages": 14}}"#).unwrap();
        assert!(cfg.resolve(6).is_err());
        assert!(cfg.resolve(14).is_ok());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::from_json(r#"{"trian": {}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"train": {"alpah": 1}}"#).is_err());
    }

    #[test]
    fn echo_round_trip() {
        let cfg = RunConfig::from_json(r#"{"train": {"k": 4, "adaptation_steps": 0}, "dev": {"languages": ["l0"]}}"#).unwrap();
        let back: RunConfig = serde_json::from_value(cfg.to_json()).unwrap();
        assert_eq!(back.train, cfg.train);
        assert_eq!(back.dev, cfg.dev);
    }
}
