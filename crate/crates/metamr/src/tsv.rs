//! Parallel pair files: `language<TAB>sentence<TAB>linearized graph`, one
//! example per line.

use std::fs;
use std::path::{Path, PathBuf};

use metamr_core::data::{group_by_language, RawPair};
use metamr_core::meta::LanguageDataset;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: column {column} is empty")]
    EmptyField { line: usize, column: usize },
}

/// Parses every non-blank line into a pair, in file order.
pub fn parse_parallel_tsv(text: &str) -> Result<Vec<RawPair>, TsvError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(TsvError::ColumnCount {
                line: line_no,
                found: cols.len(),
            });
        }
        if let Some(column) = cols.iter().position(|c| c.trim().is_empty()) {
            return Err(TsvError::EmptyField {
                line: line_no,
                column: column + 1,
            });
        }
        out.push(RawPair::new(cols[0].trim(), cols[1], cols[2]));
    }
    Ok(out)
}

pub fn load_parallel_tsv(path: &Path) -> Result<Vec<RawPair>, TsvError> {
    let text = fs::read_to_string(path).map_err(|source| TsvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_parallel_tsv(&text)
}

/// Loads and groups by language code, languages in first-appearance order.
pub fn load_language_datasets(path: &Path) -> Result<Vec<LanguageDataset<RawPair>>, TsvError> {
    Ok(group_by_language(&load_parallel_tsv(path)?))
}

pub fn format_pair(p: &RawPair) -> String {
    format!("{}\t{}\t{}", p.language, p.source.join(" "), p.target.join(" "))
}

pub fn write_parallel_tsv(pairs: &[RawPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&format_pair(p));
        out.push('\n');
    }
    out
}
