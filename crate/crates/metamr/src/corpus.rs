//! AMR corpus files: blank-line separated records, each with `# ::key value`
//! metadata lines followed by one (possibly multi-line) PENMAN graph.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use metamr_core::penman::{parse_penman, serialize_penman, validate, AmrGraph};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub metadata: Vec<(String, String)>,
    pub sentence: String,
    pub graph: AmrGraph,
    /// 1-based line of the record's first line.
    pub line: usize,
}

impl CorpusEntry {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    pub source: Option<PathBuf>,
}

/// A record skipped while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    MalformedGraph { line: usize, message: String },
}

struct RawRecord {
    line: usize,
    metadata: Vec<(String, String)>,
    graph: String,
}

fn parse_metadata(rest: &str, out: &mut Vec<(String, String)>) {
    for field in rest.split(" ::") {
        let field = field.trim().trim_start_matches("::");
        if field.is_empty() {
            continue;
        }
        let (k, v) = field.split_once(char::is_whitespace).unwrap_or((field, ""));
        out.push((k.to_string(), v.trim().to_string()));
    }
}

fn split_records(text: &str) -> Vec<RawRecord> {
    let mut out = Vec::new();
    let mut cur: Option<RawRecord> = None;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            out.extend(cur.take());
            continue;
        }
        let rec = cur.get_or_insert_with(|| RawRecord {
            line: i + 1,
            metadata: Vec::new(),
            graph: String::new(),
        });
        if let Some(rest) = trimmed.strip_prefix("# ::") {
            parse_metadata(rest, &mut rec.metadata);
        } else if !trimmed.starts_with('#') {
            rec.graph.push_str(line);
            rec.graph.push('\n');
        }
    }
    out.extend(cur);
    // Comment-only blocks are not records.
    out.retain(|r| !r.graph.trim().is_empty() || !r.metadata.is_empty());
    out
}

/// Parses corpus text. Records without `snt` metadata, without a graph, or
/// with a graph that fails to parse or validate are skipped with a warning.
pub fn parse_amr_corpus(text: &str) -> (Vec<CorpusEntry>, Vec<RecordWarning>) {
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for rec in split_records(text) {
        let warn = |message: String| RecordWarning {
            line: rec.line,
            message,
        };
        let Some(sentence) = rec.metadata.iter().find(|(k, _)| k == "snt").map(|(_, v)| v.clone()) else {
            warnings.push(warn("record has no `# ::snt` line".into()));
            continue;
        };
        if rec.graph.trim().is_empty() {
            warnings.push(warn("record has no graph".into()));
            continue;
        }
        let graph = match parse_penman(&rec.graph) {
            Ok(g) => g,
            Err(e) => {
                warnings.push(warn(e.to_string()));
                continue;
            }
        };
        let violations = validate(&graph);
        if !violations.is_empty() {
            warnings.push(warn(format!("invalid graph: {violations:?}")));
            continue;
        }
        entries.push(CorpusEntry {
            metadata: rec.metadata,
            sentence,
            graph,
            line: rec.line,
        });
    }
    (entries, warnings)
}

pub fn read_text(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_amr_corpus(path: &Path) -> Result<(Corpus, Vec<RecordWarning>), CorpusError> {
    let (entries, warnings) = parse_amr_corpus(&read_text(path)?);
    Ok((
        Corpus {
            entries,
            source: Some(path.to_path_buf()),
        },
        warnings,
    ))
}

/// Renders entries back to corpus text, metadata first.
pub fn write_amr_corpus(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let mut has_snt = false;
        for (k, v) in &e.metadata {
            has_snt |= k == "snt";
            let _ = writeln!(out, "# ::{k} {v}");
        }
        if !has_snt {
            let _ = writeln!(out, "# ::snt {}", e.sentence);
        }
        let _ = writeln!(out, "{}\n", serialize_penman(&e.graph).unwrap_or_default());
    }
    out
}

/// Splits text into top-level parenthesized expressions, ignoring `#` lines
/// and parentheses inside double quotes. Returns each with its start line.
fn top_level_graphs(text: &str) -> Result<Vec<(usize, String)>, CorpusError> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut quoted = false;
    let mut current = String::new();
    let mut start = 0;
    for (i, line) in text.lines().enumerate() {
        if depth == 0 && line.trim_start().starts_with('#') {
            continue;
        }
        for ch in line.chars() {
            if depth == 0 && !quoted {
                if ch.is_whitespace() {
                    continue;
                }
                if ch != '(' {
                    return Err(CorpusError::MalformedGraph {
                        line: i + 1,
                        message: format!("unexpected `{ch}` outside a graph"),
                    });
                }
                start = i + 1;
            }
            current.push(ch);
            match ch {
                '"' => quoted = !quoted,
                '(' if !quoted => depth += 1,
                ')' if !quoted => {
                    depth -= 1;
                    if depth == 0 {
                        out.push((start, std::mem::take(&mut current)));
                    }
                }
                _ => {}
            }
        }
        current.push('\n');
    }
    if depth != 0 {
        return Err(CorpusError::MalformedGraph {
            line: start,
            message: "unbalanced parentheses".into(),
        });
    }
    Ok(out)
}

/// Every graph in `text`, whether written as corpus records or one graph per
/// line. Any parse failure is an error.
pub fn parse_graphs(text: &str) -> Result<Vec<AmrGraph>, CorpusError> {
    top_level_graphs(text)?
        .into_iter()
        .map(|(line, g)| {
            parse_penman(&g).map_err(|e| CorpusError::MalformedGraph {
                line,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_graphs(path: &Path) -> Result<Vec<AmrGraph>, CorpusError> {
    parse_graphs(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use metamr_core::smatch::compute_smatch;

    const TWO: &str = "# a file comment\n\n# ::id 1 ::date 2020\n# ::snt The dog ate.\n(e / eat-01\n   :ARG0 (d / dog))\n\n# ::snt Hi\n(h / hi)\n";

    #[test]
    fn two_records() {
        let (entries, warnings) = parse_amr_corpus(TWO);
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].sentence, "The dog ate.");
        assert_eq!(entries[0].meta("id"), Some("1"));
        assert_eq!(entries[0].meta("date"), Some("2020"));
        assert_eq!(entries[0].line, 3);
        assert_eq!(entries[1].graph.nodes.len(), 1);
    }

    #[test]
    fn missing_sentence_is_rejected() {
        let (entries, warnings) = parse_amr_corpus("# ::id 1\n(d / dog)\n\n# ::snt ok\n(c / cat)\n\n# ::snt bad\n(x / y :ARG0 z)\n");
        assert_eq!(entries.len(), 1);
        assert_eq!(warnings.len(), 2);
        assert_eq!(warnings[0].line, 1);
        assert_eq!(warnings[1].line, 7);
    }

    #[test]
    fn rewrite_round_trip() {
        let (entries, _) = parse_amr_corpus(TWO);
        let (again, warnings) = parse_amr_corpus(&write_amr_corpus(&entries));
        assert!(warnings.is_empty());
        for (a, b) in entries.iter().zip(&again) {
            assert_eq!(compute_smatch(&b.graph, &a.graph, 4, 0).f1, 1.0);
            assert_eq!(a.metadata, b.metadata);
        }
    }

    #[test]
    fn graphs_in_either_layout() {
        assert_eq!(parse_graphs(TWO).unwrap().len(), 2);
        let lines = "(d / dog)\n(c / cat :mod (b / big))\n(s / say :ARG1 \"a ) b\")\n";
        assert_eq!(parse_graphs(lines).unwrap().len(), 3);
        assert!(parse_graphs("(d / dog").is_err());
        assert!(parse_graphs("dog").is_err());
    }
}
