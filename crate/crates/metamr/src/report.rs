//! Line-delimited JSON for training logs and evaluation reports, and the TSV
//! rendering of comparison grids.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use metamr_core::eval::{Cell, ComparisonTable, EvalReport, GridRow};
use metamr_core::meta::{StepRecord, TrainOutcome};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LogLine {
    Config {
        mode: String,
        config: serde_json::Value,
    },
    Step {
        step: usize,
        losses: BTreeMap<String, f64>,
        rate: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        dev: Option<f64>,
    },
    Done {
        best_step: usize,
        best_dev: Option<f64>,
        stopped_at: usize,
        early_stopped: bool,
    },
}

impl From<&StepRecord> for LogLine {
    fn from(r: &StepRecord) -> Self {
        LogLine::Step {
            step: r.step,
            losses: r.losses.iter().cloned().collect(),
            rate: r.rate,
            dev: r.dev,
        }
    }
}

fn push_line<T: Serialize>(out: &mut String, v: &T) {
    out.push_str(&serde_json::to_string(v).expect("log lines serialize"));
    out.push('\n');
}

/// Header with the effective config, one line per step, then a summary.
pub fn training_log(mode: &str, config: serde_json::Value, outcome: &TrainOutcome) -> String {
    let mut out = String::new();
    push_line(
        &mut out,
        &LogLine::Config {
            mode: mode.to_string(),
            config,
        },
    );
    for r in &outcome.log {
        push_line(&mut out, &LogLine::from(r));
    }
    push_line(
        &mut out,
        &LogLine::Done {
            best_step: outcome.best_step,
            best_dev: outcome.best_dev,
            stopped_at: outcome.stopped_at,
            early_stopped: outcome.early_stopped,
        },
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub language: String,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub total_left: usize,
    pub total_right: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Summary {
    pub fn from_report(label: &str, r: &EvalReport) -> Self {
        Summary {
            label: label.to_string(),
            language: r.language.clone(),
            k: r.k,
            precision: r.score.precision,
            recall: r.score.recall,
            f1: r.score.f1,
            matched: r.score.matched,
            total_left: r.score.total_left,
            total_right: r.score.total_right,
            lr: r.lr,
            seed: r.seed,
        }
    }

    pub fn cell(&self) -> Cell {
        Cell {
            model: self.label.clone(),
            language: self.language.clone(),
            k: self.k,
            f1: self.f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ReportLine {
    Record {
        language: String,
        index: usize,
        source: String,
        hypothesis: String,
        graph: String,
        restored: bool,
        matched: usize,
        total_left: usize,
        total_right: usize,
        f1: f64,
    },
    Summary(Summary),
}

/// All records of every report, followed by one summary line per report.
pub fn eval_report(label: &str, reports: &[EvalReport]) -> String {
    let mut out = String::new();
    for r in reports {
        for (index, rec) in r.records.iter().enumerate() {
            push_line(
                &mut out,
                &ReportLine::Record {
                    language: r.language.clone(),
                    index,
                    source: rec.source.clone(),
                    hypothesis: rec.hypothesis.clone(),
                    graph: rec.graph.clone(),
                    restored: rec.restored,
                    matched: rec.matched,
                    total_left: rec.total_left,
                    total_right: rec.total_right,
                    f1: rec.f1,
                },
            );
        }
    }
    for r in reports {
        push_line(&mut out, &ReportLine::Summary(Summary::from_report(label, r)));
    }
    out
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("report has no summary lines")]
    NoSummary,
}

pub fn parse_report(text: &str) -> Result<Vec<ReportLine>, ReportError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| ReportError::Json { line: i + 1, source }))
        .collect()
}

pub fn read_summaries(text: &str) -> Result<Vec<Summary>, ReportError> {
    let out: Vec<Summary> = parse_report(text)?
        .into_iter()
        .filter_map(|l| match l {
            ReportLine::Summary(s) => Some(s),
            ReportLine::Record { .. } => None,
        })
        .collect();
    if out.is_empty() {
        return Err(ReportError::NoSummary);
    }
    Ok(out)
}

fn grid_tsv(languages: &[String], rows: &[GridRow]) -> String {
    let mut out = String::from("model\tk");
    for l in languages {
        out.push('\t');
        out.push_str(l);
    }
    out.push_str("\tavg\n");
    for r in rows {
        let _ = write!(out, "{}\t{}", r.model, r.k);
        for v in &r.values {
            let _ = write!(out, "\t{v:.4}");
        }
        let _ = writeln!(out, "\t{:.4}", r.avg);
    }
    out
}

/// F1 grid: one row per model × k, one column per language plus `avg`.
pub fn comparison_tsv(t: &ComparisonTable) -> String {
    grid_tsv(&t.languages, &t.rows)
}

/// Differences to the first model's row at the same k, in the same layout.
pub fn deltas_tsv(t: &ComparisonTable) -> String {
    grid_tsv(&t.languages, &t.deltas)
}
