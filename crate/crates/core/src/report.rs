//! Report tables: survey-vs-survey matrices, variable-vs-survey tables and
//! per-variable histograms, with CSV and aligned-text renderings.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::model::{SensorAggregate, Submission, Variable};
use crate::stats::{correlate, CorrelationResult, Method, PairedSeries, StatsError};
use crate::survey::{self, ScoringOptions, SurveyError, SurveyScores};

/// Row order of variable tables.
pub const VARIABLE_ROWS: [Variable; 5] = [
    Variable::Temperature,
    Variable::Pressure,
    Variable::Humidity,
    Variable::Luminosity,
    Variable::Audio,
];

/// A score column in the report tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreColumn {
    People,
    Psqi,
    Pss,
    K10,
}

impl ScoreColumn {
    pub const ALL: [ScoreColumn; 4] = [ScoreColumn::People, ScoreColumn::Psqi, ScoreColumn::Pss, ScoreColumn::K10];

    pub fn label(self) -> &'static str {
        match self {
            ScoreColumn::People => "# of People",
            ScoreColumn::Psqi => "PSQI",
            ScoreColumn::Pss => "PSS",
            ScoreColumn::K10 => "K10",
        }
    }

    pub fn value(self, scores: &SurveyScores) -> Option<f64> {
        match self {
            ScoreColumn::People => Some(scores.people as f64),
            ScoreColumn::Psqi => scores.psqi.map(f64::from),
            ScoreColumn::Pss => Some(scores.pss as f64),
            ScoreColumn::K10 => Some(scores.k10 as f64),
        }
    }
}

/// One analysis row: a submission's sensor means and survey scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSubmission {
    pub submission_id: String,
    pub aggregate: SensorAggregate,
    pub scores: SurveyScores,
}

/// Scores each submission; ones that cannot be scored are returned apart.
pub fn score_submissions(
    subs: &[Submission],
    opts: ScoringOptions,
) -> (Vec<ScoredSubmission>, Vec<(String, SurveyError)>) {
    let mut scored = Vec::with_capacity(subs.len());
    let mut failed = Vec::new();
    for s in subs {
        match survey::bank().score(&s.response(), opts) {
            Ok(scores) => scored.push(ScoredSubmission {
                submission_id: s.submission_id.clone(),
                aggregate: s.aggregate,
                scores,
            }),
            Err(e) => failed.push((s.submission_id.clone(), e)),
        }
    }
    (scored, failed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("insufficient data: need at least {needed} valid submissions, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("histogram needs at least one bin")]
    NoBins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    SurveyMatrix,
    VariableSurvey,
    Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "cell", rename_all = "snake_case")]
pub enum Cell {
    /// Diagonal of a matrix.
    Empty,
    Correlation(CorrelationResult),
    /// Rendered as a dashed cell.
    Unavailable { n: usize, reason: String },
    Bin { lower: f64, upper: f64, count: usize },
}

impl Cell {
    pub fn correlation(&self) -> Option<&CorrelationResult> {
        match self {
            Cell::Correlation(c) => Some(c),
            _ => None,
        }
    }

    pub fn n(&self) -> Option<usize> {
        match self {
            Cell::Correlation(c) => Some(c.n),
            Cell::Unavailable { n, .. } => Some(*n),
            Cell::Bin { count, .. } => Some(*count),
            Cell::Empty => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableSection {
    pub method: Option<Method>,
    /// `cells[row][column]`
    pub cells: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportTable {
    pub kind: TableKind,
    pub title: String,
    pub methods: Vec<Method>,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub sections: Vec<TableSection>,
    pub footnotes: Vec<String>,
}

impl ReportTable {
    pub fn section(&self, method: Method) -> Option<&TableSection> {
        self.sections.iter().find(|s| s.method == Some(method))
    }

    pub fn cell(&self, method: Method, row: &str, column: &str) -> Option<&Cell> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        self.section(method).map(|s| &s.cells[r][c])
    }
}

fn correlation_cell(method: Method, x: Vec<f64>, y: Vec<f64>) -> Cell {
    let n = x.len();
    match PairedSeries::new(x, y).and_then(|s| correlate(method, &s)) {
        Ok(c) => Cell::Correlation(c),
        Err(e) => Cell::Unavailable {
            n,
            reason: match e {
                StatsError::DegenerateVariance => "degenerate variance".into(),
                other => other.to_string(),
            },
        },
    }
}

fn require(data: &[ScoredSubmission], needed: usize) -> Result<(), ReportError> {
    if data.len() < needed {
        Err(ReportError::InsufficientData { needed, got: data.len() })
    } else {
        Ok(())
    }
}

/// Pairs with both values present; sleep scores only exist on first-of-day
/// rows, so cells involving them use fewer observations.
fn paired(
    data: &[ScoredSubmission],
    a: impl Fn(&ScoredSubmission) -> Option<f64>,
    b: impl Fn(&ScoredSubmission) -> Option<f64>,
) -> (Vec<f64>, Vec<f64>) {
    data.iter().filter_map(|d| Some((a(d)?, b(d)?))).unzip()
}

fn psqi_footnote(data: &[ScoredSubmission]) -> String {
    let n = data.iter().filter(|d| d.scores.psqi.is_some()).count();
    format!("PSQI cells use first-of-day submissions only (n = {n} of {})", data.len())
}

const HIGHLIGHT_NOTE: &str = "highlighted (*): p < 0.05 and |r| >= 0.36";

/// Symmetric 4x4 matrix over the score columns, empty diagonal.
pub fn build_survey_matrix(data: &[ScoredSubmission], method: Method) -> Result<ReportTable, ReportError> {
    require(data, 3)?;
    let cells = ScoreColumn::ALL
        .iter()
        .map(|&row| {
            ScoreColumn::ALL
                .iter()
                .map(|&col| {
                    if row == col {
                        Cell::Empty
                    } else {
                        let (x, y) = paired(data, |d| row.value(&d.scores), |d| col.value(&d.scores));
                        correlation_cell(method, x, y)
                    }
                })
                .collect()
        })
        .collect();
    let labels: Vec<String> = ScoreColumn::ALL.iter().map(|c| c.label().to_string()).collect();
    Ok(ReportTable {
        kind: TableKind::SurveyMatrix,
        title: format!("Correlation coefficients between survey results ({method})"),
        methods: vec![method],
        rows: labels.clone(),
        columns: labels,
        sections: vec![TableSection {
            method: Some(method),
            cells,
        }],
        footnotes: vec![psqi_footnote(data), HIGHLIGHT_NOTE.to_string()],
    })
}

/// Five variable rows against the four score columns, one section per method.
pub fn build_variable_survey_table(
    data: &[ScoredSubmission],
    methods: &[Method],
) -> Result<ReportTable, ReportError> {
    require(data, 3)?;
    let sections: Vec<TableSection> = methods
        .iter()
        .map(|&method| TableSection {
            method: Some(method),
            cells: VARIABLE_ROWS
                .iter()
                .map(|&v| {
                    ScoreColumn::ALL
                        .iter()
                        .map(|&col| {
                            let (x, y) = paired(data, |d| Some(d.aggregate.get(v)), |d| col.value(&d.scores));
                            correlation_cell(method, x, y)
                        })
                        .collect()
                })
                .collect(),
        })
        .collect();
    let rows: Vec<String> = VARIABLE_ROWS.iter().map(|v| v.label().to_string()).collect();
    let columns: Vec<String> = ScoreColumn::ALL.iter().map(|c| c.label().to_string()).collect();

    let mut footnotes = vec![psqi_footnote(data), HIGHLIGHT_NOTE.to_string()];
    let pearson = sections.iter().find(|s| s.method == Some(Method::Pearson));
    let spearman = sections.iter().find(|s| s.method == Some(Method::Spearman));
    if let (Some(p), Some(s)) = (pearson, spearman) {
        let mut confirmed = Vec::new();
        for (ri, row) in rows.iter().enumerate() {
            for (ci, col) in columns.iter().enumerate() {
                let hi = |sec: &TableSection| sec.cells[ri][ci].correlation().is_some_and(|c| c.highlighted());
                if hi(p) && hi(s) {
                    confirmed.push(format!("{row}/{col}"));
                }
            }
        }
        footnotes.push(if confirmed.is_empty() {
            "confirmed by Pearson and Spearman: none".to_string()
        } else {
            format!("confirmed by Pearson and Spearman: {}", confirmed.join(", "))
        });
    }
    Ok(ReportTable {
        kind: TableKind::VariableSurvey,
        title: "Correlation between variables and surveys".to_string(),
        methods: methods.to_vec(),
        rows,
        columns,
        sections,
        footnotes,
    })
}

/// Equal-width bins over [min, max] of the per-submission means.
pub fn build_histogram(data: &[ScoredSubmission], variable: Variable, bins: usize) -> Result<ReportTable, ReportError> {
    require(data, 1)?;
    if bins == 0 {
        return Err(ReportError::NoBins);
    }
    let values: Vec<f64> = data.iter().map(|d| d.aggregate.get(variable)).collect();
    let counts = histogram_counts(&values, bins);
    let (min, width) = bin_geometry(&values, bins);
    let rows = (0..bins).map(|i| format!("bin {i}")).collect();
    let cells = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            vec![Cell::Bin {
                lower: min + width * i as f64,
                upper: min + width * (i + 1) as f64,
                count,
            }]
        })
        .collect();
    Ok(ReportTable {
        kind: TableKind::Histogram,
        title: format!("Distribution of {} ({} submissions)", variable.label(), values.len()),
        methods: vec![],
        rows,
        columns: vec!["count".into()],
        sections: vec![TableSection { method: None, cells }],
        footnotes: vec![format!("{bins} equal-width bins over the observed range")],
    })
}

fn bin_geometry(values: &[f64], bins: usize) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, (max - min) / bins as f64)
}

/// Counts of `values` in `bins` equal-width bins spanning their range. The
/// maximum lands in the last bin; a zero-width range puts everything in the
/// first.
pub fn histogram_counts(values: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    if values.is_empty() || bins == 0 {
        return counts;
    }
    let (min, width) = bin_geometry(values, bins);
    for &v in values {
        let idx = if width > 0.0 {
            (((v - min) / width).floor() as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    counts
}

fn fmt_r(r: f64) -> String {
    format!("{r:.4}")
}

fn fmt_p(p: f64) -> String {
    format!("{p:.4e}")
}

fn fmt_edge(v: f64) -> String {
    format!("{v:.4}")
}

/// Long-format CSV, one line per cell.
pub fn render_csv(table: &ReportTable) -> String {
    let mut out = String::new();
    match table.kind {
        TableKind::Histogram => {
            out.push_str("bin,lower,upper,count\n");
            for (i, cell) in table.sections[0].cells.iter().enumerate() {
                if let Cell::Bin { lower, upper, count } = cell[0] {
                    let _ = writeln!(out, "{i},{},{},{count}", fmt_edge(lower), fmt_edge(upper));
                }
            }
        }
        _ => {
            out.push_str("method,row,column,r,p_value,n,strength,significant,highlighted\n");
            for section in &table.sections {
                let method = section.method.map(|m| m.name()).unwrap_or("");
                for (ri, row) in table.rows.iter().enumerate() {
                    for (ci, col) in table.columns.iter().enumerate() {
                        match &section.cells[ri][ci] {
                            Cell::Correlation(c) => {
                                let _ = writeln!(
                                    out,
                                    "{method},{row},{col},{},{},{},{},{},{}",
                                    fmt_r(c.r),
                                    fmt_p(c.p_value),
                                    c.n,
                                    c.strength,
                                    c.significant,
                                    c.highlighted()
                                );
                            }
                            Cell::Unavailable { n, .. } => {
                                let _ = writeln!(out, "{method},{row},{col},-,-,{n},-,false,false");
                            }
                            Cell::Empty | Cell::Bin { .. } => {}
                        }
                    }
                }
            }
        }
    }
    out
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{s:<w$}", w = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Console rendering: r and p side by side per column, `*` on highlighted
/// cells, `-` on unavailable ones.
pub fn render_text(table: &ReportTable) -> String {
    let mut out = format!("{}\n", table.title);
    match table.kind {
        TableKind::Histogram => {
            let cells = &table.sections[0].cells;
            let max = cells.iter().filter_map(|c| c[0].n()).max().unwrap_or(0).max(1);
            let mut rows = vec![vec!["bin".into(), "lower".into(), "upper".into(), "count".into(), String::new()]];
            for (i, cell) in cells.iter().enumerate() {
                if let Cell::Bin { lower, upper, count } = cell[0] {
                    let bar = "#".repeat((count * 40).div_ceil(max));
                    rows.push(vec![i.to_string(), fmt_edge(lower), fmt_edge(upper), count.to_string(), bar]);
                }
            }
            out.push_str(&pad_table(&rows));
        }
        _ => {
            for section in &table.sections {
                if let Some(m) = section.method {
                    let _ = writeln!(out, "\n[{m}]");
                }
                let mut header = vec![String::new()];
                for col in &table.columns {
                    header.push(format!("{col} r"));
                    header.push("p".into());
                    header.push("n".into());
                }
                let mut rows = vec![header];
                for (ri, row) in table.rows.iter().enumerate() {
                    let mut line = vec![row.clone()];
                    for cell in &section.cells[ri] {
                        match cell {
                            Cell::Correlation(c) => {
                                let mark = if c.highlighted() { "*" } else { "" };
                                line.push(format!("{}{mark}", fmt_r(c.r)));
                                line.push(fmt_p(c.p_value));
                                line.push(c.n.to_string());
                            }
                            Cell::Unavailable { n, .. } => {
                                line.extend(["-".to_string(), "-".to_string(), n.to_string()]);
                            }
                            Cell::Empty | Cell::Bin { .. } => {
                                line.extend([String::new(), String::new(), String::new()]);
                            }
                        }
                    }
                    rows.push(line);
                }
                out.push_str(&pad_table(&rows));
            }
        }
    }
    if !table.footnotes.is_empty() {
        out.push('\n');
        for f in &table.footnotes {
            let _ = writeln!(out, "note: {f}");
        }
    }
    out
}
