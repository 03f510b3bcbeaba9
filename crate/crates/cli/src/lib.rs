//! `wellness analyze`: load exported submissions, filter, score and write
//! the report tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use wellness_core::journal::{read_sample_records, read_submissions, JournalError};
use wellness_core::report::{
    build_histogram, build_survey_matrix, build_variable_survey_table, render_csv, render_text, score_submissions,
    ReportError, ReportTable, VARIABLE_ROWS,
};
use wellness_core::survey::ScoringOptions;
use wellness_core::{aggregate_session, check_validity, filter_dataset, Method, SensorSample, Submission, ValidityReason};

pub const SUBMISSIONS_FILE: &str = "submissions.jsonl";
pub const SAMPLES_FILE: &str = "samples.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }

    fn render(self, table: &ReportTable) -> String {
        match self {
            Format::Csv => render_csv(table),
            Format::Text => render_text(table),
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (csv or text)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub inputs: Vec<PathBuf>,
    pub experiment: Option<String>,
    pub methods: Vec<Method>,
    pub include_invalid: bool,
    pub format: Format,
    pub bins: usize,
    pub revalidate: bool,
    pub scoring: ScoringOptions,
    pub out: PathBuf,
}

impl AnalysisConfig {
    pub fn new(inputs: Vec<PathBuf>, out: PathBuf) -> Self {
        Self {
            inputs,
            experiment: None,
            methods: Method::ALL.to_vec(),
            include_invalid: false,
            format: Format::Csv,
            bins: 20,
            revalidate: false,
            scoring: ScoringOptions::default(),
            out,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("no valid submissions")]
    NoValidSubmissions,
    #[error("no correlation method selected")]
    NoMethods,
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Journal { path: PathBuf, source: JournalError },
    #[error("--revalidate needs raw samples: {0} not found")]
    MissingSamples(PathBuf),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

/// Counts behind `summary.txt`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub loaded: usize,
    pub experiment: Option<String>,
    pub in_experiment: usize,
    pub valid: usize,
    pub rejected: BTreeMap<String, usize>,
    pub unscorable: Vec<String>,
    pub analysed: usize,
    pub first_of_day: usize,
    pub include_invalid: bool,
    pub revalidated: bool,
    pub methods: Vec<Method>,
    pub confirmed_note: Option<String>,
}

impl Summary {
    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "submissions loaded: {}", self.loaded);
        if let Some(e) = &self.experiment {
            let _ = writeln!(out, "experiment: {e} ({} submissions)", self.in_experiment);
        }
        let _ = writeln!(out, "validity: {}", if self.revalidated { "re-checked from raw samples" } else { "as stored" });
        let _ = writeln!(out, "valid: {}", self.valid);
        let _ = writeln!(out, "rejected: {}", self.rejected_total());
        for (reason, n) in &self.rejected {
            let _ = writeln!(out, "  {reason}: {n}");
        }
        if !self.unscorable.is_empty() {
            let _ = writeln!(out, "unscorable: {} ({})", self.unscorable.len(), self.unscorable.join(", "));
        }
        let _ = writeln!(
            out,
            "analysed: {} ({})",
            self.analysed,
            if self.include_invalid { "invalid included" } else { "valid only" }
        );
        let _ = writeln!(out, "first-of-day rows (PSQI): {}", self.first_of_day);
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let _ = writeln!(out, "methods: {}", methods.join(", "));
        if let Some(note) = &self.confirmed_note {
            let _ = writeln!(out, "{note}");
        }
        out
    }
}

/// Everything `run` writes, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub summary: Summary,
    pub files: BTreeMap<String, String>,
}

/// A path is either a journal/export file or a directory holding
/// `submissions.jsonl`.
fn submissions_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(SUBMISSIONS_FILE)
    } else {
        p.to_path_buf()
    }
}

pub fn load_submissions(paths: &[PathBuf]) -> Result<Vec<Submission>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        let path = submissions_path(p);
        let f = File::open(&path).map_err(|source| CliError::Read { path: path.clone(), source })?;
        out.extend(read_submissions(BufReader::new(f)).map_err(|source| CliError::Journal { path, source })?);
    }
    Ok(out)
}

/// Raw samples from the `samples.jsonl` next to each input.
pub fn load_samples(paths: &[PathBuf]) -> Result<HashMap<String, Vec<SensorSample>>, CliError> {
    let mut out = HashMap::new();
    for p in paths {
        let path = submissions_path(p);
        let samples = path.with_file_name(SAMPLES_FILE);
        let f = File::open(&samples).map_err(|_| CliError::MissingSamples(samples.clone()))?;
        let records = read_sample_records(BufReader::new(f)).map_err(|source| CliError::Journal { path: samples, source })?;
        out.extend(records.into_iter().map(|r| (r.submission_id, r.samples)));
    }
    Ok(out)
}

/// Recomputes aggregate and verdict from raw samples where they exist.
pub fn revalidate(subs: &mut [Submission], samples: &HashMap<String, Vec<SensorSample>>) {
    for s in subs {
        let raw = samples.get(&s.submission_id).map(Vec::as_slice).unwrap_or(&[]);
        if let Ok(agg) = aggregate_session(raw) {
            s.aggregate = agg;
        }
        s.validity = check_validity(s, raw);
    }
}

/// Builds every table from submissions already in memory.
pub fn analyze(subs: Vec<Submission>, config: &AnalysisConfig) -> Result<Analysis, CliError> {
    if config.methods.is_empty() {
        return Err(CliError::NoMethods);
    }
    let mut summary = Summary {
        loaded: subs.len(),
        experiment: config.experiment.clone(),
        include_invalid: config.include_invalid,
        revalidated: config.revalidate,
        methods: config.methods.clone(),
        ..Summary::default()
    };
    let subs: Vec<Submission> = match &config.experiment {
        Some(e) => subs.into_iter().filter(|s| &s.experiment_id == e).collect(),
        None => subs,
    };
    summary.in_experiment = subs.len();

    let filtered = filter_dataset(subs);
    summary.valid = filtered.valid.len();
    for (_, reason) in &filtered.rejected {
        *summary.rejected.entry(reason.to_string()).or_default() += 1;
    }
    let mut analysed = filtered.valid;
    if config.include_invalid {
        analysed.extend(
            filtered
                .rejected
                .into_iter()
                .filter(|(_, r)| *r != ValidityReason::DuplicateSubmission)
                .map(|(s, _)| s),
        );
    }
    let (scored, unscorable) = score_submissions(&analysed, config.scoring);
    summary.unscorable = unscorable.into_iter().map(|(id, _)| id).collect();
    summary.analysed = scored.len();
    summary.first_of_day = scored.iter().filter(|s| s.scores.psqi.is_some()).count();
    if scored.is_empty() {
        return Err(CliError::NoValidSubmissions);
    }

    let ext = config.format.extension();
    let mut files = BTreeMap::new();
    for &m in &config.methods {
        let t = build_survey_matrix(&scored, m)?;
        files.insert(format!("survey_matrix_{}.{ext}", m.name()), config.format.render(&t));
    }
    let combined = build_variable_survey_table(&scored, &config.methods)?;
    summary.confirmed_note = combined.footnotes.iter().find(|f| f.starts_with("confirmed by")).cloned();
    for section in &combined.sections {
        let Some(m) = section.method else { continue };
        let single = ReportTable {
            methods: vec![m],
            sections: vec![section.clone()],
            ..combined.clone()
        };
        files.insert(format!("variable_survey_{}.{ext}", m.name()), config.format.render(&single));
    }
    for v in VARIABLE_ROWS {
        let t = build_histogram(&scored, v, config.bins)?;
        files.insert(format!("hist_{}.{ext}", v.name()), config.format.render(&t));
    }
    files.insert("summary.txt".to_string(), summary.render());
    Ok(Analysis { summary, files })
}

/// Loads the inputs, analyses them and writes every file under `config.out`.
pub fn run(config: &AnalysisConfig) -> Result<Analysis, CliError> {
    let mut subs = load_submissions(&config.inputs)?;
    if config.revalidate {
        let samples = load_samples(&config.inputs)?;
        revalidate(&mut subs, &samples);
    }
    let analysis = analyze(subs, config)?;
    std::fs::create_dir_all(&config.out).map_err(|source| CliError::Write { path: config.out.clone(), source })?;
    for (name, contents) in &analysis.files {
        let path = config.out.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Write { path, source })?;
    }
    Ok(analysis)
}
