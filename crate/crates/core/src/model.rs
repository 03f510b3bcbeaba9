//! Sensor samples, per-session aggregation and validity filtering.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::survey::{self, AnswerValue, Completeness, SessionKind, SurveyResponse};

/// The five ambient variables read by the sensor board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Temperature,
    Humidity,
    Pressure,
    Luminosity,
    Audio,
}

impl Variable {
    pub const ALL: [Variable; 5] = [
        Variable::Temperature,
        Variable::Humidity,
        Variable::Pressure,
        Variable::Luminosity,
        Variable::Audio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Temperature => "temperature",
            Variable::Humidity => "humidity",
            Variable::Pressure => "pressure",
            Variable::Luminosity => "luminosity",
            Variable::Audio => "audio",
        }
    }

    /// Row label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Variable::Temperature => "Temperature",
            Variable::Humidity => "Humidity",
            Variable::Pressure => "Pressure",
            Variable::Luminosity => "Light",
            Variable::Audio => "Audio",
        }
    }

    /// Inclusive physical bounds a session mean must fall in.
    pub fn physical_range(self) -> (f64, f64) {
        match self {
            Variable::Temperature => (-40.0, 85.0),
            Variable::Humidity => (0.0, 100.0),
            Variable::Pressure => (300.0, 1100.0),
            Variable::Luminosity => (0.0, 200_000.0),
            Variable::Audio => (0.0, 140.0),
        }
    }

    /// Whether an all-zero stream of this variable marks a dead sensor.
    /// Darkness is a legitimate light reading.
    pub fn zero_means_fault(self) -> bool {
        self != Variable::Luminosity
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "temperature" | "temp" => Ok(Variable::Temperature),
            "humidity" | "rh" => Ok(Variable::Humidity),
            "pressure" | "hpa" => Ok(Variable::Pressure),
            "luminosity" | "light" | "lux" => Ok(Variable::Luminosity),
            "audio" | "db" => Ok(Variable::Audio),
            other => Err(format!("unknown variable `{other}`")),
        }
    }
}

/// One reading of all five variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSample {
    pub seq: u64,
    pub timestamp_ms: i64,
    pub temperature: f64,
    pub humidity: f64,
    pub pressure: f64,
    pub luminosity: f64,
    pub audio: f64,
}

impl SensorSample {
    pub fn get(&self, v: Variable) -> f64 {
        match v {
            Variable::Temperature => self.temperature,
            Variable::Humidity => self.humidity,
            Variable::Pressure => self.pressure,
            Variable::Luminosity => self.luminosity,
            Variable::Audio => self.audio,
        }
    }

    pub fn set(&mut self, v: Variable, value: f64) {
        match v {
            Variable::Temperature => self.temperature = value,
            Variable::Humidity => self.humidity = value,
            Variable::Pressure => self.pressure = value,
            Variable::Luminosity => self.luminosity = value,
            Variable::Audio => self.audio = value,
        }
    }
}

/// Per-session arithmetic means of each variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorAggregate {
    pub temperature: f64,
    pub humidity: f64,
    pub pressure: f64,
    pub luminosity: f64,
    pub audio: f64,
    pub sample_count: u64,
}

impl SensorAggregate {
    pub fn get(&self, v: Variable) -> f64 {
        match v {
            Variable::Temperature => self.temperature,
            Variable::Humidity => self.humidity,
            Variable::Pressure => self.pressure,
            Variable::Luminosity => self.luminosity,
            Variable::Audio => self.audio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("session has no samples")]
    EmptySession,
    #[error("sample sequence not strictly increasing at index {index} (seq {seq} after {previous})")]
    NonMonotoneSequence { index: usize, previous: u64, seq: u64 },
}

/// Averages each variable over a session's samples.
pub fn aggregate_session(samples: &[SensorSample]) -> Result<SensorAggregate, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptySession);
    }
    for (i, pair) in samples.windows(2).enumerate() {
        if pair[1].seq <= pair[0].seq {
            return Err(ModelError::NonMonotoneSequence {
                index: i + 1,
                previous: pair[0].seq,
                seq: pair[1].seq,
            });
        }
    }
    let n = samples.len() as f64;
    let mean = |v: Variable| samples.iter().map(|s| s.get(v)).sum::<f64>() / n;
    Ok(SensorAggregate {
        temperature: mean(Variable::Temperature),
        humidity: mean(Variable::Humidity),
        pressure: mean(Variable::Pressure),
        luminosity: mean(Variable::Luminosity),
        audio: mean(Variable::Audio),
        sample_count: samples.len() as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValidityReason {
    ZeroReadingSensor(Variable),
    OutOfPhysicalRange(Variable),
    IncompleteSurvey,
    DuplicateSubmission,
}

impl fmt::Display for ValidityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityReason::ZeroReadingSensor(v) => write!(f, "zero_reading_sensor:{v}"),
            ValidityReason::OutOfPhysicalRange(v) => write!(f, "out_of_physical_range:{v}"),
            ValidityReason::IncompleteSurvey => f.write_str("incomplete_survey"),
            ValidityReason::DuplicateSubmission => f.write_str("duplicate_submission"),
        }
    }
}

impl FromStr for ValidityReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("zero_reading_sensor", v)) => Ok(ValidityReason::ZeroReadingSensor(v.parse()?)),
            Some(("out_of_physical_range", v)) => Ok(ValidityReason::OutOfPhysicalRange(v.parse()?)),
            None if s == "incomplete_survey" => Ok(ValidityReason::IncompleteSurvey),
            None if s == "duplicate_submission" => Ok(ValidityReason::DuplicateSubmission),
            _ => Err(format!("unknown validity reason `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Validity {
    Valid,
    Invalid(ValidityReason),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }

    pub fn reason(&self) -> Option<ValidityReason> {
        match self {
            Validity::Valid => None,
            Validity::Invalid(r) => Some(*r),
        }
    }
}

/// One stored survey session.
#[derive(Debug, Clone, PartialEq)]
pub struct Submission {
    pub submission_id: String,
    pub participant_id: String,
    pub experiment_id: String,
    pub session_start_ms: i64,
    pub session_end_ms: i64,
    pub is_first_of_day: bool,
    pub question_bank_hash: String,
    pub answers: BTreeMap<String, AnswerValue>,
    pub aggregate: SensorAggregate,
    pub validity: Validity,
    pub idempotency_key: String,
}

impl Submission {
    pub fn session_kind(&self) -> SessionKind {
        if self.is_first_of_day {
            SessionKind::FirstOfDay
        } else {
            SessionKind::Subsequent
        }
    }

    pub fn response(&self) -> SurveyResponse {
        SurveyResponse {
            session_kind: self.session_kind(),
            answers: self.answers.clone(),
        }
    }
}

/// Verdict on a submission given the raw samples its aggregate came from.
/// Checks run in a fixed order and the first failure wins.
pub fn check_validity(submission: &Submission, samples: &[SensorSample]) -> Validity {
    if !samples.is_empty() {
        for v in Variable::ALL.into_iter().filter(|v| v.zero_means_fault()) {
            if samples.iter().all(|s| s.get(v) == 0.0) {
                return Validity::Invalid(ValidityReason::ZeroReadingSensor(v));
            }
        }
    }
    for v in Variable::ALL {
        let (lo, hi) = v.physical_range();
        let mean = submission.aggregate.get(v);
        // NaN fails the range check as well
        if !(lo..=hi).contains(&mean) {
            return Validity::Invalid(ValidityReason::OutOfPhysicalRange(v));
        }
    }
    match survey::bank().validate_response(&submission.response()) {
        Ok(Completeness::Complete) => Validity::Valid,
        _ => Validity::Invalid(ValidityReason::IncompleteSurvey),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilteredDataset {
    pub valid: Vec<Submission>,
    pub rejected: Vec<(Submission, ValidityReason)>,
}

/// Splits submissions by their stored verdict, preserving input order.
/// A repeated `submission_id` after its first occurrence is rejected as a
/// duplicate.
pub fn filter_dataset(submissions: Vec<Submission>) -> FilteredDataset {
    let mut seen = HashSet::new();
    let mut out = FilteredDataset::default();
    for s in submissions {
        let first_time = seen.insert(s.submission_id.clone());
        match s.validity {
            Validity::Invalid(reason) => out.rejected.push((s, reason)),
            Validity::Valid if !first_time => out.rejected.push((s, ValidityReason::DuplicateSubmission)),
            Validity::Valid => out.valid.push(s),
        }
    }
    out
}
