//! Line-delimited JSON records for the submission and raw-sample journals.
//!
//! Field order of a submission record is fixed: submission_id,
//! participant_id, experiment_id, session_start_ms, session_end_ms,
//! is_first_of_day, question_bank_hash, answers, aggregate, validity, reason,
//! idempotency_key. Floats use shortest round-trip formatting, so parsing a
//! line and writing it back reproduces the same bytes.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{SensorAggregate, SensorSample, Submission, Validity, ValidityReason};
use crate::survey::AnswerValue;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmissionRecord {
    submission_id: String,
    participant_id: String,
    experiment_id: String,
    session_start_ms: i64,
    session_end_ms: i64,
    is_first_of_day: bool,
    question_bank_hash: String,
    answers: BTreeMap<String, AnswerValue>,
    aggregate: SensorAggregate,
    validity: String,
    reason: Option<String>,
    idempotency_key: String,
}

impl From<&Submission> for SubmissionRecord {
    fn from(s: &Submission) -> Self {
        SubmissionRecord {
            submission_id: s.submission_id.clone(),
            participant_id: s.participant_id.clone(),
            experiment_id: s.experiment_id.clone(),
            session_start_ms: s.session_start_ms,
            session_end_ms: s.session_end_ms,
            is_first_of_day: s.is_first_of_day,
            question_bank_hash: s.question_bank_hash.clone(),
            answers: s.answers.clone(),
            aggregate: s.aggregate,
            validity: if s.validity.is_valid() { "valid" } else { "invalid" }.to_string(),
            reason: s.validity.reason().map(|r| r.to_string()),
            idempotency_key: s.idempotency_key.clone(),
        }
    }
}

impl TryFrom<SubmissionRecord> for Submission {
    type Error = String;

    fn try_from(r: SubmissionRecord) -> Result<Self, Self::Error> {
        let validity = match (r.validity.as_str(), r.reason) {
            ("valid", None) => Validity::Valid,
            ("invalid", Some(reason)) => Validity::Invalid(reason.parse::<ValidityReason>()?),
            ("valid", Some(_)) => return Err("valid record carries a reason".into()),
            ("invalid", None) => return Err("invalid record lacks a reason".into()),
            (other, _) => return Err(format!("unknown validity `{other}`")),
        };
        if r.session_start_ms >= r.session_end_ms {
            return Err("session_start_ms must precede session_end_ms".into());
        }
        Ok(Submission {
            submission_id: r.submission_id,
            participant_id: r.participant_id,
            experiment_id: r.experiment_id,
            session_start_ms: r.session_start_ms,
            session_end_ms: r.session_end_ms,
            is_first_of_day: r.is_first_of_day,
            question_bank_hash: r.question_bank_hash,
            answers: r.answers,
            aggregate: r.aggregate,
            validity,
            idempotency_key: r.idempotency_key,
        })
    }
}

pub fn submission_to_line(s: &Submission) -> String {
    serde_json::to_string(&SubmissionRecord::from(s)).expect("submission record serializes")
}

pub fn submission_from_line(line: &str) -> Result<Submission, String> {
    let rec: SubmissionRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Submission::try_from(rec)
}

/// Raw samples of one submission, one line per submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub submission_id: String,
    pub samples: Vec<SensorSample>,
}

impl SampleRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("sample record serializes")
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        serde_json::from_str(line).map_err(|e| e.to_string())
    }
}

fn read_lines<T>(reader: impl BufRead, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, JournalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse(&line).map_err(|message| JournalError::Parse { line: i + 1, message })?);
    }
    Ok(out)
}

pub fn read_submissions(reader: impl BufRead) -> Result<Vec<Submission>, JournalError> {
    read_lines(reader, submission_from_line)
}

pub fn read_sample_records(reader: impl BufRead) -> Result<Vec<SampleRecord>, JournalError> {
    read_lines(reader, SampleRecord::from_line)
}

pub fn write_submissions<'a>(
    mut w: impl Write,
    subs: impl IntoIterator<Item = &'a Submission>,
) -> std::io::Result<()> {
    for s in subs {
        writeln!(w, "{}", submission_to_line(s))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{plausible_stream, submission};
    use crate::model::Variable;

    #[test]
    fn field_order_is_fixed() {
        let s = submission("sub-1", &plausible_stream(4));
        let line = submission_to_line(&s);
        let keys = [
            "\"submission_id\"",
            "\"participant_id\"",
            "\"experiment_id\"",
            "\"session_start_ms\"",
            "\"session_end_ms\"",
            "\"is_first_of_day\"",
            "\"question_bank_hash\"",
            "\"answers\"",
            "\"aggregate\"",
            "\"validity\"",
            "\"reason\"",
            "\"idempotency_key\"",
        ];
        let positions: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{line}");
    }

    #[test]
    fn line_round_trip_is_byte_exact() {
        let mut stream = plausible_stream(7);
        stream[3].temperature = 21.123456789012345;
        let mut s = submission("sub-2", &stream);
        s.validity = Validity::Invalid(ValidityReason::ZeroReadingSensor(Variable::Audio));
        let line = submission_to_line(&s);
        let back = submission_from_line(&line).unwrap();
        assert_eq!(back, s);
        assert_eq!(submission_to_line(&back), line);
    }

    #[test]
    fn rejects_inconsistent_validity() {
        let s = submission("sub-3", &plausible_stream(4));
        let line = submission_to_line(&s).replace("\"validity\":\"valid\"", "\"validity\":\"invalid\"");
        assert!(submission_from_line(&line).is_err());
    }

    #[test]
    fn reader_reports_line_numbers() {
        let s = submission("sub-4", &plausible_stream(4));
        let text = format!("{}\n\nnot json\n", submission_to_line(&s));
        match read_submissions(text.as_bytes()) {
            Err(JournalError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sample_record_round_trip() {
        let rec = SampleRecord {
            submission_id: "x".into(),
            samples: plausible_stream(3),
        };
        assert_eq!(SampleRecord::from_line(&rec.to_line()).unwrap(), rec);
    }
}
