//! The three modified questionnaires (sleep quality, perceived stress,
//! psychological distress) plus the people-count question.
//!
//! Every item is a binary Yes/No except the four sleep intake items and the
//! people count. Integer scores count literal "yes" answers per survey.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

const BANK_SOURCE: &str = include_str!("../data/question_bank_v1.json");

/// Number of 30-minute bed-time slots between 8:00pm and 8:00am.
pub const TIME_SLOT_COUNT: usize = 24;
/// Hour bins `0-1` .. `11-12` plus the open-ended `12+`.
pub const HOUR_BIN_COUNT: usize = 13;

/// PSS items phrased positively; only consulted when reverse scoring is on.
pub const POSITIVE_PSS_ITEMS: [&str; 4] = [
    "pss_confident",
    "pss_going_your_way",
    "pss_control_irritations",
    "pss_on_top",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Survey {
    Psqi,
    Pss,
    K10,
    People,
}

impl fmt::Display for Survey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Survey::Psqi => "PSQI",
            Survey::Pss => "PSS",
            Survey::K10 => "K10",
            Survey::People => "# of People",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    YesNo,
    /// 30-minute bed-time bins, `8:00pm-8:30pm` through `7:30am-8:00am`.
    TimeSlot,
    /// 1-hour duration bins, `0-1` through `12+`.
    HourBin,
    /// Integer rating 1 to 5.
    Rating,
    NonNegativeInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionDef {
    pub order: u32,
    pub id: String,
    pub survey: Survey,
    pub text: String,
    pub answer_kind: AnswerKind,
}

#[derive(Debug, Deserialize)]
struct BankFile {
    version: u32,
    questions: Vec<QuestionDef>,
}

/// The immutable question bank loaded from the versioned data file.
#[derive(Debug)]
pub struct QuestionBank {
    version: u32,
    hash: String,
    questions: Vec<QuestionDef>,
}

impl QuestionBank {
    /// Parses a bank file. The content hash is the hex SHA-256 of the raw bytes.
    pub fn from_json(source: &str) -> Result<Self, SurveyError> {
        let file: BankFile =
            serde_json::from_str(source).map_err(|e| SurveyError::InvalidBank(e.to_string()))?;
        let mut questions = file.questions;
        questions.sort_by_key(|q| q.order);
        let mut seen = BTreeSet::new();
        for q in &questions {
            if !seen.insert(q.id.as_str()) {
                return Err(SurveyError::InvalidBank(format!("duplicate id {}", q.id)));
            }
        }
        let hash = hex::encode(Sha256::digest(source.as_bytes()));
        Ok(Self {
            version: file.version,
            hash,
            questions,
        })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn content_hash(&self) -> &str {
        &self.hash
    }

    pub fn questions(&self) -> &[QuestionDef] {
        &self.questions
    }

    pub fn get(&self, id: &str) -> Option<&QuestionDef> {
        self.questions.iter().find(|q| q.id == id)
    }

    fn of_survey(&self, survey: Survey) -> impl Iterator<Item = &QuestionDef> {
        self.questions.iter().filter(move |q| q.survey == survey)
    }

    /// Questions shown for a session, in display order.
    pub fn question_set(&self, kind: SessionKind) -> Vec<&QuestionDef> {
        let surveys: &[Survey] = match kind {
            SessionKind::FirstOfDay => &[Survey::Psqi, Survey::Pss, Survey::K10, Survey::People],
            SessionKind::Subsequent => &[Survey::Pss, Survey::K10, Survey::People],
        };
        surveys.iter().flat_map(|s| self.of_survey(*s)).collect()
    }

    pub fn validate_response(&self, response: &SurveyResponse) -> Result<Completeness, SurveyError> {
        let set = self.question_set(response.session_kind);
        let unknown: Vec<String> = response
            .answers
            .keys()
            .filter(|id| !set.iter().any(|q| &q.id == *id))
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(SurveyError::UnknownQuestionId(unknown));
        }
        let missing: Vec<String> = set
            .iter()
            .filter(|q| {
                response
                    .answers
                    .get(&q.id)
                    .and_then(|v| v.interpret(q.answer_kind))
                    .is_none()
            })
            .map(|q| q.id.clone())
            .collect();
        Ok(if missing.is_empty() {
            Completeness::Complete
        } else {
            Completeness::Missing(missing)
        })
    }

    pub fn score(&self, response: &SurveyResponse, opts: ScoringOptions) -> Result<SurveyScores, SurveyError> {
        match self.validate_response(response)? {
            Completeness::Complete => {}
            Completeness::Missing(ids) => return Err(SurveyError::IncompleteResponse(ids)),
        }
        let count_yes = |survey: Survey| -> u32 {
            self.of_survey(survey)
                .filter(|q| q.answer_kind == AnswerKind::YesNo)
                .filter(|q| {
                    let yes = matches!(
                        response.answers[&q.id].interpret(AnswerKind::YesNo),
                        Some(Answer::YesNo(true))
                    );
                    let reversed = opts.reverse_positive_pss && POSITIVE_PSS_ITEMS.contains(&q.id.as_str());
                    yes != reversed
                })
                .count() as u32
        };
        let people = self
            .of_survey(Survey::People)
            .find_map(|q| match response.answers[&q.id].interpret(q.answer_kind) {
                Some(Answer::Count(n)) => Some(n),
                _ => None,
            })
            .unwrap_or(0);
        Ok(SurveyScores {
            psqi: (response.session_kind == SessionKind::FirstOfDay).then(|| count_yes(Survey::Psqi)),
            pss: count_yes(Survey::Pss),
            k10: count_yes(Survey::K10),
            people,
        })
    }

    /// True when any answer belongs to a sleep-quality item.
    pub fn has_psqi_answers(&self, response: &SurveyResponse) -> bool {
        response
            .answers
            .keys()
            .any(|id| self.get(id).is_some_and(|q| q.survey == Survey::Psqi))
    }
}

/// The bank shipped with this crate.
pub fn bank() -> &'static QuestionBank {
    static BANK: OnceLock<QuestionBank> = OnceLock::new();
    BANK.get_or_init(|| QuestionBank::from_json(BANK_SOURCE).expect("bundled question bank is valid"))
}

/// Raw bank file contents, for serving to clients.
pub fn bank_source() -> &'static str {
    BANK_SOURCE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionKind {
    FirstOfDay,
    Subsequent,
}

/// An answer as received on the wire: text or integer. Its meaning depends
/// on the question's [`AnswerKind`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Int(i64),
    Text(String),
}

impl AnswerValue {
    pub fn yes() -> Self {
        AnswerValue::Text("yes".into())
    }

    pub fn no() -> Self {
        AnswerValue::Text("no".into())
    }

    pub fn yes_no(yes: bool) -> Self {
        if yes {
            Self::yes()
        } else {
            Self::no()
        }
    }

    /// Decodes the value under `kind`; `None` when ill-typed or out of domain.
    pub fn interpret(&self, kind: AnswerKind) -> Option<Answer> {
        match (kind, self) {
            (AnswerKind::YesNo, AnswerValue::Text(s)) => match s.as_str() {
                "yes" => Some(Answer::YesNo(true)),
                "no" => Some(Answer::YesNo(false)),
                _ => None,
            },
            (AnswerKind::TimeSlot, AnswerValue::Text(s)) => {
                time_slot_labels().iter().position(|l| l == s).map(|i| Answer::TimeSlot(i as u8))
            }
            (AnswerKind::HourBin, AnswerValue::Text(s)) => {
                hour_bin_labels().iter().position(|l| l == s).map(|i| Answer::HourBin(i as u8))
            }
            (AnswerKind::Rating, AnswerValue::Int(n)) if (1..=5).contains(n) => Some(Answer::Rating(*n as u8)),
            (AnswerKind::NonNegativeInt, AnswerValue::Int(n)) if *n >= 0 && *n <= u32::MAX as i64 => {
                Some(Answer::Count(*n as u32))
            }
            _ => None,
        }
    }
}

/// A well-typed answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    YesNo(bool),
    TimeSlot(u8),
    HourBin(u8),
    Rating(u8),
    Count(u32),
}

fn clock_label(minutes_after_8pm: usize) -> String {
    let total = (20 * 60 + minutes_after_8pm) % (24 * 60);
    let (h, m) = (total / 60, total % 60);
    let (h12, suffix) = match h {
        0 => (12, "am"),
        1..=11 => (h, "am"),
        12 => (12, "pm"),
        _ => (h - 12, "pm"),
    };
    format!("{h12}:{m:02}{suffix}")
}

/// Labels of the bed-time slots, `8:00pm-8:30pm` first.
pub fn time_slot_labels() -> &'static [String] {
    static LABELS: OnceLock<Vec<String>> = OnceLock::new();
    LABELS.get_or_init(|| {
        (0..TIME_SLOT_COUNT)
            .map(|i| format!("{}-{}", clock_label(i * 30), clock_label((i + 1) * 30)))
            .collect()
    })
}

/// Labels of the duration bins, `0-1` through `12+`.
pub fn hour_bin_labels() -> &'static [String] {
    static LABELS: OnceLock<Vec<String>> = OnceLock::new();
    LABELS.get_or_init(|| {
        (0..HOUR_BIN_COUNT)
            .map(|i| if i + 1 == HOUR_BIN_COUNT { format!("{i}+") } else { format!("{i}-{}", i + 1) })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub session_kind: SessionKind,
    pub answers: BTreeMap<String, AnswerValue>,
}

impl SurveyResponse {
    pub fn new(session_kind: SessionKind) -> Self {
        Self {
            session_kind,
            answers: BTreeMap::new(),
        }
    }

    pub fn with(mut self, id: &str, value: AnswerValue) -> Self {
        self.answers.insert(id.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    /// Ids that are unanswered or whose answer is outside the item's domain.
    Missing(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyScores {
    pub psqi: Option<u32>,
    pub pss: u32,
    pub k10: u32,
    pub people: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoringOptions {
    /// Count "no" as the positive answer on the four positively phrased PSS
    /// items. Off by default: every item counts a literal "yes".
    pub reverse_positive_pss: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurveyError {
    #[error("unknown question ids: {}", .0.join(", "))]
    UnknownQuestionId(Vec<String>),
    #[error("incomplete response, missing: {}", .0.join(", "))]
    IncompleteResponse(Vec<String>),
    #[error("invalid question bank: {0}")]
    InvalidBank(String),
}
