//! Core of the wellness sensing platform: sensor aggregation and validity
//! rules, the questionnaire bank and scoring, correlation statistics, the
//! journal record format and report tables.

pub mod journal;
pub mod model;
pub mod report;
pub mod stats;
pub mod survey;

pub use model::{
    aggregate_session, check_validity, filter_dataset, FilteredDataset, ModelError, SensorAggregate, SensorSample,
    Submission, Validity, ValidityReason, Variable,
};
pub use stats::{correlate, CorrelationResult, Method, PairedSeries, StatsError, Strength};
pub use survey::{bank, AnswerValue, SessionKind, SurveyResponse, SurveyScores};
