use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::IngestError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub name: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    #[serde(default = "default_max_per_day")]
    pub max_submissions_per_day: u32,
    #[serde(default = "default_min_gap_hours")]
    pub min_gap_hours: f64,
    /// Offset of the participants' local time from UTC. Day boundaries for
    /// the daily limit and first-of-day are taken in this zone.
    #[serde(default)]
    pub utc_offset_minutes: i32,
}

fn default_max_per_day() -> u32 {
    3
}

fn default_min_gap_hours() -> f64 {
    2.0
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Many(Vec<ExperimentConfig>),
    One(ExperimentConfig),
}

impl ExperimentConfig {
    pub fn new(experiment_id: &str, name: &str, start_date: NaiveDate, end_date: NaiveDate) -> Self {
        Self {
            experiment_id: experiment_id.to_string(),
            name: name.to_string(),
            start_date,
            end_date,
            max_submissions_per_day: default_max_per_day(),
            min_gap_hours: default_min_gap_hours(),
            utc_offset_minutes: 0,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: &str| Err(IngestError::Config(format!("{}: {m}", self.experiment_id)));
        if self.experiment_id.is_empty() {
            return bad("empty experiment_id");
        }
        if self.start_date > self.end_date {
            return bad("start_date after end_date");
        }
        if self.max_submissions_per_day == 0 || self.min_gap_hours.is_nan() || self.min_gap_hours <= 0.0 {
            return bad("limits must be positive");
        }
        if self.utc_offset_minutes.abs() >= 24 * 60 {
            return bad("utc_offset_minutes out of range");
        }
        Ok(())
    }

    pub fn offset(&self) -> FixedOffset {
        FixedOffset::east_opt(self.utc_offset_minutes * 60).expect("validated offset")
    }

    pub fn min_gap_ms(&self) -> i64 {
        (self.min_gap_hours * 3_600_000.0).round() as i64
    }

    /// Local calendar day of a millisecond timestamp.
    pub fn local_day(&self, ts_ms: i64) -> NaiveDate {
        let utc = DateTime::<Utc>::from_timestamp_millis(ts_ms).unwrap_or_default();
        utc.with_timezone(&self.offset()).date_naive()
    }

    /// Reads one experiment or a JSON array of them.
    pub fn load(path: &Path) -> Result<Vec<Self>, IngestError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| IngestError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Vec<Self>, IngestError> {
        let parsed: ConfigFile = serde_json::from_str(text).map_err(|e| IngestError::Config(e.to_string()))?;
        let list = match parsed {
            ConfigFile::Many(v) => v,
            ConfigFile::One(c) => vec![c],
        };
        for c in &list {
            c.validate()?;
        }
        Ok(list)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply() {
        let text = r#"{"experiment_id":"exp1","name":"Spring","start_date":"2026-03-01","end_date":"2026-03-31"}"#;
        let c = &ExperimentConfig::parse(text).unwrap()[0];
        assert_eq!((c.max_submissions_per_day, c.min_gap_hours, c.utc_offset_minutes), (3, 2.0, 0));
        assert_eq!(c.min_gap_ms(), 7_200_000);
    }

    #[test]
    fn local_day_uses_offset() {
        let mut c = ExperimentConfig::new("e", "e", NaiveDate::MIN, NaiveDate::MAX);
        // 2026-03-02T03:00:00Z
        let ts = 1_772_420_400_000;
        assert_eq!(c.local_day(ts), NaiveDate::from_ymd_opt(2026, 3, 2).unwrap());
        c.utc_offset_minutes = -300;
        assert_eq!(c.local_day(ts), NaiveDate::from_ymd_opt(2026, 3, 1).unwrap());
    }

    #[test]
    fn rejects_inverted_window() {
        let text = r#"[{"experiment_id":"x","name":"x","start_date":"2026-03-02","end_date":"2026-03-01"}]"#;
        assert!(ExperimentConfig::parse(text).is_err());
    }
}
