#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use wellness_core::journal::{submission_to_line, SampleRecord};
use wellness_core::survey::AnswerKind;
use wellness_core::{
    aggregate_session, bank, check_validity, AnswerValue, SensorSample, SessionKind, Submission, Validity, Variable,
};

pub const EXP: &str = "exp-fixture";

/// Answers with the first `yes` yes/no items of each survey answered yes.
pub fn answers(kind: SessionKind, pss: u32, k10: u32, psqi: u32, people: i64) -> BTreeMap<String, AnswerValue> {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for q in bank().question_set(kind) {
        let v = match q.answer_kind {
            AnswerKind::YesNo => {
                let seen = counts.entry(q.id.split('_').next().unwrap()).or_default();
                let limit = match q.id.split('_').next().unwrap() {
                    "pss" => pss,
                    "k10" => k10,
                    _ => psqi,
                };
                *seen += 1;
                AnswerValue::yes_no(*seen <= limit)
            }
            AnswerKind::TimeSlot => AnswerValue::Text("11:30pm-12:00am".into()),
            AnswerKind::HourBin => AnswerValue::Text("5-6".into()),
            AnswerKind::Rating => AnswerValue::Int(3),
            AnswerKind::NonNegativeInt => AnswerValue::Int(people),
        };
        out.insert(q.id.clone(), v);
    }
    out
}

pub fn stream(t: f64, rh: f64, hpa: f64, lux: f64, db: f64, n: u64, start_ms: i64) -> Vec<SensorSample> {
    (1..=n)
        .map(|seq| {
            // a dead sensor reads exactly zero, so leave zeros alone
            let w = |x: f64| if x == 0.0 { 0.0 } else { x + if seq % 2 == 0 { 0.05 } else { -0.05 } };
            SensorSample {
                seq,
                timestamp_ms: start_ms + seq as i64 * 1000,
                temperature: w(t),
                humidity: w(rh),
                pressure: w(hpa),
                luminosity: w(lux).max(0.0),
                audio: w(db),
            }
        })
        .collect()
}

pub fn submission(i: usize, kind: SessionKind, answers: BTreeMap<String, AnswerValue>, samples: &[SensorSample]) -> Submission {
    let start = samples.first().map_or(0, |s| s.timestamp_ms - 1000);
    let end = samples.last().map_or(1, |s| s.timestamp_ms);
    let mut s = Submission {
        submission_id: format!("sub-{i:03}"),
        participant_id: format!("p{}", i % 9),
        experiment_id: EXP.into(),
        session_start_ms: start,
        session_end_ms: end,
        is_first_of_day: kind == SessionKind::FirstOfDay,
        question_bank_hash: bank().content_hash().into(),
        answers,
        aggregate: aggregate_session(samples).unwrap(),
        validity: Validity::Valid,
        idempotency_key: format!("key-{i}"),
    };
    s.validity = check_validity(&s, samples);
    s
}

/// 68 stored submissions: 61 valid; 3 with a dead humidity sensor, 1 with a
/// dead audio sensor, 1 with an impossible pressure mean, 1 incomplete
/// survey, and 1 duplicated record.
pub fn fixture_68() -> (Vec<Submission>, Vec<SampleRecord>) {
    let mut subs = Vec::new();
    let mut records = Vec::new();
    let base = 1_772_438_400_000i64;
    for i in 0..67 {
        let kind = if i % 3 == 0 { SessionKind::FirstOfDay } else { SessionKind::Subsequent };
        let pss = (i * 7 % 11) as u32;
        let k10 = ((i * 7 % 11) as u32 + (i % 3) as u32).min(10);
        let psqi = (i % 13) as u32;
        let (mut t, mut rh, mut hpa, lux, mut db) =
            (19.0 + (i % 8) as f64, 30.0 + (i % 20) as f64, 1000.0 + (i % 9) as f64, 900.0 - 70.0 * pss as f64, 40.0 + (i % 15) as f64);
        let mut ans = answers(kind, pss, k10, psqi, (i % 6) as i64);
        match i {
            10 | 20 | 30 => rh = 0.0,
            40 => db = 0.0,
            50 => hpa = 1500.0,
            60 => {
                ans.remove("k10_worthless");
            }
            _ => {}
        }
        if i == 5 {
            t += 0.5;
        }
        let samples = stream(t, rh, hpa, lux, db, 6, base + i as i64 * 3 * 3_600_000);
        let s = submission(i, kind, ans, &samples);
        records.push(SampleRecord { submission_id: s.submission_id.clone(), samples });
        subs.push(s);
    }
    // the same record shipped twice
    subs.push(subs[7].clone());
    (subs, records)
}

pub fn write_journals(dir: &Path, subs: &[Submission], records: &[SampleRecord]) {
    let lines: String = subs.iter().map(|s| submission_to_line(s) + "\n").collect();
    std::fs::write(dir.join("submissions.jsonl"), lines).unwrap();
    let lines: String = records.iter().map(|r| r.to_line() + "\n").collect();
    std::fs::write(dir.join("samples.jsonl"), lines).unwrap();
}

pub fn zeroed(samples: &mut [SensorSample], v: Variable) {
    for s in samples {
        s.set(v, 0.0);
    }
}
