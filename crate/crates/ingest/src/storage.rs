//! Append-only journals. Each record is one JSON line written with a single
//! `write` on a file opened in append mode.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use wellness_core::journal::{read_submissions, submission_to_line, SampleRecord};
use wellness_core::Submission;

use crate::IngestError;

pub const PARTICIPANTS_FILE: &str = "participants.jsonl";
pub const SUBMISSIONS_FILE: &str = "submissions.jsonl";
pub const SAMPLES_FILE: &str = "samples.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantRecord {
    pub participant_id: String,
    pub experiment_id: String,
    /// Hex SHA-256 of the bearer token; the token itself is never stored.
    pub token_sha256: String,
    pub registered_at_ms: i64,
}

#[derive(Debug, Default)]
pub struct Loaded {
    pub participants: Vec<ParticipantRecord>,
    pub submissions: Vec<Submission>,
}

pub trait Storage: Send + Sync {
    fn append_participant(&self, p: &ParticipantRecord) -> io::Result<()>;
    /// Appends the raw samples, then the submission record. A submission
    /// line is only present if its samples are.
    fn append_submission(&self, s: &Submission, samples: &SampleRecord) -> io::Result<()>;
    fn load(&self) -> Result<Loaded, IngestError>;
    fn healthy(&self) -> bool;
}

struct Files {
    participants: File,
    submissions: File,
    samples: File,
}

pub struct FileStorage {
    dir: PathBuf,
    files: Mutex<Files>,
}

fn open_append(path: &Path) -> io::Result<File> {
    OpenOptions::new().create(true).append(true).open(path)
}

fn append_line(f: &mut File, line: &str) -> io::Result<()> {
    let mut buf = String::with_capacity(line.len() + 1);
    buf.push_str(line);
    buf.push('\n');
    f.write_all(buf.as_bytes())?;
    f.flush()
}

impl FileStorage {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let files = Files {
            participants: open_append(&dir.join(PARTICIPANTS_FILE))?,
            submissions: open_append(&dir.join(SUBMISSIONS_FILE))?,
            samples: open_append(&dir.join(SAMPLES_FILE))?,
        };
        Ok(Self { dir, files: Mutex::new(files) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Files> {
        self.files.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl Storage for FileStorage {
    fn append_participant(&self, p: &ParticipantRecord) -> io::Result<()> {
        let line = serde_json::to_string(p).map_err(io::Error::other)?;
        append_line(&mut self.lock().participants, &line)
    }

    fn append_submission(&self, s: &Submission, samples: &SampleRecord) -> io::Result<()> {
        let sample_line = samples.to_line();
        let line = submission_to_line(s);
        let mut files = self.lock();
        append_line(&mut files.samples, &sample_line)?;
        append_line(&mut files.submissions, &line)
    }

    fn load(&self) -> Result<Loaded, IngestError> {
        let _guard = self.lock();
        let reader = |name: &str| -> Result<BufReader<File>, IngestError> {
            Ok(BufReader::new(File::open(self.dir.join(name))?))
        };
        let mut participants = Vec::new();
        for (i, line) in reader(PARTICIPANTS_FILE)?.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = serde_json::from_str(&line)
                .map_err(|e| IngestError::Journal(format!("{PARTICIPANTS_FILE} line {}: {e}", i + 1)))?;
            participants.push(rec);
        }
        let submissions = read_submissions(reader(SUBMISSIONS_FILE)?)
            .map_err(|e| IngestError::Journal(format!("{SUBMISSIONS_FILE} {e}")))?;
        Ok(Loaded { participants, submissions })
    }

    fn healthy(&self) -> bool {
        let _guard = self.lock();
        [PARTICIPANTS_FILE, SUBMISSIONS_FILE, SAMPLES_FILE]
            .iter()
            .all(|name| std::fs::metadata(self.dir.join(name)).is_ok_and(|m| !m.permissions().readonly()))
    }
}
