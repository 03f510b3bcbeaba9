use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use sha2::{Digest, Sha256};
use wellness_core::journal::SampleRecord;
use wellness_core::{aggregate_session, bank, check_validity, SensorSample, SessionKind, Submission, Validity};
use wellness_emu::client::EmulatorClient;

use crate::config::ExperimentConfig;
use crate::protocol::{check_envelope, check_rules, History, Rejection, SubmissionEnvelope};
use crate::storage::{ParticipantRecord, Storage};
use crate::IngestError;

#[derive(Debug, Default)]
struct ParticipantState {
    history: History,
    /// idempotency key -> submission id
    accepted_keys: HashMap<String, String>,
}

struct Participant {
    participant_id: String,
    experiment_id: String,
    state: tokio::sync::Mutex<ParticipantState>,
}

#[derive(Default)]
struct Registry {
    by_token_hash: HashMap<String, Arc<Participant>>,
    by_id: HashMap<String, Arc<Participant>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubmitOutcome {
    Accepted { submission_id: String, validity: Validity },
    /// The key was accepted before; nothing new was stored.
    Replayed { submission_id: String },
}

impl SubmitOutcome {
    pub fn submission_id(&self) -> &str {
        match self {
            SubmitOutcome::Accepted { submission_id, .. } | SubmitOutcome::Replayed { submission_id } => submission_id,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SubmitError {
    #[error("{0}")]
    Rejected(Rejection),
    #[error("storage failure: {0}")]
    Storage(std::io::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum RegisterError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("storage failure: {0}")]
    Storage(std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registration {
    pub participant_id: String,
    pub auth_token: String,
}

pub struct Service {
    experiments: HashMap<String, ExperimentConfig>,
    storage: Box<dyn Storage>,
    registry: RwLock<Registry>,
    /// Every stored submission in journal order. Held while appending so the
    /// in-memory order always matches the file.
    committed: Mutex<Vec<Submission>>,
    emulator_addr: Option<String>,
}

fn token_hash(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

fn now_ms() -> i64 {
    chrono::Utc::now().timestamp_millis()
}

impl Service {
    /// Builds the service and replays the journals held by `storage`.
    pub fn open(configs: Vec<ExperimentConfig>, storage: Box<dyn Storage>) -> Result<Self, IngestError> {
        let mut experiments = HashMap::new();
        for c in configs {
            c.validate()?;
            if experiments.insert(c.experiment_id.clone(), c).is_some() {
                return Err(IngestError::Config("duplicate experiment_id".into()));
            }
        }
        let loaded = storage.load()?;
        let mut registry = Registry::default();
        for p in loaded.participants {
            let slot = Arc::new(Participant {
                participant_id: p.participant_id.clone(),
                experiment_id: p.experiment_id,
                state: Default::default(),
            });
            registry.by_token_hash.insert(p.token_sha256, slot.clone());
            registry.by_id.insert(p.participant_id, slot);
        }
        for s in &loaded.submissions {
            let slot = registry.by_id.get(&s.participant_id).ok_or_else(|| {
                IngestError::Journal(format!("submission {} names unknown participant", s.submission_id))
            })?;
            let mut st = slot.state.try_lock().expect("no contention during replay");
            st.history.accepted_end_ms.push(s.session_end_ms);
            st.accepted_keys.insert(s.idempotency_key.clone(), s.submission_id.clone());
        }
        Ok(Self {
            experiments,
            storage,
            registry: RwLock::new(registry),
            committed: Mutex::new(loaded.submissions),
            emulator_addr: None,
        })
    }

    pub fn with_emulator(mut self, addr: Option<String>) -> Self {
        self.emulator_addr = addr;
        self
    }

    pub fn experiment(&self, id: &str) -> Option<&ExperimentConfig> {
        self.experiments.get(id)
    }

    pub fn register(&self, experiment_id: &str) -> Result<Registration, RegisterError> {
        if !self.experiments.contains_key(experiment_id) {
            return Err(RegisterError::UnknownExperiment(experiment_id.to_string()));
        }
        let auth_token = format!("{:032x}", rand::random::<u128>());
        let record = ParticipantRecord {
            participant_id: uuid::Uuid::new_v4().to_string(),
            experiment_id: experiment_id.to_string(),
            token_sha256: token_hash(&auth_token),
            registered_at_ms: now_ms(),
        };
        // Persisted before the token is usable or returned.
        self.storage.append_participant(&record).map_err(RegisterError::Storage)?;
        let slot = Arc::new(Participant {
            participant_id: record.participant_id.clone(),
            experiment_id: record.experiment_id,
            state: Default::default(),
        });
        let mut reg = self.registry.write().unwrap_or_else(|p| p.into_inner());
        reg.by_token_hash.insert(record.token_sha256, slot.clone());
        reg.by_id.insert(record.participant_id.clone(), slot);
        Ok(Registration { participant_id: record.participant_id, auth_token })
    }

    fn participant(&self, token: &str) -> Option<Arc<Participant>> {
        let reg = self.registry.read().unwrap_or_else(|p| p.into_inner());
        reg.by_token_hash.get(&token_hash(token)).cloned()
    }

    pub fn token_is_known(&self, token: &str) -> bool {
        self.participant(token).is_some()
    }

    pub async fn submit(&self, token: &str, env: SubmissionEnvelope) -> Result<SubmitOutcome, SubmitError> {
        let reject = |r| Err(SubmitError::Rejected(r));
        let Some(p) = self.participant(token) else { return reject(Rejection::BadToken) };
        if let Err(r) = check_envelope(&env) {
            return reject(r);
        }
        let Some(cfg) = self.experiments.get(&p.experiment_id) else {
            return reject(Rejection::Malformed(format!("experiment {} is no longer configured", p.experiment_id)));
        };

        let mut state = p.state.lock().await;
        if let Some(id) = state.accepted_keys.get(&env.idempotency_key) {
            return Ok(SubmitOutcome::Replayed { submission_id: id.clone() });
        }
        let kind = match check_rules(cfg, &state.history, &env) {
            Ok(k) => k,
            Err(r) => return reject(r),
        };
        let aggregate = aggregate_session(&env.samples).expect("checked by check_envelope");
        let mut sub = Submission {
            submission_id: uuid::Uuid::new_v4().to_string(),
            participant_id: p.participant_id.clone(),
            experiment_id: p.experiment_id.clone(),
            session_start_ms: env.client_session_start,
            session_end_ms: env.client_session_end,
            is_first_of_day: kind == SessionKind::FirstOfDay,
            question_bank_hash: bank().content_hash().to_string(),
            answers: env.response.answers,
            aggregate,
            validity: Validity::Valid,
            idempotency_key: env.idempotency_key,
        };
        sub.validity = check_validity(&sub, &env.samples);
        let samples = SampleRecord { submission_id: sub.submission_id.clone(), samples: env.samples };
        {
            let mut committed = self.committed.lock().unwrap_or_else(|p| p.into_inner());
            self.storage.append_submission(&sub, &samples).map_err(SubmitError::Storage)?;
            committed.push(sub.clone());
        }
        state.history.accepted_end_ms.push(sub.session_end_ms);
        state.accepted_keys.insert(sub.idempotency_key.clone(), sub.submission_id.clone());
        Ok(SubmitOutcome::Accepted { submission_id: sub.submission_id, validity: sub.validity })
    }

    /// Stored submissions of an experiment in the order they were accepted.
    pub fn export(&self, experiment_id: &str, include_invalid: bool) -> Option<Vec<Submission>> {
        self.experiments.get(experiment_id)?;
        let committed = self.committed.lock().unwrap_or_else(|p| p.into_inner());
        Some(
            committed
                .iter()
                .filter(|s| s.experiment_id == experiment_id && (include_invalid || s.validity.is_valid()))
                .cloned()
                .collect(),
        )
    }

    pub fn healthy(&self) -> bool {
        self.storage.healthy()
    }

    /// One reading from the configured emulator.
    pub async fn sensor_snapshot(&self) -> Result<SensorSample, IngestError> {
        let addr = self.emulator_addr.as_deref().ok_or(IngestError::NoEmulator)?;
        let fetch = async {
            let mut client = EmulatorClient::connect(addr).await?;
            client.snapshot().await
        };
        match tokio::time::timeout(Duration::from_secs(2), fetch).await {
            Ok(r) => r.map_err(|e| IngestError::Emulator(e.to_string())),
            Err(_) => Err(IngestError::Emulator("timed out".into())),
        }
    }
}
