use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wellness_core::{SensorSample, Variable};

use crate::profile::{EnvironmentProfile, Shape, VariableGenerator};
use crate::EmuError;

/// Injected sensor faults.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FaultMode {
    #[default]
    None,
    /// Listed variables read exactly 0.0, the low-battery symptom.
    ZeroBattery(BTreeSet<Variable>),
    /// Each sample is lost with this probability; its seq is still consumed.
    Dropout(f64),
}

impl FaultMode {
    pub fn zero(vars: impl IntoIterator<Item = Variable>) -> Self {
        FaultMode::ZeroBattery(vars.into_iter().collect())
    }

    pub fn dropout(p: f64) -> Result<Self, EmuError> {
        if (0.0..=1.0).contains(&p) {
            Ok(FaultMode::Dropout(p))
        } else {
            Err(EmuError::Fault(format!("dropout probability {p} outside [0, 1]")))
        }
    }
}

impl FromStr for FaultMode {
    type Err = EmuError;

    /// `none`, `zero:<var>[,<var>...]` or `drop:<p>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "none" => Ok(FaultMode::None),
            Some(("zero", vars)) => {
                let set = vars
                    .split(',')
                    .map(|v| {
                        if v == "all" {
                            Ok(Variable::ALL.to_vec())
                        } else {
                            v.parse::<Variable>().map(|v| vec![v]).map_err(EmuError::Fault)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .flatten()
                    .collect::<BTreeSet<_>>();
                if set.is_empty() {
                    return Err(EmuError::Fault("zero fault needs at least one variable".into()));
                }
                Ok(FaultMode::ZeroBattery(set))
            }
            Some(("drop", p)) => {
                let p: f64 = p.parse().map_err(|_| EmuError::Fault(format!("bad dropout probability `{p}`")))?;
                FaultMode::dropout(p)
            }
            _ => Err(EmuError::Fault(format!("unknown fault `{s}`"))),
        }
    }
}

impl fmt::Display for FaultMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultMode::None => f.write_str("none"),
            FaultMode::ZeroBattery(vars) => {
                let names: Vec<&str> = vars.iter().map(|v| v.name()).collect();
                write!(f, "zero:{}", names.join(","))
            }
            FaultMode::Dropout(p) => write!(f, "drop:{p}"),
        }
    }
}

fn draw(g: &VariableGenerator, minutes: f64, rng: &mut ChaCha8Rng) -> f64 {
    let mean = g.mean + g.drift_per_minute * minutes;
    // one draw per variable per sample regardless of shape keeps the stream
    // aligned when a profile changes shape
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    match g.shape {
        Shape::Constant => mean,
        Shape::Normal => mean + g.std_dev * z,
        Shape::Lognormal => {
            if mean <= 0.0 {
                return 0.0;
            }
            let sigma2 = (1.0 + (g.std_dev / mean).powi(2)).ln();
            let mu = mean.ln() - sigma2 / 2.0;
            (mu + sigma2.sqrt() * z).exp()
        }
    }
}

/// Deterministic sample source for one session.
///
/// Values come from one ChaCha stream and dropout decisions from another, so
/// a dropout run carries the same values as the fault-free run minus the
/// dropped samples.
#[derive(Debug, Clone)]
pub struct SampleGenerator {
    profile: EnvironmentProfile,
    fault: FaultMode,
    values: ChaCha8Rng,
    drops: ChaCha8Rng,
    period_ms: f64,
    origin_ms: i64,
    next_seq: u64,
}

impl SampleGenerator {
    pub fn new(profile: EnvironmentProfile, fault: FaultMode, rate_hz: f64, origin_ms: i64) -> Result<Self, EmuError> {
        if !(rate_hz > 0.0 && rate_hz <= 100.0) {
            return Err(EmuError::Rate(rate_hz));
        }
        profile.validate()?;
        let seed = profile.seed;
        Ok(Self {
            profile,
            fault,
            values: ChaCha8Rng::seed_from_u64(seed),
            drops: ChaCha8Rng::seed_from_u64(seed ^ 0xd0d0_d0d0_d0d0_d0d0),
            period_ms: 1000.0 / rate_hz,
            origin_ms,
            next_seq: 1,
        })
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    fn value_sample(&mut self, seq: u64, timestamp_ms: i64, minutes: f64) -> SensorSample {
        let mut s = SensorSample {
            seq,
            timestamp_ms,
            temperature: 0.0,
            humidity: 0.0,
            pressure: 0.0,
            luminosity: 0.0,
            audio: 0.0,
        };
        for v in Variable::ALL {
            let (lo, hi) = v.physical_range();
            let raw = draw(self.profile.generator(v), minutes, &mut self.values);
            s.set(v, raw.clamp(lo, hi));
        }
        if let FaultMode::ZeroBattery(vars) = &self.fault {
            for v in vars {
                s.set(*v, 0.0);
            }
        }
        s
    }

    /// Advances one sample period. `None` means the sample was dropped.
    pub fn step(&mut self) -> Option<SensorSample> {
        let seq = self.next_seq;
        self.next_seq += 1;
        let elapsed_ms = (seq - 1) as f64 * self.period_ms;
        let sample = self.value_sample(seq, self.origin_ms + elapsed_ms.round() as i64, elapsed_ms / 60_000.0);
        if let FaultMode::Dropout(p) = self.fault {
            if self.drops.random::<f64>() < p {
                return None;
            }
        }
        Some(sample)
    }

    /// Emitted samples among the next `periods` steps.
    pub fn take_periods(&mut self, periods: usize) -> Vec<SensorSample> {
        (0..periods).filter_map(|_| self.step()).collect()
    }
}

impl Iterator for SampleGenerator {
    type Item = Option<SensorSample>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.step())
    }
}

/// One reading from the profile with seq 0, drawn from the profile seed.
pub fn snapshot(profile: &EnvironmentProfile, fault: &FaultMode, timestamp_ms: i64) -> SensorSample {
    let fault = match fault {
        FaultMode::Dropout(_) => FaultMode::None,
        other => other.clone(),
    };
    let mut g = SampleGenerator::new(profile.clone(), fault, 1.0, timestamp_ms).expect("rate 1 Hz is valid");
    g.value_sample(0, timestamp_ms, 0.0)
}

/// Empirical distribution check helper: `n` fault-free values of `variable`.
pub fn draw_values(profile: &EnvironmentProfile, variable: Variable, n: usize) -> Vec<f64> {
    let mut g = SampleGenerator::new(profile.clone(), FaultMode::None, 1.0, 0).expect("rate 1 Hz is valid");
    (0..n).filter_map(|_| g.step()).map(|s| s.get(variable)).collect()
}
