use std::path::Path;

use serde::{Deserialize, Serialize};
use wellness_core::Variable;

use crate::EmuError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Constant,
    Normal,
    /// Log-normal parameterised by its own mean and standard deviation.
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableGenerator {
    pub shape: Shape,
    pub mean: f64,
    #[serde(default)]
    pub std_dev: f64,
    /// Added to the mean per elapsed minute of a session.
    #[serde(default)]
    pub drift_per_minute: f64,
}

impl VariableGenerator {
    pub const fn constant(value: f64) -> Self {
        Self {
            shape: Shape::Constant,
            mean: value,
            std_dev: 0.0,
            drift_per_minute: 0.0,
        }
    }

    pub const fn normal(mean: f64, std_dev: f64) -> Self {
        Self {
            shape: Shape::Normal,
            mean,
            std_dev,
            drift_per_minute: 0.0,
        }
    }

    pub const fn lognormal(mean: f64, std_dev: f64) -> Self {
        Self {
            shape: Shape::Lognormal,
            mean,
            std_dev,
            drift_per_minute: 0.0,
        }
    }
}

/// Per-variable generators plus the seed that makes a stream reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentProfile {
    pub name: String,
    pub seed: u64,
    pub temperature: VariableGenerator,
    pub humidity: VariableGenerator,
    pub pressure: VariableGenerator,
    pub luminosity: VariableGenerator,
    pub audio: VariableGenerator,
}

pub const BUILTIN_PROFILES: [&str; 3] = ["indoor-office", "outdoor-daylight", "late-night-dorm"];

impl EnvironmentProfile {
    pub fn generator(&self, v: Variable) -> &VariableGenerator {
        match v {
            Variable::Temperature => &self.temperature,
            Variable::Humidity => &self.humidity,
            Variable::Pressure => &self.pressure,
            Variable::Luminosity => &self.luminosity,
            Variable::Audio => &self.audio,
        }
    }

    pub fn generator_mut(&mut self, v: Variable) -> &mut VariableGenerator {
        match v {
            Variable::Temperature => &mut self.temperature,
            Variable::Humidity => &mut self.humidity,
            Variable::Pressure => &mut self.pressure,
            Variable::Luminosity => &mut self.luminosity,
            Variable::Audio => &mut self.audio,
        }
    }

    /// Every variable fixed at a value.
    pub fn constant(name: &str, t: f64, rh: f64, hpa: f64, lux: f64, db: f64) -> Self {
        Self {
            name: name.to_string(),
            seed: 0,
            temperature: VariableGenerator::constant(t),
            humidity: VariableGenerator::constant(rh),
            pressure: VariableGenerator::constant(hpa),
            luminosity: VariableGenerator::constant(lux),
            audio: VariableGenerator::constant(db),
        }
    }

    /// Shipped profiles. Means sit in the bulk of typical campus readings;
    /// they are qualitative, not fitted to any data.
    pub fn builtin(name: &str) -> Option<Self> {
        let (t, rh, hpa, lux, db) = match name {
            "indoor-office" => (
                VariableGenerator::normal(22.5, 1.5),
                VariableGenerator::normal(35.0, 6.0),
                VariableGenerator::normal(1005.0, 6.0),
                VariableGenerator::lognormal(350.0, 150.0),
                VariableGenerator::normal(48.0, 6.0),
            ),
            "outdoor-daylight" => (
                VariableGenerator::normal(12.0, 6.0),
                VariableGenerator::normal(60.0, 12.0),
                VariableGenerator::normal(1008.0, 8.0),
                VariableGenerator::lognormal(15_000.0, 9_000.0),
                VariableGenerator::normal(62.0, 8.0),
            ),
            "late-night-dorm" => (
                VariableGenerator::normal(23.5, 1.2),
                VariableGenerator::normal(30.0, 5.0),
                VariableGenerator::normal(1002.0, 6.0),
                VariableGenerator::lognormal(40.0, 30.0),
                VariableGenerator::normal(38.0, 5.0),
            ),
            _ => return None,
        };
        Some(Self {
            name: name.to_string(),
            seed: 0x5e05_0e7a,
            temperature: t,
            humidity: rh,
            pressure: hpa,
            luminosity: lux,
            audio: db,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, EmuError> {
        let p: Self = serde_json::from_str(text).map_err(|e| EmuError::Profile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// A builtin name, or a path to a JSON profile file.
    pub fn resolve(name_or_path: &str) -> Result<Self, EmuError> {
        if let Some(p) = Self::builtin(name_or_path) {
            return Ok(p);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path)
            .map_err(|e| EmuError::Profile(format!("{name_or_path}: not a builtin profile and unreadable: {e}")))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), EmuError> {
        for v in Variable::ALL {
            let g = self.generator(v);
            if g.std_dev.is_nan() || g.std_dev < 0.0 || !g.mean.is_finite() || !g.drift_per_minute.is_finite() {
                return Err(EmuError::Profile(format!("{v}: invalid generator {g:?}")));
            }
            if g.shape == Shape::Lognormal && g.mean <= 0.0 {
                return Err(EmuError::Profile(format!("{v}: log-normal mean must be positive")));
            }
        }
        Ok(())
    }
}
