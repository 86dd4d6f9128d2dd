use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    Depolarizing,
}

/// Which qubits receive noise after each circuit layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScope {
    AllQubits,
    Qubits(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default = "default_model")]
    pub model: NoiseModel,
    /// Per-qubit, per-layer error rate.
    #[serde(default = "default_probability")]
    pub probability: f64,
    #[serde(default = "default_scope")]
    pub scope: NoiseScope,
}

fn default_scope() -> NoiseScope {
    NoiseScope::AllQubits
}

fn default_model() -> NoiseModel {
    NoiseModel::Depolarizing
}

fn default_probability() -> f64 {
    NoiseSpec::DEFAULT_PROBABILITY
}

fn default_shots() -> u64 {
    ChannelMode::DEFAULT_SHOTS
}

fn default_noise() -> NoiseSpec {
    NoiseSpec {
        model: NoiseModel::Depolarizing,
        probability: NoiseSpec::DEFAULT_PROBABILITY,
        scope: NoiseScope::AllQubits,
    }
}

impl NoiseSpec {
    pub const DEFAULT_PROBABILITY: f64 = 0.01;

    pub fn none() -> Self {
        Self {
            model: NoiseModel::None,
            probability: 0.0,
            scope: NoiseScope::AllQubits,
        }
    }

    pub fn depolarizing(probability: f64) -> Result<Self> {
        let s = Self {
            model: NoiseModel::Depolarizing,
            probability,
            scope: NoiseScope::AllQubits,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::InvalidProbability(self.probability));
        }
        if self.model == NoiseModel::None && self.probability != 0.0 {
            return Err(Error::config(
                "noise.probability",
                "must be 0 when the noise model is none",
            ));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.model == NoiseModel::Depolarizing && self.probability > 0.0
    }

    pub(crate) fn qubits(&self, n_qubits: usize) -> Vec<usize> {
        match &self.scope {
            NoiseScope::AllQubits => (0..n_qubits).collect(),
            NoiseScope::Qubits(q) => q.clone(),
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::none()
    }
}

/// How expectation values are obtained: exactly from the statevector, from a
/// finite number of measurement shots, or exactly from a noisy density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelMode {
    Ideal,
    Shots {
        #[serde(default = "default_shots")]
        shots: u64,
    },
    Noisy {
        #[serde(default = "default_noise")]
        noise: NoiseSpec,
    },
}

impl ChannelMode {
    pub const DEFAULT_SHOTS: u64 = 1000;

    pub fn shots(shots: u64) -> Result<Self> {
        let m = ChannelMode::Shots { shots };
        m.validate()?;
        Ok(m)
    }

    pub fn noisy(probability: f64) -> Result<Self> {
        Ok(ChannelMode::Noisy {
            noise: NoiseSpec::depolarizing(probability)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelMode::Ideal => Ok(()),
            ChannelMode::Shots { shots: 0 } => Err(Error::ZeroShots),
            ChannelMode::Shots { .. } => Ok(()),
            ChannelMode::Noisy { noise } => noise.validate(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ChannelMode::Ideal => "ideal",
            ChannelMode::Shots { .. } => "shots",
            ChannelMode::Noisy { .. } => "noisy",
        }
    }
}
