use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cloning::{Baseline, Register};
use crate::diagnostics::{CostObservable, LayerList, SweepInit, VarianceSweepSpec};
use crate::error::{Error, Result};
use crate::optimizer::TwoStageConfig;
use crate::qsim::ChannelMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CloningLayerSweep,
    CloningIterationCurve,
    VarianceSweep,
    LemmaSuite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloningConfig {
    /// Idle qubits after (input, Bob, Eve); 7 gives the 10-qubit variant.
    pub ancillas: usize,
    pub channel: ChannelMode,
    /// Depths for the layer sweep.
    pub layers: Vec<usize>,
    /// Depth for the iteration curve.
    pub curve_layers: usize,
    pub baselines: Vec<Baseline>,
    /// Runs use seeds `seed, seed + 1, …, seed + seeds − 1`.
    pub seeds: usize,
    /// Emit one row per signal state as well as the averaged row.
    pub per_state_rows: bool,
}

impl Default for CloningConfig {
    fn default() -> Self {
        Self {
            ancillas: 0,
            channel: ChannelMode::Ideal,
            layers: (1..=6).collect(),
            curve_layers: 5,
            baselines: Baseline::ALL.to_vec(),
            seeds: 10,
            per_state_rows: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceArm {
    pub init: SweepInit,
    pub observable: CostObservable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceConfig {
    pub qubit_list: Vec<usize>,
    pub layer_list: LayerList,
    pub samples: usize,
    pub bootstrap_resamples: usize,
    pub arms: Vec<VarianceArm>,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            qubit_list: vec![2, 4, 6, 8],
            layer_list: LayerList::MatchQubits,
            samples: 200,
            bootstrap_resamples: 1000,
            arms: vec![
                VarianceArm {
                    init: SweepInit::RandomNormal {
                        sigma: std::f64::consts::PI,
                    },
                    observable: CostObservable::Global,
                },
                VarianceArm {
                    init: SweepInit::RandomNormal {
                        sigma: std::f64::consts::PI,
                    },
                    observable: CostObservable::Local,
                },
                VarianceArm {
                    init: SweepInit::WarmStart {
                        sigma: 0.1,
                        epochs: 20,
                        ridge_lambda: 1e-2,
                    },
                    observable: CostObservable::Local,
                },
            ],
        }
    }
}

impl VarianceConfig {
    pub fn specs(&self, seed: u64) -> Vec<VarianceSweepSpec> {
        self.arms
            .iter()
            .map(|arm| VarianceSweepSpec {
                qubit_list: self.qubit_list.clone(),
                layer_list: self.layer_list.clone(),
                init: arm.init.clone(),
                observable: arm.observable,
                samples: self.samples,
                seed,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: TwoStageConfig,
    #[serde(default)]
    pub cloning: CloningConfig,
    #[serde(default)]
    pub variance: VarianceConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn prefixed(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidConfig { key, reason } if !key.starts_with(section) => Error::InvalidConfig {
            key: format!("{section}.{key}"),
            reason,
        },
        other => other,
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            output_dir: default_output_dir(),
            seed: 0,
            optimizer: TwoStageConfig::default(),
            cloning: CloningConfig::default(),
            variance: VarianceConfig::default(),
        }
    }

    /// Checks every section, whichever experiment is selected, so a file that
    /// validates can be switched between experiments safely.
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate().map_err(|e| prefixed("optimizer", e))?;
        for (key, seed) in [("seed", self.seed), ("optimizer.seed", self.optimizer.seed)] {
            if seed > i64::MAX as u64 {
                return Err(Error::config(key, "seed must fit in a signed 64-bit integer"));
            }
        }
        let c = &self.cloning;
        Register::padded(c.ancillas).validate().map_err(|e| prefixed("cloning", e))?;
        c.channel.validate().map_err(|e| match e {
            Error::InvalidConfig { .. } => prefixed("cloning", e),
            other => Error::config("cloning.channel", other.to_string()),
        })?;
        if c.layers.is_empty() || c.layers.contains(&0) {
            return Err(Error::config("cloning.layers", "need a non-empty list of positive depths"));
        }
        if c.curve_layers == 0 {
            return Err(Error::config("cloning.curve_layers", "must be at least 1"));
        }
        if c.baselines.is_empty() {
            return Err(Error::config("cloning.baselines", "must not be empty"));
        }
        if c.seeds == 0 {
            return Err(Error::config("cloning.seeds", "must be at least 1"));
        }
        if self.variance.arms.is_empty() {
            return Err(Error::config("variance.arms", "must not be empty"));
        }
        if self.variance.bootstrap_resamples == 0 {
            return Err(Error::config("variance.bootstrap_resamples", "must be at least 1"));
        }
        for s in self.variance.specs(self.seed) {
            s.validate().map_err(|e| prefixed("variance", e))?;
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.cloning.seeds as u64).map(|i| self.seed + i).collect()
    }
}

/// Parses and validates configuration text. Omitted keys take their
/// defaults; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Serializes with every default spelled out.
pub fn save_config(cfg: &ExperimentConfig, path: impl AsRef<Path>) -> Result<()> {
    let text = toml::to_string(cfg).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}
