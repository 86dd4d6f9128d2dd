use serde::{Deserialize, Serialize};

use crate::ansatz::InitScheme;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage1Mode {
    /// θ ← θ − η_c ∇L_convex(θ)
    GradientDescent,
    /// θ ← θ + (ΦᵀΦ + λI)⁻¹Φᵀr, re-linearized every iteration.
    GaussNewtonRidge,
}

/// Which stages a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    TwoStage,
    /// Stage 2 only, given the combined epoch budget of both stages.
    RefineOnly,
    /// Stage 1 only.
    ConvexOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoStageConfig {
    pub eta_c: f64,
    pub eta_n: f64,
    pub tau_g: f64,
    pub max_epochs_stage1: usize,
    pub max_epochs_stage2: usize,
    pub stage1_mode: Stage1Mode,
    pub ridge_lambda: f64,
    /// Stage 2 stops early once ‖∇L‖ falls below this.
    pub convergence_floor: f64,
    pub init: InitScheme,
    pub seed: u64,
    /// Estimate smoothness along the trajectory and warn when a step size
    /// exceeds 2/L̂.
    pub check_step_size: bool,
    /// Fill `elapsed_ms` in traces. Off by default so that traces are
    /// reproducible byte for byte.
    pub record_wall_time: bool,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        Self {
            eta_c: 0.05,
            eta_n: 0.01,
            tau_g: 1e-3,
            max_epochs_stage1: 100,
            max_epochs_stage2: 450,
            stage1_mode: Stage1Mode::GaussNewtonRidge,
            ridge_lambda: 1e-2,
            convergence_floor: 1e-8,
            init: InitScheme::RandomNormal { sigma: 0.1 },
            seed: 0,
            check_step_size: true,
            record_wall_time: false,
        }
    }
}

impl TwoStageConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta_c", self.eta_c),
            ("eta_n", self.eta_n),
            ("tau_g", self.tau_g),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::config("ridge_lambda", format!("must be ≥ 0, got {}", self.ridge_lambda)));
        }
        if !(self.convergence_floor >= 0.0 && self.convergence_floor.is_finite()) {
            return Err(Error::config("convergence_floor", "must be ≥ 0"));
        }
        if self.max_epochs_stage1 == 0 {
            return Err(Error::config("max_epochs_stage1", "must be at least 1"));
        }
        if self.max_epochs_stage2 == 0 {
            return Err(Error::config("max_epochs_stage2", "must be at least 1"));
        }
        self.init.validate()
    }

    pub fn total_epochs(&self) -> usize {
        self.max_epochs_stage1 + self.max_epochs_stage2
    }
}
