//! Two-stage training: a convex warm start stopped by the gradient rule
//! ‖∇L‖²/dim ≤ τ_g or its epoch budget, then plain gradient descent on the
//! target objective. Traces record what the descent-lemma checks need.

mod config;
mod descent;
mod objective;
mod stages;
mod toy;
mod trace;

pub use config::{Schedule, Stage1Mode, TwoStageConfig};
pub use descent::{check_descent_inequality, descent_constant, estimate_smoothness, norm, trajectory_smoothness};
pub use objective::{Objective, ResidualModel};
pub use stages::{
    run_schedule, run_two_stage, stage1_convex, stage2_refine, ConvergenceReport, Problem, Stage1Loss, StageResult,
    Termination,
};
pub use toy::{lemma_suite, FnObjective, LemmaCase, LemmaSuiteReport, LogisticToy, QuadraticToy};
pub use trace::{IterRecord, Stage, TrainingTrace, TRACE_SCHEMA};
