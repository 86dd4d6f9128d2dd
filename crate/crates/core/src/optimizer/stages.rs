use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::descent::{dist, norm};
use super::{
    check_descent_inequality, descent_constant, trajectory_smoothness, IterRecord, Objective, ResidualModel,
    Schedule, Stage, Stage1Mode, TrainingTrace, TwoStageConfig,
};
use crate::ansatz::{init_params, ParamVector};
use crate::error::{Error, Result};
use crate::loss::solve_normal_equations;

/// Stage-1 loss: always an objective; a residual model as well when the
/// Gauss-Newton mode is to be used.
#[derive(Clone, Copy)]
pub struct Stage1Loss<'a> {
    pub objective: &'a dyn Objective,
    pub residuals: Option<&'a dyn ResidualModel>,
}

impl<'a> Stage1Loss<'a> {
    pub fn objective(objective: &'a dyn Objective) -> Self {
        Self {
            objective,
            residuals: None,
        }
    }

    pub fn with_residuals<T: Objective + ResidualModel>(loss: &'a T) -> Self {
        Self {
            objective: loss,
            residuals: Some(loss),
        }
    }
}

/// Everything `run_two_stage` needs besides the configuration.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub stage1: Stage1Loss<'a>,
    /// The target objective E refined in Stage 2.
    pub stage2: &'a dyn Objective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientRule,
    ConvergenceFloor,
    EpochBudget,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schedule: Schedule,
    pub stage1_terminated_by: Termination,
    pub stage1_iters: usize,
    pub stage2_terminated_by: Termination,
    pub stage2_iters: usize,
    /// ‖∇L‖ at the last recorded iterate.
    pub final_gradient_norm: f64,
    /// Sum of the two per-stage counts below.
    pub descent_violations: usize,
    pub stage1_violations: usize,
    pub stage2_violations: usize,
    pub stage1_smoothness: f64,
    pub stage2_smoothness: f64,
    /// E(θ*) at the returned point.
    pub final_loss: f64,
    /// ‖∇E(θ*)‖ at the returned point.
    pub stationarity_gap: f64,
}

#[derive(Debug, Clone)]
pub struct StageResult {
    pub params: ParamVector,
    pub trace: TrainingTrace,
    pub terminated_by: Termination,
    /// Parameter updates performed.
    pub iters: usize,
}

struct Recorder {
    stage: Stage,
    start: Instant,
    wall_time: bool,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    trace: TrainingTrace,
}

impl Recorder {
    fn new(stage: Stage, cfg: &TwoStageConfig) -> Self {
        Self {
            stage,
            start: Instant::now(),
            wall_time: cfg.record_wall_time,
            prev: None,
            trace: TrainingTrace::new(),
        }
    }

    fn record(&mut self, iter: usize, params: &[f64], loss: f64, grad: &[f64]) -> Result<()> {
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss {
                stage: self.stage.name(),
                iter,
            });
        }
        let curvature = self.prev.as_ref().and_then(|(p, g)| {
            let dx = dist(p, params);
            (dx > 0.0).then(|| dist(g, grad) / dx)
        });
        let snapshot = ParamVector::new(params.to_vec())?;
        let record = IterRecord {
            stage: self.stage,
            iter,
            loss,
            grad_norm: norm(grad),
            params_hash: snapshot.snapshot_hash(),
            curvature,
            slack: None,
            elapsed_ms: if self.wall_time {
                self.start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            },
        };
        self.trace.push(record, snapshot)?;
        self.prev = Some((params.to_vec(), grad.to_vec()));
        Ok(())
    }

    /// Fills slack_k = L_k − c‖g_k‖² − L_{k+1}.
    fn finish(mut self, c: f64) -> TrainingTrace {
        let recs = self.trace.records_mut();
        for k in 0..recs.len().saturating_sub(1) {
            recs[k].slack = Some(recs[k].loss - c * recs[k].grad_norm.powi(2) - recs[k + 1].loss);
        }
        self.trace
    }
}

fn check_dim(params: &ParamVector, dim: usize) -> Result<()> {
    if params.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: params.dim(),
        });
    }
    Ok(())
}

fn warn_step(stage: Stage, eta: f64, smoothness: f64) {
    if smoothness > 0.0 && eta >= 2.0 / smoothness {
        log::warn!(
            "{}: step size {eta} violates η < 2/L̂ with L̂ = {smoothness:.4}",
            stage.name()
        );
    }
}

/// Stage 1. Records θ_k before each update and stops at the first k with
/// ‖∇L(θ_k)‖²/dim ≤ τ_g, or after `max_epochs_stage1` updates.
pub fn stage1_convex(params0: &ParamVector, loss: &Stage1Loss<'_>, cfg: &TwoStageConfig) -> Result<StageResult> {
    cfg.validate()?;
    let dim = loss.objective.dim();
    check_dim(params0, dim)?;
    let residuals = match (cfg.stage1_mode, loss.residuals) {
        (Stage1Mode::GaussNewtonRidge, None) => {
            return Err(Error::config(
                "stage1_mode",
                "gauss_newton_ridge needs a loss that can be linearized",
            ))
        }
        (Stage1Mode::GaussNewtonRidge, Some(r)) => Some(r),
        (Stage1Mode::GradientDescent, _) => None,
    };
    let mut rec = Recorder::new(Stage::Convex, cfg);
    let mut theta = params0.values().to_vec();
    let mut terminated_by = Termination::EpochBudget;
    let mut iters = 0;
    for k in 0..cfg.max_epochs_stage1 {
        let (value, grad, step) = match residuals {
            Some(model) => {
                let sys = model.linearize(&theta)?;
                let w = model.residual_weight();
                let grad: Vec<f64> = sys.residual_sq_gradient().iter().map(|g| w * g).collect();
                let step = solve_normal_equations(&sys.jacobian, &sys.residual, cfg.ridge_lambda)?;
                (w * sys.residual_sq(), grad, step.iter().copied().collect::<Vec<_>>())
            }
            None => {
                let (value, grad) = loss.objective.value_and_gradient(&theta)?;
                let step = grad.iter().map(|g| -cfg.eta_c * g).collect();
                (value, grad, step)
            }
        };
        rec.record(k, &theta, value, &grad)?;
        if norm(&grad).powi(2) / dim as f64 <= cfg.tau_g {
            terminated_by = Termination::GradientRule;
            break;
        }
        for (t, s) in theta.iter_mut().zip(&step) {
            *t += s;
        }
        iters += 1;
    }
    let smoothness = trajectory_smoothness(&rec.trace);
    let c = match cfg.stage1_mode {
        Stage1Mode::GradientDescent => {
            if cfg.check_step_size {
                warn_step(Stage::Convex, cfg.eta_c, smoothness);
            }
            descent_constant(cfg.eta_c, smoothness)
        }
        Stage1Mode::GaussNewtonRidge => 0.0,
    };
    Ok(StageResult {
        params: ParamVector::new(theta)?,
        trace: rec.finish(c),
        terminated_by,
        iters,
    })
}

/// Stage 2: θ ← θ − η_n∇E(θ) for up to `budget` updates, stopping early once
/// ‖∇E‖ ≤ `convergence_floor`.
pub fn stage2_refine(
    params: &ParamVector,
    loss: &dyn Objective,
    cfg: &TwoStageConfig,
    budget: usize,
) -> Result<StageResult> {
    cfg.validate()?;
    check_dim(params, loss.dim())?;
    let mut rec = Recorder::new(Stage::Refine, cfg);
    let mut theta = params.values().to_vec();
    let mut terminated_by = Termination::EpochBudget;
    let mut iters = 0;
    for k in 0..budget {
        let (value, grad) = loss.value_and_gradient(&theta)?;
        rec.record(k, &theta, value, &grad)?;
        if norm(&grad) <= cfg.convergence_floor {
            terminated_by = Termination::ConvergenceFloor;
            break;
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= cfg.eta_n * g;
        }
        iters += 1;
    }
    let smoothness = trajectory_smoothness(&rec.trace);
    if cfg.check_step_size {
        warn_step(Stage::Refine, cfg.eta_n, smoothness);
    }
    Ok(StageResult {
        params: ParamVector::new(theta)?,
        trace: rec.finish(descent_constant(cfg.eta_n, smoothness)),
        terminated_by,
        iters,
    })
}

pub fn run_two_stage(
    problem: &Problem<'_>,
    cfg: &TwoStageConfig,
) -> Result<(ParamVector, ConvergenceReport, TrainingTrace)> {
    run_schedule(problem, cfg, Schedule::TwoStage)
}

/// Initializes from `cfg.init` with `cfg.seed` and runs the stages the
/// schedule selects.
pub fn run_schedule(
    problem: &Problem<'_>,
    cfg: &TwoStageConfig,
    schedule: Schedule,
) -> Result<(ParamVector, ConvergenceReport, TrainingTrace)> {
    cfg.validate()?;
    let dim = problem.stage2.dim();
    if problem.stage1.objective.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: problem.stage1.objective.dim(),
        });
    }
    let theta0 = init_params(&cfg.init, dim, cfg.seed)?;
    let mut trace = TrainingTrace::new();
    let mut v1 = 0;
    let mut v2 = 0;

    let (theta, stage1_terminated_by, stage1_iters, stage1_smoothness) = match schedule {
        Schedule::RefineOnly => (theta0, Termination::Skipped, 0, 0.0),
        Schedule::TwoStage | Schedule::ConvexOnly => {
            let s1 = stage1_convex(&theta0, &problem.stage1, cfg)?;
            let l_hat = trajectory_smoothness(&s1.trace);
            v1 = match cfg.stage1_mode {
                Stage1Mode::GradientDescent => check_descent_inequality(&s1.trace, l_hat, cfg.eta_c),
                Stage1Mode::GaussNewtonRidge => check_descent_inequality(&s1.trace, l_hat, 0.0),
            };
            trace.extend(s1.trace)?;
            (s1.params, s1.terminated_by, s1.iters, l_hat)
        }
    };

    let budget = match schedule {
        Schedule::TwoStage => Some(cfg.max_epochs_stage2),
        Schedule::RefineOnly => Some(cfg.total_epochs()),
        Schedule::ConvexOnly => None,
    };
    let (theta, stage2_terminated_by, stage2_iters, stage2_smoothness) = match budget {
        None => (theta, Termination::Skipped, 0, 0.0),
        Some(budget) => {
            let s2 = stage2_refine(&theta, problem.stage2, cfg, budget)?;
            let l_hat = trajectory_smoothness(&s2.trace);
            v2 = check_descent_inequality(&s2.trace, l_hat, cfg.eta_n);
            trace.extend(s2.trace)?;
            (s2.params, s2.terminated_by, s2.iters, l_hat)
        }
    };

    let (final_loss, grad) = problem.stage2.value_and_gradient(theta.values())?;
    let report = ConvergenceReport {
        schedule,
        stage1_terminated_by,
        stage1_iters,
        stage2_terminated_by,
        stage2_iters,
        final_gradient_norm: trace.records().last().map(|r| r.grad_norm).unwrap_or(0.0),
        descent_violations: v1 + v2,
        stage1_violations: v1,
        stage2_violations: v2,
        stage1_smoothness,
        stage2_smoothness,
        final_loss,
        stationarity_gap: norm(&grad),
    };
    Ok((theta, report, trace))
}
