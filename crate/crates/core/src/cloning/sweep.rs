use std::io::Write;

use rayon::prelude::*;

use super::{average_fidelity, Baseline, CloningSetup, FidelityReport};
use crate::ansatz::ParamVector;
use crate::error::{Error, Result};
use crate::optimizer::{run_schedule, ConvergenceReport, Problem, Schedule, Stage, Stage1Loss, TrainingTrace, TwoStageConfig};

pub const CURVE_SCHEMA: &str = "# schema: twostage.iteration_curve v1";

impl Baseline {
    pub fn schedule(self) -> Schedule {
        match self {
            Baseline::TwoStage => Schedule::TwoStage,
            Baseline::RandomInitNonconvex => Schedule::RefineOnly,
            Baseline::ConvexOnly => Schedule::ConvexOnly,
        }
    }
}

/// Trains `setup` under `baseline` with `cfg` (its seed drives the
/// initializer).
pub fn train(
    setup: &CloningSetup,
    cfg: &TwoStageConfig,
    baseline: Baseline,
) -> Result<(ParamVector, ConvergenceReport, TrainingTrace)> {
    let surrogate = setup.surrogate_objective();
    let nonconvex = setup.nonconvex_objective();
    let problem = Problem {
        stage1: Stage1Loss::with_residuals(&surrogate),
        stage2: &nonconvex,
    };
    run_schedule(&problem, cfg, baseline.schedule())
}

/// One cell of a layer sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepJob {
    pub layers: usize,
    pub baseline: Baseline,
    pub seed: u64,
}

/// Trains every (layer count, baseline, seed) cell and reports the final
/// average fidelity. Baselines sharing a seed start from the same
/// initial parameters. Output order follows layers, then baselines, then
/// seeds, regardless of scheduling.
pub fn layer_sweep(
    template: &CloningSetup,
    layers: &[usize],
    cfg: &TwoStageConfig,
    baselines: &[Baseline],
    seeds: &[u64],
) -> Result<Vec<FidelityReport>> {
    Ok(layer_sweep_outcomes(template, layers, cfg, baselines, seeds)?
        .into_iter()
        .map(|o| o.report)
        .collect())
}

/// A finished sweep cell with the optimizer's convergence record.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub job: SweepJob,
    pub report: FidelityReport,
    pub convergence: ConvergenceReport,
}

/// [`layer_sweep`], keeping each run's convergence report.
pub fn layer_sweep_outcomes(
    template: &CloningSetup,
    layers: &[usize],
    cfg: &TwoStageConfig,
    baselines: &[Baseline],
    seeds: &[u64],
) -> Result<Vec<SweepOutcome>> {
    if layers.is_empty() {
        return Err(Error::InvalidSweep("layer list is empty".into()));
    }
    if baselines.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidSweep("need at least one baseline and one seed".into()));
    }
    let jobs: Vec<SweepJob> = layers
        .iter()
        .flat_map(|&layers| {
            baselines
                .iter()
                .flat_map(move |&baseline| seeds.iter().map(move |&seed| SweepJob { layers, baseline, seed }))
        })
        .collect();
    jobs.par_iter().map(|job| run_job(template, cfg, job)).collect()
}

fn run_job(template: &CloningSetup, cfg: &TwoStageConfig, job: &SweepJob) -> Result<SweepOutcome> {
    let setup = template.with_layers(job.layers)?.with_seed(job.seed);
    let cfg = TwoStageConfig {
        seed: job.seed,
        ..cfg.clone()
    };
    let (theta, convergence, _) = train(&setup, &cfg, job.baseline)?;
    Ok(SweepOutcome {
        job: *job,
        report: average_fidelity(theta.values(), &setup)?.with_baseline(job.baseline),
        convergence,
    })
}

/// Average fidelity at every recorded iterate of one training run.
#[derive(Debug, Clone)]
pub struct IterationCurve {
    pub layers: usize,
    pub baseline: Baseline,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub losses: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// First stage-2 index, when the run had both stages.
    pub switch_index: Option<usize>,
    pub final_fidelity: f64,
    pub report: ConvergenceReport,
    pub trace: TrainingTrace,
}

pub fn iteration_curve(setup: &CloningSetup, cfg: &TwoStageConfig, baseline: Baseline) -> Result<IterationCurve> {
    let (theta, report, trace) = train(setup, cfg, baseline)?;
    let fidelity = trace
        .snapshots()
        .par_iter()
        .map(|p| Ok(average_fidelity(p.values(), setup)?.average_fidelity))
        .collect::<Result<Vec<_>>>()?;
    Ok(IterationCurve {
        layers: setup.ansatz().n_layers,
        baseline,
        seed: cfg.seed,
        stages: trace.records().iter().map(|r| r.stage).collect(),
        losses: trace.records().iter().map(|r| r.loss).collect(),
        fidelity,
        switch_index: trace.switch_index(),
        final_fidelity: average_fidelity(theta.values(), setup)?.average_fidelity,
        report,
        trace,
    })
}

impl IterationCurve {
    /// Schema line, then `iter,stage,loss,avg,seed,baseline`. The last row
    /// is the returned point, tagged `final`.
    pub fn write_csv<W: Write>(curves: &[IterationCurve], out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "{CURVE_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "stage", "loss", "avg", "seed", "baseline"])?;
        for c in curves {
            for (i, ((s, l), f)) in c.stages.iter().zip(&c.losses).zip(&c.fidelity).enumerate() {
                w.write_record([
                    i.to_string(),
                    s.id().to_string(),
                    l.to_string(),
                    f.to_string(),
                    c.seed.to_string(),
                    c.baseline.label().to_string(),
                ])?;
            }
            w.write_record([
                c.fidelity.len().to_string(),
                "final".to_string(),
                c.report.final_loss.to_string(),
                c.final_fidelity.to_string(),
                c.seed.to_string(),
                c.baseline.label().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
