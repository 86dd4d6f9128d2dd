use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{save_config, ExperimentConfig, ExperimentKind, PLOT_SCRIPT};
use crate::cloning::{
    iteration_curve, layer_sweep_outcomes, write_reports_csv, Baseline, CloningSetup, IterationCurve, Register,
};
use crate::diagnostics::{gradient_variance_sweep, write_variance_csv, CostObservable, SlopeFit};
use crate::error::{Error, Result};
use crate::optimizer::{lemma_suite, ConvergenceReport, TwoStageConfig};

/// Caps the worker pool used for independent runs.
pub const WORKERS_ENV: &str = "TWOSTAGE_WORKERS";

/// Sizes the global worker pool from `TWOSTAGE_WORKERS` when set and
/// returns the pool size in effect.
pub fn configure_workers() -> Result<usize> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::config(WORKERS_ENV, format!("expected a positive integer, got {v:?}")))?;
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Files written, in order.
    pub files: Vec<PathBuf>,
    /// False when the experiment's own success condition failed (the lemma
    /// suite found a violation).
    pub passed: bool,
    pub messages: Vec<String>,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        })
    }
}

#[derive(Serialize)]
struct RunRecord<'a> {
    layers: usize,
    baseline: Baseline,
    seed: u64,
    convergence: &'a ConvergenceReport,
}

#[derive(Serialize)]
struct VarianceSummary {
    init: String,
    observable: CostObservable,
    slopes: Vec<SlopeFit>,
    /// 95% percentile bootstrap interval per slope.
    slope_ci95: Vec<(f64, f64)>,
}

fn template(cfg: &ExperimentConfig, layers: usize) -> Result<CloningSetup> {
    CloningSetup::with_register(Register::padded(cfg.cloning.ancillas), layers, cfg.cloning.channel.clone())
}

/// Runs the configured experiment and writes its artifacts under
/// `output_dir`: result CSVs, a JSON convergence record, the resolved
/// configuration and a plotting script.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let mut out = Output::new(&cfg.output_dir)?;
    let mut messages = Vec::new();
    let mut passed = true;
    let path = out.dir.join("config.toml");
    save_config(cfg, &path)?;
    out.files.push(path);

    match cfg.experiment {
        ExperimentKind::CloningLayerSweep => {
            let setup = template(cfg, cfg.cloning.layers[0])?;
            let outcomes =
                layer_sweep_outcomes(&setup, &cfg.cloning.layers, &cfg.optimizer, &cfg.cloning.baselines, &cfg.seeds())?;
            let reports: Vec<_> = outcomes.iter().map(|o| o.report.clone()).collect();
            out.write("layer_sweep.csv", |w| write_reports_csv(w, &reports, cfg.cloning.per_state_rows))?;
            let records: Vec<RunRecord> = outcomes
                .iter()
                .map(|o| RunRecord {
                    layers: o.job.layers,
                    baseline: o.job.baseline,
                    seed: o.job.seed,
                    convergence: &o.convergence,
                })
                .collect();
            out.json("convergence.json", &records)?;
            messages.push(format!("{} layer-sweep reports", reports.len()));
        }
        ExperimentKind::CloningIterationCurve => {
            let setup = template(cfg, cfg.cloning.curve_layers)?;
            let mut curves = Vec::new();
            for &baseline in &cfg.cloning.baselines {
                for seed in cfg.seeds() {
                    let run_cfg = TwoStageConfig {
                        seed,
                        ..cfg.optimizer.clone()
                    };
                    let setup = setup.clone().with_seed(seed);
                    curves.push(iteration_curve(&setup, &run_cfg, baseline)?);
                }
            }
            out.write("iteration_curve.csv", |w| IterationCurve::write_csv(&curves, w))?;
            for c in &curves {
                let name = format!("traces/{}_seed{}.csv", c.baseline.label(), c.seed);
                out.write(&name, |w| c.trace.write_csv(w))?;
            }
            let records: Vec<RunRecord> = curves
                .iter()
                .map(|c| RunRecord {
                    layers: c.layers,
                    baseline: c.baseline,
                    seed: c.seed,
                    convergence: &c.report,
                })
                .collect();
            out.json("convergence.json", &records)?;
            messages.push(format!("{} iteration curves", curves.len()));
        }
        ExperimentKind::VarianceSweep => {
            let mut reports = Vec::new();
            let mut summaries = Vec::new();
            for spec in cfg.variance.specs(cfg.seed) {
                let r = gradient_variance_sweep(&spec)?;
                summaries.push(VarianceSummary {
                    init: r.init.clone(),
                    observable: r.observable,
                    slopes: r.slopes.clone(),
                    slope_ci95: r.bootstrap_slope_ci(cfg.variance.bootstrap_resamples, 0.95, cfg.seed),
                });
                reports.push(r);
            }
            out.write("gradient_variance.csv", |w| write_variance_csv(w, &reports))?;
            out.json("variance_summary.json", &summaries)?;
            messages.push(format!("{} variance sweeps", reports.len()));
        }
        ExperimentKind::LemmaSuite => {
            let report = lemma_suite(cfg.seed)?;
            out.json("lemma_suite.json", &report)?;
            passed = report.passed();
            messages.push(format!(
                "lemma suite: {} cases, {} descent violations",
                report.cases.len(),
                report.total_violations()
            ));
        }
    }

    out.write("plot_figures.py", |w| Ok(w.write_all(PLOT_SCRIPT.as_bytes())?))?;
    Ok(RunSummary {
        files: out.files,
        passed,
        messages,
    })
}
