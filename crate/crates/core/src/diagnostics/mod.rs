//! Barren-plateau instrumentation: variance of a fixed partial derivative
//! across register widths, depths and initializers, and a check that the
//! convex warm start hands Stage 2 usable gradients.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::Uniform;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_pqc3, init_params, partial_parameter_shift, AnsatzSpec, InitScheme};
use crate::error::{Error, Result};
use crate::loss::{CircuitContext, ConvexLocalLoss, ConvexLossSpec, ObservableSpec};
use crate::optimizer::{run_schedule, stage1_convex, Problem, Schedule, Stage1Loss, Stage1Mode, TwoStageConfig};
use crate::qsim::StateVector;

pub const VARIANCE_SCHEMA: &str = "# schema: twostage.gradient_variance v1";

/// Widest register the sweep accepts.
pub const MAX_SWEEP_QUBITS: usize = 10;

/// Fewest samples per cell.
pub const MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostObservable {
    /// Z⊗Z⊗…⊗Z over the whole register.
    Global,
    /// Z on qubit 0.
    Local,
}

impl CostObservable {
    pub fn build(self, n_qubits: usize) -> ObservableSpec {
        match self {
            CostObservable::Global => ObservableSpec::global_z(n_qubits),
            CostObservable::Local => ObservableSpec::z(0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CostObservable::Global => "global",
            CostObservable::Local => "local",
        }
    }
}

/// How each sampled parameter vector is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepInit {
    RandomNormal {
        sigma: f64,
    },
    IdentityNearZero {
        epsilon: f64,
    },
    /// N(0, σ²) start followed by `epochs` Gauss-Newton ridge steps on the
    /// convex loss Σᵢ(⟨Zᵢ⟩ − cos xᵢ)², with one random angle-encoding
    /// target x ∈ [0, π]ⁿ drawn per sample.
    WarmStart {
        sigma: f64,
        epochs: usize,
        ridge_lambda: f64,
    },
}

impl SweepInit {
    pub fn label(&self) -> &'static str {
        match self {
            SweepInit::RandomNormal { .. } => "random_normal",
            SweepInit::IdentityNearZero { .. } => "identity_near_zero",
            SweepInit::WarmStart { .. } => "warm_start",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SweepInit::RandomNormal { sigma } => InitScheme::RandomNormal { sigma: *sigma }.validate(),
            SweepInit::IdentityNearZero { epsilon } => InitScheme::IdentityNearZero { epsilon: *epsilon }.validate(),
            SweepInit::WarmStart {
                sigma,
                epochs,
                ridge_lambda,
            } => {
                InitScheme::RandomNormal { sigma: *sigma }.validate()?;
                if *epochs == 0 {
                    return Err(Error::config("init.epochs", "must be at least 1"));
                }
                if !(*ridge_lambda >= 0.0) {
                    return Err(Error::config("init.ridge_lambda", "must be ≥ 0"));
                }
                Ok(())
            }
        }
    }
}

/// Circuit depths to sweep: an explicit list, or L = n for every width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerList {
    Layers(Vec<usize>),
    MatchQubits,
}

impl LayerList {
    fn for_width(&self, n: usize) -> Vec<usize> {
        match self {
            LayerList::Layers(l) => l.clone(),
            LayerList::MatchQubits => vec![n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceSweepSpec {
    pub qubit_list: Vec<usize>,
    pub layer_list: LayerList,
    pub init: SweepInit,
    pub observable: CostObservable,
    pub samples: usize,
    pub seed: u64,
}

impl VarianceSweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.qubit_list.is_empty() {
            return Err(Error::config("variance.qubit_list", "must not be empty"));
        }
        if let Some(&n) = self.qubit_list.iter().find(|&&n| n == 0 || n > MAX_SWEEP_QUBITS) {
            return Err(Error::config(
                "variance.qubit_list",
                format!("{n} is outside 1..={MAX_SWEEP_QUBITS}"),
            ));
        }
        if let LayerList::Layers(l) = &self.layer_list {
            if l.is_empty() || l.contains(&0) {
                return Err(Error::config("variance.layer_list", "must be non-empty positive depths"));
            }
        }
        if self.samples < MIN_SAMPLES {
            return Err(Error::config(
                "variance.samples",
                format!("need at least {MIN_SAMPLES}, got {}", self.samples),
            ));
        }
        self.init.validate()
    }

    /// Number of (n, L) cells.
    pub fn cell_count(&self) -> usize {
        self.qubit_list
            .iter()
            .map(|&n| self.layer_list.for_width(n).len())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCell {
    pub n_qubits: usize,
    pub layers: usize,
    /// ∂C/∂θ₁ for every sampled parameter vector.
    pub gradients: Vec<f64>,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// `None` when depth tracks width.
    pub layers: Option<usize>,
    /// Least-squares slope of log₂ Var against n.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientVarianceReport {
    pub init: String,
    pub observable: CostObservable,
    pub cells: Vec<VarianceCell>,
    pub slopes: Vec<SlopeFit>,
    pub layer_list: LayerList,
}

/// Unbiased sample variance.
pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Ordinary least-squares slope of y on x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// ∂C/∂θ₁ at one parameter draw.
fn sample_gradient(n: usize, layers: usize, init: &SweepInit, obs: &ObservableSpec, seed: u64) -> Result<f64> {
    let spec = AnsatzSpec::pqc3(n, layers);
    let circuit = build_pqc3(&spec)?;
    let dim = spec.param_count();
    let params = match init {
        SweepInit::RandomNormal { sigma } => init_params(&InitScheme::RandomNormal { sigma: *sigma }, dim, seed)?,
        SweepInit::IdentityNearZero { epsilon } => {
            init_params(&InitScheme::IdentityNearZero { epsilon: *epsilon }, dim, seed)?
        }
        SweepInit::WarmStart {
            sigma,
            epochs,
            ridge_lambda,
        } => {
            let mut rng = crate::seed::rng(seed, &[1]);
            let dist = Uniform::new_inclusive(0.0, PI).map_err(|e| Error::config("init", e.to_string()))?;
            let targets: Vec<f64> = (0..n).map(|_| rng.sample(dist).cos()).collect();
            let loss = ConvexLocalLoss::new(
                ConvexLossSpec::local_z(targets, *ridge_lambda)?,
                CircuitContext::ideal(circuit.clone())?,
            )?;
            let cfg = TwoStageConfig {
                max_epochs_stage1: *epochs,
                stage1_mode: Stage1Mode::GaussNewtonRidge,
                ridge_lambda: *ridge_lambda,
                check_step_size: false,
                ..TwoStageConfig::default()
            };
            let start = init_params(&InitScheme::RandomNormal { sigma: *sigma }, dim, seed)?;
            stage1_convex(&start, &Stage1Loss::with_residuals(&loss), &cfg)?.params
        }
    };
    partial_parameter_shift(&circuit, &params, 0, obs, &StateVector::zero(n)?)
}

/// Variance of ∂C/∂θ₁ over `samples` draws for one (n, L) cell. Sample `i`
/// uses the stream derived from (seed, n, L, i).
pub fn variance_cell(
    n: usize,
    layers: usize,
    init: &SweepInit,
    observable: CostObservable,
    samples: usize,
    seed: u64,
) -> Result<VarianceCell> {
    let obs = observable.build(n);
    let gradients = (0..samples)
        .into_par_iter()
        .map(|i| sample_gradient(n, layers, init, &obs, crate::seed::derive(seed, &[n as u64, layers as u64, i as u64])))
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceCell {
        n_qubits: n,
        layers,
        variance: sample_variance(&gradients),
        gradients,
    })
}

fn fit_slopes(cells: &[VarianceCell], layer_list: &LayerList, variance: impl Fn(&VarianceCell) -> f64) -> Vec<SlopeFit> {
    let groups: Vec<Option<usize>> = match layer_list {
        LayerList::MatchQubits => vec![None],
        LayerList::Layers(l) => l.iter().map(|&l| Some(l)).collect(),
    };
    groups
        .into_iter()
        .map(|layers| {
            let (x, y): (Vec<f64>, Vec<f64>) = cells
                .iter()
                .filter(|c| layers.is_none_or(|l| c.layers == l))
                .map(|c| (c.n_qubits as f64, variance(c).max(f64::MIN_POSITIVE).log2()))
                .unzip();
            SlopeFit {
                layers,
                slope: ls_slope(&x, &y),
            }
        })
        .collect()
}

pub fn gradient_variance_sweep(spec: &VarianceSweepSpec) -> Result<GradientVarianceReport> {
    spec.validate()?;
    let mut widths = spec.qubit_list.clone();
    widths.sort_unstable();
    widths.dedup();
    if widths.len() < 3 {
        return Err(Error::InvalidSweep(format!(
            "slope fitting needs at least 3 distinct qubit counts, got {}",
            widths.len()
        )));
    }
    let mut cells = Vec::with_capacity(spec.cell_count());
    for &n in &spec.qubit_list {
        for l in spec.layer_list.for_width(n) {
            cells.push(variance_cell(n, l, &spec.init, spec.observable, spec.samples, spec.seed)?);
        }
    }
    let slopes = fit_slopes(&cells, &spec.layer_list, |c| c.variance);
    Ok(GradientVarianceReport {
        init: spec.init.label().to_string(),
        observable: spec.observable,
        cells,
        slopes,
        layer_list: spec.layer_list.clone(),
    })
}

impl GradientVarianceReport {
    pub fn cell(&self, n: usize, layers: usize) -> Option<&VarianceCell> {
        self.cells.iter().find(|c| c.n_qubits == n && c.layers == layers)
    }

    /// Percentile bootstrap interval for each slope: every cell's gradient
    /// sample is resampled with replacement and the fit repeated.
    pub fn bootstrap_slope_ci(&self, resamples: usize, confidence: f64, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = crate::seed::rng(seed, &[]);
        let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(resamples); self.slopes.len()];
        for _ in 0..resamples {
            let resampled: Vec<VarianceCell> = self
                .cells
                .iter()
                .map(|c| {
                    let m = c.gradients.len();
                    let g: Vec<f64> = (0..m).map(|_| c.gradients[rng.random_range(0..m)]).collect();
                    VarianceCell {
                        variance: sample_variance(&g),
                        gradients: Vec::new(),
                        ..*c
                    }
                })
                .collect();
            for (d, fit) in draws.iter_mut().zip(fit_slopes(&resampled, &self.layer_list, |c| c.variance)) {
                d.push(fit.slope);
            }
        }
        let alpha = (1.0 - confidence) / 2.0;
        draws
            .into_iter()
            .map(|mut d| {
                d.sort_by(f64::total_cmp);
                let at = |q: f64| d[((q * (d.len() - 1) as f64).round() as usize).min(d.len() - 1)];
                (at(alpha), at(1.0 - alpha))
            })
            .collect()
    }

    /// Schema line, then `n,L,init,observable,variance,samples`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_variance_csv(out, std::slice::from_ref(self))
    }
}

/// Several reports under one schema line and header.
pub fn write_variance_csv<W: Write>(out: W, reports: &[GradientVarianceReport]) -> Result<()> {
    let mut out = out;
    writeln!(out, "{VARIANCE_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "L", "init", "observable", "variance", "samples"])?;
    for r in reports {
        for c in &r.cells {
            w.write_record([
                c.n_qubits.to_string(),
                c.layers.to_string(),
                r.init.clone(),
                r.observable.label().to_string(),
                c.variance.to_string(),
                c.gradients.len().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartAudit {
    /// ‖∇E‖ at the Stage-1 output, per seed.
    pub warm_norms: Vec<f64>,
    /// ‖∇E‖ at the matching initial point, per seed.
    pub random_norms: Vec<f64>,
    pub median_warm: f64,
    pub median_random: f64,
    /// median_warm / median_random
    pub ratio: f64,
    /// Stage 1 landed where Stage 2's gradient is smaller than at the random
    /// start; typical when the surrogate's minimizer is (near) stationary for
    /// E as well.
    pub warm_start_flatter: bool,
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Compares ‖∇E‖ at the warm start against the random initial point it grew
/// from, over seeds cfg.seed, cfg.seed + 1, ….
pub fn warm_start_gradient_audit(problem: &Problem<'_>, cfg: &TwoStageConfig, seeds: usize) -> Result<WarmStartAudit> {
    if seeds < 10 {
        return Err(Error::InvalidSweep(format!("audit needs at least 10 seeds, got {seeds}")));
    }
    let pairs = (0..seeds as u64)
        .into_par_iter()
        .map(|s| {
            let cfg = TwoStageConfig {
                seed: cfg.seed + s,
                ..cfg.clone()
            };
            let theta0 = init_params(&cfg.init, problem.stage2.dim(), cfg.seed)?;
            let random = crate::optimizer::norm(&problem.stage2.gradient(theta0.values())?);
            let (_, report, _) = run_schedule(problem, &cfg, Schedule::ConvexOnly)?;
            Ok((report.stationarity_gap, random))
        })
        .collect::<Result<Vec<_>>>()?;
    let (warm_norms, random_norms): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let median_warm = median(&warm_norms);
    let median_random = median(&random_norms);
    let ratio = median_warm / median_random;
    Ok(WarmStartAudit {
        warm_norms,
        random_norms,
        median_warm,
        median_random,
        ratio,
        warm_start_flatter: !(ratio >= 1.0),
    })
}

#[cfg(test)]
mod tests;
