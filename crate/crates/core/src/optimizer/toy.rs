//! Closed-form problems on which the descent and termination lemmas can be
//! checked exactly.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{check_descent_inequality, run_two_stage, Objective, Stage, Problem, Stage1Loss, Stage1Mode, Termination, TwoStageConfig};
use crate::ansatz::InitScheme;
use crate::error::{Error, Result};

/// L(θ) = (θ − c)ᵀA(θ − c) with A symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticToy {
    a: DMatrix<f64>,
    c: DVector<f64>,
}

impl QuadraticToy {
    pub fn new(a: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: c.len(),
                got: a.nrows(),
            });
        }
        if (&a - a.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidLoss("quadratic form must be symmetric".into()));
        }
        Ok(Self { a, c })
    }

    /// ‖θ‖²
    pub fn isotropic(dim: usize) -> Self {
        Self {
            a: DMatrix::identity(dim, dim),
            c: DVector::zeros(dim),
        }
    }

    /// A = MᵀM/dim + I/2 for Gaussian M, c Gaussian.
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = crate::seed::rng(seed, &[]);
        let m = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        let a = m.tr_mul(&m) / dim as f64 + DMatrix::identity(dim, dim) * 0.5;
        let c = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        Self { a, c }
    }

    /// 2λ_max(A)
    pub fn smoothness(&self) -> f64 {
        2.0 * self.a.clone().symmetric_eigenvalues().max()
    }

    /// 2λ_min(A)
    pub fn strong_convexity(&self) -> f64 {
        2.0 * self.a.clone().symmetric_eigenvalues().min()
    }

    pub fn minimizer(&self) -> &DVector<f64> {
        &self.c
    }
}

impl Objective for QuadraticToy {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        let d = DVector::from_column_slice(params) - &self.c;
        Ok(d.dot(&(&self.a * &d)))
    }

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        let d = DVector::from_column_slice(params) - &self.c;
        Ok((&self.a * d * 2.0).iter().copied().collect())
    }
}

/// (1/m) Σ log(1 + exp(−yᵢxᵢᵀθ)) + (μ/2)‖θ‖², labels yᵢ ∈ {−1, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticToy {
    x: DMatrix<f64>,
    y: Vec<f64>,
    mu: f64,
}

impl LogisticToy {
    pub fn new(x: DMatrix<f64>, y: Vec<f64>, mu: f64) -> Result<Self> {
        if x.nrows() != y.len() || y.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if y.iter().any(|v| v.abs() != 1.0) {
            return Err(Error::InvalidLoss("labels must be ±1".into()));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidLoss("regularization must be positive".into()));
        }
        Ok(Self { x, y, mu })
    }

    /// Gaussian features, labels from a noisy random hyperplane.
    pub fn random(samples: usize, dim: usize, mu: f64, seed: u64) -> Result<Self> {
        let mut rng = crate::seed::rng(seed, &[]);
        let w: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = DMatrix::from_fn(samples, dim, |_, _| StandardNormal.sample(&mut rng));
        let y = (0..samples)
            .map(|i| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let s: f64 = (0..dim).map(|j| x[(i, j)] * w[j]).sum::<f64>() + 0.5 * noise;
                if s >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        Self::new(x, y, mu)
    }

    /// λ_max(XᵀX)/(4m) + μ, an upper bound on the Hessian norm.
    pub fn smoothness(&self) -> f64 {
        let m = self.y.len() as f64;
        self.x.tr_mul(&self.x).symmetric_eigenvalues().max() / (4.0 * m) + self.mu
    }

    fn margins(&self, params: &[f64]) -> DVector<f64> {
        let theta = DVector::from_column_slice(params);
        let xt = &self.x * theta;
        DVector::from_fn(self.y.len(), |i, _| self.y[i] * xt[i])
    }
}

/// log(1 + e^{−z}) without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Objective for LogisticToy {
    fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        let m = self.y.len() as f64;
        let data: f64 = self.margins(params).iter().map(|&z| softplus_neg(z)).sum::<f64>() / m;
        Ok(data + 0.5 * self.mu * params.iter().map(|p| p * p).sum::<f64>())
    }

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        let m = self.y.len() as f64;
        let margins = self.margins(params);
        let coeff = DVector::from_fn(self.y.len(), |i, _| -self.y[i] * sigmoid(-margins[i]) / m);
        let g = self.x.tr_mul(&coeff);
        Ok(g.iter().zip(params).map(|(g, p)| g + self.mu * p).collect())
    }
}

/// An objective assembled from closures.
pub struct FnObjective<F, G> {
    dim: usize,
    value: F,
    gradient: G,
}

impl<F, G> FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dim: usize, value: F, gradient: G) -> Self {
        Self { dim, value, gradient }
    }
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        Ok((self.value)(params))
    }

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok((self.gradient)(params))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCase {
    pub name: String,
    pub eta: f64,
    pub smoothness: f64,
    pub gradient_rule_fired: bool,
    pub stage1_iters: usize,
    /// Counted with the problem's smoothness constant, as in the lemma.
    pub descent_violations: usize,
    /// Counted with the trajectory estimate L̂ ≤ L instead; informational,
    /// since L̂ can undershoot on non-quadratic losses.
    pub violations_trajectory_estimate: usize,
    pub stationarity_gap: f64,
}

impl LemmaCase {
    pub const STATIONARITY_TOLERANCE: f64 = 1e-6;

    pub fn passed(&self) -> bool {
        self.gradient_rule_fired
            && self.descent_violations == 0
            && self.stationarity_gap <= Self::STATIONARITY_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    pub cases: Vec<LemmaCase>,
}

impl LemmaSuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(LemmaCase::passed)
    }

    pub fn total_violations(&self) -> usize {
        self.cases.iter().map(|c| c.descent_violations).sum()
    }
}

/// Two-stage gradient descent with η = 1/L on quadratic and regularized
/// logistic problems; both stages minimize the same strongly convex loss.
pub fn lemma_suite(seed: u64) -> Result<LemmaSuiteReport> {
    let mut cases = Vec::new();
    let quadratics = [
        ("quadratic_isotropic", QuadraticToy::isotropic(4)),
        ("quadratic_random_6", QuadraticToy::random(6, seed)),
        ("quadratic_random_12", QuadraticToy::random(12, seed + 1)),
    ];
    for (name, q) in quadratics {
        let l = q.smoothness();
        cases.push(run_case(name, &q, l, seed)?);
    }
    for (i, (m, d)) in [(40usize, 3usize), (200, 8)].into_iter().enumerate() {
        let lg = LogisticToy::random(m, d, 0.1, seed + 10 + i as u64)?;
        let l = lg.smoothness();
        cases.push(run_case(&format!("logistic_{m}x{d}"), &lg, l, seed)?);
    }
    Ok(LemmaSuiteReport { cases })
}

fn run_case(name: &str, loss: &dyn Objective, smoothness: f64, seed: u64) -> Result<LemmaCase> {
    let eta = 1.0 / smoothness;
    let cfg = TwoStageConfig {
        eta_c: eta,
        eta_n: eta,
        tau_g: 1e-10,
        max_epochs_stage1: 1_000_000,
        max_epochs_stage2: 100_000,
        stage1_mode: Stage1Mode::GradientDescent,
        convergence_floor: 1e-9,
        init: InitScheme::RandomNormal { sigma: 1.0 },
        seed,
        check_step_size: false,
        ..TwoStageConfig::default()
    };
    let problem = Problem {
        stage1: Stage1Loss::objective(loss),
        stage2: loss,
    };
    let (_, report, trace) = run_two_stage(&problem, &cfg)?;
    let exact = check_descent_inequality(&trace.filter_stage(Stage::Convex), smoothness, eta)
        + check_descent_inequality(&trace.filter_stage(Stage::Refine), smoothness, eta);
    Ok(LemmaCase {
        name: name.to_string(),
        eta,
        smoothness,
        gradient_rule_fired: report.stage1_terminated_by == Termination::GradientRule,
        stage1_iters: report.stage1_iters,
        descent_violations: exact,
        violations_trajectory_estimate: report.descent_violations,
        stationarity_gap: report.stationarity_gap,
    })
}
