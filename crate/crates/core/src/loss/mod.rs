//! Objectives: the convex local-observable loss, the ridge surrogate and its
//! solver, the nonconvex cloning loss, and the Hamiltonian energy.

mod observable;
mod ridge;

pub use observable::ObservableSpec;
pub use ridge::{
    hessian_psd_check, ridge_objective, ridge_solve, solve_normal_equations, LinearizedSystem,
};

use nalgebra::{DMatrix, DVector};

use crate::ansatz::{parameter_shift_jacobian, prepare, ParamVector};
use crate::cloning::CloningSetup;
use crate::error::{Error, Result};
use crate::optimizer::{Objective, ResidualModel};
use crate::qsim::{ChannelMode, Circuit, StateVector};

/// A circuit with its input state and readout channel. Shot channels draw
/// from a stream keyed on the parameter snapshot, so every evaluation is a
/// deterministic function of θ.
#[derive(Debug, Clone)]
pub struct CircuitContext {
    pub circuit: Circuit,
    pub input: StateVector,
    pub channel: ChannelMode,
    pub seed: u64,
}

impl CircuitContext {
    pub fn new(circuit: Circuit, input: StateVector, channel: ChannelMode, seed: u64) -> Result<Self> {
        if input.n_qubits() != circuit.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: circuit.n_qubits(),
                got: input.n_qubits(),
            });
        }
        channel.validate()?;
        Ok(Self {
            circuit,
            input,
            channel,
            seed,
        })
    }

    /// Ideal channel from |0…0⟩.
    pub fn ideal(circuit: Circuit) -> Result<Self> {
        let input = StateVector::zero(circuit.n_qubits())?;
        Self::new(circuit, input, ChannelMode::Ideal, 0)
    }

    fn eval_seed(&self, params: &[f64], id: u64) -> u64 {
        let hash = ParamVector::new(params.to_vec()).map(|p| p.snapshot_hash()).unwrap_or(0);
        crate::seed::derive(self.seed, &[hash, id])
    }

    /// ⟨Oᵢ⟩ for every observable, from one circuit run.
    pub fn expectations(&self, params: &[f64], observables: &[ObservableSpec], id: u64) -> Result<Vec<f64>> {
        let out = prepare(&self.circuit, &self.input, params, &self.channel)?;
        let seed = self.eval_seed(params, id);
        observables
            .iter()
            .enumerate()
            .map(|(i, o)| out.measure(o, &self.channel, crate::seed::derive(seed, &[i as u64])))
            .collect()
    }

    pub fn jacobian(&self, params: &[f64], observables: &[ObservableSpec]) -> Result<Vec<Vec<f64>>> {
        parameter_shift_jacobian(&self.circuit, params, |p, id| self.expectations(p, observables, id + 1))
    }
}

/// Σᵢ (⟨ψ(θ)|Oᵢ|ψ(θ)⟩ − bᵢ)² over local observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexLossSpec {
    observables: Vec<ObservableSpec>,
    targets: Vec<f64>,
    ridge_lambda: f64,
}

impl ConvexLossSpec {
    pub const MAX_LOCALITY: usize = 2;

    pub fn new(observables: Vec<ObservableSpec>, targets: Vec<f64>, ridge_lambda: f64) -> Result<Self> {
        if observables.len() != targets.len() {
            return Err(Error::InvalidLoss(format!(
                "{} observables but {} targets",
                observables.len(),
                targets.len()
            )));
        }
        if observables.is_empty() {
            return Err(Error::InvalidLoss("no observables".into()));
        }
        if let Some(o) = observables.iter().find(|o| o.locality() > Self::MAX_LOCALITY) {
            return Err(Error::InvalidLoss(format!(
                "observable of locality {} exceeds the k ≤ {} limit",
                o.locality(),
                Self::MAX_LOCALITY
            )));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidLoss("non-finite target".into()));
        }
        if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
            return Err(Error::InvalidLoss("ridge lambda must be ≥ 0".into()));
        }
        Ok(Self {
            observables,
            targets,
            ridge_lambda,
        })
    }

    /// Single-qubit Z on each qubit with targets `b`.
    pub fn local_z(targets: Vec<f64>, ridge_lambda: f64) -> Result<Self> {
        let obs = (0..targets.len()).map(ObservableSpec::z).collect();
        Self::new(obs, targets, ridge_lambda)
    }

    pub fn observables(&self) -> &[ObservableSpec] {
        &self.observables
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn ridge_lambda(&self) -> f64 {
        self.ridge_lambda
    }
}

pub fn convex_loss(params: &[f64], spec: &ConvexLossSpec, ctx: &CircuitContext) -> Result<f64> {
    ConvexLocalLoss::new(spec.clone(), ctx.clone())?.value(params)
}

/// ⟨ψ(θ)|H|ψ(θ)⟩
pub fn energy_loss(params: &[f64], h: &ObservableSpec, ctx: &CircuitContext) -> Result<f64> {
    EnergyLoss::new(h.clone(), ctx.clone())?.value(params)
}

#[derive(Debug, Clone)]
pub struct ConvexLocalLoss {
    spec: ConvexLossSpec,
    ctx: CircuitContext,
}

impl ConvexLocalLoss {
    pub fn new(spec: ConvexLossSpec, ctx: CircuitContext) -> Result<Self> {
        for o in spec.observables() {
            o.check_register(ctx.circuit.n_qubits())?;
        }
        Ok(Self { spec, ctx })
    }

    pub fn spec(&self) -> &ConvexLossSpec {
        &self.spec
    }
}

impl Objective for ConvexLocalLoss {
    fn dim(&self) -> usize {
        self.ctx.circuit.n_params()
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        let z = self.ctx.expectations(params, self.spec.observables(), 0)?;
        Ok(z.iter().zip(self.spec.targets()).map(|(z, b)| (z - b).powi(2)).sum())
    }

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(params)?.1)
    }

    fn value_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let sys = self.linearize(params)?;
        let g = sys.residual_sq_gradient();
        Ok((sys.residual_sq(), g.iter().copied().collect()))
    }
}

impl ResidualModel for ConvexLocalLoss {
    fn dim(&self) -> usize {
        self.ctx.circuit.n_params()
    }

    fn linearize(&self, params: &[f64]) -> Result<LinearizedSystem> {
        let z = self.ctx.expectations(params, self.spec.observables(), 0)?;
        let jac = self.ctx.jacobian(params, self.spec.observables())?;
        let b: Vec<f64> = self.spec.targets().to_vec();
        let r: Vec<f64> = b.iter().zip(&z).map(|(b, z)| b - z).collect();
        linearized(jac, r, b, params)
    }
}

fn linearized(jac: Vec<Vec<f64>>, r: Vec<f64>, b: Vec<f64>, params: &[f64]) -> Result<LinearizedSystem> {
    let rows = jac.len();
    let cols = params.len();
    let phi = DMatrix::from_fn(rows, cols, |i, j| jac[i][j]);
    LinearizedSystem::new(
        phi,
        DVector::from_vec(r),
        DVector::from_vec(b),
        ParamVector::new(params.to_vec())?,
    )
}

#[derive(Debug, Clone)]
pub struct EnergyLoss {
    h: ObservableSpec,
    ctx: CircuitContext,
}

impl EnergyLoss {
    pub fn new(h: ObservableSpec, ctx: CircuitContext) -> Result<Self> {
        h.check_register(ctx.circuit.n_qubits())?;
        Ok(Self { h, ctx })
    }
}

impl Objective for EnergyLoss {
    fn dim(&self) -> usize {
        self.ctx.circuit.n_params()
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        Ok(self.ctx.expectations(params, std::slice::from_ref(&self.h), 0)?[0])
    }

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .ctx
            .jacobian(params, std::slice::from_ref(&self.h))?
            .pop()
            .unwrap_or_default())
    }
}

/// (1/|S|) Σ_ψ [(1 − F_B)² + (1 − F_E)²]
pub fn nonconvex_cloning_loss(params: &[f64], setup: &CloningSetup) -> Result<f64> {
    setup.nonconvex_objective().value(params)
}

/// (1/|S|) Σ_ψ [(1 − Z_B)² + (1 − Z_E)²]
pub fn convex_cloning_surrogate(params: &[f64], setup: &CloningSetup) -> Result<f64> {
    setup.surrogate_objective().value(params)
}

/// Linearization of the clone expectations with b = r = 1 − Z(θ₀); one row
/// per (signal state, party).
pub fn build_linearized_system(params: &[f64], setup: &CloningSetup) -> Result<LinearizedSystem> {
    setup.surrogate_objective().linearize(params)
}
