//! The BB84 variational-cloning experiment: Alice's signal on the input
//! qubit, blank clones for Bob and Eve, and a trainable attack unitary over
//! the whole register.

mod report;
mod sweep;

pub use report::{write_reports_csv, Baseline, FidelityReport, StateFidelity, REPORT_SCHEMA};
pub use sweep::{
    iteration_curve, layer_sweep, layer_sweep_outcomes, train, IterationCurve, SweepJob, SweepOutcome, CURVE_SCHEMA,
};

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_pqc3, parameter_shift_jacobian, prepare, AnsatzSpec, ParamVector};
use crate::error::{Error, Result};
use crate::loss::{LinearizedSystem, ObservableSpec};
use crate::optimizer::{Objective, ResidualModel};
use crate::qsim::{Angle, ChannelMode, Circuit, Gate, Pauli, PauliString, StateVector};

/// Largest register the padded variant may use.
pub const MAX_CLONING_QUBITS: usize = 10;

/// ½ + 1/√8, the optimal symmetric fidelity for cloning the two BB84 bases.
pub fn pccm_bound() -> f64 {
    0.5 + 1.0 / 8f64.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalState {
    Zero,
    One,
    Plus,
    Minus,
}

impl SignalState {
    pub const ALL: [SignalState; 4] = [
        SignalState::Zero,
        SignalState::One,
        SignalState::Plus,
        SignalState::Minus,
    ];

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL.get(i).copied().ok_or(Error::InvalidSignalState(i))
    }

    pub fn label(self) -> &'static str {
        match self {
            SignalState::Zero => "0",
            SignalState::One => "1",
            SignalState::Plus => "+",
            SignalState::Minus => "-",
        }
    }

    /// RY angle taking |0⟩ to this state.
    pub fn preparation_angle(self) -> f64 {
        match self {
            SignalState::Zero => 0.0,
            SignalState::One => std::f64::consts::PI,
            SignalState::Plus => FRAC_PI_2,
            SignalState::Minus => -FRAC_PI_2,
        }
    }

    /// 2|ψ⟩⟨ψ| − I on `qubit`, whose expectation on a clone is 2F − 1.
    pub fn clone_observable(self, qubit: usize) -> ObservableSpec {
        let (p, sign) = match self {
            SignalState::Zero => (Pauli::Z, 1.0),
            SignalState::One => (Pauli::Z, -1.0),
            SignalState::Plus => (Pauli::X, 1.0),
            SignalState::Minus => (Pauli::X, -1.0),
        };
        ObservableSpec::new(vec![(PauliString::single(qubit, p), sign)])
            .expect("single-qubit Pauli with unit coefficient")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Register {
    pub input: usize,
    pub bob: usize,
    pub eve: usize,
    /// Idle qubits appended after the three named ones.
    pub ancillas: usize,
}

impl Default for Register {
    fn default() -> Self {
        Self {
            input: 0,
            bob: 1,
            eve: 2,
            ancillas: 0,
        }
    }
}

impl Register {
    pub fn padded(ancillas: usize) -> Self {
        Self {
            ancillas,
            ..Self::default()
        }
    }

    pub fn n_qubits(&self) -> usize {
        3 + self.ancillas
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        if n > MAX_CLONING_QUBITS {
            return Err(Error::config(
                "cloning.ancillas",
                format!("register of {n} qubits exceeds {MAX_CLONING_QUBITS}"),
            ));
        }
        for q in [self.input, self.bob, self.eve] {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
            }
        }
        if self.input == self.bob || self.input == self.eve || self.bob == self.eve {
            return Err(Error::config("cloning.register", "input, bob and eve must be distinct qubits"));
        }
        Ok(())
    }
}

/// One experiment instance: register layout, ansatz depth and readout
/// channel. Shot channels draw from streams keyed on `seed` and the
/// parameter snapshot.
#[derive(Debug, Clone)]
pub struct CloningSetup {
    register: Register,
    ansatz: AnsatzSpec,
    channel: ChannelMode,
    bob_weight: f64,
    eve_weight: f64,
    seed: u64,
    circuit: Circuit,
    inputs: Vec<StateVector>,
}

impl CloningSetup {
    /// Three-qubit register (input, Bob, Eve) under a PQC-3 ansatz of
    /// `n_layers` layers.
    pub fn new(n_layers: usize, channel: ChannelMode) -> Result<Self> {
        Self::with_register(Register::default(), n_layers, channel)
    }

    pub fn with_register(register: Register, n_layers: usize, channel: ChannelMode) -> Result<Self> {
        register.validate()?;
        channel.validate()?;
        let ansatz = AnsatzSpec::pqc3(register.n_qubits(), n_layers);
        let circuit = build_pqc3(&ansatz)?;
        let inputs = SignalState::ALL
            .iter()
            .map(|s| {
                let mut v = StateVector::zero(register.n_qubits())?;
                v.apply_gate_mut(&Gate::ry(register.input, Angle::Fixed(s.preparation_angle())), &[])?;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            register,
            ansatz,
            channel,
            bob_weight: 1.0,
            eve_weight: 1.0,
            seed: 0,
            circuit,
            inputs,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_channel(mut self, channel: ChannelMode) -> Result<Self> {
        channel.validate()?;
        self.channel = channel;
        Ok(self)
    }

    pub fn with_layers(&self, n_layers: usize) -> Result<Self> {
        Ok(Self::with_register(self.register, n_layers, self.channel.clone())?.with_seed(self.seed))
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn ansatz(&self) -> AnsatzSpec {
        self.ansatz
    }

    pub fn channel(&self) -> &ChannelMode {
        &self.channel
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn dim(&self) -> usize {
        self.ansatz.param_count()
    }

    pub fn signal_states(&self) -> &'static [SignalState] {
        &SignalState::ALL
    }

    /// Per-row weights w_party/|S| in the order of [`Self::clone_expectations`].
    pub fn row_weights(&self) -> Vec<f64> {
        let s = SignalState::ALL.len() as f64;
        SignalState::ALL
            .iter()
            .flat_map(|_| [self.bob_weight / s, self.eve_weight / s])
            .collect()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: params.len(),
            });
        }
        Ok(())
    }

    fn state_expectations(&self, params: &[f64], state: usize, seed: u64) -> Result<[f64; 2]> {
        let s = SignalState::from_index(state)?;
        let out = prepare(&self.circuit, &self.inputs[state], params, &self.channel)?;
        let zb = out.measure(&s.clone_observable(self.register.bob), &self.channel, crate::seed::derive(seed, &[0]))?;
        let ze = out.measure(&s.clone_observable(self.register.eve), &self.channel, crate::seed::derive(seed, &[1]))?;
        Ok([zb, ze])
    }

    fn eval_seed(&self, params: &[f64], eval_id: u64) -> u64 {
        let hash = ParamVector::new(params.to_vec()).map(|p| p.snapshot_hash()).unwrap_or(0);
        crate::seed::derive(self.seed, &[hash, eval_id])
    }

    /// (Z_B, Z_E) for every signal state, flattened as
    /// [Z_B(0), Z_E(0), Z_B(1), Z_E(1), …]. `eval_id` separates shot streams
    /// of otherwise identical evaluations.
    pub fn clone_expectations(&self, params: &[f64], eval_id: u64) -> Result<Vec<f64>> {
        self.check_params(params)?;
        let seed = self.eval_seed(params, eval_id);
        let mut out = Vec::with_capacity(2 * SignalState::ALL.len());
        for i in 0..SignalState::ALL.len() {
            out.extend(self.state_expectations(params, i, crate::seed::derive(seed, &[i as u64]))?);
        }
        Ok(out)
    }

    /// Row j is ∇Z_j in the order of [`Self::clone_expectations`].
    pub fn clone_jacobian(&self, params: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_params(params)?;
        parameter_shift_jacobian(&self.circuit, params, |p, id| self.clone_expectations(p, id + 1))
    }

    /// Stage-2 objective: the fidelity loss L_nc.
    pub fn nonconvex_objective(&self) -> NonconvexCloningLoss<'_> {
        NonconvexCloningLoss { setup: self }
    }

    /// Stage-1 objective: the surrogate L_cx and its linearization.
    pub fn surrogate_objective(&self) -> CloningSurrogate<'_> {
        CloningSurrogate { setup: self }
    }
}

/// Fidelities of Bob's and Eve's clones for signal state `state` (index into
/// {0, 1, +, −}).
pub fn clone_fidelities(params: &[f64], setup: &CloningSetup, state: usize) -> Result<(f64, f64)> {
    setup.check_params(params)?;
    let seed = setup.eval_seed(params, 0);
    let [zb, ze] = setup.state_expectations(params, state, crate::seed::derive(seed, &[state as u64]))?;
    Ok((fidelity_from_z(zb), fidelity_from_z(ze)))
}

/// Aggregates every signal state into one report; L_nc and L_cx come from the
/// same expectations as the fidelities.
pub fn average_fidelity(params: &[f64], setup: &CloningSetup) -> Result<FidelityReport> {
    let z = setup.clone_expectations(params, 0)?;
    Ok(FidelityReport::from_expectations(setup, &z))
}

/// F = (1 + Z)/2, clamped against shot noise and rounding.
pub fn fidelity_from_z(z: f64) -> f64 {
    ((1.0 + z) / 2.0).clamp(0.0, 1.0)
}

/// (1/|S|) Σ w [(1 − F_B)² + (1 − F_E)²], from clone expectations.
fn l_nc(weights: &[f64], z: &[f64]) -> f64 {
    weights.iter().zip(z).map(|(w, z)| w * (1.0 - fidelity_from_z(*z)).powi(2)).sum()
}

/// (1/|S|) Σ w [(1 − Z_B)² + (1 − Z_E)²]
fn l_cx(weights: &[f64], z: &[f64]) -> f64 {
    weights.iter().zip(z).map(|(w, z)| w * (1.0 - z).powi(2)).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct NonconvexCloningLoss<'a> {
    setup: &'a CloningSetup,
}

impl Objective for NonconvexCloningLoss<'_> {
    fn dim(&self) -> usize {
        self.setup.dim()
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        Ok(l_nc(&self.setup.row_weights(), &self.setup.clone_expectations(params, 0)?))
    }

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(params)?.1)
    }

    /// Chain rule through F = (1 + Z)/2: ∇L_nc = −Σ w (1 − F_j) ∇Z_j. The
    /// shift rules only apply to the expectations themselves.
    fn value_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = self.setup.row_weights();
        let z = self.setup.clone_expectations(params, 0)?;
        let jac = self.setup.clone_jacobian(params)?;
        let mut g = vec![0.0; params.len()];
        for ((row, z), w) in jac.iter().zip(&z).zip(&w) {
            let c = -w * (1.0 - fidelity_from_z(*z));
            for (gi, d) in g.iter_mut().zip(row) {
                *gi += c * d;
            }
        }
        Ok((l_nc(&w, &z), g))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CloningSurrogate<'a> {
    setup: &'a CloningSetup,
}

impl Objective for CloningSurrogate<'_> {
    fn dim(&self) -> usize {
        self.setup.dim()
    }

    fn value(&self, params: &[f64]) -> Result<f64> {
        Ok(l_cx(&self.setup.row_weights(), &self.setup.clone_expectations(params, 0)?))
    }

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(params)?.1)
    }

    fn value_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let sys = self.linearize(params)?;
        let w = self.setup.row_weights();
        let mut g = vec![0.0; params.len()];
        for (j, w) in w.iter().enumerate() {
            for (i, gi) in g.iter_mut().enumerate() {
                *gi -= 2.0 * w * sys.jacobian[(j, i)] * sys.residual[j];
            }
        }
        let value = w.iter().zip(sys.residual.iter()).map(|(w, r)| w * r * r).sum();
        Ok((value, g))
    }
}

impl ResidualModel for CloningSurrogate<'_> {
    fn dim(&self) -> usize {
        self.setup.dim()
    }

    /// r = b = 1 − Z(θ₀), one row per (state, party).
    fn linearize(&self, params: &[f64]) -> Result<LinearizedSystem> {
        let z = self.setup.clone_expectations(params, 0)?;
        let jac = self.setup.clone_jacobian(params)?;
        let r: Vec<f64> = z.iter().map(|z| 1.0 - z).collect();
        let phi = DMatrix::from_fn(jac.len(), params.len(), |i, j| jac[i][j]);
        LinearizedSystem::new(
            phi,
            DVector::from_vec(r.clone()),
            DVector::from_vec(r),
            ParamVector::new(params.to_vec())?,
        )
    }

    /// Equal weights reduce the weighted loss to a scalar multiple of ‖r‖².
    fn residual_weight(&self) -> f64 {
        self.setup.bob_weight / SignalState::ALL.len() as f64
    }
}
