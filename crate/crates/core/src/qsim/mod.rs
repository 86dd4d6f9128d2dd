//! Dense statevector and density-matrix simulation.
//!
//! Conventions: RX(θ)=exp(−iθX/2), RY(θ)=exp(−iθY/2), RZ(θ)=exp(−iθZ/2);
//! CRZ applies RZ on the target when the control is |1⟩. Qubit 0 is the most
//! significant bit of the amplitude index.

mod circuit;
mod density;
mod gate;
mod kernel;
mod noise;
mod pauli;
mod state;

pub use circuit::Circuit;
pub use density::{state_fidelity, DensityMatrix};
pub use gate::{pauli_x, pauli_y, pauli_z, rx, ry, rz, Angle, Gate, GateKind, Mat2, ShiftRule};
pub use noise::{ChannelMode, NoiseModel, NoiseScope, NoiseSpec};
pub use pauli::{Pauli, PauliString};
pub use state::StateVector;


use crate::error::{Error, Result};

/// Widest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 16;

pub(crate) fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidRegister(n_qubits));
    }
    Ok(())
}

pub(crate) fn check_qubit(index: usize, n_qubits: usize) -> Result<()> {
    if index >= n_qubits {
        return Err(Error::QubitOutOfRange { index, n_qubits });
    }
    Ok(())
}

/// `gate` applied to `state`.
pub fn apply_gate(state: &StateVector, gate: &Gate, params: &[f64]) -> Result<StateVector> {
    state.apply_gate(gate, params)
}

pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

pub fn sample_z(state: &StateVector, qubit: usize, shots: u64, seed: u64) -> Result<f64> {
    state.sample_z(qubit, shots, seed)
}

pub fn apply_depolarizing(rho: &DensityMatrix, qubit: usize, p: f64) -> Result<DensityMatrix> {
    rho.apply_depolarizing(qubit, p)
}

#[cfg(test)]
mod tests;
