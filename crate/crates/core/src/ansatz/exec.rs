use crate::error::Result;
use crate::loss::ObservableSpec;
use crate::qsim::{ChannelMode, Circuit, DensityMatrix, StateVector};

/// Output of a circuit run, pure or mixed depending on the channel.
#[derive(Debug, Clone)]
pub enum Prepared {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

/// Runs `circuit` on `input`. Noisy channels switch to the density-matrix
/// pipeline; ideal and shot channels stay on the statevector.
pub fn prepare(
    circuit: &Circuit,
    input: &StateVector,
    params: &[f64],
    channel: &ChannelMode,
) -> Result<Prepared> {
    match channel {
        ChannelMode::Noisy { noise } => Ok(Prepared::Mixed(circuit.run_density(
            &input.to_density(),
            params,
            noise,
        )?)),
        ChannelMode::Ideal | ChannelMode::Shots { .. } => {
            Ok(Prepared::Pure(circuit.run(input, params)?))
        }
    }
}

impl Prepared {
    /// Reads out `obs`. Shot channels sample with a stream derived from `seed`.
    pub fn measure(&self, obs: &ObservableSpec, channel: &ChannelMode, seed: u64) -> Result<f64> {
        match (self, channel) {
            (Prepared::Pure(s), ChannelMode::Shots { shots }) => {
                obs.estimate_shots(s, *shots, &mut crate::seed::rng(seed, &[]))
            }
            (Prepared::Pure(s), _) => obs.expectation(s),
            (Prepared::Mixed(r), _) => obs.expectation_density(r),
        }
    }

    /// Reduced state of the listed qubits.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        match self {
            Prepared::Pure(s) => s.partial_trace(keep),
            Prepared::Mixed(r) => r.partial_trace(keep),
        }
    }
}
