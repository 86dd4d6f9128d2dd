use serde::{Deserialize, Serialize};

use super::gate::{Gate, ShiftRule};
use super::{check_register, DensityMatrix, NoiseSpec, StateVector};
use crate::error::{Error, Result};

/// Gate program over a fixed register with a flat real parameter vector.
///
/// Layer boundaries are recorded so that noise can be inserted between
/// layers; a circuit without boundaries is one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    layer_ends: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            layer_ends: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.check_register(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Closes the current layer.
    pub fn end_layer(&mut self) {
        if self.layer_ends.last() != Some(&self.gates.len()) {
            self.layer_ends.push(self.gates.len());
        }
    }

    /// Appends `other`'s gates, shifting its parameter slots by `slot_offset`.
    pub fn append(&mut self, other: &Circuit, slot_offset: usize) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        let base = self.gates.len();
        for g in &other.gates {
            let angle = g.angle().map(|a| match a {
                super::Angle::Slot(s) => super::Angle::Slot(s + slot_offset),
                fixed => fixed,
            });
            self.gates
                .push(Gate::new(g.kind(), g.qubits().to_vec(), angle)?);
        }
        self.layer_ends
            .extend(other.layer_ends.iter().map(|e| e + base));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_layers(&self) -> usize {
        self.layer_ends.len().max(1)
    }

    /// One more than the largest referenced slot.
    pub fn n_params(&self) -> usize {
        self.gates
            .iter()
            .filter_map(Gate::param_slot)
            .map(|s| s + 1)
            .max()
            .unwrap_or(0)
    }

    /// Shift rule for every parameter slot. Fails if a slot is unused, is
    /// shared by several gates, or drives a gate without a rotation generator.
    pub fn slot_shift_rules(&self) -> Result<Vec<ShiftRule>> {
        let mut rules: Vec<Option<ShiftRule>> = vec![None; self.n_params()];
        for g in &self.gates {
            if let Some(s) = g.param_slot() {
                let rule = g.kind().shift_rule().ok_or_else(|| {
                    Error::InvalidGate(format!("{:?} has no rotation generator", g.kind()))
                })?;
                if rules[s].replace(rule).is_some() {
                    return Err(Error::SharedParamSlot(s));
                }
            }
        }
        rules
            .into_iter()
            .enumerate()
            .map(|(s, r)| r.ok_or_else(|| Error::InvalidGate(format!("parameter slot {s} is unused"))))
            .collect()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        let need = self.n_params();
        if params.len() < need {
            return Err(Error::ParamSlotOutOfRange {
                slot: need - 1,
                len: params.len(),
            });
        }
        Ok(())
    }

    pub fn run(&self, input: &StateVector, params: &[f64]) -> Result<StateVector> {
        if input.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: input.n_qubits(),
            });
        }
        self.check_params(params)?;
        let mut state = input.clone();
        for g in &self.gates {
            state.apply_gate_mut(g, params)?;
        }
        Ok(state)
    }

    /// Runs the circuit on a density matrix, applying `noise` after every
    /// layer boundary.
    pub fn run_density(
        &self,
        input: &DensityMatrix,
        params: &[f64],
        noise: &NoiseSpec,
    ) -> Result<DensityMatrix> {
        if input.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: input.n_qubits(),
            });
        }
        self.check_params(params)?;
        noise.validate()?;
        let noisy_qubits = noise.qubits(self.n_qubits);
        for &q in &noisy_qubits {
            super::check_qubit(q, self.n_qubits)?;
        }
        let mut ends = self.layer_ends.clone();
        if ends.last() != Some(&self.gates.len()) {
            ends.push(self.gates.len());
        }
        let mut rho = input.clone();
        let mut start = 0;
        for end in ends {
            for g in &self.gates[start..end] {
                rho.apply_gate_mut(g, params)?;
            }
            if noise.is_active() {
                for &q in &noisy_qubits {
                    rho.apply_depolarizing_mut(q, noise.probability)?;
                }
            }
            start = end;
        }
        Ok(rho)
    }
}
