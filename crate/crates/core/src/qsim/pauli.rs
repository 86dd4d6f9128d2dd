use std::fmt;

use serde::{Deserialize, Serialize};

use super::gate::{pauli_x, pauli_y, pauli_z, Angle, Gate, Mat2};
use super::{check_qubit, kernel, StateVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub(crate) fn matrix(self) -> Option<Mat2> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(pauli_x()),
            Pauli::Y => Some(pauli_y()),
            Pauli::Z => Some(pauli_z()),
        }
    }
}

/// Tensor product of single-qubit Paulis; identities are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut ops: Vec<_> = ops.into_iter().filter(|(_, p)| *p != Pauli::I).collect();
        ops.sort_by_key(|(q, _)| *q);
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidObservable(
                "Pauli string names a qubit twice".into(),
            ));
        }
        Ok(Self { ops })
    }

    pub fn identity() -> Self {
        Self { ops: Vec::new() }
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self::new([(qubit, p)]).expect("single-qubit string is valid")
    }

    pub fn z_string(qubits: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(qubits.into_iter().map(|q| (q, Pauli::Z)))
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().map(|(q, _)| *q)
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn check_register(&self, n_qubits: usize) -> Result<()> {
        self.support().try_for_each(|q| check_qubit(q, n_qubits))
    }

    pub(crate) fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        let n = state.n_qubits();
        self.check_register(n)?;
        for &(q, p) in &self.ops {
            if let Some(m) = p.matrix() {
                kernel::apply_1q(state.amps_mut(), n, q, &m);
            }
        }
        Ok(())
    }

    /// Gates mapping this string's eigenbasis onto the computational basis,
    /// so that a Z-parity measurement over the support estimates it.
    pub fn measurement_rotation(&self) -> Vec<Gate> {
        use std::f64::consts::FRAC_PI_2;
        self.ops
            .iter()
            .filter_map(|&(q, p)| match p {
                Pauli::X => Some(Gate::ry(q, Angle::Fixed(-FRAC_PI_2))),
                Pauli::Y => Some(Gate::rx(q, Angle::Fixed(FRAC_PI_2))),
                Pauli::Z | Pauli::I => None,
            })
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (i, (q, p)) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{p:?}{q}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_repeated_qubits_and_drops_identities() {
        assert!(PauliString::new([(0, Pauli::X), (0, Pauli::Z)]).is_err());
        let p = PauliString::new([(2, Pauli::Z), (1, Pauli::I), (0, Pauli::X)]).unwrap();
        assert_eq!(p.weight(), 2);
        assert_eq!(p.to_string(), "X0 Z2");
    }

    #[test]
    fn rotation_maps_eigenstates_to_zero() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::product(&[[h.into(), h.into()]]).unwrap();
        let plus_i = StateVector::product(&[[h.into(), num_complex::Complex64::new(0.0, h)]]).unwrap();
        for (state, p) in [(plus, Pauli::X), (plus_i, Pauli::Y)] {
            let s = PauliString::single(0, p);
            let mut rotated = state.clone();
            for g in s.measurement_rotation() {
                rotated.apply_gate_mut(&g, &[]).unwrap();
            }
            assert!((rotated.expectation_z(0).unwrap() - 1.0).abs() < 1e-12);
            assert!((state.expectation_pauli(&s).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
