use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{DensityMatrix, Pauli, PauliString, StateVector};

/// A real linear combination of Pauli strings, Hermitian by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    terms: Vec<(PauliString, f64)>,
}

impl ObservableSpec {
    pub fn new(terms: Vec<(PauliString, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidObservable("observable has no terms".into()));
        }
        if let Some((p, _)) = terms.iter().find(|(_, c)| !c.is_finite()) {
            return Err(Error::InvalidObservable(format!(
                "coefficient of {p} is not finite"
            )));
        }
        Ok(Self { terms })
    }

    pub fn pauli(p: PauliString) -> Self {
        Self { terms: vec![(p, 1.0)] }
    }

    /// Z on one qubit.
    pub fn z(qubit: usize) -> Self {
        Self::pauli(PauliString::single(qubit, Pauli::Z))
    }

    /// Z⊗Z⊗…⊗Z over the first `n` qubits.
    pub fn global_z(n: usize) -> Self {
        Self::pauli(PauliString::z_string(0..n).expect("distinct qubits"))
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    /// Union of the qubits any term acts on, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.terms.iter().flat_map(|(p, _)| p.support()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Largest single-term support size.
    pub fn locality(&self) -> usize {
        self.terms.iter().map(|(p, _)| p.weight()).max().unwrap_or(0)
    }

    pub fn check_register(&self, n_qubits: usize) -> Result<()> {
        self.terms
            .iter()
            .try_for_each(|(p, _)| p.check_register(n_qubits))
    }

    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, (p, c)| {
            Ok(acc + c * state.expectation_pauli(p)?)
        })
    }

    pub fn expectation_density(&self, rho: &DensityMatrix) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, (p, c)| {
            Ok(acc + c * rho.expectation_pauli(p)?)
        })
    }

    /// Shot estimate: every term is measured in its own rotated basis with
    /// `shots` repetitions.
    pub fn estimate_shots<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        shots: u64,
        rng: &mut R,
    ) -> Result<f64> {
        self.check_register(state.n_qubits())?;
        let mut total = 0.0;
        for (p, c) in &self.terms {
            if p.weight() == 0 {
                total += c;
                continue;
            }
            let mut rotated = state.clone();
            for g in p.measurement_rotation() {
                rotated.apply_gate_mut(&g, &[])?;
            }
            let support: Vec<usize> = p.support().collect();
            total += c * rotated.sample_parity(&support, shots, rng)?;
        }
        Ok(total)
    }

    /// Dense matrix over `n_qubits`; meant for small registers and tests.
    pub fn to_matrix(&self, n_qubits: usize) -> Result<DMatrix<C64>> {
        self.check_register(n_qubits)?;
        let d = 1usize << n_qubits;
        let mut m = DMatrix::<C64>::zeros(d, d);
        for col in 0..d {
            let basis = StateVector::basis(n_qubits, col)?;
            for (p, c) in &self.terms {
                let mut v = basis.clone();
                p.apply_to(&mut v)?;
                for (row, a) in v.amplitudes().iter().enumerate() {
                    m[(row, col)] += a * *c;
                }
            }
        }
        Ok(m)
    }

    pub fn min_eigenvalue(&self, n_qubits: usize) -> Result<f64> {
        Ok(self
            .to_matrix(n_qubits)?
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min))
    }
}
