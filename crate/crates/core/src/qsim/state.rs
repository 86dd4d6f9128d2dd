use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::gate::{Gate, GateKind};
use super::kernel;
use super::pauli::PauliString;
use super::{check_qubit, check_register, DensityMatrix};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Pure state of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// |0…0⟩
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_register(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                got: amps.len(),
            });
        }
        let s = Self { n_qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for q in qubits {
            amps = amps
                .iter()
                .flat_map(|&a| [a * q[0], a * q[1]])
                .collect();
        }
        Self::from_amplitudes(qubits.len(), amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply_gate(&self, gate: &Gate, params: &[f64]) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, params)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate, params: &[f64]) -> Result<()> {
        gate.check_register(self.n_qubits)?;
        let m = gate.target_matrix(params)?;
        let q = gate.qubits();
        match gate.kind() {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                kernel::apply_1q(&mut self.amps, self.n_qubits, q[0], &m)
            }
            GateKind::Cnot | GateKind::Cz | GateKind::Crz => {
                kernel::apply_controlled(&mut self.amps, self.n_qubits, q[0], q[1], &m)
            }
        }
        Ok(())
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨Z_q⟩
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.n_qubits)?;
        let mask = 1 << (self.n_qubits - 1 - qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        let mut rotated = self.clone();
        p.apply_to(&mut rotated)?;
        Ok(self.inner(&rotated)?.re)
    }

    /// Mean of `shots` ±1 outcomes of a Z measurement on `qubit`.
    pub fn sample_z(&self, qubit: usize, shots: u64, seed: u64) -> Result<f64> {
        let z = self.expectation_z(qubit)?;
        sample_pm1(z, shots, &mut crate::seed::rng(seed, &[]))
    }

    /// Mean of `shots` samples of the product Z⊗…⊗Z over `qubits`.
    pub fn sample_parity<R: Rng + ?Sized>(&self, qubits: &[usize], shots: u64, rng: &mut R) -> Result<f64> {
        for &q in qubits {
            check_qubit(q, self.n_qubits)?;
        }
        let mask: usize = qubits
            .iter()
            .map(|&q| 1usize << (self.n_qubits - 1 - q))
            .fold(0, |m, b| m ^ b);
        let parity: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if (i & mask).count_ones().is_multiple_of(2) {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum();
        sample_pm1(parity, shots, rng)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.to_density().partial_trace(keep)
    }
}

/// Draws `shots` outcomes in {+1, −1} with mean `expectation` and returns
/// their average.
fn sample_pm1<R: Rng + ?Sized>(expectation: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let p_plus = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    let plus = Binomial::new(shots, p_plus)
        .map_err(|_| Error::InvalidProbability(p_plus))?
        .sample(rng);
    Ok((2.0 * plus as f64 - shots as f64) / shots as f64)
}
