use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::gate::{conj, Gate, GateKind};
use super::pauli::PauliString;
use super::{check_qubit, check_register, kernel, StateVector};
use crate::error::{Error, Result};

const TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;

/// Mixed state of an n-qubit register, stored row-major.
///
/// The flat storage doubles as a 2n-qubit amplitude vector (row bits high,
/// column bits low), which lets gate kernels act on either side directly.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        let data = a
            .iter()
            .flat_map(|&ai| a.iter().map(move |&aj| ai * aj.conj()))
            .collect();
        Self {
            n_qubits: state.n_qubits(),
            data,
        }
    }

    /// Builds a density matrix from row-major entries, checking Hermiticity,
    /// unit trace and positivity.
    pub fn from_entries(n_qubits: usize, data: Vec<C64>) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        let rho = Self { n_qubits, data };
        if !rho.is_hermitian(TOL) {
            return Err(Error::InvalidObservable("matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(tr));
        }
        if rho.min_eigenvalue() < -PSD_TOL {
            return Err(Error::InvalidObservable("matrix is not positive semidefinite".into()));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n_qubits, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (i..d).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.get(i, j));
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn apply_gate(&self, gate: &Gate, params: &[f64]) -> Result<DensityMatrix> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, params)?;
        Ok(out)
    }

    /// ρ ↦ UρU†
    pub fn apply_gate_mut(&mut self, gate: &Gate, params: &[f64]) -> Result<()> {
        gate.check_register(self.n_qubits)?;
        let n = self.n_qubits;
        let m = gate.target_matrix(params)?;
        let mc = conj(&m);
        let q = gate.qubits();
        match gate.kind() {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                kernel::apply_1q(&mut self.data, 2 * n, q[0], &m);
                kernel::apply_1q(&mut self.data, 2 * n, n + q[0], &mc);
            }
            GateKind::Cnot | GateKind::Cz | GateKind::Crz => {
                kernel::apply_controlled(&mut self.data, 2 * n, q[0], q[1], &m);
                kernel::apply_controlled(&mut self.data, 2 * n, n + q[0], n + q[1], &mc);
            }
        }
        Ok(())
    }

    pub fn apply_depolarizing(&self, qubit: usize, p: f64) -> Result<DensityMatrix> {
        let mut out = self.clone();
        out.apply_depolarizing_mut(qubit, p)?;
        Ok(out)
    }

    /// ρ ↦ (1−p)ρ + (p/3)(XρX + YρY + ZρZ) on one qubit.
    ///
    /// On each 2×2 block of the qubit this keeps populations mixing at rate
    /// 2p/3 and scales coherences by 1 − 4p/3.
    pub fn apply_depolarizing_mut(&mut self, qubit: usize, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        check_qubit(qubit, self.n_qubits)?;
        if p == 0.0 {
            return Ok(());
        }
        let d = self.dim();
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let keep = 1.0 - 2.0 * p / 3.0;
        let swap = 2.0 * p / 3.0;
        let coherence = 1.0 - 4.0 * p / 3.0;
        for r in (0..d).filter(|r| r & mask == 0) {
            for c in (0..d).filter(|c| c & mask == 0) {
                let (r1, c1) = (r | mask, c | mask);
                let a00 = self.data[r * d + c];
                let a11 = self.data[r1 * d + c1];
                self.data[r * d + c] = a00 * keep + a11 * swap;
                self.data[r1 * d + c1] = a11 * keep + a00 * swap;
                self.data[r * d + c1] *= coherence;
                self.data[r1 * d + c] *= coherence;
            }
        }
        Ok(())
    }

    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.n_qubits)?;
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        Ok((0..self.dim())
            .map(|i| {
                let p = self.get(i, i).re;
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum())
    }

    /// Tr(Pρ)
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        p.check_register(self.n_qubits)?;
        let n = self.n_qubits;
        let mut left = self.data.clone();
        for &(q, op) in p.ops() {
            if let Some(m) = op.matrix() {
                kernel::apply_1q(&mut left, 2 * n, q, &m);
            }
        }
        let d = self.dim();
        Ok((0..d).map(|i| left[i * d + i].re).sum())
    }

    /// Reduced state on `keep`, in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        if keep.is_empty() {
            return Err(Error::InvalidKeepSet);
        }
        for &q in keep {
            check_qubit(q, n)?;
        }
        let mut seen = vec![false; n];
        for &q in keep {
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::InvalidKeepSet);
            }
        }
        let env: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
        let scatter = |bits: usize, qubits: &[usize]| -> usize {
            let k = qubits.len();
            qubits
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> (k - 1 - i) & 1 == 1)
                .map(|(_, &q)| 1usize << (n - 1 - q))
                .sum()
        };
        let kd = 1usize << keep.len();
        let ed = 1usize << env.len();
        let keep_idx: Vec<usize> = (0..kd).map(|b| scatter(b, keep)).collect();
        let env_idx: Vec<usize> = (0..ed).map(|b| scatter(b, &env)).collect();
        let d = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); kd * kd];
        for (i, &ri) in keep_idx.iter().enumerate() {
            for (j, &cj) in keep_idx.iter().enumerate() {
                data[i * kd + j] = env_idx
                    .iter()
                    .map(|&e| self.data[(ri | e) * d + (cj | e)])
                    .sum();
            }
        }
        Ok(DensityMatrix {
            n_qubits: keep.len(),
            data,
        })
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn fidelity(&self, target: &StateVector) -> Result<f64> {
        let d = self.dim();
        if target.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: target.dim(),
            });
        }
        let t = target.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            let row: C64 = (0..d).map(|j| self.data[i * d + j] * t[j]).sum();
            acc += t[i].conj() * row;
        }
        Ok(acc.re)
    }
}

/// Overlap ⟨target|ρ|target⟩ of a mixed state with a pure target.
pub fn state_fidelity(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    rho.fidelity(target)
}
