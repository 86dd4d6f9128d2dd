use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
    Cz,
    Crz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Cnot | GateKind::Cz | GateKind::Crz => 2,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Crz
        )
    }

    /// Shift rule for the gate's generator, if it has one.
    ///
    /// Single-qubit rotations have generator eigenvalues ±1/2 and obey the
    /// two-term rule. The controlled rotation's generator |1⟩⟨1|⊗Z/2 has
    /// spectrum {−1/2, 0, 1/2}, which needs the four-term rule.
    pub fn shift_rule(self) -> Option<ShiftRule> {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => Some(ShiftRule::TwoTerm),
            GateKind::Crz => Some(ShiftRule::FourTerm),
            GateKind::Cnot | GateKind::Cz => None,
        }
    }
}

/// Exact derivative rules for gates `exp(-iθG)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftRule {
    /// f'(θ) = [f(θ+π/2) − f(θ−π/2)] / 2
    TwoTerm,
    /// f'(θ) = c₊[f(θ+π/2) − f(θ−π/2)] − c₋[f(θ+3π/2) − f(θ−3π/2)],
    /// c± = (√2 ± 1) / (4√2)
    FourTerm,
}

impl ShiftRule {
    /// (shift, coefficient) pairs; the derivative is
    /// Σ coeff·[f(θ+shift) − f(θ−shift)].
    pub fn terms(self) -> &'static [(f64, f64)] {
        use std::f64::consts::{FRAC_PI_2, SQRT_2};
        const PI_3_2: f64 = 3.0 * FRAC_PI_2;
        const C_PLUS: f64 = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
        const C_MINUS: f64 = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
        match self {
            ShiftRule::TwoTerm => &[(FRAC_PI_2, 0.5)],
            ShiftRule::FourTerm => &[(FRAC_PI_2, C_PLUS), (PI_3_2, -C_MINUS)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// Index into the circuit's parameter vector.
    Slot(usize),
    /// Constant angle in radians.
    Fixed(f64),
}

impl Angle {
    pub fn resolve(self, params: &[f64]) -> Result<f64> {
        match self {
            Angle::Fixed(a) => Ok(a),
            Angle::Slot(s) => params.get(s).copied().ok_or(Error::ParamSlotOutOfRange {
                slot: s,
                len: params.len(),
            }),
        }
    }
}

/// One gate of a circuit. Two-qubit gates list `[control, target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
    angle: Option<Angle>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, angle: Option<Angle>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{kind:?} acts on {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        if kind.arity() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidGate(format!(
                "{kind:?} control and target coincide on qubit {}",
                qubits[0]
            )));
        }
        match (kind.is_parameterized(), angle) {
            (true, None) => {
                return Err(Error::InvalidGate(format!("{kind:?} needs an angle")));
            }
            (false, Some(_)) => {
                return Err(Error::InvalidGate(format!("{kind:?} takes no angle")));
            }
            (_, Some(Angle::Fixed(a))) if !a.is_finite() => {
                return Err(Error::InvalidGate(format!("{kind:?} angle is not finite")));
            }
            _ => {}
        }
        Ok(Self {
            kind,
            qubits,
            angle,
        })
    }

    pub fn rx(q: usize, angle: Angle) -> Self {
        Self::single(GateKind::Rx, q, angle)
    }

    pub fn ry(q: usize, angle: Angle) -> Self {
        Self::single(GateKind::Ry, q, angle)
    }

    pub fn rz(q: usize, angle: Angle) -> Self {
        Self::single(GateKind::Rz, q, angle)
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::Cnot, vec![control, target], None)
    }

    pub fn cz(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::Cz, vec![control, target], None)
    }

    pub fn crz(control: usize, target: usize, angle: Angle) -> Result<Self> {
        Self::new(GateKind::Crz, vec![control, target], Some(angle))
    }

    fn single(kind: GateKind, q: usize, angle: Angle) -> Self {
        Self {
            kind,
            qubits: vec![q],
            angle: Some(angle),
        }
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn angle(&self) -> Option<Angle> {
        self.angle
    }

    pub fn param_slot(&self) -> Option<usize> {
        match self.angle {
            Some(Angle::Slot(s)) => Some(s),
            _ => None,
        }
    }

    pub(crate) fn check_register(&self, n_qubits: usize) -> Result<()> {
        match self.qubits.iter().find(|&&q| q >= n_qubits) {
            Some(&index) => Err(Error::QubitOutOfRange { index, n_qubits }),
            None => Ok(()),
        }
    }

    /// The 2×2 matrix applied to the target, with the resolved angle.
    pub(crate) fn target_matrix(&self, params: &[f64]) -> Result<Mat2> {
        let theta = match self.angle {
            Some(a) => a.resolve(params)?,
            None => 0.0,
        };
        Ok(match self.kind {
            GateKind::Rx => rx(theta),
            GateKind::Ry => ry(theta),
            GateKind::Rz | GateKind::Crz => rz(theta),
            GateKind::Cnot => pauli_x(),
            GateKind::Cz => pauli_z(),
        })
    }
}

/// Row-major 2×2 complex matrix.
pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

pub fn rz(theta: f64) -> Mat2 {
    [[C64::from_polar(1.0, -theta / 2.0), ZERO], [ZERO, C64::from_polar(1.0, theta / 2.0)]]
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> Mat2 {
    [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]]
}

pub fn pauli_z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

pub(crate) fn conj(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameterized_kinds_require_an_angle() {
        assert!(Gate::new(GateKind::Rx, vec![0], None).is_err());
        assert!(Gate::new(GateKind::Cnot, vec![0, 1], Some(Angle::Fixed(1.0))).is_err());
        assert!(Gate::new(GateKind::Crz, vec![1, 1], Some(Angle::Slot(0))).is_err());
        assert!(Gate::new(GateKind::Rz, vec![0, 1], Some(Angle::Slot(0))).is_err());
        assert!(Gate::new(GateKind::Ry, vec![0], Some(Angle::Fixed(f64::NAN))).is_err());
        assert!(Gate::crz(0, 1, Angle::Slot(3)).is_ok());
    }

    #[test]
    fn slot_resolution_checks_bounds() {
        let g = Gate::rx(0, Angle::Slot(2));
        assert_eq!(
            g.target_matrix(&[0.0, 1.0]).unwrap_err(),
            Error::ParamSlotOutOfRange { slot: 2, len: 2 }
        );
    }

    #[test]
    fn rotations_are_unitary() {
        for m in [rx(0.7), ry(-1.3), rz(2.1)] {
            for i in 0..2 {
                for j in 0..2 {
                    let dot: C64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - C64::new(expect, 0.0)).norm() < 1e-15);
                }
            }
        }
    }
}
