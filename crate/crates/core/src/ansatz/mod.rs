//! Parameterized circuit templates, parameter initialization and exact
//! gradients.

mod exec;
mod gradient;

pub use exec::{prepare, Prepared};
pub use gradient::{grad_parameter_shift, parameter_shift_jacobian, partial_parameter_shift};

use std::ops::Deref;

use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Angle, Circuit, Gate};

/// Flat real parameter vector (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParam(i));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// FNV-1a over the IEEE bit patterns; identifies a snapshot in traces.
    pub fn snapshot_hash(&self) -> u64 {
        self.0.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, v| {
            v.to_bits()
                .to_le_bytes()
                .iter()
                .fold(h, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
        })
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(p: ParamVector) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFamily {
    Pqc3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    CrzChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub family: AnsatzFamily,
    pub entangler: Entangler,
}

impl AnsatzSpec {
    pub fn pqc3(n_qubits: usize, n_layers: usize) -> Self {
        Self {
            n_qubits,
            n_layers,
            family: AnsatzFamily::Pqc3,
            entangler: Entangler::CrzChain,
        }
    }

    pub fn per_layer(&self) -> usize {
        2 * self.n_qubits + self.n_qubits.saturating_sub(1)
    }

    pub fn param_count(&self) -> usize {
        self.n_layers * self.per_layer()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::InvalidRegister(0));
        }
        if self.n_layers == 0 {
            return Err(Error::config("n_layers", "must be at least 1"));
        }
        Ok(())
    }
}

/// Layered RX column, RZ column, then a CRZ cascade from the last qubit up
/// (n−1→n−2, …, 1→0), one parameter per gate. Slots run layer by layer:
/// RX(q), RZ(q), then the cascade in application order.
pub fn build_pqc3(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.n_qubits;
    let mut circ = Circuit::new(n)?;
    for layer in 0..spec.n_layers {
        let base = layer * spec.per_layer();
        for q in 0..n {
            circ.push(Gate::rx(q, Angle::Slot(base + q)))?;
        }
        for q in 0..n {
            circ.push(Gate::rz(q, Angle::Slot(base + n + q)))?;
        }
        for j in 0..n.saturating_sub(1) {
            let control = n - 1 - j;
            circ.push(Gate::crz(control, control - 1, Angle::Slot(base + 2 * n + j))?)?;
        }
        circ.end_layer();
    }
    Ok(circ)
}

/// Fixed RY(x_i) on qubit i.
pub fn angle_encode(features: &[f64], n_qubits: usize) -> Result<Circuit> {
    if features.len() > n_qubits {
        return Err(Error::TooManyFeatures {
            features: features.len(),
            n_qubits,
        });
    }
    let mut circ = Circuit::new(n_qubits)?;
    for (q, &x) in features.iter().enumerate() {
        circ.push(Gate::ry(q, Angle::Fixed(x)))?;
    }
    Ok(circ)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitScheme {
    /// i.i.d. N(0, σ²)
    RandomNormal { sigma: f64 },
    /// i.i.d. uniform on [−ε, ε]
    IdentityNearZero { epsilon: f64 },
    /// A fixed starting point, typically the output of the convex stage.
    WarmStart { params: ParamVector },
}

impl InitScheme {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitScheme::RandomNormal { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::config("init.sigma", "must be positive"))
            }
            InitScheme::IdentityNearZero { epsilon } if !(*epsilon > 0.0 && epsilon.is_finite()) => {
                Err(Error::config("init.epsilon", "must be positive"))
            }
            _ => Ok(()),
        }
    }
}

pub fn init_params(scheme: &InitScheme, dim: usize, seed: u64) -> Result<ParamVector> {
    if dim == 0 {
        return Err(Error::EmptyParams);
    }
    scheme.validate()?;
    let mut rng = crate::seed::rng(seed, &[]);
    match scheme {
        InitScheme::RandomNormal { sigma } => {
            let d = Normal::new(0.0, *sigma).map_err(|e| Error::config("init.sigma", e.to_string()))?;
            ParamVector::new(d.sample_iter(&mut rng).take(dim).collect())
        }
        InitScheme::IdentityNearZero { epsilon } => {
            let d = Uniform::new_inclusive(-epsilon, *epsilon)
                .map_err(|e| Error::config("init.epsilon", e.to_string()))?;
            ParamVector::new(d.sample_iter(&mut rng).take(dim).collect())
        }
        InitScheme::WarmStart { params } => {
            if params.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: params.dim(),
                });
            }
            Ok(params.clone())
        }
    }
}

#[cfg(test)]
mod tests;
