use nalgebra::{DMatrix, DVector};

use crate::ansatz::ParamVector;
use crate::error::{Error, Result};

/// First-order model Z(θ₀ + Δθ) ≈ Z(θ₀) + ΦΔθ of a residual vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSystem {
    /// Rows are residual gradients, columns parameters.
    pub jacobian: DMatrix<f64>,
    pub residual: DVector<f64>,
    pub targets: DVector<f64>,
    pub expansion_point: ParamVector,
}

impl LinearizedSystem {
    pub fn new(
        jacobian: DMatrix<f64>,
        residual: DVector<f64>,
        targets: DVector<f64>,
        expansion_point: ParamVector,
    ) -> Result<Self> {
        if jacobian.nrows() != residual.len() || targets.len() != residual.len() {
            return Err(Error::DimensionMismatch {
                expected: jacobian.nrows(),
                got: residual.len(),
            });
        }
        if jacobian.ncols() != expansion_point.dim() {
            return Err(Error::DimensionMismatch {
                expected: expansion_point.dim(),
                got: jacobian.ncols(),
            });
        }
        Ok(Self {
            jacobian,
            residual,
            targets,
            expansion_point,
        })
    }

    /// ‖r‖²
    pub fn residual_sq(&self) -> f64 {
        self.residual.norm_squared()
    }

    /// Gradient of ‖r(θ)‖² at the expansion point when r = b − Z(θ):
    /// −2Φᵀr.
    pub fn residual_sq_gradient(&self) -> DVector<f64> {
        self.jacobian.tr_mul(&self.residual) * -2.0
    }
}

fn check_ridge(phi: &DMatrix<f64>, rhs_len: usize, lambda: f64) -> Result<()> {
    if phi.nrows() != rhs_len {
        return Err(Error::DimensionMismatch {
            expected: phi.nrows(),
            got: rhs_len,
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidLoss(format!("ridge lambda {lambda} must be finite and ≥ 0")));
    }
    Ok(())
}

/// f(w) = ‖Φw − b‖² + λ‖w‖²
pub fn ridge_objective(w: &DVector<f64>, phi: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Result<f64> {
    check_ridge(phi, b.len(), lambda)?;
    if phi.ncols() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.ncols(),
            got: w.len(),
        });
    }
    Ok((phi * w - b).norm_squared() + lambda * w.norm_squared())
}

/// Solves (ΦᵀΦ + λI)Δθ = Φᵀr.
pub fn ridge_solve(sys: &LinearizedSystem, lambda: f64) -> Result<DVector<f64>> {
    solve_normal_equations(&sys.jacobian, &sys.residual, lambda)
}

pub fn solve_normal_equations(phi: &DMatrix<f64>, r: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    check_ridge(phi, r.len(), lambda)?;
    let n = phi.ncols();
    let a = phi.tr_mul(phi) + DMatrix::<f64>::identity(n, n) * lambda;
    let rhs = phi.tr_mul(r);
    if lambda == 0.0 {
        // Cholesky can succeed on numerically singular Gram matrices; reject
        // those explicitly.
        let eig = a.clone().symmetric_eigenvalues();
        let max = eig.iter().copied().fold(0.0, f64::max);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if n == 0 || min <= 1e-12 * max.max(1.0) {
            return Err(Error::SingularSystem(lambda));
        }
    }
    let chol = a.clone().cholesky().ok_or(Error::SingularSystem(lambda))?;
    let mut x = chol.solve(&rhs);
    // one round of iterative refinement
    let resid = &rhs - &a * &x;
    x += chol.solve(&resid);
    Ok(x)
}

/// Definiteness of the ridge Hessian 2(ΦᵀΦ + λI); returns its smallest
/// eigenvalue alongside the PSD verdict.
pub fn hessian_psd_check(phi: &DMatrix<f64>, lambda: f64) -> (bool, f64) {
    let n = phi.ncols();
    if n == 0 {
        return (true, 0.0);
    }
    let h = (phi.tr_mul(phi) + DMatrix::<f64>::identity(n, n) * lambda) * 2.0;
    let min = h
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    (min >= -1e-10, min)
}
