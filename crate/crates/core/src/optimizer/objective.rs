use crate::error::Result;
use crate::loss::LinearizedSystem;

/// A differentiable scalar loss over a flat parameter vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, params: &[f64]) -> Result<f64>;

    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>>;

    fn value_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(params)?, self.gradient(params)?))
    }
}

/// A loss of the form `weight · ‖b − Z(θ)‖²` that can be linearized for
/// Gauss-Newton steps.
pub trait ResidualModel: Sync {
    fn dim(&self) -> usize;

    fn linearize(&self, params: &[f64]) -> Result<LinearizedSystem>;

    fn residual_weight(&self) -> f64 {
        1.0
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, params: &[f64]) -> Result<f64> {
        (**self).value(params)
    }
    fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        (**self).gradient(params)
    }
    fn value_and_gradient(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        (**self).value_and_gradient(params)
    }
}
