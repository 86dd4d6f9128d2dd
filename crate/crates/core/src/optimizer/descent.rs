use rand::Rng;

use super::{Objective, TrainingTrace};
use crate::error::Result;

/// Absolute tolerance of the descent check.
pub const DESCENT_TOLERANCE: f64 = 1e-9;

/// c = η(1 − ηL̂/2), clamped at zero. With a non-positive constant the
/// inequality degenerates to plain monotonicity, which is what an oversized
/// step still has to satisfy to count as compliant.
pub fn descent_constant(eta: f64, smoothness: f64) -> f64 {
    (eta * (1.0 - eta * smoothness / 2.0)).max(0.0)
}

/// Counts consecutive same-stage record pairs with
/// L(θ_{k+1}) > L(θ_k) − c‖∇L(θ_k)‖² + 1e-9.
pub fn check_descent_inequality(trace: &TrainingTrace, smoothness: f64, eta: f64) -> usize {
    let c = descent_constant(eta, smoothness);
    trace
        .records()
        .windows(2)
        .filter(|w| w[0].stage == w[1].stage)
        .filter(|w| w[1].loss > w[0].loss - c * w[0].grad_norm.powi(2) + DESCENT_TOLERANCE)
        .count()
}

/// Largest gradient-difference ratio observed between consecutive iterates.
pub fn trajectory_smoothness(trace: &TrainingTrace) -> f64 {
    trace
        .records()
        .iter()
        .filter_map(|r| r.curvature)
        .fold(0.0, f64::max)
}

/// max ‖∇L(θᵢ) − ∇L(θⱼ)‖ / ‖θᵢ − θⱼ‖ over `probes` points drawn uniformly
/// from the cube of half-width `radius` around `params`. A lower bound on the
/// Lipschitz constant of ∇L; fewer than two probes give 0.
pub fn estimate_smoothness<O: Objective + ?Sized>(
    loss: &O,
    params: &[f64],
    probes: usize,
    radius: f64,
    seed: u64,
) -> Result<f64> {
    if probes < 2 {
        return Ok(0.0);
    }
    let mut rng = crate::seed::rng(seed, &[]);
    let mut points = Vec::with_capacity(probes);
    for _ in 0..probes {
        let p: Vec<f64> = params
            .iter()
            .map(|x| x + rng.random_range(-radius..=radius))
            .collect();
        let g = loss.gradient(&p)?;
        points.push((p, g));
    }
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx = dist(&points[i].0, &points[j].0);
            if dx > 0.0 {
                best = best.max(dist(&points[i].1, &points[j].1) / dx);
            }
        }
    }
    Ok(best)
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
