//! Plain gradient descent.

use serde::Serialize;

use crate::error::RunResult;

/// Consecutive cost increases that abort training.
pub const DIVERGENCE_RUN: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct TrainReport {
    pub theta: Vec<f64>,
    /// Cost before each step, ending with the cost of `theta`.
    pub costs: Vec<f64>,
    pub iterations: usize,
    pub diverged: bool,
}

impl TrainReport {
    pub fn final_cost(&self) -> f64 {
        *self.costs.last().expect("initial cost is always recorded")
    }
}

/// Minimize `cost` with θ ← θ − step·∇. Stops early, keeping the partial
/// curve, once the cost has risen `DIVERGENCE_RUN` times in a row.
pub fn gradient_descent(
    theta0: &[f64],
    step: f64,
    iterations: usize,
    cost: impl Fn(&[f64]) -> RunResult<f64>,
    grad: impl Fn(&[f64]) -> RunResult<Vec<f64>>,
) -> RunResult<TrainReport> {
    let mut theta = theta0.to_vec();
    let mut costs = vec![cost(&theta)?];
    let mut rising = 0;
    for it in 0..iterations {
        let g = grad(&theta)?;
        for (t, gi) in theta.iter_mut().zip(&g) {
            *t -= step * gi;
        }
        let c = cost(&theta)?;
        rising = if c > *costs.last().expect("nonempty") { rising + 1 } else { 0 };
        costs.push(c);
        if rising >= DIVERGENCE_RUN {
            return Ok(TrainReport { theta, costs, iterations: it + 1, diverged: true });
        }
    }
    Ok(TrainReport { theta, costs, iterations, diverged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_converges() {
        let r = gradient_descent(&[1.0, -2.0], 0.1, 200, |t| Ok(t[0] * t[0] + t[1] * t[1]), |t| Ok(vec![2.0 * t[0], 2.0 * t[1]]))
            .unwrap();
        assert!(r.final_cost() < 1e-12);
        assert!(!r.diverged);
        assert_eq!(r.costs.len(), 201);
    }

    #[test]
    fn zero_budget_returns_start() {
        let r = gradient_descent(&[0.3], 0.05, 0, |t| Ok(t[0].cos()), |t| Ok(vec![-t[0].sin()])).unwrap();
        assert_eq!(r.theta, vec![0.3]);
        assert_eq!(r.costs, vec![0.3f64.cos()]);
    }

    #[test]
    fn divergence_aborts() {
        // step too large for the curvature: |1 − 2·1.5| > 1
        let r = gradient_descent(&[1.0], 1.5, 100, |t| Ok(t[0] * t[0]), |t| Ok(vec![2.0 * t[0]])).unwrap();
        assert!(r.diverged);
        assert_eq!(r.iterations, DIVERGENCE_RUN);
        assert_eq!(r.costs.len(), DIVERGENCE_RUN + 1);
    }
}
