//! Damped Newton minimization of a smooth convex objective with a
//! constraint-residual stopping rule.

use nalgebra::{DMatrix, DVector};

/// A convex objective whose stationary point solves the constraint system.
pub(crate) trait ConvexProblem {
    fn dim(&self) -> usize;

    /// Objective value, `None` outside the domain.
    fn objective(&self, x: &[f64]) -> Option<f64>;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn hessian(&self, x: &[f64]) -> DMatrix<f64>;

    /// Max relative constraint residual at `x`.
    fn residual(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

pub(crate) fn minimize<P: ConvexProblem>(
    problem: &P,
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
    initial_step: f64,
) -> Outcome {
    let mut x = x0;
    let mut residual = problem.residual(&x);
    let mut value = match problem.objective(&x) {
        Some(v) => v,
        None => {
            return Outcome {
                x,
                iterations: 0,
                residual,
            }
        }
    };
    let mut iterations = 0;
    while iterations < max_iter {
        if residual <= tol {
            return Outcome {
                x,
                iterations,
                residual,
            };
        }
        iterations += 1;

        let grad = problem.gradient(&x);
        let direction = newton_direction(problem.hessian(&x), &grad);
        let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();

        let mut step = initial_step;
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| xi + step * di)
                .collect();
            if let Some(trial_value) = problem.objective(&trial) {
                if trial_value <= value + ARMIJO * step * slope {
                    accepted = Some((trial, trial_value));
                    break;
                }
                // Close to the optimum the objective is flat to rounding, so
                // fall back to the residual to judge progress.
                if (trial_value - value).abs() <= 1e-12 * value.abs().max(1.0) {
                    let trial_residual = problem.residual(&trial);
                    if trial_residual < residual {
                        accepted = Some((trial, trial_value));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, trial_value)) => {
                x = trial;
                value = trial_value;
                residual = problem.residual(&x);
            }
            None => break,
        }
    }
    Outcome {
        x,
        iterations,
        residual,
    }
}

/// Solves `H d = -g`, shifting the diagonal when `H` is not numerically
/// positive definite.
fn newton_direction(hessian: DMatrix<f64>, grad: &[f64]) -> Vec<f64> {
    let n = grad.len();
    let rhs = DVector::from_iterator(n, grad.iter().map(|g| -g));
    let scale = (0..n).map(|i| hessian[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    loop {
        let mut h = hessian.clone();
        for i in 0..n {
            h[(i, i)] += shift;
        }
        if let Some(chol) = h.cholesky() {
            let d = chol.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return d.iter().copied().collect();
            }
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 10.0 };
        if shift > 1e12 * scale {
            // steepest descent as a last resort
            return rhs.iter().map(|v| v / scale).collect();
        }
    }
}
