//! Maximum-likelihood fitting of the hidden variables.
//!
//! * BCM: `N` equations `sum_j p_ij = k_i`.
//! * ECM: `2N` equations matching degrees and strengths jointly.
//! * TS: the BCM for `z`, then `y` from `sum_j p_ij / (1 - y_i y_j) = s_i`
//!   with the BCM probabilities held fixed.
//!
//! Isolated nodes are removed before iterating and get zero fitness. Nodes
//! whose strength equals their degree carry no geometric weight part and get
//! `y_i = 0` exactly. Newton mode minimizes the convex negative
//! log-likelihood in log-coordinates with a backtracking line search; fixed
//! point mode iterates the classic coordinate-wise updates.

mod bcm;
mod ecm;
mod likelihood;
mod newton;
mod ts;

use serde::{Deserialize, Serialize};

pub use bcm::{solve_bcm, solve_bcm_from};
pub use ecm::{solve_ecm, solve_ecm_from};
pub use likelihood::{log_likelihood, Likelihood};
pub use ts::{solve_ts, solve_ts_from};

use crate::ensembles::ModelKind;
use crate::error::{Error, Result};
use crate::graph::ConstraintSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    FixedPoint,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Max relative constraint residual accepted as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Step-mixing factor in `(0, 1]`; halved when fixed-point iteration
    /// starts to diverge, and used as the first trial step in Newton mode.
    pub damping: f64,
    pub mode: SolveMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            damping: 1.0,
            mode: SolveMode::Newton,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: SolveMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Domain(format!("tol = {} must be > 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be >= 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Domain(format!(
                "damping = {} must lie in (0, 1]",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub model: ModelKind,
    pub mode: SolveMode,
    pub iterations: usize,
    /// Max relative residual over all fitted constraints.
    pub residual: f64,
    pub converged: bool,
    /// Log-likelihood of the constraints at the solution. The BCM and ECM
    /// are exponential families, so this only needs degrees and strengths;
    /// the TS likelihood depends on the graph itself and is left `None`
    /// here (see [`log_likelihood`]).
    pub log_likelihood: Option<f64>,
}

/// Nodes whose fitness must be infinite: linked to every other active node.
fn saturated_nodes(c: &ConstraintSet, active: &[usize]) -> Vec<usize> {
    let m = active.len() as u64;
    active
        .iter()
        .copied()
        .filter(|&i| c.degrees()[i] + 1 >= m)
        .collect()
}

fn check_saturation(c: &ConstraintSet, active: &[usize]) -> Result<()> {
    let saturated = saturated_nodes(c, active);
    if saturated.is_empty() {
        Ok(())
    } else {
        Err(Error::BoundaryDivergence { nodes: saturated })
    }
}

/// `ln(1 + e^t)` without overflow.
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `1 / (1 + e^t)`.
#[inline]
pub(crate) fn logistic_neg(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

/// Largest `y_i y_j` the fixed-point iteration lets a pair reach.
const PRODUCT_CEILING: f64 = 1.0 - 1e-12;

/// The two largest entries, in decreasing order.
fn top_two(v: &[f64]) -> (f64, f64) {
    let mut top = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &x in v {
        if x > top.0 {
            top = (x, top.0);
        } else if x > top.1 {
            top.1 = x;
        }
    }
    top
}

/// Every `beta_i + beta_j` is positive, so every `y_i y_j = e^-(beta_i + beta_j)` is below one.
pub(crate) fn pair_sums_positive(beta: &[f64]) -> bool {
    if beta.iter().any(|b| !b.is_finite()) {
        return false;
    }
    let neg: Vec<f64> = beta.iter().map(|b| -b).collect();
    let (a, b) = top_two(&neg);
    beta.len() < 2 || a + b < 0.0
}

/// Every `y_i y_j` over distinct entries is below one.
pub(crate) fn pair_products_below_one(y: &[f64]) -> bool {
    let (a, b) = top_two(y);
    y.len() < 2 || a * b < 1.0
}

/// Moves `y` a fraction `step` toward `target`, halving the step until every
/// pairwise product stays under the ceiling. Non-finite targets are ignored.
fn damped_step(y: &mut [f64], target: &[f64], step: f64) {
    let mut t = step;
    while t > 1e-12 {
        let next: Vec<f64> = y
            .iter()
            .zip(target)
            .map(|(&a, &b)| if b.is_finite() { (1.0 - t) * a + t * b } else { a })
            .collect();
        let (first, second) = top_two(&next);
        if next.len() < 2 || first * second <= PRODUCT_CEILING {
            y.copy_from_slice(&next);
            return;
        }
        t *= 0.5;
    }
}

/// Two weighted nodes share their only weighted pair, so their excess
/// strengths `s - k` must be equal.
fn check_lone_pair(c: &ConstraintSet, weighted: &[usize]) -> Result<()> {
    if let [i, j] = weighted[..] {
        let excess = |v: usize| c.strengths()[v] - c.degrees()[v];
        if excess(i) != excess(j) {
            return Err(Error::Infeasible {
                node: i,
                reason: format!(
                    "the only weighted nodes {i} and {j} have unequal excess strengths {} and {}",
                    excess(i),
                    excess(j)
                ),
            });
        }
    }
    Ok(())
}

/// With exactly two weighted nodes only `y_i y_j` is identified; both get
/// its square root so the fit does not depend on node order or start.
fn balance_lone_pair(y: &mut [f64], weighted: &[usize]) {
    if let [i, j] = weighted[..] {
        let r = (y[i] * y[j]).sqrt();
        y[i] = r;
        y[j] = r;
    }
}

fn initial_link_fitness(c: &ConstraintSet) -> Vec<f64> {
    let norm = ((2 * c.links() + 1) as f64).sqrt();
    c.degrees().iter().map(|&k| k as f64 / norm).collect()
}

fn initial_y(c: &ConstraintSet) -> Vec<f64> {
    c.degrees()
        .iter()
        .zip(c.strengths())
        .map(|(&k, &s)| (s as f64 / (s + k + 1) as f64).clamp(0.0, 1.0 - 1e-9))
        .collect()
}
