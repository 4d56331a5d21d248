use nalgebra::DMatrix;

use super::bcm::fit_link_fitness;
use super::newton::{minimize, ConvexProblem};
use super::{initial_link_fitness, initial_y, SolveMode, SolveReport, SolverConfig};
use crate::ensembles::{fermi, FitnessVectors, ModelKind};
use crate::error::{Error, Result};
use crate::graph::ConstraintSet;


/// Second step of the two-step model. With the link probabilities `p_ij`
/// fixed, `y` over weighted nodes minimizes
///
/// `G(beta) = sum_i beta_i e_i - sum_{i<j} p_ij ln(1 - e^{-beta_i - beta_j})`
///
/// where `e_i = s_i - <k_i>` and `beta = -ln y`.
struct WeightStep {
    /// `p_ij` among weighted nodes, row-major.
    p: Vec<f64>,
    excess: Vec<f64>,
    strengths: Vec<f64>,
}

impl WeightStep {
    fn m(&self) -> usize {
        self.excess.len()
    }

    fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.m() + j]
    }

    /// `sum_j p_ij R_ij / (1 - R_ij)` per node.
    fn expected_excess(&self, beta: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut e = vec![0.0; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let b = beta[i] + beta[j];
                let v = self.p(i, j) * (-b).exp() / -(-b).exp_m1();
                e[i] += v;
                e[j] += v;
            }
        }
        e
    }
}

impl ConvexProblem for WeightStep {
    fn dim(&self) -> usize {
        self.m()
    }

    fn objective(&self, beta: &[f64]) -> Option<f64> {
        if !super::pair_sums_positive(beta) {
            return None;
        }
        let m = self.m();
        let mut value: f64 = beta.iter().zip(&self.excess).map(|(b, e)| b * e).sum();
        for i in 0..m {
            for j in (i + 1)..m {
                value -= self.p(i, j) * (-(-(beta[i] + beta[j])).exp_m1()).ln();
            }
        }
        Some(value)
    }

    fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        self.expected_excess(beta)
            .iter()
            .zip(&self.excess)
            .map(|(got, want)| want - got)
            .collect()
    }

    fn hessian(&self, beta: &[f64]) -> DMatrix<f64> {
        let m = self.m();
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in (i + 1)..m {
                let b = beta[i] + beta[j];
                let gap = -(-b).exp_m1();
                let v = self.p(i, j) * (-b).exp() / (gap * gap);
                h[(i, j)] = v;
                h[(j, i)] = v;
                h[(i, i)] += v;
                h[(j, j)] += v;
            }
        }
        h
    }

    fn residual(&self, beta: &[f64]) -> f64 {
        strength_residual(&self.expected_excess(beta), &self.excess, &self.strengths)
    }
}

/// `|<s_i> - s_i| / s_i`, written through the excess over the degree.
fn strength_residual(got: &[f64], want: &[f64], strengths: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .zip(strengths)
        .map(|((g, w), s)| ((g - w) / s).abs())
        .fold(0.0, f64::max)
}

/// Fits the two-step model: `z` from the degrees, then `y` from the
/// strengths with the binary structure held fixed.
pub fn solve_ts(c: &ConstraintSet, cfg: &SolverConfig) -> Result<(FitnessVectors, SolveReport)> {
    solve_ts_from(c, cfg, &initial_link_fitness(c), &initial_y(c))
}

/// [`solve_ts`] from caller-provided starting points. `y0` is read only on
/// nodes whose strength exceeds their degree; there it must be positive with
/// every pairwise product below 1.
pub fn solve_ts_from(
    c: &ConstraintSet,
    cfg: &SolverConfig,
    z0: &[f64],
    y0: &[f64],
) -> Result<(FitnessVectors, SolveReport)> {
    if y0.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            found: y0.len(),
        });
    }
    let (z, first) = fit_link_fitness(c, cfg, z0).map_err(|e| match e {
        Error::NotConverged { mut report } => {
            report.model = ModelKind::Ts;
            report.log_likelihood = None;
            Error::NotConverged { report }
        }
        other => other,
    })?;
    let (y, iterations, residual) = fit_weights(c, cfg, &z, y0)?;
    let report = SolveReport {
        model: ModelKind::Ts,
        mode: cfg.mode,
        iterations: first.iterations + iterations,
        residual: first.residual.max(residual),
        converged: residual <= cfg.tol,
        log_likelihood: None,
    };
    if !report.converged {
        return Err(Error::NotConverged {
            report: Box::new(report),
        });
    }
    Ok((FitnessVectors::Ts { z, y }, report))
}

/// Second step: returns the full `y` with zeros on nodes that carry no
/// excess weight, plus iteration count and residual.
pub(crate) fn fit_weights(
    c: &ConstraintSet,
    cfg: &SolverConfig,
    z: &[f64],
    y0: &[f64],
) -> Result<(Vec<f64>, usize, f64)> {
    let n = c.n();
    let weighted: Vec<usize> = (0..n)
        .filter(|&i| c.strengths()[i] > c.degrees()[i])
        .collect();
    let mut y = vec![0.0; n];
    if weighted.is_empty() {
        return Ok((y, 0, 0.0));
    }
    let m = weighted.len();
    let mut excess = Vec::with_capacity(m);
    for &i in &weighted {
        let k: f64 = (0..n).filter(|&j| j != i).map(|j| fermi(z[i] * z[j])).sum();
        let e = c.strengths()[i] as f64 - k;
        if !(e > 0.0) {
            return Err(Error::Infeasible {
                node: i,
                reason: format!(
                    "strength {} does not exceed expected degree {k}",
                    c.strengths()[i]
                ),
            });
        }
        excess.push(e);
    }
    let mut p = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            if a != b {
                p[a * m + b] = fermi(z[weighted[a]] * z[weighted[b]]);
            }
        }
    }
    // A weighted node needs at least one other weighted node to share a
    // geometric weight with.
    for a in 0..m {
        if (0..m).all(|b| p[a * m + b] == 0.0) {
            return Err(Error::Infeasible {
                node: weighted[a],
                reason: "no weighted partner to carry the excess strength".into(),
            });
        }
    }
    super::check_lone_pair(c, &weighted)?;
    let strengths: Vec<f64> = weighted.iter().map(|&i| c.strengths()[i] as f64).collect();
    let problem = WeightStep {
        p,
        excess,
        strengths,
    };

    let start: Vec<f64> = weighted.iter().map(|&i| y0[i]).collect();
    if start.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !super::pair_products_below_one(&start) {
        return Err(Error::Domain(
            "initial y must be positive on weighted nodes with every pairwise product below 1".into(),
        ));
    }
    let (fitted, iterations, residual) = match cfg.mode {
        _ if m == 2 => lone_pair(&problem),
        SolveMode::Newton => {
            let beta0 = start.iter().map(|v| -v.ln()).collect();
            let out = minimize(&problem, beta0, cfg.tol, cfg.max_iter, cfg.damping);
            let y: Vec<f64> = out.x.iter().map(|b| (-b).exp()).collect();
            (y, out.iterations, out.residual)
        }
        SolveMode::FixedPoint => fixed_point(&problem, start, cfg),
    };
    for (&i, &v) in weighted.iter().zip(&fitted) {
        y[i] = v;
    }
    super::balance_lone_pair(&mut y, &weighted);
    Ok((y, iterations, residual))
}

/// Two weighted nodes: `e = p R / (1 - R)` fixes `R` and the split is balanced.
/// Both excesses carry the rounding of the first step, so `e` is the blend
/// that equalizes their relative strength errors.
fn lone_pair(problem: &WeightStep) -> (Vec<f64>, usize, f64) {
    let (e, s) = (&problem.excess, &problem.strengths);
    let e = (e[0] * s[1] + e[1] * s[0]) / (s[0] + s[1]);
    let ratio = e / (problem.p(0, 1) + e);
    let beta = vec![-0.5 * ratio.ln(); 2];
    (vec![ratio.sqrt(); 2], 0, problem.residual(&beta))
}

/// `y_i <- e_i / sum_j p_ij y_j / (1 - y_i y_j)`.
fn fixed_point(problem: &WeightStep, mut y: Vec<f64>, cfg: &SolverConfig) -> (Vec<f64>, usize, f64) {
    let m = y.len();
    let mut damping = cfg.damping;
    let mut previous = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut den = vec![0.0; m];
    let mut got = vec![0.0; m];
    for iteration in 0..cfg.max_iter {
        den.iter_mut().for_each(|d| *d = 0.0);
        got.iter_mut().for_each(|d| *d = 0.0);
        for i in 0..m {
            for j in (i + 1)..m {
                let p = problem.p(i, j);
                let gap = 1.0 - y[i] * y[j];
                den[i] += p * y[j] / gap;
                den[j] += p * y[i] / gap;
                let v = p * y[i] * y[j] / gap;
                got[i] += v;
                got[j] += v;
            }
        }
        residual = strength_residual(&got, &problem.excess, &problem.strengths);
        if residual <= cfg.tol {
            return (y, iteration, residual);
        }
        if residual > previous {
            damping = (damping * 0.5).max(1.0 / 1024.0);
        }
        previous = residual;
        let target: Vec<f64> = (0..m).map(|i| problem.excess[i] / den[i]).collect();
        super::damped_step(&mut y, &target, damping);
    }
    (y, cfg.max_iter, residual)
}
