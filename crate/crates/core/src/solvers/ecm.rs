use nalgebra::DMatrix;

use super::bcm::relative_residual;
use super::newton::{minimize, ConvexProblem};
use super::{
    check_saturation, initial_link_fitness, initial_y, logistic_neg, softplus, SolveMode,
    SolveReport, SolverConfig,
};
use crate::ensembles::{FitnessVectors, ModelKind};
use crate::error::{Error, Result};
use crate::graph::ConstraintSet;


/// Negative ECM log-likelihood over active nodes, in `phi = -ln(x y)` for
/// every active node and `beta = -ln y` for nodes with `s > k`:
///
/// `F = sum phi k + sum beta (s - k) + sum_{i<j} ln(1 + e^{-phi_i - phi_j} / (1 - R_ij))`.
///
/// Variables are laid out as `[phi_0 .. phi_{m-1}, beta_0 .. beta_{w-1}]`.
struct EcmProblem {
    degrees: Vec<f64>,
    /// `s - k` per active node.
    excess: Vec<f64>,
    /// Position of each active node's `beta` in the variable vector. Two
    /// weighted nodes alone share one slot.
    beta_slot: Vec<Option<usize>>,
    strengths: Vec<f64>,
}

/// Per-pair quantities at a point.
struct PairState {
    p: f64,
    ratio: f64,
    /// `1 - R`.
    gap: f64,
}

impl EcmProblem {
    fn m(&self) -> usize {
        self.degrees.len()
    }

    /// `beta_i + beta_j`, infinite when either node carries no weights.
    fn beta_sum(&self, x: &[f64], i: usize, j: usize) -> f64 {
        match (self.beta_slot[i], self.beta_slot[j]) {
            (Some(a), Some(b)) => x[a] + x[b],
            _ => f64::INFINITY,
        }
    }

    fn pair(&self, x: &[f64], i: usize, j: usize) -> PairState {
        let b = self.beta_sum(x, i, j);
        let (ratio, gap) = if b.is_infinite() {
            (0.0, 1.0)
        } else {
            ((-b).exp(), -(-b).exp_m1())
        };
        PairState {
            p: logistic_neg(x[i] + x[j] + gap.ln()),
            ratio,
            gap,
        }
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite()) && super::pair_sums_positive(&x[self.m()..])
    }

    /// Expected degrees and expected `s - k` per active node.
    fn expectations(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.m();
        let mut k = vec![0.0; m];
        let mut extra = vec![0.0; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let st = self.pair(x, i, j);
                k[i] += st.p;
                k[j] += st.p;
                let e = st.p * st.ratio / st.gap;
                extra[i] += e;
                extra[j] += e;
            }
        }
        (k, extra)
    }
}

impl ConvexProblem for EcmProblem {
    fn dim(&self) -> usize {
        self.beta_slot.iter().flatten().max().map_or(self.m(), |b| b + 1)
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        if !self.in_domain(x) {
            return None;
        }
        let m = self.m();
        let mut value = 0.0;
        for i in 0..m {
            value += x[i] * self.degrees[i];
            if let Some(b) = self.beta_slot[i] {
                value += x[b] * self.excess[i];
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let b = self.beta_sum(x, i, j);
                let log_gap = if b.is_infinite() {
                    0.0
                } else {
                    (-(-b).exp_m1()).ln()
                };
                value += softplus(-(x[i] + x[j]) - log_gap);
            }
        }
        Some(value)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (k, extra) = self.expectations(x);
        let mut g = vec![0.0; self.dim()];
        for i in 0..self.m() {
            g[i] = self.degrees[i] - k[i];
            if let Some(b) = self.beta_slot[i] {
                g[b] += self.excess[i] - extra[i];
            }
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.m();
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..m {
            for j in (i + 1)..m {
                let st = self.pair(x, i, j);
                let var_a = st.p * (1.0 - st.p);
                h[(i, j)] += var_a;
                h[(j, i)] += var_a;
                h[(i, i)] += var_a;
                h[(j, j)] += var_a;
                let (bi, bj) = match (self.beta_slot[i], self.beta_slot[j]) {
                    (Some(bi), Some(bj)) => (bi, bj),
                    _ => continue,
                };
                let mean_m = st.p * st.ratio / st.gap;
                let cov = mean_m * (1.0 - st.p);
                let var_m = mean_m * (1.0 + st.ratio) / st.gap - mean_m * mean_m;
                for (a, b) in [(i, bi), (i, bj), (j, bi), (j, bj)] {
                    h[(a, b)] += cov;
                    h[(b, a)] += cov;
                }
                for (a, b) in [(bi, bi), (bj, bj), (bi, bj), (bj, bi)] {
                    h[(a, b)] += var_m;
                }
            }
        }
        h
    }

    fn residual(&self, x: &[f64]) -> f64 {
        let (k, extra) = self.expectations(x);
        let s: Vec<f64> = k.iter().zip(&extra).map(|(a, b)| a + b).collect();
        relative_residual(&k, &self.degrees).max(relative_residual(&s, &self.strengths))
    }
}

/// Fits `(x, y)` to the degree and strength sequences jointly.
pub fn solve_ecm(c: &ConstraintSet, cfg: &SolverConfig) -> Result<(FitnessVectors, SolveReport)> {
    let y0 = initial_y(c);
    let xy0 = initial_link_fitness(c)
        .iter()
        .zip(&y0)
        .map(|(x, y)| x * y)
        .collect();
    solve_ecm_from(c, cfg, &FitnessVectors::Ecm { xy: xy0, y: y0 })
}

/// [`solve_ecm`] from a starting point given as an ECM fitness. Only active
/// nodes are read: `xy` must be positive there, and `y` must be positive on
/// nodes whose strength exceeds their degree, with every pairwise product below 1.
pub fn solve_ecm_from(
    c: &ConstraintSet,
    cfg: &SolverConfig,
    start: &FitnessVectors,
) -> Result<(FitnessVectors, SolveReport)> {
    cfg.validate()?;
    let (xy0, y0) = match start {
        FitnessVectors::Ecm { xy, y } => (xy, y),
        other => {
            return Err(Error::Domain(format!(
                "ECM start must be an ECM fitness, got {}",
                other.kind().name()
            )))
        }
    };
    for len in [xy0.len(), y0.len()] {
        if len != c.n() {
            return Err(Error::DimensionMismatch {
                expected: c.n(),
                found: len,
            });
        }
    }
    let active = c.active_nodes();
    check_saturation(c, &active)?;

    let m = active.len();
    let degrees: Vec<f64> = active.iter().map(|&i| c.degrees()[i] as f64).collect();
    let strengths: Vec<f64> = active.iter().map(|&i| c.strengths()[i] as f64).collect();
    let excess: Vec<f64> = strengths.iter().zip(&degrees).map(|(s, k)| s - k).collect();
    let weighted: Vec<usize> = (0..m).filter(|&a| excess[a] > 0.0).collect();
    let mut beta_slot = vec![None; m];
    for (slot, &a) in weighted.iter().enumerate() {
        beta_slot[a] = Some(if weighted.len() == 2 { m } else { m + slot });
    }

    let mut u: Vec<f64> = active.iter().map(|&i| xy0[i]).collect();
    let mut y: Vec<f64> = (0..m)
        .map(|a| if beta_slot[a].is_some() { y0[active[a]] } else { 0.0 })
        .collect();
    if u.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain("initial x y must be positive on linked nodes".into()));
    }
    if (0..m).any(|a| beta_slot[a].is_some() && !(y[a] > 0.0 && y[a].is_finite()))
        || !super::pair_products_below_one(&y)
    {
        return Err(Error::Domain(
            "initial y must be positive on weighted nodes with every pairwise product below 1".into(),
        ));
    }
    if let [lone] = weighted[..] {
        return Err(Error::Infeasible {
            node: active[lone],
            reason: "no weighted partner to carry the excess strength".into(),
        });
    }
    let weighted_nodes: Vec<usize> = weighted.iter().map(|&a| active[a]).collect();
    super::check_lone_pair(c, &weighted_nodes)?;

    let problem = EcmProblem {
        degrees,
        excess,
        beta_slot,
        strengths,
    };
    let (iterations, residual) = match cfg.mode {
        SolveMode::Newton => {
            let mut x0: Vec<f64> = u.iter().map(|v| -v.ln()).collect();
            if let [i, j] = weighted[..] {
                x0.push(-0.5 * (y[i] * y[j]).ln());
            } else {
                x0.extend(weighted.iter().map(|&a| -y[a].ln()));
            }
            let out = minimize(&problem, x0, cfg.tol, cfg.max_iter, cfg.damping);
            for a in 0..m {
                u[a] = (-out.x[a]).exp();
                if let Some(b) = problem.beta_slot[a] {
                    y[a] = (-out.x[b]).exp();
                }
            }
            (out.iterations, out.residual)
        }
        SolveMode::FixedPoint => fixed_point(&problem, &mut u, &mut y, cfg),
    };

    super::balance_lone_pair(&mut y, &weighted);
    let mut xy = vec![0.0; c.n()];
    let mut y_full = vec![0.0; c.n()];
    for (a, &i) in active.iter().enumerate() {
        xy[i] = u[a];
        y_full[i] = y[a];
    }
    let report = SolveReport {
        model: ModelKind::Ecm,
        mode: cfg.mode,
        iterations,
        residual,
        converged: residual <= cfg.tol && super::pair_products_below_one(&y),
        log_likelihood: Some(constraint_log_likelihood(c, &xy, &y_full)),
    };
    if !report.converged {
        return Err(Error::NotConverged {
            report: Box::new(report),
        });
    }
    Ok((FitnessVectors::Ecm { xy, y: y_full }, report))
}

/// Coordinate updates in `(u, y)` with `u = x y`:
/// `u_i <- k_i / sum_j u_j / (1 - R_ij + u_i u_j)` and
/// `y_i <- (s_i - k_i) / sum_j p_ij y_j / (1 - R_ij)`.
fn fixed_point(
    problem: &EcmProblem,
    u: &mut [f64],
    y: &mut [f64],
    cfg: &SolverConfig,
) -> (usize, f64) {
    let m = u.len();
    let mut damping = cfg.damping;
    let mut previous = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut den_u = vec![0.0; m];
    let mut den_y = vec![0.0; m];
    let mut k = vec![0.0; m];
    let mut s = vec![0.0; m];
    for iteration in 0..cfg.max_iter {
        for v in [&mut den_u, &mut den_y, &mut k, &mut s] {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let ratio = y[i] * y[j];
                let gap = 1.0 - ratio;
                let inv = 1.0 / (gap + u[i] * u[j]);
                let p = u[i] * u[j] * inv;
                den_u[i] += u[j] * inv;
                den_u[j] += u[i] * inv;
                den_y[i] += p * y[j] / gap;
                den_y[j] += p * y[i] / gap;
                k[i] += p;
                k[j] += p;
                s[i] += p / gap;
                s[j] += p / gap;
            }
        }
        residual = relative_residual(&k, &problem.degrees)
            .max(relative_residual(&s, &problem.strengths));
        if residual <= cfg.tol {
            return (iteration, residual);
        }
        if residual > previous {
            damping = (damping * 0.5).max(1.0 / 1024.0);
        }
        previous = residual;
        for i in 0..m {
            let target = problem.degrees[i] / den_u[i];
            u[i] = (1.0 - damping) * u[i] + damping * target;
        }
        let target: Vec<f64> = (0..m)
            .map(|i| {
                if problem.beta_slot[i].is_some() {
                    problem.excess[i] / den_y[i]
                } else {
                    0.0
                }
            })
            .collect();
        super::damped_step(y, &target, damping);
    }
    (cfg.max_iter, residual)
}

/// `sum k ln(x y) + sum (s - k) ln y - sum_{i<j} ln(1 + x_i y_i x_j y_j / (1 - y_i y_j))`.
fn constraint_log_likelihood(c: &ConstraintSet, xy: &[f64], y: &[f64]) -> f64 {
    let n = xy.len();
    let mut value = 0.0;
    for i in 0..n {
        let (k, s) = (c.degrees()[i], c.strengths()[i]);
        if k > 0 {
            value += k as f64 * xy[i].ln();
        }
        if s > k {
            value += (s - k) as f64 * y[i].ln();
        }
        for j in (i + 1)..n {
            value -= (xy[i] * xy[j] / (1.0 - y[i] * y[j])).ln_1p();
        }
    }
    value
}
