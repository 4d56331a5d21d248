//! Reduction of the two-step model to three macroeconomic parameters.
//!
//! `a` is fixed by matching the expected number of links, `b` and `c` by a
//! log-log regression of `y_i / (1 - y_i)` on the GDP shares. The
//! through-origin regression of the link fitness on `g` is kept as a
//! diagnostic next to the likelihood-based `a`.

use serde::{Deserialize, Serialize};

use crate::ensembles::{fermi, Ensemble, FitnessVectors, GdpModel, MacroParams};
use crate::error::{Error, Result};
use crate::graph::{ConstraintSet, GdpVector};
use crate::solvers::{solve_ecm, solve_ts, SolveReport, SolverConfig};

const REL_TOL: f64 = 1e-12;

/// `sum_{i<j} a g_i g_j / (1 + a g_i g_j)`.
pub fn expected_links(gdp: &GdpVector, a: f64) -> f64 {
    let g = gdp.values();
    let mut total = 0.0;
    for i in 0..g.len() {
        for j in (i + 1)..g.len() {
            total += fermi(a * g[i] * g[j]);
        }
    }
    total
}

/// The `a` reproducing `links` expected links, by bisection in `ln a`.
///
/// Returns `0` for `links = 0`. A complete graph would need `a = inf` and is
/// reported as a boundary divergence over every node.
pub fn fit_a(gdp: &GdpVector, links: u64) -> Result<f64> {
    let n = gdp.len() as u64;
    let max_links = n * n.saturating_sub(1) / 2;
    if links > max_links {
        return Err(Error::Infeasible {
            node: 0,
            reason: format!("{links} links exceed the {max_links} available pairs"),
        });
    }
    if links == 0 {
        return Ok(0.0);
    }
    if links == max_links {
        return Err(Error::BoundaryDivergence {
            nodes: (0..gdp.len()).collect(),
        });
    }
    let target = links as f64;
    let f = |log_a: f64| expected_links(gdp, log_a.exp()) - target;

    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    while f(lo) >= 0.0 {
        lo -= 8.0;
    }
    while f(hi) <= 0.0 {
        hi += 8.0;
        if hi > 1400.0 {
            return Err(Error::BoundaryDivergence {
                nodes: (0..gdp.len()).collect(),
            });
        }
    }
    check_increasing(&f, lo, hi)?;
    while hi - lo > REL_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn check_increasing(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<()> {
    const POINTS: usize = 32;
    let mut previous = f64::NEG_INFINITY;
    for k in 0..=POINTS {
        let v = f(lo + (hi - lo) * k as f64 / POINTS as f64);
        if !(v > previous) {
            return Err(Error::Domain(
                "expected link count is not strictly increasing in a".into(),
            ));
        }
        previous = v;
    }
    Ok(())
}

/// Result of the log-log regression `ln(y / (1 - y)) = ln b + c ln g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcFit {
    pub b: f64,
    pub c: f64,
    /// `None` when the response has no variance and the fit is not exact.
    pub r2: Option<f64>,
    /// Nodes with `y_i >= 1`, where the odds are undefined; left out of the fit.
    pub y_at_least_one: Vec<usize>,
}

/// Fits `y_i / (1 - y_i) = b g_i^c` over the nodes with `0 < y_i < 1`.
pub fn fit_bc(y: &[f64], gdp: &GdpVector) -> Result<BcFit> {
    if y.len() != gdp.len() {
        return Err(Error::DimensionMismatch {
            expected: gdp.len(),
            found: y.len(),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut y_at_least_one = Vec::new();
    for (i, &yi) in y.iter().enumerate() {
        if !(yi.is_finite() && yi >= 0.0) {
            return Err(Error::Domain(format!("y[{i}] = {yi} must be finite and >= 0")));
        }
        if yi >= 1.0 {
            y_at_least_one.push(i);
        } else if yi > 0.0 {
            xs.push(gdp.get(i).ln());
            ys.push((yi / (1.0 - yi)).ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} nodes with 0 < y < 1, need at least 3",
            xs.len()
        )));
    }
    let line = least_squares(&xs, &ys)?;
    Ok(BcFit {
        b: line.intercept.exp(),
        c: line.slope,
        r2: line.r2,
        y_at_least_one,
    })
}

struct Line {
    slope: f64,
    intercept: f64,
    r2: Option<f64>,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Result<Line> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if !(sxx > 1e-24 * n * mean_x.abs().max(1.0).powi(2)) {
        return Err(Error::DegenerateRegressor(
            "all included GDP shares are equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    Ok(Line {
        slope,
        intercept,
        r2: r_squared(ss_res, ss_tot, mean_y, xs.len()),
    })
}

/// `None` when the response has no spread beyond rounding noise and the fit
/// does not match it either.
fn r_squared(ss_res: f64, ss_tot: f64, scale: f64, count: usize) -> Option<f64> {
    let noise = 1e-24 * count as f64 * scale.abs().max(1.0).powi(2);
    if ss_tot > noise {
        Some(1.0 - ss_res / ss_tot)
    } else if ss_res <= noise {
        Some(1.0)
    } else {
        None
    }
}

/// Through-origin fit of `zx_i = sqrt(a) g_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtAFit {
    pub sqrt_a: f64,
    /// `1 - sum (ln zx - ln(sqrt_a g))^2 / sum (ln zx - mean)^2` over the
    /// included nodes.
    pub r2: Option<f64>,
}

/// `sqrt(a) = sum zx_i g_i / sum g_i^2` over nodes with `zx_i > 0`.
pub fn fit_sqrt_a_regression(zx: &[f64], gdp: &GdpVector) -> Result<SqrtAFit> {
    if zx.len() != gdp.len() {
        return Err(Error::DimensionMismatch {
            expected: gdp.len(),
            found: zx.len(),
        });
    }
    let included: Vec<usize> = (0..zx.len())
        .filter(|&i| zx[i] > 0.0 && zx[i].is_finite())
        .collect();
    if included.is_empty() {
        return Err(Error::InsufficientData("no node with positive fitness".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &i in &included {
        num += zx[i] * gdp.get(i);
        den += gdp.get(i) * gdp.get(i);
    }
    let sqrt_a = num / den;
    let logs: Vec<f64> = included.iter().map(|&i| zx[i].ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let ss_tot: f64 = logs.iter().map(|l| (l - mean).powi(2)).sum();
    let ss_res: f64 = included
        .iter()
        .zip(&logs)
        .map(|(&i, l)| (l - (sqrt_a * gdp.get(i)).ln()).powi(2))
        .sum();
    Ok(SqrtAFit {
        sqrt_a,
        r2: r_squared(ss_res, ss_tot, mean, logs.len()),
    })
}

/// Two-step fitness implied by the macro parameters: `z_i = sqrt(a) g_i`,
/// `y_i = b g_i^c / (1 + b g_i^c)`.
pub fn gdp_fitness_vectors(params: &MacroParams, gdp: &GdpVector) -> FitnessVectors {
    let root = params.a.sqrt();
    FitnessVectors::Ts {
        z: gdp.values().iter().map(|g| root * g).collect(),
        y: gdp
            .values()
            .iter()
            .map(|&g| crate::ensembles::gdp_y(g, params))
            .collect(),
    }
}

/// Which fitted model supplies the `y` (and link-fitness) values that are
/// regressed on GDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessSource {
    #[default]
    Ts,
    Ecm,
}

/// Summary of a macro fit, serialized with the field names used in
/// exported JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GdpFitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Log-log goodness of the link-fitness relation.
    pub r2_x: Option<f64>,
    /// Log-log goodness of the `y` relation.
    pub r2_y: Option<f64>,
    #[serde(rename = "expected_L")]
    pub expected_links: f64,
    #[serde(rename = "observed_L")]
    pub observed_links: u64,
    #[serde(rename = "expected_T")]
    pub expected_total_strength: f64,
    #[serde(rename = "observed_T")]
    pub observed_total_strength: u64,
    /// Nodes with zero degree.
    pub excluded_nodes: Vec<usize>,
    /// Linked nodes whose strength equals their degree: `y_i = 0`, so they
    /// are left out of the `y` regression only.
    pub unit_weight_nodes: Vec<usize>,
    /// Nodes with a fitted `y_i >= 1`, also left out of the `y` regression.
    pub y_at_least_one_nodes: Vec<usize>,
    /// `sqrt(a)` from the through-origin regression, for comparison with
    /// `sqrt(a)` from the link-count condition.
    pub sqrt_a_regression: f64,
    /// `(<T> - T) / T`.
    pub total_strength_gap: f64,
    pub source: FitnessSource,
}

impl GdpFitResult {
    pub fn params(&self) -> MacroParams {
        MacroParams {
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }
}

/// Everything produced by [`fit_gdp_model`].
#[derive(Debug, Clone)]
pub struct GdpFit {
    pub result: GdpFitResult,
    pub model: GdpModel,
    /// The node-level fit the regressions were run on.
    pub fitness: FitnessVectors,
    pub report: SolveReport,
}

/// Solves the chosen node-level model, then fits `a`, `b` and `c`.
pub fn fit_gdp_model(
    c: &ConstraintSet,
    gdp: &GdpVector,
    cfg: &SolverConfig,
    source: FitnessSource,
) -> Result<GdpFit> {
    if gdp.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            found: gdp.len(),
        });
    }
    let (fitness, report) = match source {
        FitnessSource::Ts => solve_ts(c, cfg)?,
        FitnessSource::Ecm => solve_ecm(c, cfg)?,
    };
    let zx: Vec<f64> = match &fitness {
        FitnessVectors::Ecm { .. } => fitness
            .ecm_x()
            .unwrap_or_default()
            .into_iter()
            .map(|x| x.unwrap_or(0.0))
            .collect(),
        other => other.link_fitness().to_vec(),
    };
    let y = fitness.y().unwrap_or_default();
    let x_fit = fit_sqrt_a_regression(&zx, gdp)?;
    let bc = fit_bc(y, gdp)?;
    let a = fit_a(gdp, c.links())?;
    let params = MacroParams::new(a, bc.b, bc.c)?;
    let model = GdpModel::new(params, gdp.clone());

    let (mut expected_l, mut expected_t) = (0.0, 0.0);
    for i in 0..model.n() {
        for j in (i + 1)..model.n() {
            let pair = model.pair(i, j);
            expected_l += pair.p;
            expected_t += pair.expected_w;
        }
    }
    let observed_t = c.total_strength();
    let result = GdpFitResult {
        a,
        b: bc.b,
        c: bc.c,
        r2_x: x_fit.r2,
        r2_y: bc.r2,
        expected_links: expected_l,
        observed_links: c.links(),
        expected_total_strength: expected_t,
        observed_total_strength: observed_t,
        excluded_nodes: (0..c.n()).filter(|&i| c.degrees()[i] == 0).collect(),
        unit_weight_nodes: (0..c.n())
            .filter(|&i| c.degrees()[i] > 0 && c.strengths()[i] == c.degrees()[i])
            .collect(),
        y_at_least_one_nodes: bc.y_at_least_one,
        sqrt_a_regression: x_fit.sqrt_a,
        total_strength_gap: (expected_t - observed_t as f64) / observed_t as f64,
        source,
    };
    Ok(GdpFit {
        result,
        model,
        fitness,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rescale_gdp;
    use proptest::prelude::*;

    #[test]
    fn fit_a_examples() {
        let gdp = rescale_gdp(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(fit_a(&gdp, 0).unwrap(), 0.0);
        // 3 (a/9) / (1 + a/9) = 1
        let a = fit_a(&gdp, 1).unwrap();
        assert!((a - 4.5).abs() < 1e-10, "{a}");
        let pair = rescale_gdp(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            fit_a(&pair, 1),
            Err(Error::BoundaryDivergence { .. })
        ));
        assert!(fit_a(&pair, 2).is_err());
    }

    #[test]
    fn fit_a_reproduces_link_count() {
        let gdp = rescale_gdp(&[5.0, 0.3, 2.0, 9.0, 0.01, 1.0, 4.4]).unwrap();
        for links in 1..21 {
            let a = fit_a(&gdp, links).unwrap();
            let got = expected_links(&gdp, a);
            assert!((got - links as f64).abs() <= 1e-9 * links as f64, "{links}: {got}");
        }
    }

    #[test]
    fn fit_bc_noiseless_recovery() {
        let gdp = rescale_gdp(&[1.0, 3.0, 0.2, 7.0, 0.05]).unwrap();
        let params = MacroParams::new(1.0, 2.0, 1.5).unwrap();
        let fitness = gdp_fitness_vectors(&params, &gdp);
        let fit = fit_bc(fitness.y().unwrap(), &gdp).unwrap();
        assert!((fit.b - 2.0).abs() < 1e-10);
        assert!((fit.c - 1.5).abs() < 1e-10);
        assert!((fit.r2.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_bc_errors() {
        let gdp = rescale_gdp(&[1.0; 4]).unwrap();
        assert!(matches!(
            fit_bc(&[0.2, 0.3, 0.4, 0.5], &gdp),
            Err(Error::DegenerateRegressor(_))
        ));
        let gdp = rescale_gdp(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(
            fit_bc(&[0.2, 0.0, 0.4, 0.0], &gdp),
            Err(Error::InsufficientData(_))
        ));
        assert!(fit_bc(&[0.2, -0.1, 0.4, 0.5], &gdp).is_err());
        let gdp = rescale_gdp(&[1.0, 2.0, 3.0, 4.0, 8.0]).unwrap();
        let y: Vec<f64> = gdp.values().iter().map(|g| g / (1.0 + g)).collect();
        let mut with_hub = y.clone();
        with_hub[4] = 1.1;
        let fit = fit_bc(&with_hub, &gdp).unwrap();
        assert_eq!(fit.y_at_least_one, vec![4]);
        assert!((fit.b - 1.0).abs() < 1e-10 && (fit.c - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_bc_with_log_noise() {
        use rand::{Rng, SeedableRng};
        use rand_distr::Normal;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, 0.01).unwrap();
        let raw: Vec<f64> = (0..100).map(|_| (rng.random::<f64>() * 8.0).exp()).collect();
        let gdp = rescale_gdp(&raw).unwrap();
        let (b, c) = (40.0, 0.9);
        let y: Vec<f64> = gdp
            .values()
            .iter()
            .map(|g| {
                let noise: f64 = rng.sample(normal);
                let odds = b * g.powf(c) * noise.exp();
                odds / (1.0 + odds)
            })
            .collect();
        let fit = fit_bc(&y, &gdp).unwrap();
        assert!((fit.b / b - 1.0).abs() < 0.05);
        assert!((fit.c / c - 1.0).abs() < 0.05);
        assert!(fit.r2.unwrap() > 0.95);
    }

    #[test]
    fn sqrt_a_examples() {
        let gdp = rescale_gdp(&[1.0, 2.0, 5.0]).unwrap();
        let zx: Vec<f64> = gdp.values().iter().map(|g| 3.0 * g).collect();
        let fit = fit_sqrt_a_regression(&zx, &gdp).unwrap();
        assert!((fit.sqrt_a - 3.0).abs() < 1e-14);
        assert!((fit.r2.unwrap() - 1.0).abs() < 1e-12);

        let single = rescale_gdp(&[2.0]).unwrap();
        let fit = fit_sqrt_a_regression(&[0.7], &single).unwrap();
        assert!((fit.sqrt_a - 0.7).abs() < 1e-15);
        assert!(fit_sqrt_a_regression(&[0.0, 0.0, 0.0], &gdp).is_err());

        // equal fitness values on unequal GDP: no spread to explain
        let flat = [0.6 / 9.0_f64.sqrt(); 3];
        let fit = fit_sqrt_a_regression(&flat, &gdp).unwrap();
        assert_eq!(fit.r2, None);
    }

    #[test]
    fn sqrt_a_with_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let raw: Vec<f64> = (0..200).map(|_| 0.1 + rng.random::<f64>()).collect();
        let gdp = rescale_gdp(&raw).unwrap();
        let zx: Vec<f64> = gdp
            .values()
            .iter()
            .map(|g| 4.0 * g * (1.0 + 0.02 * (rng.random::<f64>() - 0.5)))
            .collect();
        let fit = fit_sqrt_a_regression(&zx, &gdp).unwrap();
        assert!((fit.sqrt_a - 4.0).abs() < 4.0 * 0.01);
    }

    #[test]
    fn fitness_vector_examples() {
        let halves = rescale_gdp(&[1.0, 1.0]).unwrap();
        let params = MacroParams::new(4.0, 1.0, 1.0).unwrap();
        let fit = gdp_fitness_vectors(&params, &halves);
        assert_eq!(fit.link_fitness(), &[1.0, 1.0]);
        let quarters = rescale_gdp(&[1.0; 4]).unwrap();
        let fit = gdp_fitness_vectors(&params, &quarters);
        assert!((fit.y().unwrap()[0] - 0.2).abs() < 1e-15);
        let zero_a = MacroParams::new(0.0, 1.0, 1.0).unwrap();
        assert!(gdp_fitness_vectors(&zero_a, &quarters)
            .link_fitness()
            .iter()
            .all(|&z| z == 0.0));
    }

    proptest! {
        #[test]
        fn bc_fit_is_scale_consistent(
            raw in prop::collection::vec(0.01f64..100.0, 5..20),
            odds in prop::collection::vec(0.01f64..50.0, 20),
            kappa in 0.1f64..10.0,
        ) {
            let gdp = rescale_gdp(&raw).unwrap();
            let g = gdp.values();
            prop_assume!(g.iter().any(|&v| (v / g[0] - 1.0).abs() > 1e-3));
            let y: Vec<f64> = (0..g.len()).map(|i| odds[i] / (1.0 + odds[i])).collect();
            let base = fit_bc(&y, &gdp).unwrap();
            // The same regression on kappa * g, through the normal equations.
            let xs: Vec<f64> = g.iter().map(|v| (kappa * v).ln()).collect();
            let ys: Vec<f64> = y.iter().map(|v| (v / (1.0 - v)).ln()).collect();
            let scaled = least_squares(&xs, &ys).unwrap();
            prop_assert!((scaled.slope - base.c).abs() < 1e-9 * base.c.abs().max(1.0));
            let mapped = base.b * kappa.powf(-base.c);
            prop_assert!((scaled.intercept.exp() / mapped - 1.0).abs() < 1e-9);
        }
    }
}
