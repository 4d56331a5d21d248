use serde::Serialize;

use crate::ensembles::{Ensemble, FitnessVectors};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Log-probability of a graph under a fitted ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Likelihood {
    /// `-inf` when some pair has probability zero.
    pub value: f64,
    /// First pair `(i, j)`, `i < j`, whose observed state is impossible.
    pub impossible_pair: Option<(usize, usize)>,
}

/// Sum over unordered pairs of the log of the per-pair probability:
/// `ln(1 - p)` for an absent link and `ln p + (w - 1) ln R + ln(1 - R)` for
/// a link of weight `w` (just `ln p` for the BCM, which ignores weights).
pub fn log_likelihood(fitted: &FitnessVectors, graph: &WeightedGraph) -> Result<Likelihood> {
    if fitted.n() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: fitted.n(),
            found: graph.n(),
        });
    }
    fitted.validate()?;
    let n = graph.n();
    let mut value = 0.0;
    let mut impossible_pair = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let term = pair_log_prob(fitted, i, j, graph.weight(i, j));
            if term == f64::NEG_INFINITY && impossible_pair.is_none() {
                impossible_pair = Some((i, j));
            }
            value += term;
        }
    }
    Ok(Likelihood {
        value,
        impossible_pair,
    })
}

fn pair_log_prob(fitted: &FitnessVectors, i: usize, j: usize, w: u64) -> f64 {
    let p = fitted.link_prob(i, j);
    if w == 0 {
        return (-p).ln_1p();
    }
    let link = p.ln();
    let ratio = match fitted.y() {
        None => return link,
        Some(y) => y[i] * y[j],
    };
    let extra = if w == 1 {
        0.0
    } else if ratio == 0.0 {
        f64::NEG_INFINITY
    } else {
        (w - 1) as f64 * ratio.ln()
    };
    link + extra + (-ratio).ln_1p()
}
