use serde::Serialize;

use super::Ensemble;
use crate::error::{Error, Result};

/// Pairwise link probabilities of two models fitted on the same graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbComparison {
    /// `(i, j, p_first, p_second)` for every `i < j`, lexicographic.
    pub pairs: Vec<(usize, usize, f64, f64)>,
    pub max_abs_deviation: f64,
    pub rms_deviation: f64,
    /// `None` with fewer than two pairs or a constant column.
    pub pearson: Option<f64>,
}

/// Compares the connection probabilities of two ensembles, typically ECM
/// (`first`) against BCM (`second`).
pub fn compare_probs<A, B>(first: &A, second: &B) -> Result<ProbComparison>
where
    A: Ensemble + ?Sized,
    B: Ensemble + ?Sized,
{
    let n = first.n();
    if second.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: second.n(),
        });
    }
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j, first.link_prob(i, j), second.link_prob(i, j)));
        }
    }
    let count = pairs.len() as f64;
    let (mut max_abs, mut sq) = (0.0f64, 0.0);
    for &(_, _, a, b) in &pairs {
        max_abs = max_abs.max((a - b).abs());
        sq += (a - b) * (a - b);
    }
    let rms = if pairs.is_empty() { 0.0 } else { (sq / count).sqrt() };
    Ok(ProbComparison {
        pearson: pearson(&pairs),
        pairs,
        max_abs_deviation: max_abs,
        rms_deviation: rms,
    })
}

fn pearson(pairs: &[(usize, usize, f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mean_a = pairs.iter().map(|p| p.2).sum::<f64>() / n;
    let mean_b = pairs.iter().map(|p| p.3).sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for &(_, _, a, b) in pairs {
        cov += (a - mean_a) * (b - mean_b);
        va += (a - mean_a) * (a - mean_a);
        vb += (b - mean_b) * (b - mean_b);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}
