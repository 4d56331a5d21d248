//! Weighted undirected graphs, ingestion-side symmetrization and the local
//! constraints (degrees and strengths) every ensemble is fitted to.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Symmetric graph with strictly positive integer weights and no self-links.
///
/// Each node keeps its neighbors sorted by index, so lookups are a binary
/// search and iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    adjacency: Vec<Vec<(usize, u64)>>,
}

impl WeightedGraph {
    /// Graph with the given labels and no links.
    pub fn empty(labels: Vec<String>) -> Self {
        let adjacency = vec![Vec::new(); labels.len()];
        Self { labels, adjacency }
    }

    /// Builds a graph from unordered weighted pairs.
    ///
    /// Zero weights are treated as absent links. Each unordered pair may
    /// appear at most once, in either orientation.
    pub fn from_weights<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let n = labels.len();
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for (i, j, w) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop {
                    node: labels[i].clone(),
                });
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::DuplicateEdge {
                    from: labels[i].clone(),
                    to: labels[j].clone(),
                });
            }
            if w == 0 {
                continue;
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for row in &mut adjacency {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        Ok(Self { labels, adjacency })
    }

    /// Same as [`WeightedGraph::from_weights`] with labels `"0"`, `"1"`, ...
    pub fn unlabeled<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        Self::from_weights(index_labels(n), edges)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Neighbors of `i` with their weights, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, u64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.adjacency[i].len() as u64
    }

    pub fn strength(&self, i: usize) -> u64 {
        self.adjacency[i].iter().map(|&(_, w)| w).sum()
    }

    /// Weight of the pair `(i, j)`; zero when no link exists.
    pub fn weight(&self, i: usize, j: usize) -> u64 {
        let row = &self.adjacency[i];
        match row.binary_search_by_key(&j, |&(k, _)| k) {
            Ok(pos) => row[pos].1,
            Err(_) => 0,
        }
    }

    pub fn is_linked(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) > 0
    }

    /// Links as `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    pub fn link_count(&self) -> u64 {
        self.adjacency.iter().map(|row| row.len() as u64).sum::<u64>() / 2
    }

    /// Relabels node `i` as node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let mut labels = vec![String::new(); n];
        for (i, &target) in perm.iter().enumerate() {
            if target >= n {
                return Err(Error::NodeOutOfRange { node: target, n });
            }
            labels[target] = self.labels[i].clone();
        }
        let edges: Vec<_> = self.edges().map(|(i, j, w)| (perm[i], perm[j], w)).collect();
        Self::from_weights(labels, edges)
    }

    /// Links keyed by label, independent of node index order.
    pub fn labeled_edges(&self) -> BTreeSet<(String, String, u64)> {
        self.edges()
            .map(|(i, j, w)| {
                let (a, b) = (self.labels[i].clone(), self.labels[j].clone());
                if a <= b {
                    (a, b, w)
                } else {
                    (b, a, w)
                }
            })
            .collect()
    }
}

pub(crate) fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// One directed trade flow as read from an edge file.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedFlow {
    pub source: String,
    pub target: String,
    pub volume: f64,
}

impl DirectedFlow {
    pub fn new(source: impl Into<String>, target: impl Into<String>, volume: f64) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            volume,
        }
    }
}

/// Combines directed flows into an undirected integer-weight graph.
///
/// The undirected volume of a pair is `vol_ij + vol_ji`, multiplied by
/// `scale` and rounded half away from zero. A positive raw sum that rounds to
/// zero is clamped to 1 so the link survives; a raw sum of exactly zero is a
/// missing link. Nodes are indexed in order of first appearance in `flows`,
/// followed by any `extra_nodes` not already seen (isolated nodes).
pub fn symmetrize(
    flows: &[DirectedFlow],
    scale: f64,
    extra_nodes: &[String],
) -> Result<WeightedGraph> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidScale(scale));
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut intern = |label: &str, labels: &mut Vec<String>| -> usize {
        *index.entry(label.to_owned()).or_insert_with(|| {
            labels.push(label.to_owned());
            labels.len() - 1
        })
    };

    let mut directed = BTreeSet::new();
    let mut volumes: HashMap<(usize, usize), f64> = HashMap::new();
    for flow in flows {
        let (s, t) = (
            intern(flow.source.as_str(), &mut labels),
            intern(flow.target.as_str(), &mut labels),
        );
        if s == t {
            return Err(Error::SelfLoop {
                node: flow.source.clone(),
            });
        }
        if !(flow.volume.is_finite() && flow.volume >= 0.0) {
            return Err(Error::InvalidVolume {
                from: flow.source.clone(),
                to: flow.target.clone(),
                volume: flow.volume,
            });
        }
        if !directed.insert((s, t)) {
            return Err(Error::DuplicateEdge {
                from: flow.source.clone(),
                to: flow.target.clone(),
            });
        }
        *volumes.entry((s.min(t), s.max(t))).or_insert(0.0) += flow.volume;
    }
    for label in extra_nodes {
        intern(label.as_str(), &mut labels);
    }

    let mut pairs: Vec<_> = volumes.into_iter().collect();
    pairs.sort_unstable_by_key(|&(pair, _)| pair);
    let mut edges = Vec::with_capacity(pairs.len());
    for ((i, j), raw) in pairs {
        let weight = quantize(raw * scale).ok_or_else(|| Error::InvalidVolume {
            from: labels[i].clone(),
            to: labels[j].clone(),
            volume: raw,
        })?;
        if weight > 0 {
            edges.push((i, j, weight));
        }
    }
    WeightedGraph::from_weights(labels, edges)
}

/// Rounds a scaled nonnegative volume to an integer weight, keeping positive
/// volumes at weight 1 or more. `None` when the value does not fit in `u64`.
fn quantize(scaled: f64) -> Option<u64> {
    if !scaled.is_finite() || scaled < 0.0 || scaled >= u64::MAX as f64 {
        return None;
    }
    if scaled == 0.0 {
        return Some(0);
    }
    Some((scaled.round() as u64).max(1))
}

/// Degree and strength sequences, with total link count `L` and total
/// strength `T`.
///
/// Invariants: `s_i >= k_i`, `s_i == 0` iff `k_i == 0`, `sum k = 2L` and
/// `sum s = 2T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    degrees: Vec<u64>,
    strengths: Vec<u64>,
    links: u64,
    total_strength: u64,
}

impl ConstraintSet {
    /// Validates a degree and strength sequence.
    pub fn new(degrees: Vec<u64>, strengths: Vec<u64>) -> Result<Self> {
        let n = degrees.len();
        if strengths.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: strengths.len(),
            });
        }
        for (i, (&k, &s)) in degrees.iter().zip(&strengths).enumerate() {
            if n > 0 && k > n as u64 - 1 {
                return Err(Error::Infeasible {
                    node: i,
                    reason: format!("degree {k} exceeds N-1 = {}", n - 1),
                });
            }
            if s < k {
                return Err(Error::Infeasible {
                    node: i,
                    reason: format!("strength {s} below degree {k}"),
                });
            }
            if (s == 0) != (k == 0) {
                return Err(Error::Infeasible {
                    node: i,
                    reason: format!("strength {s} and degree {k} must vanish together"),
                });
            }
        }
        let degree_sum: u64 = degrees.iter().sum();
        let strength_sum: u64 = strengths.iter().sum();
        if !degree_sum.is_multiple_of(2) || !strength_sum.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "degree sum {degree_sum} and strength sum {strength_sum} must both be even"
            )));
        }
        Ok(Self {
            degrees,
            strengths,
            links: degree_sum / 2,
            total_strength: strength_sum / 2,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn strengths(&self) -> &[u64] {
        &self.strengths
    }

    /// Total number of links `L`.
    pub fn links(&self) -> u64 {
        self.links
    }

    /// Total strength `T`, the sum of weights over unordered pairs.
    pub fn total_strength(&self) -> u64 {
        self.total_strength
    }

    /// Indices of nodes with at least one link.
    pub fn active_nodes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.degrees[i] > 0).collect()
    }
}

/// Degrees, strengths, `L` and `T` of a graph.
pub fn constraints(graph: &WeightedGraph) -> ConstraintSet {
    let degrees: Vec<u64> = (0..graph.n()).map(|i| graph.degree(i)).collect();
    let strengths: Vec<u64> = (0..graph.n()).map(|i| graph.strength(i)).collect();
    let links = degrees.iter().sum::<u64>() / 2;
    let total_strength = strengths.iter().sum::<u64>() / 2;
    ConstraintSet {
        degrees,
        strengths,
        links,
        total_strength,
    }
}

/// Per-node GDP shares `g_i = GDP_i / sum GDP`, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GdpVector(Vec<f64>);

impl GdpVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Sum of squared shares, `sum g_i^2`.
    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum()
    }
}

/// Normalizes raw GDP values to shares summing to one.
pub fn rescale_gdp(raw: &[f64]) -> Result<GdpVector> {
    rescale_gdp_labeled(raw, None)
}

/// Like [`rescale_gdp`], naming nodes by label in errors.
pub fn rescale_gdp_labeled(raw: &[f64], labels: Option<&[String]>) -> Result<GdpVector> {
    for (i, &value) in raw.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            let node = labels
                .and_then(|l| l.get(i).cloned())
                .unwrap_or_else(|| i.to_string());
            return Err(Error::InvalidGdp { node, value });
        }
    }
    if raw.is_empty() {
        return Err(Error::InsufficientData("empty GDP vector".into()));
    }
    let total: f64 = raw.iter().sum();
    if !total.is_finite() {
        return Err(Error::Domain("GDP total overflows".into()));
    }
    Ok(GdpVector(raw.iter().map(|&v| v / total).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flows(list: &[(&str, &str, f64)]) -> Vec<DirectedFlow> {
        list.iter()
            .map(|&(s, t, v)| DirectedFlow::new(s, t, v))
            .collect()
    }

    #[test]
    fn symmetrize_sums_both_directions() {
        let g = symmetrize(&flows(&[("A", "B", 3.0), ("B", "A", 2.0)]), 1.0, &[]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.weight(0, 1), 5);
        assert_eq!(g.weight(1, 0), 5);
    }

    #[test]
    fn zero_volume_is_missing_link() {
        let g = symmetrize(&flows(&[("A", "B", 0.0)]), 1.0, &[]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(constraints(&g).links(), 0);
    }

    #[test]
    fn small_positive_volume_clamps_to_one() {
        // 0.4 + 0.3 = 0.7 rounds to 1; 0.2 would round to 0 and is clamped.
        let g = symmetrize(&flows(&[("A", "B", 0.4), ("B", "A", 0.3)]), 1.0, &[]).unwrap();
        assert_eq!(g.weight(0, 1), 1);
        let g = symmetrize(&flows(&[("A", "B", 0.2)]), 1.0, &[]).unwrap();
        assert_eq!(g.weight(0, 1), 1);
        let g = symmetrize(&flows(&[("A", "B", 2.5)]), 1.0, &[]).unwrap();
        assert_eq!(g.weight(0, 1), 3);
    }

    #[test]
    fn scale_applies_before_rounding() {
        let g = symmetrize(&flows(&[("A", "B", 1234.0)]), 0.01, &[]).unwrap();
        assert_eq!(g.weight(0, 1), 12);
    }

    #[test]
    fn duplicate_and_self_loop_rejected() {
        let err = symmetrize(&flows(&[("A", "B", 1.0), ("A", "B", 2.0)]), 1.0, &[]);
        assert!(matches!(err, Err(Error::DuplicateEdge { .. })));
        let err = symmetrize(&flows(&[("A", "A", 1.0)]), 1.0, &[]);
        assert!(matches!(err, Err(Error::SelfLoop { .. })));
        let err = symmetrize(&flows(&[("A", "B", -1.0)]), 1.0, &[]);
        assert!(matches!(err, Err(Error::InvalidVolume { .. })));
        let err = symmetrize(&flows(&[("A", "B", f64::NAN)]), 1.0, &[]);
        assert!(matches!(err, Err(Error::InvalidVolume { .. })));
        assert!(matches!(
            symmetrize(&[], 0.0, &[]),
            Err(Error::InvalidScale(_))
        ));
    }

    #[test]
    fn node_order_is_first_appearance_then_extras() {
        let extras = vec!["Z".to_string(), "B".to_string()];
        let g = symmetrize(&flows(&[("C", "B", 1.0), ("A", "C", 1.0)]), 1.0, &extras).unwrap();
        assert_eq!(g.labels(), &["C", "B", "A", "Z"]);
        assert_eq!(g.degree(3), 0);
    }

    #[test]
    fn constraints_of_triangle() {
        let g = WeightedGraph::unlabeled(3, [(0, 1, 1), (1, 2, 3), (0, 2, 2)]).unwrap();
        let c = constraints(&g);
        assert_eq!(c.degrees(), &[2, 2, 2]);
        assert_eq!(c.strengths(), &[3, 4, 5]);
        assert_eq!(c.links(), 3);
        assert_eq!(c.total_strength(), 6);
    }

    #[test]
    fn constraints_of_empty_and_star() {
        let c = constraints(&WeightedGraph::empty(index_labels(3)));
        assert_eq!(c.degrees(), &[0, 0, 0]);
        assert_eq!(c.strengths(), &[0, 0, 0]);
        assert_eq!((c.links(), c.total_strength()), (0, 0));

        let g = WeightedGraph::unlabeled(4, [(0, 1, 5), (0, 2, 1), (0, 3, 1)]).unwrap();
        let c = constraints(&g);
        assert_eq!(c.degrees(), &[3, 1, 1, 1]);
        assert_eq!(c.strengths(), &[7, 5, 1, 1]);
    }

    #[test]
    fn constraint_set_validation() {
        assert!(ConstraintSet::new(vec![1, 1], vec![2, 2]).is_ok());
        assert!(matches!(
            ConstraintSet::new(vec![1, 1], vec![1, 0]),
            Err(Error::Infeasible { node: 1, .. })
        ));
        assert!(matches!(
            ConstraintSet::new(vec![2, 1], vec![1, 1]),
            Err(Error::Infeasible { .. })
        ));
        assert!(ConstraintSet::new(vec![1, 0], vec![1, 0]).is_err());
    }

    #[test]
    fn gdp_rescaling() {
        assert_eq!(rescale_gdp(&[2.0, 2.0, 4.0]).unwrap().values(), &[0.25, 0.25, 0.5]);
        assert_eq!(rescale_gdp(&[1.0]).unwrap().values(), &[1.0]);
        let g = rescale_gdp(&[1e12, 1e9]).unwrap();
        // exact: 1000/1001 and 1/1001
        assert!((g.get(0) - 1000.0 / 1001.0).abs() < 1e-15);
        assert!((g.get(1) - 1.0 / 1001.0).abs() < 1e-15);
        assert!((g.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gdp_errors_identify_node() {
        let labels = vec!["A".to_string(), "B".to_string()];
        match rescale_gdp_labeled(&[1.0, 0.0], Some(&labels)) {
            Err(Error::InvalidGdp { node, .. }) => assert_eq!(node, "B"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(rescale_gdp(&[f64::INFINITY]).is_err());
        assert!(rescale_gdp(&[-1.0]).is_err());
    }

    #[test]
    fn permutation_moves_weights() {
        let g = WeightedGraph::unlabeled(3, [(0, 1, 4), (1, 2, 2)]).unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.weight(2, 0), 4);
        assert_eq!(p.weight(0, 1), 2);
        assert_eq!(p.labeled_edges(), g.labeled_edges());
    }
}
