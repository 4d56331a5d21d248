//! Observed higher-order properties of a single weighted graph: average
//! nearest-neighbor degree and strength, binary and weighted clustering.
//!
//! Triple sums run over neighbor lists, `O(sum_i k_i^2 log k)`. A metric is
//! `None` when its denominator vanishes: ANND/ANNS need `k_i >= 1`, the two
//! clustering coefficients need `k_i >= 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Per-node record of local constraints and higher-order metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeProperties {
    pub k: u64,
    pub s: u64,
    pub annd: Option<f64>,
    pub clustering: Option<f64>,
    pub anns: Option<f64>,
    pub wclustering: Option<f64>,
}

/// Metrics for every node of a graph, in node index order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePropertyTable {
    pub labels: Vec<String>,
    pub rows: Vec<NodeProperties>,
}

fn check_node(g: &WeightedGraph, i: usize) -> Result<()> {
    if i >= g.n() {
        return Err(Error::NodeOutOfRange { node: i, n: g.n() });
    }
    Ok(())
}

/// `sum_j a_ij k_j / k_i`.
pub fn observed_annd(g: &WeightedGraph, i: usize) -> Result<Option<f64>> {
    check_node(g, i)?;
    let k = g.degree(i);
    if k == 0 {
        return Ok(None);
    }
    let total: u64 = g.neighbors(i).iter().map(|&(j, _)| g.degree(j)).sum();
    Ok(Some(total as f64 / k as f64))
}

/// `sum_j a_ij s_j / k_i`.
pub fn observed_anns(g: &WeightedGraph, i: usize) -> Result<Option<f64>> {
    check_node(g, i)?;
    let k = g.degree(i);
    if k == 0 {
        return Ok(None);
    }
    let total: u64 = g.neighbors(i).iter().map(|&(j, _)| g.strength(j)).sum();
    Ok(Some(total as f64 / k as f64))
}

/// Fraction of neighbor pairs of `i` that are themselves linked.
pub fn observed_clustering(g: &WeightedGraph, i: usize) -> Result<Option<f64>> {
    check_node(g, i)?;
    let k = g.degree(i);
    if k < 2 {
        return Ok(None);
    }
    let neighbors = g.neighbors(i);
    let mut closed = 0u64;
    for &(j, _) in neighbors {
        for &(l, _) in neighbors {
            if l != j && g.is_linked(j, l) {
                closed += 1;
            }
        }
    }
    Ok(Some(closed as f64 / (k * (k - 1)) as f64))
}

/// `sum_{j,l} (w_ij w_jl w_li)^{1/3} / sum_{j,l} a_ij a_il` over distinct
/// neighbors `j != l`.
pub fn observed_wclustering(g: &WeightedGraph, i: usize) -> Result<Option<f64>> {
    check_node(g, i)?;
    let k = g.degree(i);
    if k < 2 {
        return Ok(None);
    }
    let neighbors = g.neighbors(i);
    let mut total = 0.0;
    for &(j, w_ij) in neighbors {
        for &(l, w_il) in neighbors {
            if l == j {
                continue;
            }
            let w_jl = g.weight(j, l);
            if w_jl > 0 {
                total += (w_ij as f64 * w_jl as f64 * w_il as f64).cbrt();
            }
        }
    }
    Ok(Some(total / (k * (k - 1)) as f64))
}

/// All four metrics for every node.
pub fn property_table(g: &WeightedGraph) -> NodePropertyTable {
    let rows = (0..g.n())
        .map(|i| NodeProperties {
            k: g.degree(i),
            s: g.strength(i),
            // indices are in range by construction
            annd: observed_annd(g, i).unwrap(),
            clustering: observed_clustering(g, i).unwrap(),
            anns: observed_anns(g, i).unwrap(),
            wclustering: observed_wclustering(g, i).unwrap(),
        })
        .collect();
    NodePropertyTable {
        labels: g.labels().to_vec(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(w: [u64; 3]) -> WeightedGraph {
        WeightedGraph::unlabeled(3, [(0, 1, w[0]), (1, 2, w[1]), (0, 2, w[2])]).unwrap()
    }

    fn star(n_leaves: usize) -> WeightedGraph {
        WeightedGraph::unlabeled(n_leaves + 1, (1..=n_leaves).map(|j| (0, j, 1))).unwrap()
    }

    #[test]
    fn annd_examples() {
        let t = triangle([1, 1, 1]);
        for i in 0..3 {
            assert_eq!(observed_annd(&t, i).unwrap(), Some(2.0));
        }
        let s = star(3);
        assert_eq!(observed_annd(&s, 0).unwrap(), Some(1.0));
        assert_eq!(observed_annd(&s, 1).unwrap(), Some(3.0));
        let path = WeightedGraph::unlabeled(3, [(0, 1, 1), (1, 2, 1)]).unwrap();
        assert_eq!(observed_annd(&path, 0).unwrap(), Some(2.0));
        assert_eq!(observed_annd(&path, 1).unwrap(), Some(1.0));
    }

    #[test]
    fn clustering_examples() {
        let t = triangle([1, 1, 1]);
        assert_eq!(observed_clustering(&t, 0).unwrap(), Some(1.0));
        assert_eq!(observed_clustering(&star(3), 0).unwrap(), Some(0.0));
        assert_eq!(observed_clustering(&star(3), 1).unwrap(), None);
        let cycle =
            WeightedGraph::unlabeled(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
        for i in 0..4 {
            assert_eq!(observed_clustering(&cycle, i).unwrap(), Some(0.0));
        }
    }

    #[test]
    fn anns_examples() {
        let t = triangle([1, 2, 3]);
        // node 0 has s = 1 + 3 = 4; the node with s = 3 is node 1 (1 + 2)
        assert_eq!(g_strengths(&t), vec![4, 3, 5]);
        assert_eq!(observed_anns(&t, 1).unwrap(), Some(4.5));
        let single = WeightedGraph::unlabeled(2, [(0, 1, 7)]).unwrap();
        assert_eq!(observed_anns(&single, 0).unwrap(), Some(7.0));
        assert_eq!(observed_anns(&single, 1).unwrap(), Some(7.0));
        let isolated = WeightedGraph::unlabeled(3, [(0, 1, 7)]).unwrap();
        assert_eq!(observed_anns(&isolated, 2).unwrap(), None);
    }

    fn g_strengths(g: &WeightedGraph) -> Vec<u64> {
        (0..g.n()).map(|i| g.strength(i)).collect()
    }

    #[test]
    fn wclustering_examples() {
        assert_eq!(observed_wclustering(&triangle([1, 1, 1]), 0).unwrap(), Some(1.0));
        let t = triangle([1, 8, 27]);
        for i in 0..3 {
            let c = observed_wclustering(&t, i).unwrap().unwrap();
            assert!((c - 6.0).abs() < 1e-12, "node {i}: {c}");
        }
        assert_eq!(observed_wclustering(&star(3), 0).unwrap(), Some(0.0));
    }

    #[test]
    fn out_of_range_node() {
        let t = triangle([1, 1, 1]);
        assert!(matches!(
            observed_annd(&t, 3),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        ));
        assert!(observed_clustering(&t, 9).is_err());
        assert!(observed_anns(&t, 9).is_err());
        assert!(observed_wclustering(&t, 9).is_err());
    }

    #[test]
    fn table_of_triangle_and_empty() {
        let table = property_table(&triangle([1, 1, 1]));
        assert!(table.rows.iter().all(|r| r.clustering == Some(1.0)));
        let empty = property_table(&WeightedGraph::unlabeled(3, []).unwrap());
        for row in &empty.rows {
            assert_eq!(
                (row.annd, row.clustering, row.anns, row.wclustering),
                (None, None, None, None)
            );
        }
    }
}
