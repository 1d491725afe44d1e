//! Structural metrics: degree, clustering coefficient, path lengths, HITS hub
//! scores, bridging centrality, and percentile-threshold role sets.

use rayon::prelude::*;
use std::collections::VecDeque;

use crate::error::{GraphError, Result};
use crate::graph::{Graph, NodeId};

/// Per-node values of one structural metric.
#[derive(Debug, Clone)]
pub struct NodeMetricVector {
    pub metric: &'static str,
    pub values: Vec<f64>,
    /// False when an iterative computation hit max-iter before tolerance.
    pub converged: bool,
}

impl NodeMetricVector {
    fn new(metric: &'static str, values: Vec<f64>) -> Self {
        NodeMetricVector {
            metric,
            values,
            converged: true,
        }
    }
}

/// triangles(v) / C(deg(v), 2); 0 when deg(v) < 2.
pub fn clustering_coefficient(g: &Graph, v: NodeId) -> Result<f64> {
    if v >= g.node_count() {
        return Err(GraphError::UnknownNode(v));
    }
    let nbrs = g.neighbors(v);
    let d = nbrs.len();
    if d < 2 {
        return Ok(0.0);
    }
    let mut tri = 0usize;
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            if g.has_edge(a, b) {
                tri += 1;
            }
        }
    }
    Ok(tri as f64 / (d * (d - 1) / 2) as f64)
}

pub fn clustering_coefficients(g: &Graph) -> Vec<f64> {
    (0..g.node_count())
        .into_par_iter()
        .map(|v| clustering_coefficient(g, v).unwrap())
        .collect()
}

/// BFS distances from one source; usize::MAX for unreachable.
pub fn bfs_distances(g: &Graph, src: NodeId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[src] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(src);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Aggregate shortest-path statistics over reachable ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStats {
    pub average_path_length: f64,
    pub diameter: usize,
    pub reachable_pairs: usize,
}

/// Mean of d(u,v) over connected ordered pairs u != v; unreachable pairs are
/// excluded (reachable-pairs convention). Errors on graphs with < 2 nodes.
pub fn path_stats(g: &Graph) -> Result<PathStats> {
    if g.node_count() < 2 {
        return Err(GraphError::UndefinedMetric(
            "average path length needs at least 2 nodes".into(),
        ));
    }
    let (sum, pairs, diam) = (0..g.node_count())
        .into_par_iter()
        .map(|src| {
            let mut s = 0u64;
            let mut p = 0usize;
            let mut d = 0usize;
            for (v, &dist) in bfs_distances(g, src).iter().enumerate() {
                if v != src && dist != usize::MAX {
                    s += dist as u64;
                    p += 1;
                    d = d.max(dist);
                }
            }
            (s, p, d)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)));
    if pairs == 0 {
        return Err(GraphError::UndefinedMetric(
            "no connected pair in graph".into(),
        ));
    }
    Ok(PathStats {
        average_path_length: sum as f64 / pairs as f64,
        diameter: diam,
        reachable_pairs: pairs,
    })
}

pub fn average_path_length(g: &Graph) -> Result<f64> {
    Ok(path_stats(g)?.average_path_length)
}

/// Per-node mean distance to the nodes reachable from it (0 for isolated
/// nodes); the per-node decomposition of the average path length.
pub fn apl_contributions(g: &Graph) -> Vec<f64> {
    (0..g.node_count())
        .into_par_iter()
        .map(|src| {
            let mut s = 0u64;
            let mut p = 0usize;
            for (v, &dist) in bfs_distances(g, src).iter().enumerate() {
                if v != src && dist != usize::MAX {
                    s += dist as u64;
                    p += 1;
                }
            }
            if p == 0 {
                0.0
            } else {
                s as f64 / p as f64
            }
        })
        .collect()
}

/// HITS power iteration. On an undirected graph hub = authority = principal
/// eigenvector of the adjacency matrix; scores are L2-normalized.
pub fn hits_hub_scores(g: &Graph, tol: f64, max_iter: usize) -> Result<NodeMetricVector> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::UndefinedMetric("HITS on empty graph".into()));
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut converged = false;
    for _ in 0..max_iter {
        let mut y = vec![0.0f64; n];
        for v in 0..n {
            let mut acc = 0.0;
            for &w in g.neighbors(v) {
                acc += x[w];
            }
            // shifted iteration (A + I): same eigenvectors as A, but the
            // sign-flipping mode of bipartite components cannot dominate
            y[v] = acc + x[v];
        }
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        for a in &mut y {
            *a /= norm;
        }
        let delta = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        x = y;
        if delta < tol {
            converged = true;
            break;
        }
    }
    let mut v = NodeMetricVector::new("hub", x);
    v.converged = converged;
    Ok(v)
}

pub const HITS_TOL: f64 = 1e-8;
pub const HITS_MAX_ITER: usize = 200;

/// Brandes betweenness centrality, unweighted undirected, raw unordered-pair
/// counts (a path node a-b-c gives b a score of 1).
pub fn betweenness_centrality(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let per_source: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut delta = vec![0.0f64; n];
            let mut stack: Vec<NodeId> = Vec::new();
            let mut pred: Vec<Vec<NodeId>> = vec![Vec::new(); n];
            let mut sigma = vec![0.0f64; n];
            let mut dist: Vec<i64> = vec![-1; n];
            sigma[s] = 1.0;
            dist[s] = 0;
            let mut queue = VecDeque::new();
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                stack.push(v);
                for &w in g.neighbors(v) {
                    if dist[w] < 0 {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        pred[w].push(v);
                    }
                }
            }
            let mut dep = vec![0.0f64; n];
            while let Some(w) = stack.pop() {
                for &v in &pred[w] {
                    dep[v] += sigma[v] / sigma[w] * (1.0 + dep[w]);
                }
                if w != s {
                    delta[w] += dep[w];
                }
            }
            delta
        })
        .collect();
    let mut out = vec![0.0f64; n];
    for d in per_source {
        for (o, x) in out.iter_mut().zip(d) {
            *o += x;
        }
    }
    // undirected: each unordered pair was counted from both endpoints
    for o in &mut out {
        *o /= 2.0;
    }
    out
}

/// Hwang's bridging coefficient: (1/deg(v)) / sum over neighbors of 1/deg.
pub fn bridging_coefficient(g: &Graph, v: NodeId) -> f64 {
    let d = g.degree(v);
    if d == 0 {
        return 0.0;
    }
    let denom: f64 = g
        .neighbors(v)
        .iter()
        .map(|&w| 1.0 / g.degree(w) as f64)
        .sum();
    if denom == 0.0 {
        0.0
    } else {
        (1.0 / d as f64) / denom
    }
}

/// Bridging centrality: normalized betweenness times bridging coefficient.
pub fn bridging_centrality(g: &Graph) -> NodeMetricVector {
    let n = g.node_count();
    let bet = betweenness_centrality(g);
    let max_pairs = if n >= 3 {
        (n - 1) as f64 * (n - 2) as f64 / 2.0
    } else {
        1.0
    };
    let values = (0..n)
        .map(|v| (bet[v] / max_pairs) * bridging_coefficient(g, v))
        .collect();
    NodeMetricVector::new("bridge", values)
}

/// Top-percentile hub/bridge sets with their thresholds.
#[derive(Debug, Clone)]
pub struct StructuralRoleSets {
    pub hubs: Vec<NodeId>,
    pub bridges: Vec<NodeId>,
    pub hub_threshold: f64,
    pub bridge_threshold: f64,
}

impl StructuralRoleSets {
    pub fn is_role(&self, v: NodeId) -> bool {
        self.hubs.binary_search(&v).is_ok() || self.bridges.binary_search(&v).is_ok()
    }
}

fn percentile_cut(values: &[f64], pct: f64) -> Result<(Vec<NodeId>, f64)> {
    if !(pct > 0.0 && pct < 100.0) {
        return Err(GraphError::Config(format!(
            "percentile {pct} outside (0, 100)"
        )));
    }
    let n = values.len();
    if n == 0 {
        return Ok((Vec::new(), f64::INFINITY));
    }
    let m = ((n as f64 * pct / 100.0).round() as usize).clamp(1, n);
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let threshold = sorted[n - m];
    let members = (0..n).filter(|&v| values[v] >= threshold).collect();
    Ok((members, threshold))
}

/// Threshold each score vector at its top-`pct` percentile; ties at the
/// threshold are included.
pub fn role_sets(
    hub_scores: &[f64],
    bridge_scores: &[f64],
    hub_pct: f64,
    bridge_pct: f64,
) -> Result<StructuralRoleSets> {
    let (hubs, hub_threshold) = percentile_cut(hub_scores, hub_pct)?;
    let (bridges, bridge_threshold) = percentile_cut(bridge_scores, bridge_pct)?;
    Ok(StructuralRoleSets {
        hubs,
        bridges,
        hub_threshold,
        bridge_threshold,
    })
}

pub const DEFAULT_HUB_PCT: f64 = 12.0;
pub const DEFAULT_BRIDGE_PCT: f64 = 10.0;

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)])
    }

    #[test]
    fn cc_triangle_and_star() {
        assert_eq!(clustering_coefficient(&triangle(), 0).unwrap(), 1.0);
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(clustering_coefficient(&star, 0).unwrap(), 0.0);
    }

    #[test]
    fn apl_triangle_and_path() {
        assert_eq!(average_path_length(&triangle()).unwrap(), 1.0);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        assert!((average_path_length(&path).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn apl_undefined_below_two_nodes() {
        let g = Graph::from_edges(1, &[]);
        assert!(average_path_length(&g).is_err());
    }

    #[test]
    fn apl_disjoint_union_is_pair_weighted_mean() {
        // triangle (6 ordered pairs at 1.0) + path of 3 (6 pairs, apl 4/3)
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)]);
        let expect = (6.0 * 1.0 + 6.0 * (4.0 / 3.0)) / 12.0;
        assert!((average_path_length(&g).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn hits_star_center_max() {
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let h = hits_hub_scores(&star, HITS_TOL, HITS_MAX_ITER).unwrap();
        assert!(h.converged);
        // principal eigenvector of K1,4: center 1/sqrt(2), leaves 1/(2*sqrt(2))
        assert!((h.values[0] - 1.0 / 2f64.sqrt()).abs() < 1e-6);
        for leaf in 1..5 {
            assert!((h.values[leaf] - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-6);
            assert!(h.values[0] > h.values[leaf]);
        }
    }

    #[test]
    fn hits_symmetric_graphs_uniform() {
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let h = hits_hub_scores(&c5, HITS_TOL, HITS_MAX_ITER).unwrap();
        for w in h.values.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-9);
        }
        let two_edges = Graph::from_edges(4, &[(0, 1), (2, 3)]);
        let h = hits_hub_scores(&two_edges, HITS_TOL, HITS_MAX_ITER).unwrap();
        for w in h.values.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn betweenness_path_and_cycle() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let b = betweenness_centrality(&path);
        assert!((b[1] - 1.0).abs() < 1e-12);
        assert!(b[0].abs() < 1e-12 && b[2].abs() < 1e-12);

        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let b = betweenness_centrality(&c4);
        for w in b.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn barbell_midpoint_maximizes_bridging() {
        // two triangles joined through node 6
        let g = Graph::from_edges(
            7,
            &[
                (0, 1),
                (1, 2),
                (2, 0),
                (3, 4),
                (4, 5),
                (5, 3),
                (2, 6),
                (6, 3),
            ],
        );
        let bc = bridging_centrality(&g);
        let max_at = bc
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(max_at, 6);
    }

    #[test]
    fn role_sets_distinct_scores() {
        let scores: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = role_sets(&scores, &scores, 12.0, 10.0).unwrap();
        assert_eq!(r.hubs.len(), 12);
        assert_eq!(r.bridges.len(), 10);
    }

    #[test]
    fn role_sets_all_ties_include_everyone() {
        let scores = vec![3.5; 40];
        let r = role_sets(&scores, &scores, 12.0, 10.0).unwrap();
        assert_eq!(r.hubs.len(), 40);
        assert_eq!(r.bridges.len(), 40);
    }

    #[test]
    fn role_sets_scale_invariant() {
        let scores: Vec<f64> = (0..37).map(|i| ((i * 7919) % 97) as f64).collect();
        let scaled: Vec<f64> = scores.iter().map(|s| s * 17.25).collect();
        let a = role_sets(&scores, &scores, 12.0, 10.0).unwrap();
        let b = role_sets(&scaled, &scaled, 12.0, 10.0).unwrap();
        assert_eq!(a.hubs, b.hubs);
        assert_eq!(a.bridges, b.bridges);
    }

    #[test]
    fn role_sets_percentile_validation() {
        let scores = vec![1.0, 2.0];
        assert!(role_sets(&scores, &scores, 0.0, 10.0).is_err());
        assert!(role_sets(&scores, &scores, 12.0, 100.0).is_err());
    }

    #[test]
    fn neighborhood_degree_split_counts_each_edge_once_per_endpoint() {
        let g = Graph::from_edges(
            8,
            &[
                (0, 1),
                (0, 2),
                (1, 2),
                (1, 3),
                (2, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (3, 7),
            ],
        );
        for v in 0..g.node_count() {
            let nb = g.neighborhood(v).unwrap();
            for (idx, &m) in nb.members.iter().enumerate() {
                assert_eq!(nb.internal_degree(m) + nb.external_degree[idx], g.degree(m));
            }
        }
    }
}
