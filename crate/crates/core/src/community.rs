//! Louvain community detection with a resolution parameter, and the
//! minimum-community-size guarantee the restricted methods depend on.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GraphError, Result};
use crate::graph::Graph;

/// A total, exclusive assignment of nodes to communities.
#[derive(Debug, Clone)]
pub struct CommunityPartition {
    /// node id -> community id, dense in 0..community_count
    pub assignment: Vec<usize>,
    pub community_count: usize,
    pub resolution: f64,
    /// Size of the smallest community.
    pub min_size: usize,
}

impl CommunityPartition {
    fn from_assignment(mut assignment: Vec<usize>, resolution: f64) -> CommunityPartition {
        // renumber densely, in first-appearance order
        let mut remap: Vec<isize> = vec![-1; assignment.len() + 1];
        let mut next = 0usize;
        for a in &mut assignment {
            if remap[*a] < 0 {
                remap[*a] = next as isize;
                next += 1;
            }
            *a = remap[*a] as usize;
        }
        let mut sizes = vec![0usize; next];
        for &a in &assignment {
            sizes[a] += 1;
        }
        CommunityPartition {
            assignment,
            community_count: next,
            resolution,
            min_size: sizes.iter().copied().min().unwrap_or(0),
        }
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&v| self.assignment[v] == c)
            .collect()
    }
}

// Weighted aggregate graph used between Louvain levels.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
    total_weight: f64, // m
}

impl LevelGraph {
    fn from_graph(g: &Graph) -> LevelGraph {
        let n = g.node_count();
        let adj: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|v| g.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
            .collect();
        let degree: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
        LevelGraph {
            adj,
            self_loop: vec![0.0; n],
            total_weight: g.edge_count() as f64,
            degree,
        }
    }

    fn node_count(&self) -> usize {
        self.adj.len()
    }
}

/// One pass of local moves followed by aggregation, repeated until no gain.
/// Higher `resolution` yields larger communities (resolution 1.0 is plain
/// modularity); deterministic for a given seed.
pub fn louvain(g: &Graph, resolution: f64, seed: u64) -> Result<CommunityPartition> {
    if resolution <= 0.0 {
        return Err(GraphError::Config(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let gamma = 1.0 / resolution;
    let n = g.node_count();
    if n == 0 {
        return Ok(CommunityPartition::from_assignment(Vec::new(), resolution));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = LevelGraph::from_graph(g);
    // assignment of original nodes through all levels
    let mut node_comm: Vec<usize> = (0..n).collect();

    loop {
        let ln = level.node_count();
        let m = level.total_weight;
        if m == 0.0 {
            break;
        }
        let mut comm: Vec<usize> = (0..ln).collect();
        let mut tot: Vec<f64> = level.degree.clone();
        let mut order: Vec<usize> = (0..ln).collect();
        order.shuffle(&mut rng);

        let mut improved_level = false;
        loop {
            let mut moved = false;
            for &v in &order {
                let kv = level.degree[v];
                let cv = comm[v];
                // weights from v to each adjacent community
                let mut link: Vec<(usize, f64)> = Vec::new();
                for &(w, wt) in &level.adj[v] {
                    let c = comm[w];
                    match link.iter_mut().find(|(lc, _)| *lc == c) {
                        Some((_, acc)) => *acc += wt,
                        None => link.push((c, wt)),
                    }
                }
                link.sort_unstable_by_key(|&(c, _)| c);
                let w_own = link
                    .iter()
                    .find(|&&(c, _)| c == cv)
                    .map(|&(_, w)| w)
                    .unwrap_or(0.0);
                // remove v from its community
                tot[cv] -= kv;
                let base = w_own - gamma * tot[cv] * kv / (2.0 * m);
                let mut best_c = cv;
                let mut best_gain = base;
                for &(c, w_c) in &link {
                    if c == cv {
                        continue;
                    }
                    let gain = w_c - gamma * tot[c] * kv / (2.0 * m);
                    if gain > best_gain + 1e-12 {
                        best_gain = gain;
                        best_c = c;
                    }
                }
                tot[best_c] += kv;
                if best_c != cv {
                    comm[v] = best_c;
                    moved = true;
                    improved_level = true;
                }
            }
            if !moved {
                break;
            }
        }

        if !improved_level {
            break;
        }

        // renumber communities densely
        let mut remap: Vec<isize> = vec![-1; ln];
        let mut next = 0usize;
        for &c in &comm {
            if remap[c] < 0 {
                remap[c] = next as isize;
                next += 1;
            }
        }
        let comm: Vec<usize> = comm.iter().map(|&c| remap[c] as usize).collect();
        for nc in &mut node_comm {
            *nc = comm[*nc];
        }
        if next == ln {
            break; // nothing aggregated
        }

        // aggregate
        let mut new_adj: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![std::collections::BTreeMap::new(); next];
        let mut new_self = vec![0.0f64; next];
        for v in 0..ln {
            let cv = comm[v];
            new_self[cv] += level.self_loop[v];
            for &(w, wt) in &level.adj[v] {
                let cw = comm[w];
                if cw == cv {
                    if v < w {
                        new_self[cv] += wt;
                    }
                } else {
                    *new_adj[cv].entry(cw).or_insert(0.0) += wt;
                }
            }
        }
        let degree: Vec<f64> = (0..next)
            .map(|c| new_adj[c].values().sum::<f64>() + 2.0 * new_self[c])
            .collect();
        level = LevelGraph {
            adj: new_adj
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect(),
            total_weight: level.total_weight,
            self_loop: new_self,
            degree,
        };
    }

    Ok(CommunityPartition::from_assignment(node_comm, resolution))
}

/// Resolution-scaled modularity of a partition of `g` (unit edge weights).
pub fn modularity(g: &Graph, assignment: &[usize], resolution: f64) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let gamma = 1.0 / resolution;
    let nc = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut inside = vec![0.0f64; nc];
    let mut tot = vec![0.0f64; nc];
    for (u, v) in g.edges() {
        if assignment[u] == assignment[v] {
            inside[assignment[u]] += 1.0;
        }
    }
    for v in 0..g.node_count() {
        tot[assignment[v]] += g.degree(v) as f64;
    }
    (0..nc)
        .map(|c| inside[c] / m - gamma * (tot[c] / (2.0 * m)).powi(2))
        .sum()
}

/// Raise the Louvain resolution geometrically (x1.5 per step, 20-step cap)
/// until every community holds at least `k` nodes for which `eligible` is
/// true; if the cap is hit, merge each undersized community into its
/// most-connected neighbor community.
pub fn partition_with_min_size(
    g: &Graph,
    k: usize,
    eligible: &[bool],
    seed: u64,
) -> Result<CommunityPartition> {
    if k < 2 {
        return Err(GraphError::Config(format!("k must be >= 2, got {k}")));
    }
    if g.node_count() < k {
        return Err(GraphError::Infeasible(format!(
            "graph has {} nodes, need at least k={k}",
            g.node_count()
        )));
    }
    let total_eligible = eligible.iter().filter(|&&e| e).count();
    if total_eligible < k {
        return Err(GraphError::Infeasible(format!(
            "only {total_eligible} eligible nodes, need at least k={k}"
        )));
    }

    let eligible_count = |p: &CommunityPartition| -> Vec<usize> {
        let mut counts = vec![0usize; p.community_count];
        for (v, &c) in p.assignment.iter().enumerate() {
            if eligible[v] {
                counts[c] += 1;
            }
        }
        counts
    };

    let mut resolution = 1.0;
    let mut last = louvain(g, resolution, seed)?;
    for _ in 0..20 {
        if eligible_count(&last).iter().all(|&c| c >= k) {
            return Ok(last);
        }
        resolution *= 1.5;
        last = louvain(g, resolution, seed)?;
    }
    if eligible_count(&last).iter().all(|&c| c >= k) {
        return Ok(last);
    }

    // fallback: merge undersized communities into their most-connected
    // neighbor community (ties / no connection: most eligible, then lowest id)
    let mut assignment = last.assignment.clone();
    loop {
        let nc = assignment.iter().copied().max().unwrap() + 1;
        let mut counts = vec![0usize; nc];
        let mut alive = vec![false; nc];
        for (v, &c) in assignment.iter().enumerate() {
            alive[c] = true;
            if eligible[v] {
                counts[c] += 1;
            }
        }
        let undersized = (0..nc).find(|&c| alive[c] && counts[c] < k);
        let Some(c) = undersized else { break };
        let mut conn = vec![0usize; nc];
        for (u, v) in g.edges() {
            let (cu, cv) = (assignment[u], assignment[v]);
            if cu == c && cv != c {
                conn[cv] += 1;
            } else if cv == c && cu != c {
                conn[cu] += 1;
            }
        }
        let target = (0..nc)
            .filter(|&d| d != c && alive[d])
            .max_by(|&a, &b| {
                (conn[a], counts[a], std::cmp::Reverse(a)).cmp(&(
                    conn[b],
                    counts[b],
                    std::cmp::Reverse(b),
                ))
            })
            .ok_or_else(|| {
                GraphError::Infeasible("single community below eligible minimum".into())
            })?;
        for a in &mut assignment {
            if *a == c {
                *a = target;
            }
        }
    }
    Ok(CommunityPartition::from_assignment(assignment, resolution))
}
