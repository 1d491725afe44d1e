//! The 5-feature subgraph characterization, the trainable weighted distance,
//! and the simulated-annealing weight trainer calibrated against the
//! degree-preserving isomorphism matcher.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{GraphError, Result};
use crate::graph::{Graph, NodeId};
use crate::metrics::clustering_coefficient;
use crate::vf2::{vf2d_score, MatchScore};

pub const FEATURE_COUNT: usize = 5;
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["d_r", "n_e", "cc", "ad_an", "sd_an"];

/// Min-max normalized feature vector of a 1-hop neighborhood: reference
/// degree, internal edge count, reference clustering coefficient, mean and
/// std-dev of neighbor degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgraphFeatures(pub [f64; FEATURE_COUNT]);

/// Graph-wide min/max table the features are normalized against.
#[derive(Debug, Clone)]
pub struct NormTable {
    pub min: [f64; FEATURE_COUNT],
    pub max: [f64; FEATURE_COUNT],
}

fn raw_features(g: &Graph, v: NodeId) -> Result<[f64; FEATURE_COUNT]> {
    let hood = g.neighborhood(v)?;
    let d_r = g.degree(v) as f64;
    let n_e = hood.internal_edges.len() as f64;
    let cc = clustering_coefficient(g, v)?;
    let nbrs = g.neighbors(v);
    let (ad_an, sd_an) = if nbrs.is_empty() {
        (0.0, 0.0)
    } else {
        let degs: Vec<f64> = nbrs.iter().map(|&w| g.degree(w) as f64).collect();
        let mean = degs.iter().sum::<f64>() / degs.len() as f64;
        let var = degs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / degs.len() as f64;
        (mean, var.sqrt())
    };
    Ok([d_r, n_e, cc, ad_an, sd_an])
}

impl NormTable {
    pub fn build(g: &Graph) -> Result<NormTable> {
        let mut min = [f64::INFINITY; FEATURE_COUNT];
        let mut max = [f64::NEG_INFINITY; FEATURE_COUNT];
        for v in 0..g.node_count() {
            let raw = raw_features(g, v)?;
            for i in 0..FEATURE_COUNT {
                min[i] = min[i].min(raw[i]);
                max[i] = max[i].max(raw[i]);
            }
        }
        if g.node_count() == 0 {
            min = [0.0; FEATURE_COUNT];
            max = [0.0; FEATURE_COUNT];
        }
        Ok(NormTable { min, max })
    }

    fn normalize(&self, raw: [f64; FEATURE_COUNT]) -> SubgraphFeatures {
        let mut out = [0.0; FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            let span = self.max[i] - self.min[i];
            // degenerate min=max feature maps to 0
            out[i] = if span > 0.0 {
                (raw[i] - self.min[i]) / span
            } else {
                0.0
            };
        }
        SubgraphFeatures(out)
    }
}

pub fn features(g: &Graph, v: NodeId, norm: &NormTable) -> Result<SubgraphFeatures> {
    Ok(norm.normalize(raw_features(g, v)?))
}

pub fn all_features(g: &Graph, norm: &NormTable) -> Result<Vec<SubgraphFeatures>> {
    (0..g.node_count()).map(|v| features(g, v, norm)).collect()
}

/// Non-negative weights over the five features, summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceWeights(pub [f64; FEATURE_COUNT]);

impl DistanceWeights {
    pub fn uniform() -> DistanceWeights {
        DistanceWeights([1.0 / FEATURE_COUNT as f64; FEATURE_COUNT])
    }

    pub fn normalized(raw: [f64; FEATURE_COUNT]) -> Result<DistanceWeights> {
        if raw.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(GraphError::Config("weights must be non-negative".into()));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(GraphError::Config("weights must not all be zero".into()));
        }
        let mut out = raw;
        for w in &mut out {
            *w /= sum;
        }
        Ok(DistanceWeights(out))
    }
}

/// Weighted L1 distance over normalized features.
pub fn distance(a: &SubgraphFeatures, b: &SubgraphFeatures, w: &DistanceWeights) -> f64 {
    (0..FEATURE_COUNT)
        .map(|i| w.0[i] * (a.0[i] - b.0[i]).abs())
        .sum()
}

/// The `count` pool members with smallest distance to `v`; ties broken by
/// exact feature equality first, then lower node id. Returns a shortfall flag
/// when the pool is smaller than `count`.
pub fn rank_candidates(
    feats: &[SubgraphFeatures],
    v: NodeId,
    pool: &[NodeId],
    w: &DistanceWeights,
    count: usize,
) -> Result<(Vec<NodeId>, bool)> {
    if pool.contains(&v) {
        return Err(GraphError::Contract(format!(
            "candidate pool must not contain the reference node {v}"
        )));
    }
    let mut scored: Vec<(f64, bool, NodeId)> = pool
        .iter()
        .map(|&u| {
            let d = distance(&feats[v], &feats[u], w);
            (d, feats[u] != feats[v], u)
        })
        .collect();
    scored.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let shortfall = pool.len() < count;
    let taken = scored.into_iter().take(count).map(|(_, _, u)| u).collect();
    Ok((taken, shortfall))
}

/// Simulated-annealing schedule and sampling knobs.
#[derive(Debug, Clone)]
pub struct SaConfig {
    pub initial_temp: f64,
    pub cooling: f64,
    pub epochs: usize,
    pub proposals_per_epoch: usize,
    /// Per-sample candidate pool size used when scanning for the nearest
    /// neighbor during fitness evaluation (all other nodes if fewer).
    pub candidate_pool: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            initial_temp: 1.0,
            cooling: 0.95,
            epochs: 100,
            proposals_per_epoch: 50,
            candidate_pool: 1000,
        }
    }
}

pub const DEFAULT_SAMPLE_SIZE: usize = 200;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: DistanceWeights,
    pub best_fitness: f64,
    /// Best-seen fitness after each evaluation; non-decreasing.
    pub fitness_record: Vec<f64>,
}

struct FitnessContext<'a> {
    g: &'a Graph,
    feats: &'a [SubgraphFeatures],
    samples: Vec<NodeId>,
    pools: Vec<Vec<NodeId>>,
    score_cache: Mutex<HashMap<(NodeId, NodeId), f64>>,
}

impl FitnessContext<'_> {
    fn pair_score(&self, a: NodeId, b: NodeId) -> f64 {
        let key = (a.min(b), a.max(b));
        if let Some(&s) = self.score_cache.lock().unwrap().get(&key) {
            return s;
        }
        let s1 = self.g.neighborhood(key.0).unwrap();
        let s2 = self.g.neighborhood(key.1).unwrap();
        let MatchScore {
            degree_fidelity, ..
        } = vf2d_score(&s1, &s2);
        self.score_cache
            .lock()
            .unwrap()
            .insert(key, degree_fidelity);
        degree_fidelity
    }

    /// Mean degree-preserving match score between each sampled node and its
    /// distance-nearest pool member under `w`.
    fn fitness(&self, w: &DistanceWeights) -> f64 {
        let total: f64 = self
            .samples
            .par_iter()
            .zip(&self.pools)
            .map(|(&s, pool)| {
                let (nearest, _) = rank_candidates(self.feats, s, pool, w, 1).unwrap();
                match nearest.first() {
                    Some(&c) => self.pair_score(s, c),
                    None => 0.0,
                }
            })
            .sum();
        total / self.samples.len() as f64
    }
}

fn sample_distinct(
    rng: &mut ChaCha8Rng,
    n: usize,
    count: usize,
    exclude: Option<NodeId>,
) -> Vec<NodeId> {
    let mut pool: Vec<NodeId> = (0..n).filter(|&v| Some(v) != exclude).collect();
    // partial Fisher-Yates
    let take = count.min(pool.len());
    for i in 0..take {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut out: Vec<NodeId> = pool[..take].to_vec();
    out.sort_unstable();
    out
}

/// Train the distance weights on the simplex by simulated annealing, using
/// the degree-preserving matcher score of each sample's nearest neighbor as
/// the fitness. Deterministic given the seed.
pub fn train_weights(
    g: &Graph,
    sample_size: usize,
    cfg: &SaConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    if sample_size < 2 {
        return Err(GraphError::Config(format!(
            "sample size must be >= 2, got {sample_size}"
        )));
    }
    if g.node_count() < 2 {
        return Err(GraphError::Config(
            "graph too small to sample for training".into(),
        ));
    }
    let norm = NormTable::build(g)?;
    let feats = all_features(g, &norm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = sample_distinct(&mut rng, g.node_count(), sample_size, None);
    let pools: Vec<Vec<NodeId>> = samples
        .iter()
        .map(|&s| sample_distinct(&mut rng, g.node_count(), cfg.candidate_pool, Some(s)))
        .collect();
    let ctx = FitnessContext {
        g,
        feats: &feats,
        samples,
        pools,
        score_cache: Mutex::new(HashMap::new()),
    };

    let mut current = DistanceWeights::uniform();
    let mut current_fit = ctx.fitness(&current);
    let mut best = current;
    let mut best_fit = current_fit;
    let mut record = vec![best_fit];

    let mut temp = cfg.initial_temp;
    for _ in 0..cfg.epochs {
        for _ in 0..cfg.proposals_per_epoch {
            let proposal = propose(&mut rng, &current, temp);
            let fit = ctx.fitness(&proposal);
            let accept = fit >= current_fit
                || rng.gen::<f64>() < ((fit - current_fit) / temp.max(1e-9)).exp();
            if accept {
                current = proposal;
                current_fit = fit;
            }
            if fit > best_fit {
                best_fit = fit;
                best = proposal;
            }
            record.push(best_fit);
        }
        temp *= cfg.cooling;
    }

    Ok(TrainOutcome {
        weights: best,
        best_fitness: best_fit,
        fitness_record: record,
    })
}

/// Dirichlet perturbation centered on the current weights; concentration
/// tightens as the temperature drops.
fn propose(rng: &mut ChaCha8Rng, w: &DistanceWeights, temp: f64) -> DistanceWeights {
    let conc = 25.0 / temp.clamp(0.05, 1.0);
    loop {
        let mut raw = [0.0; FEATURE_COUNT];
        for (slot, &weight) in raw.iter_mut().zip(&w.0) {
            let alpha = 1.0 + weight * conc;
            *slot = Gamma::new(alpha, 1.0).unwrap().sample(rng);
        }
        if let Ok(out) = DistanceWeights::normalized(raw) {
            return out;
        }
    }
}

/// Persist trained weights with a fingerprint of the graph they were trained
/// on, so stale weights are rejected at load time.
pub fn save_weights(path: &Path, w: &DistanceWeights, g: &Graph) -> Result<()> {
    let body = format!(
        "# graphanon weights v1 nodes={} edges={} hash={:016x}\n{}\n",
        g.node_count(),
        g.edge_count(),
        g.fingerprint(),
        w.0.map(|x| format!("{x:.17}")).join(" "),
    );
    let mut f = std::fs::File::create(path).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    f.write_all(body.as_bytes()).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_weights(path: &Path, g: &Graph) -> Result<DistanceWeights> {
    let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| GraphError::Config("empty weights file".into()))?;
    let expected = format!(
        "# graphanon weights v1 nodes={} edges={} hash={:016x}",
        g.node_count(),
        g.edge_count(),
        g.fingerprint()
    );
    if header.trim() != expected {
        return Err(GraphError::Config(format!(
            "stale weights: fingerprint mismatch (file: {header:?})"
        )));
    }
    let values: Vec<f64> = lines
        .next()
        .unwrap_or("")
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| GraphError::Config(format!("bad weight value: {e}")))?;
    if values.len() != FEATURE_COUNT {
        return Err(GraphError::Config(format!(
            "expected {FEATURE_COUNT} weights, found {}",
            values.len()
        )));
    }
    DistanceWeights::normalized([values[0], values[1], values[2], values[3], values[4]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_neighborhoods_share_features() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let norm = NormTable::build(&g).unwrap();
        let f: Vec<_> = (0..6).map(|v| features(&g, v, &norm).unwrap()).collect();
        for v in 1..6 {
            assert_eq!(f[0], f[v]);
        }
    }

    #[test]
    fn isolated_node_features_zero() {
        let g = Graph::from_edges(4, &[(1, 2), (2, 3), (3, 1)]);
        let norm = NormTable::build(&g).unwrap();
        let f = features(&g, 0, &norm).unwrap();
        assert_eq!(f.0, [0.0; 5]);
    }

    #[test]
    fn star_center_sd_an_zero() {
        // K1,4 star inside a larger graph: neighbor degrees {1,1,1,1}
        let g = Graph::from_edges(8, &[(0, 1), (0, 2), (0, 3), (0, 4), (5, 6), (6, 7), (5, 7)]);
        let raw = super::raw_features(&g, 0).unwrap();
        assert_eq!(raw[4], 0.0);
    }

    #[test]
    fn distance_identity_and_single_term() {
        let a = SubgraphFeatures([0.2, 0.3, 0.4, 0.5, 0.6]);
        assert_eq!(distance(&a, &a, &DistanceWeights::uniform()), 0.0);
        let w = DistanceWeights([1.0, 0.0, 0.0, 0.0, 0.0]);
        let b = SubgraphFeatures([0.7, 0.9, 0.9, 0.9, 0.9]);
        assert!((distance(&a, &b, &w) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distance_uniform_weights() {
        let a = SubgraphFeatures([0.1, 0.2, 0.3, 0.4, 0.5]);
        let b = SubgraphFeatures([0.2, 0.3, 0.4, 0.5, 0.6]);
        let d = distance(&a, &b, &DistanceWeights::uniform());
        assert!((d - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rank_rejects_reference_in_pool() {
        let feats = vec![SubgraphFeatures([0.0; 5]); 3];
        assert!(rank_candidates(&feats, 0, &[0, 1], &DistanceWeights::uniform(), 1).is_err());
    }

    #[test]
    fn rank_count_zero_and_shortfall() {
        let feats = vec![SubgraphFeatures([0.0; 5]); 3];
        let (r, short) =
            rank_candidates(&feats, 0, &[1, 2], &DistanceWeights::uniform(), 0).unwrap();
        assert!(r.is_empty());
        assert!(!short);
        let (r, short) =
            rank_candidates(&feats, 0, &[1, 2], &DistanceWeights::uniform(), 5).unwrap();
        assert_eq!(r.len(), 2);
        assert!(short);
    }

    #[test]
    fn rank_matches_exhaustive_sort() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut edges = Vec::new();
        for u in 0..20usize {
            for v in (u + 1)..20 {
                if rng.gen_bool(0.2) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(20, &edges);
        let norm = NormTable::build(&g).unwrap();
        let feats = all_features(&g, &norm).unwrap();
        let w = DistanceWeights::uniform();
        let pool: Vec<usize> = (1..20).collect();
        let (ranked, _) = rank_candidates(&feats, 0, &pool, &w, 19).unwrap();
        let mut oracle: Vec<(f64, bool, usize)> = pool
            .iter()
            .map(|&u| (distance(&feats[0], &feats[u], &w), feats[u] != feats[0], u))
            .collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let oracle: Vec<usize> = oracle.into_iter().map(|(_, _, u)| u).collect();
        assert_eq!(ranked, oracle);
    }

    #[test]
    fn training_on_structurally_identical_graph_is_perfect() {
        // disjoint triangles: every node matches every other perfectly
        let mut edges = Vec::new();
        for t in 0..4usize {
            let b = 3 * t;
            edges.extend([(b, b + 1), (b + 1, b + 2), (b + 2, b)]);
        }
        let g = Graph::from_edges(12, &edges);
        let cfg = SaConfig {
            epochs: 3,
            proposals_per_epoch: 5,
            ..SaConfig::default()
        };
        let out = train_weights(&g, 6, &cfg, 42).unwrap();
        assert_eq!(out.best_fitness, 1.0);
    }

    #[test]
    fn fitness_record_is_monotone() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut edges = Vec::new();
        for u in 0..25usize {
            for v in (u + 1)..25 {
                if rng.gen_bool(0.15) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(25, &edges);
        let cfg = SaConfig {
            epochs: 4,
            proposals_per_epoch: 8,
            ..SaConfig::default()
        };
        let out = train_weights(&g, 8, &cfg, 3).unwrap();
        for w in out.fitness_record.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn weights_round_trip_and_staleness() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        let w = DistanceWeights::normalized([0.1, 0.2, 0.3, 0.2, 0.2]).unwrap();
        save_weights(&path, &w, &g).unwrap();
        let loaded = load_weights(&path, &g).unwrap();
        assert_eq!(w, loaded);
        let other = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(load_weights(&path, &other).is_err());
    }
}
