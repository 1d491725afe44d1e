//! Information loss (six metrics), the five adversary queries with
//! candidate-set bucketing, and the information-leak probability estimate.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::anonymize::{AnonymizedGraph, RestrictionContext};
use crate::community::louvain;
use crate::error::{GraphError, Result};
use crate::graph::{Graph, NodeId};
use crate::metrics::{
    apl_contributions, bfs_distances, bridging_centrality, clustering_coefficients,
    hits_hub_scores, NodeMetricVector, HITS_MAX_ITER, HITS_TOL,
};

/// One minus the Pearson correlation between two metric distributions.
///
/// Identical vectors score 0 by definition. Equal-length vectors correlate
/// index-by-index; different lengths (clustering changes the node set) are
/// sorted and quantile-aligned before correlating. A constant vector on
/// either side makes the correlation undefined and the loss 1.
pub fn information_loss(orig: &NodeMetricVector, pert: &NodeMetricVector) -> Result<f64> {
    information_loss_values(&orig.values, &pert.values)
}

pub fn information_loss_values(orig: &[f64], pert: &[f64]) -> Result<f64> {
    if orig.is_empty() || pert.is_empty() {
        return Err(GraphError::UndefinedMetric(
            "information loss needs non-empty metric vectors".into(),
        ));
    }
    if orig == pert {
        return Ok(0.0);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = if orig.len() == pert.len() {
        (orig.to_vec(), pert.to_vec())
    } else {
        let mut a = orig.to_vec();
        let mut b = pert.to_vec();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let resampled = quantile_resample(&long, short.len());
        (short, resampled)
    };
    match pearson(&xs, &ys) {
        Some(r) => Ok(1.0 - r),
        None => Ok(1.0),
    }
}

/// Linear-interpolated resample of a sorted vector at `m` evenly spaced
/// quantiles.
fn quantile_resample(sorted: &[f64], m: usize) -> Vec<f64> {
    let n = sorted.len();
    if m == 1 {
        return vec![sorted[0]];
    }
    (0..m)
        .map(|i| {
            let p = i as f64 * (n - 1) as f64 / (m - 1) as f64;
            let lo = p.floor() as usize;
            let hi = p.ceil() as usize;
            let frac = p - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        })
        .collect()
}

/// None when either side is constant (undefined correlation).
fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

/// Change in community count: raw |nc - nc'| and the variant normalized by
/// the original count.
pub fn community_loss(nc: usize, nc_pert: usize) -> Result<(f64, f64)> {
    if nc == 0 || nc_pert == 0 {
        return Err(GraphError::UndefinedMetric(
            "community loss needs at least one community on each side".into(),
        ));
    }
    let raw = nc.abs_diff(nc_pert) as f64;
    Ok((raw, raw / nc as f64))
}

/// The six information-loss values for one anonymized output.
#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub method: String,
    pub k: usize,
    pub degree: f64,
    pub cc: f64,
    pub apl: f64,
    pub hub: f64,
    pub bridge: f64,
    pub community_raw: f64,
    pub community_normalized: f64,
}

pub const LOSS_METRICS: [&str; 7] = [
    "degree",
    "cc",
    "apl",
    "hub",
    "bridge",
    "community_raw",
    "community_normalized",
];

impl LossReport {
    pub fn metric_values(&self) -> [f64; 7] {
        [
            self.degree,
            self.cc,
            self.apl,
            self.hub,
            self.bridge,
            self.community_raw,
            self.community_normalized,
        ]
    }
}

/// Evaluate all six losses of a published graph against the original.
/// `seed` feeds the community detection on both sides so the Eq. 2 term is
/// reproducible.
pub fn loss_report(
    original: &Graph,
    published: &Graph,
    method: &str,
    k: usize,
    seed: u64,
) -> Result<LossReport> {
    let deg = |g: &Graph| -> Vec<f64> { (0..g.node_count()).map(|v| g.degree(v) as f64).collect() };
    let degree = information_loss_values(&deg(original), &deg(published))?;
    let cc = information_loss_values(
        &clustering_coefficients(original),
        &clustering_coefficients(published),
    )?;
    let apl = information_loss_values(&apl_contributions(original), &apl_contributions(published))?;
    let hub = information_loss(
        &hits_hub_scores(original, HITS_TOL, HITS_MAX_ITER)?,
        &hits_hub_scores(published, HITS_TOL, HITS_MAX_ITER)?,
    )?;
    let bridge = information_loss(
        &bridging_centrality(original),
        &bridging_centrality(published),
    )?;
    let nc = louvain(original, 1.0, seed)?.community_count;
    let nc_pert = louvain(published, 1.0, seed)?.community_count;
    let (community_raw, community_normalized) = community_loss(nc, nc_pert)?;
    Ok(LossReport {
        method: method.to_string(),
        k,
        degree,
        cc,
        apl,
        hub,
        bridge,
        community_raw,
        community_normalized,
    })
}

/// The five adversary queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum QueryId {
    H1,
    H2,
    SG,
    FH2,
    FB2,
}

impl QueryId {
    pub const ALL: [QueryId; 5] = [
        QueryId::H1,
        QueryId::H2,
        QueryId::SG,
        QueryId::FH2,
        QueryId::FB2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            QueryId::H1 => "H1",
            QueryId::H2 => "H2",
            QueryId::SG => "SG",
            QueryId::FH2 => "FH2",
            QueryId::FB2 => "FB2",
        }
    }

    pub fn parse(s: &str) -> Result<QueryId> {
        QueryId::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| GraphError::Config(format!("unknown query {s:?}")))
    }

    /// Candidate-set-size bucket labels, smallest first.
    pub fn bucket_labels(&self) -> [&'static str; 5] {
        match self {
            QueryId::SG => ["=1", "2-10", "11-100", "101-1000", ">1000"],
            _ => ["=1", "2-4", "5-10", "11-20", ">20"],
        }
    }

    pub fn bucket_index(&self, size: usize) -> usize {
        debug_assert!(size >= 1);
        let edges = match self {
            QueryId::SG => [1usize, 10, 100, 1000],
            _ => [1, 4, 10, 20],
        };
        edges.iter().position(|&e| size <= e).unwrap_or(4)
    }
}

impl std::fmt::Display for QueryId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What a query returns for one node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SignatureValue {
    Degree(usize),
    /// Sorted neighbor-degree multiset (H2).
    Multiset(Vec<usize>),
    /// Edge count of the closed 1-hop subgraph (SG).
    EdgeCount(usize),
    /// Distances to the fixed top-10 hubs or bridges, horizon 2; 0 = beyond
    /// horizon (open-world assumption).
    Fingerprint(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuerySignature {
    pub query: QueryId,
    pub value: SignatureValue,
}

pub const FINGERPRINT_TARGETS: usize = 10;
pub const FINGERPRINT_HORIZON: usize = 2;

/// The fixed top-10 hub and bridge lists of a published graph, score
/// descending with id as tiebreaker.
pub fn fingerprint_targets(g: &Graph) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
    let top = |scores: &[f64]| -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = (0..scores.len()).collect();
        ids.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
        ids.truncate(FINGERPRINT_TARGETS);
        ids
    };
    let hubs = hits_hub_scores(g, HITS_TOL, HITS_MAX_ITER)?;
    let bridges = bridging_centrality(g);
    Ok((top(&hubs.values), top(&bridges.values)))
}

/// Evaluate one adversary query for one published node.
pub fn signature(
    g: &Graph,
    x: NodeId,
    query: QueryId,
    hubs10: &[NodeId],
    bridges10: &[NodeId],
) -> Result<QuerySignature> {
    if x >= g.node_count() {
        return Err(GraphError::UnknownNode(x));
    }
    let value = match query {
        QueryId::H1 => SignatureValue::Degree(g.degree(x)),
        QueryId::H2 => {
            let mut ds: Vec<usize> = g.neighbors(x).iter().map(|&u| g.degree(u)).collect();
            ds.sort_unstable();
            SignatureValue::Multiset(ds)
        }
        QueryId::SG => {
            let hood = g.neighborhood(x)?;
            SignatureValue::EdgeCount(hood.internal_edges.len())
        }
        QueryId::FH2 | QueryId::FB2 => {
            let targets = if query == QueryId::FH2 {
                hubs10
            } else {
                bridges10
            };
            let dist = bfs_distances(g, x);
            let vec = targets
                .iter()
                .map(|&t| {
                    let d = dist[t];
                    if d == usize::MAX || d > FINGERPRINT_HORIZON {
                        0
                    } else {
                        d
                    }
                })
                .collect();
            SignatureValue::Fingerprint(vec)
        }
    };
    Ok(QuerySignature { query, value })
}

/// Bucketed candidate-set-size distribution for one query.
#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub method: String,
    pub k: usize,
    pub query: QueryId,
    /// Parallel to `QueryId::bucket_labels`, node-weighted, sums to 1.
    pub fractions: [f64; 5],
}

/// Candidate-set sizes per published node under one query: the total weight
/// of the published nodes sharing the signature, where a supernode weighs its
/// content size and a plain node weighs 1.
pub fn candidate_sizes(a: &AnonymizedGraph, query: QueryId) -> Result<Vec<usize>> {
    let g = &a.published;
    let (hubs10, bridges10) = if matches!(query, QueryId::FH2 | QueryId::FB2) {
        fingerprint_targets(g)?
    } else {
        (Vec::new(), Vec::new())
    };
    let sigs: Vec<QuerySignature> = (0..g.node_count())
        .into_par_iter()
        .map(|v| signature(g, v, query, &hubs10, &bridges10))
        .collect::<Result<Vec<_>>>()?;
    let mut weight_of: HashMap<&QuerySignature, usize> = HashMap::new();
    for (v, sig) in sigs.iter().enumerate() {
        *weight_of.entry(sig).or_insert(0) += a.content_size(v);
    }
    Ok(sigs.iter().map(|sig| weight_of[sig]).collect())
}

pub fn risk_report(a: &AnonymizedGraph, query: QueryId) -> Result<RiskReport> {
    let sizes = candidate_sizes(a, query)?;
    let mut bucket_weight = [0.0f64; 5];
    let mut total = 0.0f64;
    for (v, &size) in sizes.iter().enumerate() {
        let w = a.content_size(v) as f64;
        bucket_weight[query.bucket_index(size)] += w;
        total += w;
    }
    if total == 0.0 {
        return Err(GraphError::UndefinedMetric(
            "risk report on empty graph".into(),
        ));
    }
    let mut fractions = [0.0f64; 5];
    for (f, w) in fractions.iter_mut().zip(bucket_weight) {
        *f = w / total;
    }
    Ok(RiskReport {
        method: a.method.name().to_string(),
        k: a.k,
        query,
        fractions,
    })
}

/// The information-leak probability estimate and the community diversity
/// reduction.
#[derive(Debug, Clone, Serialize)]
pub struct LeakEstimate {
    /// (|V^h ∪ V^b|) / N
    pub role_density: f64,
    /// Mean over role nodes of the fraction of their neighbors that cannot be
    /// matched with a non-role node inside their own community.
    pub unmatchable_fraction: f64,
    /// Product of the two factors above.
    pub leak: f64,
    /// N / N_c
    pub diversity_reduction: f64,
}

pub fn leak_estimate(ctx: &RestrictionContext, g: &Graph) -> LeakEstimate {
    let n = g.node_count();
    let roles: Vec<NodeId> = (0..n).filter(|&v| ctx.roles.is_role(v)).collect();
    let role_density = if n == 0 {
        0.0
    } else {
        roles.len() as f64 / n as f64
    };
    // a neighbor is matchable when it is itself eligible and shares its
    // community with at least one other eligible node
    let mut community_eligible: HashMap<usize, usize> = HashMap::new();
    for v in 0..n {
        if ctx.eligible[v] {
            *community_eligible
                .entry(ctx.partition.assignment[v])
                .or_insert(0) += 1;
        }
    }
    let matchable = |u: NodeId| {
        ctx.eligible[u]
            && community_eligible
                .get(&ctx.partition.assignment[u])
                .is_some_and(|&c| c >= 2)
    };
    let mut fractions = Vec::with_capacity(roles.len());
    for &r in &roles {
        let nbrs = g.neighbors(r);
        if nbrs.is_empty() {
            fractions.push(0.0);
            continue;
        }
        let unmatchable = nbrs.iter().filter(|&&u| !matchable(u)).count();
        fractions.push(unmatchable as f64 / nbrs.len() as f64);
    }
    let unmatchable_fraction = if fractions.is_empty() {
        0.0
    } else {
        fractions.iter().sum::<f64>() / fractions.len() as f64
    };
    let diversity_reduction = n as f64 / ctx.partition.community_count as f64;
    LeakEstimate {
        role_density,
        unmatchable_fraction,
        leak: role_density * unmatchable_fraction,
        diversity_reduction,
    }
}
