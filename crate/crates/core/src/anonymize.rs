//! The five anonymization methods (clust_g, clust_r_l1, clust_r_l2, modif_g,
//! modif_r_l2), the community/hub/bridge restriction engine and the
//! k-anonymity output contract.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::community::{partition_with_min_size, CommunityPartition};
use crate::error::{GraphError, Result};
use crate::graph::{Graph, GraphBuilder, NodeId, Supernode};
use crate::metrics::{
    bridging_centrality, hits_hub_scores, role_sets, StructuralRoleSets, HITS_MAX_ITER, HITS_TOL,
};
use crate::similarity::{
    all_features, distance, rank_candidates, DistanceWeights, NormTable, SubgraphFeatures,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClustG,
    ClustRL1,
    ClustRL2,
    ModifG,
    ModifRL2,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ClustG,
        Method::ClustRL1,
        Method::ClustRL2,
        Method::ModifG,
        Method::ModifRL2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::ClustG => "clust_g",
            Method::ClustRL1 => "clust_r_l1",
            Method::ClustRL2 => "clust_r_l2",
            Method::ModifG => "modif_g",
            Method::ModifRL2 => "modif_r_l2",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| GraphError::Config(format!("unknown method {s:?}")))
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            Method::ClustG | Method::ModifG => Strategy::Global,
            Method::ClustRL1 => Strategy::Local1,
            Method::ClustRL2 | Method::ModifRL2 => Strategy::Local2,
        }
    }

    pub fn is_clustering(&self) -> bool {
        matches!(self, Method::ClustG | Method::ClustRL1 | Method::ClustRL2)
    }

    pub fn is_restricted(&self) -> bool {
        !matches!(self.strategy(), Strategy::Global)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Global,
    Local1,
    Local2,
}

/// Precalculated state shared by the restricted methods: role sets, the
/// min-size-guaranteed community partition, the local1 acceptance threshold
/// theta, and the per-node features used for candidate ranking.
#[derive(Debug, Clone)]
pub struct RestrictionContext {
    pub roles: StructuralRoleSets,
    pub partition: CommunityPartition,
    pub theta: f64,
    /// eligible(v) <=> v is neither a top hub nor a top bridge
    pub eligible: Vec<bool>,
    pub norm: NormTable,
    pub features: Vec<SubgraphFeatures>,
    pub k: usize,
}

pub const THETA_SAMPLE_PAIRS: usize = 10_000;

/// Computes role sets, the min-size partition and theta from a seeded sample
/// of node pairs (all pairs when the graph is small).
pub fn build_context(
    g: &Graph,
    k: usize,
    seed: u64,
    hub_pct: f64,
    bridge_pct: f64,
    w: &DistanceWeights,
) -> Result<RestrictionContext> {
    if k < 2 {
        return Err(GraphError::Config(format!("k must be >= 2, got {k}")));
    }
    let n = g.node_count();
    if n < k {
        return Err(GraphError::Infeasible(format!(
            "graph has {n} nodes, need at least k={k}"
        )));
    }
    let hubs = hits_hub_scores(g, HITS_TOL, HITS_MAX_ITER)?;
    let bridges = bridging_centrality(g);
    let roles = role_sets(&hubs.values, &bridges.values, hub_pct, bridge_pct)?;
    let eligible: Vec<bool> = (0..n).map(|v| !roles.is_role(v)).collect();
    let eligible_count = eligible.iter().filter(|&&e| e).count();
    let partition = if eligible_count >= k {
        partition_with_min_size(g, k, &eligible, seed)?
    } else {
        // fully tied scores make every node a role node; restricted methods
        // then exclude everything and the min-size guarantee is vacuous
        crate::community::louvain(g, 1.0, seed)?
    };
    let norm = NormTable::build(g)?;
    let features = all_features(g, &norm)?;

    let total_pairs = n * (n - 1) / 2;
    let theta = if total_pairs == 0 {
        0.0
    } else if total_pairs <= THETA_SAMPLE_PAIRS {
        let mut sum = 0.0;
        for u in 0..n {
            for v in (u + 1)..n {
                sum += distance(&features[u], &features[v], w);
            }
        }
        sum / total_pairs as f64
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e7a);
        let mut sum = 0.0;
        for _ in 0..THETA_SAMPLE_PAIRS {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            sum += distance(&features[u], &features[v], w);
        }
        sum / THETA_SAMPLE_PAIRS as f64
    };

    Ok(RestrictionContext {
        roles,
        partition,
        theta,
        eligible,
        norm,
        features,
        k,
    })
}

/// The set a node's match may be drawn from under each search strategy.
pub fn candidate_pool(
    g: &Graph,
    v: NodeId,
    strategy: Strategy,
    ctx: &RestrictionContext,
) -> Result<Vec<NodeId>> {
    if v >= g.node_count() {
        return Err(GraphError::UnknownNode(v));
    }
    match strategy {
        Strategy::Global => Ok((0..g.node_count()).filter(|&u| u != v).collect()),
        Strategy::Local1 | Strategy::Local2 => {
            if !ctx.eligible[v] {
                return Err(GraphError::Contract(format!(
                    "restricted strategy on excluded node {v}"
                )));
            }
            let c = ctx.partition.assignment[v];
            Ok((0..g.node_count())
                .filter(|&u| u != v && ctx.eligible[u] && ctx.partition.assignment[u] == c)
                .collect())
        }
    }
}

/// Provenance of an anonymized graph: supernode memberships for the
/// clustering methods, signature equivalence classes for modification.
#[derive(Debug, Clone)]
pub enum Provenance {
    Supernodes(Vec<Supernode>),
    /// Groups of published node ids sharing the equality-criterion signature.
    Classes(Vec<Vec<NodeId>>),
}

#[derive(Debug, Clone)]
pub struct AnonymizedGraph {
    pub published: Graph,
    pub method: Method,
    pub k: usize,
    pub provenance: Provenance,
    /// Untouched hubs/bridges (original ids); empty for global methods.
    pub excluded: Vec<NodeId>,
    /// original node id -> published node id
    pub node_map: Vec<NodeId>,
    /// Number of nodes of the original graph (published ids >= this are
    /// dummies added by modification).
    pub original_count: usize,
}

impl AnonymizedGraph {
    /// Candidate-set weight of a published node: supernode content size for
    /// clustering, 1 otherwise.
    pub fn content_size(&self, published: NodeId) -> usize {
        match &self.provenance {
            Provenance::Supernodes(supers) => supers
                .iter()
                .find(|s| s.id == published)
                .map_or(1, |s| s.contents.len()),
            Provenance::Classes(_) => 1,
        }
    }
}

fn local1_selection(
    g: &Graph,
    v: NodeId,
    ctx: &RestrictionContext,
    w: &DistanceWeights,
    need: usize,
    available: &[bool],
) -> Vec<NodeId> {
    let comm = ctx.partition.assignment[v];
    let ok = |u: NodeId| {
        u != v && available[u] && ctx.eligible[u] && ctx.partition.assignment[u] == comm
    };
    let mut chosen: Vec<NodeId> = Vec::with_capacity(need);
    let mut in_chosen = vec![false; g.node_count()];

    // breadth-first rings around v; accept within-theta matches ring by ring
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[v] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(v);
    let mut ring_start = 1usize;
    let mut frontier: Vec<NodeId> = Vec::new();
    while chosen.len() < need {
        frontier.clear();
        while let Some(u) = queue.front().copied() {
            if dist[u] + 1 > ring_start {
                break;
            }
            queue.pop_front();
            for &nb in g.neighbors(u) {
                if dist[nb] == usize::MAX {
                    dist[nb] = dist[u] + 1;
                    frontier.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        if frontier.is_empty() {
            break;
        }
        let mut ring: Vec<(f64, bool, NodeId)> = frontier
            .iter()
            .copied()
            .filter(|&u| ok(u))
            .map(|u| {
                let d = distance(&ctx.features[v], &ctx.features[u], w);
                (d, ctx.features[u] != ctx.features[v], u)
            })
            .collect();
        ring.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (d, _, u) in ring {
            if chosen.len() >= need {
                break;
            }
            if d <= ctx.theta && !in_chosen[u] {
                chosen.push(u);
                in_chosen[u] = true;
            }
        }
        ring_start += 1;
    }

    if chosen.len() < need {
        // no within-theta match left in any ring: fall back to community-best
        let rest: Vec<NodeId> = (0..g.node_count())
            .filter(|&u| ok(u) && !in_chosen[u])
            .collect();
        let (extra, _) = rank_candidates(&ctx.features, v, &rest, w, need - chosen.len())
            .expect("pool excludes v");
        chosen.extend(extra);
    }
    chosen
}

/// Group eligible nodes into supernodes of size k..2k-1 and contract.
pub fn anonymize_clustering(
    g: &Graph,
    k: usize,
    strategy: Strategy,
    ctx: &RestrictionContext,
    w: &DistanceWeights,
) -> Result<AnonymizedGraph> {
    let n = g.node_count();
    let run_eligible: Vec<bool> = match strategy {
        Strategy::Global => vec![true; n],
        _ => ctx.eligible.clone(),
    };
    let mut available: Vec<bool> = run_eligible.clone();
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    let mut leftovers: Vec<NodeId> = Vec::new();

    for v in 0..n {
        if !available[v] {
            continue;
        }
        available[v] = false;
        let pool: Vec<NodeId> = match strategy {
            Strategy::Global => (0..n).filter(|&u| available[u]).collect(),
            _ => {
                let c = ctx.partition.assignment[v];
                (0..n)
                    .filter(|&u| available[u] && ctx.partition.assignment[u] == c)
                    .collect()
            }
        };
        if pool.len() < k - 1 {
            leftovers.push(v);
            continue;
        }
        let cands = match strategy {
            Strategy::Local1 => {
                available[v] = false;
                local1_selection(g, v, ctx, w, k - 1, &available)
            }
            _ => rank_candidates(&ctx.features, v, &pool, w, k - 1)?.0,
        };
        debug_assert_eq!(cands.len(), k - 1);
        let mut group = vec![v];
        group.extend(cands);
        for &m in &group {
            available[m] = false;
        }
        groups.push(group);
    }

    // leftover nodes join their nearest existing supernode (in-community for
    // the restricted strategies); a group reaching 2k splits into two of k
    for v in leftovers {
        let candidates: Vec<usize> = (0..groups.len())
            .filter(|&gi| match strategy {
                Strategy::Global => true,
                _ => ctx.partition.assignment[groups[gi][0]] == ctx.partition.assignment[v],
            })
            .collect();
        let best = candidates
            .into_iter()
            .map(|gi| {
                let d = groups[gi]
                    .iter()
                    .map(|&m| distance(&ctx.features[v], &ctx.features[m], w))
                    .fold(f64::INFINITY, f64::min);
                (d, gi)
            })
            .min_by(|a, b| a.partial_cmp(b).unwrap());
        let Some((_, gi)) = best else {
            return Err(GraphError::Infeasible(format!(
                "no supernode available to absorb leftover node {v}"
            )));
        };
        groups[gi].push(v);
        if groups[gi].len() == 2 * k {
            let mut members = groups[gi].clone();
            members.sort_unstable();
            groups[gi] = members[..k].to_vec();
            groups.push(members[k..].to_vec());
        }
    }

    for group in &groups {
        if group.len() < k || group.len() > 2 * k - 1 {
            return Err(GraphError::Contract(format!(
                "supernode size {} outside [{k}, {}]",
                group.len(),
                2 * k - 1
            )));
        }
    }

    // singletons for everything not grouped (excluded roles)
    let mut grouped = vec![false; n];
    for group in &groups {
        for &m in group {
            grouped[m] = true;
        }
    }
    let mut all_groups = groups;
    for (v, &taken) in grouped.iter().enumerate() {
        if !taken {
            all_groups.push(vec![v]);
        }
    }
    let (published, supers, node_map) = g.contract_groups(&all_groups);
    let excluded = (0..n).filter(|&v| !run_eligible[v]).collect();
    Ok(AnonymizedGraph {
        published,
        method: method_for(true, strategy),
        k,
        provenance: Provenance::Supernodes(supers),
        excluded,
        node_map,
        original_count: n,
    })
}

fn method_for(clustering: bool, strategy: Strategy) -> Method {
    match (clustering, strategy) {
        (true, Strategy::Global) => Method::ClustG,
        (true, Strategy::Local1) => Method::ClustRL1,
        (true, Strategy::Local2) => Method::ClustRL2,
        (false, Strategy::Global) => Method::ModifG,
        (false, Strategy::Local2) => Method::ModifRL2,
        (false, Strategy::Local1) => unreachable!("modif_r_l1 is not a method"),
    }
}

/// The equality-criterion signature: reference degree, edge count of the
/// closed 1-hop subgraph, and its sorted internal degree sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub degree: usize,
    pub subgraph_edges: usize,
    pub internal_degree_sequence: Vec<usize>,
}

pub fn builder_signature(b: &GraphBuilder, v: NodeId) -> Signature {
    let members: Vec<NodeId> = b.neighbors(v).chain(std::iter::once(v)).collect();
    let member_set: std::collections::BTreeSet<NodeId> = members.iter().copied().collect();
    let mut edges = 0usize;
    let mut seq: Vec<usize> = Vec::with_capacity(members.len());
    for &m in &member_set {
        let internal = b.neighbors(m).filter(|w| member_set.contains(w)).count();
        seq.push(internal);
        edges += internal;
    }
    seq.sort_unstable_by(|a, b| b.cmp(a));
    Signature {
        degree: b.degree(v),
        subgraph_edges: edges / 2,
        internal_degree_sequence: seq,
    }
}

/// Signature of a node in an immutable graph (used by audits).
pub fn graph_signature(g: &Graph, v: NodeId) -> Signature {
    let hood = g.neighborhood(v).expect("node exists");
    Signature {
        degree: g.degree(v),
        subgraph_edges: hood.internal_edges.len(),
        internal_degree_sequence: hood.internal_degree_sequence(),
    }
}

// Modification working state with incremental signature tracking.
struct ModifState {
    builder: GraphBuilder,
    sigs: Vec<Signature>,
    counts: HashMap<Signature, usize>,
    next_dummy: usize,
}

impl ModifState {
    fn new(g: &Graph) -> ModifState {
        let builder = GraphBuilder::from_graph(g);
        let sigs: Vec<Signature> = (0..g.node_count())
            .map(|v| builder_signature(&builder, v))
            .collect();
        let mut counts = HashMap::new();
        for s in &sigs {
            *counts.entry(s.clone()).or_insert(0) += 1;
        }
        ModifState {
            builder,
            sigs,
            counts,
            next_dummy: 0,
        }
    }

    fn class_size(&self, v: NodeId) -> usize {
        self.counts[&self.sigs[v]]
    }

    fn refresh(&mut self, v: NodeId) {
        let new = builder_signature(&self.builder, v);
        if new != self.sigs[v] {
            let old = std::mem::replace(&mut self.sigs[v], new.clone());
            let c = self.counts.get_mut(&old).unwrap();
            *c -= 1;
            if *c == 0 {
                self.counts.remove(&old);
            }
            *self.counts.entry(new).or_insert(0) += 1;
        }
    }

    fn add_node(&mut self) -> NodeId {
        let label = format!("d{}", self.next_dummy);
        self.next_dummy += 1;
        let v = self.builder.add_node(label);
        let sig = Signature {
            degree: 0,
            subgraph_edges: 0,
            internal_degree_sequence: vec![0],
        };
        self.sigs.push(sig.clone());
        *self.counts.entry(sig).or_insert(0) += 1;
        v
    }

    // Only u, v, and their common neighbors can change signature when the
    // edge (u, v) toggles.
    fn affected(&self, u: NodeId, v: NodeId) -> Vec<NodeId> {
        let nu: std::collections::BTreeSet<NodeId> = self.builder.neighbors(u).collect();
        let mut out: Vec<NodeId> = self
            .builder
            .neighbors(v)
            .filter(|w| nu.contains(w))
            .collect();
        out.push(u);
        out.push(v);
        out
    }

    fn add_edge(&mut self, u: NodeId, v: NodeId) {
        self.builder.add_edge(u, v);
        for w in self.affected(u, v) {
            self.refresh(w);
        }
    }

    fn remove_edge(&mut self, u: NodeId, v: NodeId) {
        let affected = self.affected(u, v);
        self.builder.remove_edge(u, v);
        for w in affected {
            self.refresh(w);
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum EdgeOp {
    Add(NodeId, NodeId),
    Remove(NodeId, NodeId),
    AddDummyEdge(NodeId),
}

/// Havel-Hakimi realization over the given vertices with the given target
/// degrees; None when the sequence is not graphical.
fn havel_hakimi(vertices: &[NodeId], targets: &[usize]) -> Option<Vec<(NodeId, NodeId)>> {
    let mut rem: Vec<(usize, NodeId)> = targets
        .iter()
        .copied()
        .zip(vertices.iter().copied())
        .collect();
    let mut edges = Vec::new();
    loop {
        rem.sort_unstable_by(|a, b| b.cmp(a));
        if rem.first().is_none_or(|&(d, _)| d == 0) {
            return Some(edges);
        }
        let (d, v) = rem[0];
        if d > rem.len() - 1 {
            return None;
        }
        rem[0].0 = 0;
        for item in rem.iter_mut().skip(1).take(d) {
            if item.0 == 0 {
                return None;
            }
            item.0 -= 1;
            edges.push((v.min(item.1), v.max(item.1)));
        }
    }
}

/// Plan the edge edits that give `node` the target signature, without
/// touching any node for which `frozen` is true. None when infeasible.
fn plan_morph(
    state: &ModifState,
    node: NodeId,
    target: &Signature,
    frozen_orig: &[bool],
) -> Option<Vec<EdgeOp>> {
    let b = &state.builder;
    // dummies (ids past the original range) are never frozen
    let frozen = |x: NodeId| x < frozen_orig.len() && frozen_orig[x];
    let mut ops: Vec<EdgeOp> = Vec::new();
    let mut neighbors: Vec<NodeId> = b.neighbors(node).collect();

    // 1. equalize reference degree
    if b.degree(node) < target.degree {
        for _ in 0..target.degree - b.degree(node) {
            ops.push(EdgeOp::AddDummyEdge(node));
        }
    } else if b.degree(node) > target.degree {
        // drop edges, dummies first, then highest-degree neighbors
        let mut removable: Vec<NodeId> =
            neighbors.iter().copied().filter(|&x| !frozen(x)).collect();
        removable.sort_unstable_by_key(|&x| (!b.is_dummy(x), std::cmp::Reverse(b.degree(x)), x));
        let need = b.degree(node) - target.degree;
        if removable.len() < need {
            return None;
        }
        for &x in removable.iter().take(need) {
            ops.push(EdgeOp::Remove(node, x));
            neighbors.retain(|&y| y != x);
        }
    }
    let planned_dummies = ops
        .iter()
        .filter(|op| matches!(op, EdgeOp::AddDummyEdge(_)))
        .count();

    // 2. equalize the internal degree sequence among the (post-step-1)
    // neighbors. The reference contributes one entry equal to `degree`; each
    // neighbor entry is 1 (edge to reference) + its edges to other neighbors.
    let mut targets_among: Vec<usize> = {
        let mut seq = target.internal_degree_sequence.clone();
        let pos = seq.iter().position(|&d| d == target.degree)?;
        seq.remove(pos);
        seq.iter()
            .map(|&d| d.checked_sub(1))
            .collect::<Option<Vec<_>>>()?
    };
    targets_among.sort_unstable_by(|a, b| b.cmp(a));
    if targets_among.len() != neighbors.len() + planned_dummies {
        return None;
    }

    // frozen neighbors keep their current in-neighborhood connectivity
    let is_nbr = |x: NodeId, nbrs: &[NodeId]| nbrs.contains(&x);
    let mut frozen_vals: Vec<usize> = Vec::new();
    let mut free: Vec<NodeId> = Vec::new();
    for &x in &neighbors {
        if frozen(x) {
            let among = b
                .neighbors(x)
                .filter(|&y| y != node && is_nbr(y, &neighbors))
                .count();
            frozen_vals.push(among);
        } else {
            free.push(x);
        }
    }
    // multiset-subtract frozen values from the targets
    let mut remaining = targets_among;
    for fv in frozen_vals {
        let pos = remaining.iter().position(|&t| t == fv)?;
        remaining.remove(pos);
    }
    if remaining.len() != free.len() + planned_dummies {
        return None;
    }

    // each free neighbor keeps its frozen-incident internal edges as a floor
    let mut baselines: Vec<usize> = free
        .iter()
        .map(|&x| {
            b.neighbors(x)
                .filter(|&y| y != node && is_nbr(y, &neighbors) && frozen(y))
                .count()
        })
        .collect();
    baselines.extend(std::iter::repeat_n(0, planned_dummies));
    // pair largest targets with largest baselines
    let mut order: Vec<usize> = (0..baselines.len()).collect();
    order.sort_unstable_by_key(|&i| (std::cmp::Reverse(baselines[i]), i));
    remaining.sort_unstable_by(|a, b| b.cmp(a));
    let mut adjustable = vec![0usize; baselines.len()];
    for (rank, &i) in order.iter().enumerate() {
        let t = remaining[rank];
        if t < baselines[i] {
            return None;
        }
        adjustable[i] = t - baselines[i];
    }

    // realize the adjustable part among free members from scratch
    let free_slots: Vec<NodeId> = free
        .iter()
        .copied()
        .chain((0..planned_dummies).map(|i| DUMMY_SLOT_BASE + i))
        .collect();
    let new_edges = havel_hakimi(&free_slots, &adjustable)?;
    let cur_edges: Vec<(NodeId, NodeId)> = {
        let mut cur = Vec::new();
        for (i, &x) in free.iter().enumerate() {
            for &y in &free[i + 1..] {
                if b.has_edge(x, y) {
                    cur.push((x.min(y), x.max(y)));
                }
            }
        }
        cur
    };
    // prefer additions: keep edges shared by the current and target sets
    for &(x, y) in &cur_edges {
        if !new_edges.contains(&(x, y)) {
            ops.push(EdgeOp::Remove(x, y));
        }
    }
    for &(x, y) in &new_edges {
        if x < DUMMY_SLOT_BASE && y < DUMMY_SLOT_BASE && cur_edges.contains(&(x, y)) {
            continue;
        }
        ops.push(EdgeOp::Add(x, y));
    }
    Some(ops)
}

// Placeholder ids for dummies that exist only in a plan; resolved on apply.
const DUMMY_SLOT_BASE: usize = usize::MAX / 2;

fn apply_plan(state: &mut ModifState, node: NodeId, ops: &[EdgeOp]) {
    let mut dummy_map: BTreeMap<usize, NodeId> = BTreeMap::new();
    let mut resolve = |state: &mut ModifState, id: NodeId| -> NodeId {
        if id >= DUMMY_SLOT_BASE {
            *dummy_map.entry(id).or_insert_with(|| state.add_node())
        } else {
            id
        }
    };
    // create the dummies attached to the reference first, in slot order
    let mut slot = DUMMY_SLOT_BASE;
    for op in ops {
        match *op {
            EdgeOp::AddDummyEdge(v) => {
                let d = resolve(state, slot);
                slot += 1;
                state.add_edge(v, d);
            }
            EdgeOp::Remove(u, v) => {
                let u = resolve(state, u);
                let v = resolve(state, v);
                state.remove_edge(u, v);
            }
            EdgeOp::Add(u, v) => {
                let u = resolve(state, u);
                let v = resolve(state, v);
                state.add_edge(u, v);
            }
        }
    }
    let _ = node;
}

const MODIF_MAX_PASSES: usize = 12;

/// Node modification: adds dummy nodes and edits edges until every eligible
/// node shares its equality-criterion signature with at least k-1 others.
pub fn anonymize_modification(
    g: &Graph,
    k: usize,
    strategy: Strategy,
    ctx: &RestrictionContext,
    w: &DistanceWeights,
) -> Result<AnonymizedGraph> {
    if strategy == Strategy::Local1 {
        return Err(GraphError::Contract(
            "modification supports global and local2 strategies only".into(),
        ));
    }
    let n = g.node_count();
    let run_eligible: Vec<bool> = match strategy {
        Strategy::Global => vec![true; n],
        _ => ctx.eligible.clone(),
    };
    // frozen under the restricted method: the role nodes themselves
    let frozen_orig: Vec<bool> = match strategy {
        Strategy::Global => vec![false; n],
        _ => (0..n).map(|v| !ctx.eligible[v]).collect(),
    };

    let mut state = ModifState::new(g);

    for _pass in 0..MODIF_MAX_PASSES {
        let mut unsatisfied: Vec<NodeId> = (0..n)
            .filter(|&v| run_eligible[v] && state.class_size(v) < k)
            .collect();
        if unsatisfied.is_empty() {
            break;
        }
        // Zhou's guideline: match in descending order of degree
        unsatisfied.sort_unstable_by_key(|&v| (std::cmp::Reverse(state.builder.degree(v)), v));
        let u_before = unsatisfied.len();
        let mut locked = vec![false; n];

        for &seed in &unsatisfied {
            if locked[seed] || state.class_size(seed) >= k {
                continue;
            }
            let pool = candidate_pool(g, seed, strategy, ctx)?;
            let open: Vec<NodeId> = pool
                .iter()
                .copied()
                .filter(|&u| !locked[u] && state.class_size(u) < k)
                .collect();
            let need = k - state.class_size(seed);
            let (partners, _) = rank_candidates(&ctx.features, seed, &open, w, need)?;

            if partners.is_empty() {
                // no unsatisfied partner: join the nearest satisfied class
                let satisfied: Vec<NodeId> = pool
                    .iter()
                    .copied()
                    .filter(|&u| state.class_size(u) >= k)
                    .collect();
                let (targets, _) =
                    rank_candidates(&ctx.features, seed, &satisfied, w, satisfied.len())?;
                for t in targets {
                    let target_sig = state.sigs[t].clone();
                    if let Some(plan) = plan_morph(&state, seed, &target_sig, &frozen_orig) {
                        apply_plan(&mut state, seed, &plan);
                        locked[seed] = true;
                        break;
                    }
                }
                continue;
            }

            let target_sig = state.sigs[seed].clone();
            // a partner's morph must not disturb the seed's own signature:
            // reject plans editing edges incident to the seed or internal to
            // its closed neighborhood
            let seed_hood: std::collections::BTreeSet<NodeId> = std::iter::once(seed)
                .chain(state.builder.neighbors(seed))
                .collect();
            let disturbs_seed = |plan: &[EdgeOp]| {
                plan.iter().any(|op| match *op {
                    EdgeOp::Add(x, y) | EdgeOp::Remove(x, y) => {
                        x == seed || y == seed || (seed_hood.contains(&x) && seed_hood.contains(&y))
                    }
                    EdgeOp::AddDummyEdge(v) => v == seed,
                })
            };
            let mut morphed = 0usize;
            for &c in &partners {
                if state.sigs[c] == target_sig {
                    locked[c] = true;
                    morphed += 1;
                    continue;
                }
                if let Some(plan) = plan_morph(&state, c, &target_sig, &frozen_orig) {
                    if disturbs_seed(&plan) {
                        continue;
                    }
                    apply_plan(&mut state, c, &plan);
                    debug_assert_eq!(state.sigs[c], target_sig);
                    locked[c] = true;
                    morphed += 1;
                }
            }
            if morphed > 0 {
                locked[seed] = true;
            }
        }
        // morphs can perturb bystanders near the edited nodes; keep iterating
        // only while a pass strictly shrinks the unsatisfied set
        let u_after = (0..n)
            .filter(|&v| run_eligible[v] && state.class_size(v) < k)
            .count();
        if u_after >= u_before {
            break;
        }
    }

    // guarantee: pad any still-undersized class with isolated replicas of the
    // closed neighborhood of its lowest-id member
    let mut padded: Vec<NodeId> = (0..n)
        .filter(|&v| run_eligible[v] && state.class_size(v) < k)
        .collect();
    padded.sort_unstable();
    for v in padded {
        while state.class_size(v) < k {
            add_replica(&mut state, v);
        }
    }

    let published = state.builder.build();
    // classes over all published nodes, by final signature
    let mut class_map: HashMap<Signature, Vec<NodeId>> = HashMap::new();
    for (v, sig) in state.sigs.iter().enumerate() {
        class_map.entry(sig.clone()).or_default().push(v);
    }
    let mut classes: Vec<Vec<NodeId>> = class_map.into_values().collect();
    classes.sort_unstable();
    let excluded = (0..n).filter(|&v| !run_eligible[v]).collect();
    Ok(AnonymizedGraph {
        published,
        method: method_for(false, strategy),
        k,
        provenance: Provenance::Classes(classes),
        excluded,
        node_map: (0..n).collect(),
        original_count: n,
    })
}

/// Add an isolated copy of the closed 1-hop subgraph of `v`; the copy's
/// reference shares the equality-criterion signature with `v`.
fn add_replica(state: &mut ModifState, v: NodeId) {
    let members: Vec<NodeId> = state
        .builder
        .neighbors(v)
        .chain(std::iter::once(v))
        .collect();
    let member_set: std::collections::BTreeSet<NodeId> = members.iter().copied().collect();
    let clones: BTreeMap<NodeId, NodeId> =
        member_set.iter().map(|&m| (m, state.add_node())).collect();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for &m in &member_set {
        for w in state.builder.neighbors(m) {
            if m < w && member_set.contains(&w) {
                edges.push((m, w));
            }
        }
    }
    for (m, w) in edges {
        state.add_edge(clones[&m], clones[&w]);
    }
}

/// Post-hoc audit of the k-anonymity contract.
#[derive(Debug, Clone)]
pub struct KAnonymityReport {
    pub passed: bool,
    pub violations: Vec<String>,
}

pub fn verify_k_anonymity(a: &AnonymizedGraph) -> KAnonymityReport {
    let mut violations = Vec::new();
    let k = a.k;
    match &a.provenance {
        Provenance::Supernodes(supers) => {
            let mut seen = vec![false; a.original_count];
            for s in supers {
                if s.size() < k || s.size() > 2 * k - 1 {
                    violations.push(format!(
                        "supernode {} has size {} outside [{k}, {}]",
                        s.id,
                        s.size(),
                        2 * k - 1
                    ));
                }
                for &m in &s.contents {
                    if seen[m] {
                        violations.push(format!("node {m} appears in two supernodes"));
                    }
                    seen[m] = true;
                }
            }
            for &v in &a.excluded {
                if seen[v] {
                    violations.push(format!("excluded node {v} was merged"));
                }
            }
        }
        Provenance::Classes(classes) => {
            let mut class_of: HashMap<NodeId, usize> = HashMap::new();
            for (ci, class) in classes.iter().enumerate() {
                for &m in class {
                    class_of.insert(m, ci);
                }
            }
            let excluded: std::collections::BTreeSet<NodeId> = a.excluded.iter().copied().collect();
            for v in 0..a.original_count {
                if excluded.contains(&v) {
                    continue;
                }
                let size = class_of.get(&v).map_or(0, |&ci| classes[ci].len());
                if size < k {
                    violations.push(format!("node {v} equivalence class has size {size} < {k}"));
                }
            }
        }
    }

    // every eligible node's degree-query candidate set must reach k
    let g = &a.published;
    let mut degree_weight: HashMap<usize, usize> = HashMap::new();
    for v in 0..g.node_count() {
        *degree_weight.entry(g.degree(v)).or_insert(0) += a.content_size(v);
    }
    let excluded: std::collections::BTreeSet<NodeId> = a.excluded.iter().copied().collect();
    for v in 0..a.original_count {
        if excluded.contains(&v) {
            continue;
        }
        let pub_id = a.node_map[v];
        let size = degree_weight[&g.degree(pub_id)];
        if size < k {
            violations.push(format!(
                "node {v}: degree-query candidate set has size {size} < {k}"
            ));
        }
    }

    KAnonymityReport {
        passed: violations.is_empty(),
        violations,
    }
}
