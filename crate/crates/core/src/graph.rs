//! Undirected simple graph over dense integer ids, SNAP edge-list I/O,
//! 1-hop neighborhood extraction and node merging.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{GraphError, Result};

pub type NodeId = usize;

/// Undirected simple graph. Node ids are dense after remapping; the external
/// label of each node (the id string from the source file) is kept for reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    labels: Vec<String>,
    edge_count: usize,
}

impl Graph {
    /// Build from an edge iterator over external label pairs. Self-loops are
    /// dropped, duplicate and reversed-duplicate edges collapsed.
    pub fn from_labeled_edges<I, S>(edges: I) -> Graph
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut ids: BTreeMap<String, NodeId> = BTreeMap::new();
        let mut raw: Vec<(NodeId, NodeId)> = Vec::new();
        for (a, b) in edges {
            let a = a.as_ref();
            let b = b.as_ref();
            let next = ids.len();
            let ua = *ids.entry(a.to_string()).or_insert(next);
            let next = ids.len();
            let ub = *ids.entry(b.to_string()).or_insert(next);
            raw.push((ua, ub));
        }
        let n = ids.len();
        let mut labels = vec![String::new(); n];
        for (label, id) in ids {
            labels[id] = label;
        }
        Self::from_dense_edges(n, labels, raw)
    }

    /// Build from dense-id edges; dedups, symmetrizes and drops self-loops.
    pub fn from_dense_edges(n: usize, labels: Vec<String>, edges: Vec<(NodeId, NodeId)>) -> Graph {
        let mut set: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                continue;
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            set.insert((a, b));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &set {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph {
            adj,
            labels,
            edge_count: set.len(),
        }
    }

    /// Convenience constructor for tests: `n` nodes labeled by index.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Graph {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_dense_edges(n, labels, edges.to_vec())
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Sorted edge list with u < v.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.adj.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(v))
        }
    }

    /// 1-hop neighborhood subgraph rooted at `v` with the internal/external
    /// degree split of each member.
    pub fn neighborhood(&self, v: NodeId) -> Result<NeighborhoodSubgraph> {
        self.check_node(v)?;
        let mut members: Vec<NodeId> = Vec::with_capacity(self.degree(v) + 1);
        members.push(v);
        members.extend_from_slice(&self.adj[v]);
        members.sort_unstable();
        let member_set: BTreeSet<NodeId> = members.iter().copied().collect();
        let mut internal_edges = Vec::new();
        let mut external_degree = Vec::with_capacity(members.len());
        for &m in &members {
            let mut ext = 0usize;
            for &w in &self.adj[m] {
                if member_set.contains(&w) {
                    if m < w {
                        internal_edges.push((m, w));
                    }
                } else {
                    ext += 1;
                }
            }
            external_degree.push(ext);
        }
        Ok(NeighborhoodSubgraph {
            reference: v,
            members,
            internal_edges,
            external_degree,
        })
    }

    /// Merge nodes `a` and `b` into one supernode. Any a-b edge becomes
    /// internal and is dropped; a common neighbor contributes one edge.
    pub fn merge_nodes(&self, a: NodeId, b: NodeId) -> Result<(Graph, Supernode)> {
        self.check_node(a)?;
        self.check_node(b)?;
        if a == b {
            return Err(GraphError::InvalidMerge(format!(
                "cannot merge node {a} with itself"
            )));
        }
        let mut groups: Vec<Vec<NodeId>> = Vec::new();
        for v in 0..self.node_count() {
            if v == a {
                groups.push(vec![a, b]);
            } else if v != b {
                groups.push(vec![v]);
            }
        }
        let (g, mut supers, _) = self.contract_groups(&groups);
        let sn = supers.remove(
            supers
                .iter()
                .position(|s| s.contents.len() == 2)
                .expect("merged supernode present"),
        );
        Ok((g, sn))
    }

    /// Contract each group of nodes into one published node. `groups` must be
    /// disjoint and cover every node (singletons for untouched nodes).
    /// Returns the contracted graph, the supernodes of size > 1, and the
    /// old-id -> new-id map.
    pub fn contract_groups(&self, groups: &[Vec<NodeId>]) -> (Graph, Vec<Supernode>, Vec<NodeId>) {
        let mut map = vec![usize::MAX; self.node_count()];
        for (gi, group) in groups.iter().enumerate() {
            for &v in group {
                debug_assert_eq!(map[v], usize::MAX, "groups must be disjoint");
                map[v] = gi;
            }
        }
        debug_assert!(map.iter().all(|&m| m != usize::MAX), "groups must cover V");
        let mut edges = Vec::with_capacity(self.edge_count);
        for (u, v) in self.edges() {
            if map[u] != map[v] {
                edges.push((map[u], map[v]));
            }
        }
        let labels: Vec<String> = groups
            .iter()
            .map(|g| {
                if g.len() == 1 {
                    self.labels[g[0]].clone()
                } else {
                    let mut names: Vec<&str> = g.iter().map(|&v| self.labels[v].as_str()).collect();
                    names.sort_unstable();
                    format!("s[{}]", names.join("+"))
                }
            })
            .collect();
        let g = Graph::from_dense_edges(groups.len(), labels, edges);
        let supers = groups
            .iter()
            .enumerate()
            .filter(|(_, grp)| grp.len() > 1)
            .map(|(gi, grp)| {
                let mut contents = grp.clone();
                contents.sort_unstable();
                Supernode { id: gi, contents }
            })
            .collect();
        (g, supers, map)
    }

    /// FNV-1a hash over the sorted edge list, used to fingerprint a graph so
    /// stale trained weights are rejected.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut mix = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        mix(self.node_count() as u64);
        for (u, v) in self.edges() {
            mix(u as u64);
            mix(v as u64);
        }
        h
    }

    /// Parse a SNAP edge-list file: lines `u<ws>v`, '#' comments ignored.
    /// Directed inputs are symmetrized; self-loops and duplicates collapsed.
    pub fn load_edge_list(path: &Path) -> Result<Graph> {
        let file = std::fs::File::open(path).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let reader = std::io::BufReader::new(file);
        let mut edges: Vec<(String, String)> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let u = it.next();
            let v = it.next();
            match (u, v, it.next()) {
                (Some(u), Some(v), None)
                    if u.chars().all(|c| c.is_ascii_digit())
                        && v.chars().all(|c| c.is_ascii_digit()) =>
                {
                    edges.push((u.to_string(), v.to_string()));
                }
                _ => {
                    return Err(GraphError::Parse {
                        line: idx + 1,
                        msg: format!("expected two integer tokens, got {trimmed:?}"),
                    })
                }
            }
        }
        Ok(Graph::from_labeled_edges(edges))
    }

    /// Write as SNAP edge-list text: one edge per line, u < v, sorted, using
    /// internal dense ids.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut w = BufWriter::new(file);
        let mut emit = || -> std::io::Result<()> {
            for (u, v) in self.edges() {
                writeln!(w, "{u}\t{v}")?;
            }
            w.flush()
        };
        emit().map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// 1-hop subgraph around a reference node plus external-degree annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodSubgraph {
    pub reference: NodeId,
    /// Sorted; contains the reference.
    pub members: Vec<NodeId>,
    /// Host edges with both endpoints in `members`, u < v.
    pub internal_edges: Vec<(NodeId, NodeId)>,
    /// Edges leaving the subgraph, per member (parallel to `members`).
    pub external_degree: Vec<usize>,
}

impl NeighborhoodSubgraph {
    pub fn member_index(&self, v: NodeId) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    pub fn internal_degree(&self, v: NodeId) -> usize {
        self.internal_edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Local adjacency lists indexed by member position, plus the reference's
    /// member position.
    pub fn local_adjacency(&self) -> (usize, Vec<Vec<usize>>) {
        let mut adj = vec![Vec::new(); self.members.len()];
        for &(a, b) in &self.internal_edges {
            let ia = self.member_index(a).unwrap();
            let ib = self.member_index(b).unwrap();
            adj[ia].push(ib);
            adj[ib].push(ia);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        (self.member_index(self.reference).unwrap(), adj)
    }

    /// Sorted (descending) multiset of member degrees within the subgraph.
    pub fn internal_degree_sequence(&self) -> Vec<usize> {
        let (_, adj) = self.local_adjacency();
        let mut seq: Vec<usize> = adj.iter().map(|l| l.len()).collect();
        seq.sort_unstable_by(|a, b| b.cmp(a));
        seq
    }
}

/// A published node standing for a set of merged original nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supernode {
    /// Node id in the published graph.
    pub id: NodeId,
    /// Original node ids, sorted.
    pub contents: Vec<NodeId>,
}

impl Supernode {
    pub fn size(&self) -> usize {
        self.contents.len()
    }
}

/// Mutable graph under construction; used by the modification methods, which
/// add dummy nodes and edit edges.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    adj: Vec<BTreeSet<NodeId>>,
    labels: Vec<String>,
    /// Number of nodes present in the graph the builder started from.
    original_count: usize,
}

impl GraphBuilder {
    pub fn from_graph(g: &Graph) -> GraphBuilder {
        GraphBuilder {
            adj: g.adj.iter().map(|l| l.iter().copied().collect()).collect(),
            labels: g.labels.clone(),
            original_count: g.node_count(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn original_count(&self) -> usize {
        self.original_count
    }

    pub fn is_dummy(&self, v: NodeId) -> bool {
        v >= self.original_count
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn add_node(&mut self, label: String) -> NodeId {
        self.adj.push(BTreeSet::new());
        self.labels.push(label);
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        if u == v {
            return false;
        }
        let inserted = self.adj[u].insert(v);
        self.adj[v].insert(u);
        inserted
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> bool {
        let removed = self.adj[u].remove(&v);
        self.adj[v].remove(&u);
        removed
    }

    /// Number of edges in the closed 1-hop subgraph of `v`.
    pub fn subgraph_edge_count(&self, v: NodeId) -> usize {
        let members: BTreeSet<NodeId> = self.adj[v]
            .iter()
            .copied()
            .chain(std::iter::once(v))
            .collect();
        let mut count = 0;
        for &m in &members {
            for w in self.adj[m].iter() {
                if m < *w && members.contains(w) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn build(&self) -> Graph {
        let adj: Vec<Vec<NodeId>> = self
            .adj
            .iter()
            .map(|s| s.iter().copied().collect())
            .collect();
        let edge_count = adj.iter().map(|l| l.len()).sum::<usize>() / 2;
        Graph {
            adj,
            labels: self.labels.clone(),
            edge_count,
        }
    }
}
