//! Brute-force reference implementations shared by the oracle and acceptance
//! test targets.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use graphanon::evaluate::QueryId;
use graphanon::graph::{Graph, NeighborhoodSubgraph};

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Rooted isomorphism by trying every permutation of the non-root members.
pub fn brute_force_isomorphic(a: &NeighborhoodSubgraph, b: &NeighborhoodSubgraph) -> bool {
    let (ra, adj_a) = a.local_adjacency();
    let (rb, adj_b) = b.local_adjacency();
    let n = adj_a.len();
    if n != adj_b.len() {
        return false;
    }
    let mat = |adj: &[Vec<usize>]| {
        let mut m = vec![false; n * n];
        for (u, nbrs) in adj.iter().enumerate() {
            for &v in nbrs {
                m[u * n + v] = true;
            }
        }
        m
    };
    let ma = mat(&adj_a);
    let mb = mat(&adj_b);
    let rest_a: Vec<usize> = (0..n).filter(|&v| v != ra).collect();
    let rest_b: Vec<usize> = (0..n).filter(|&v| v != rb).collect();

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, x);
                out.push(tail);
            }
        }
        out
    }

    for perm in permutations(&rest_b) {
        let mut map = vec![usize::MAX; n];
        map[ra] = rb;
        for (&x, &y) in rest_a.iter().zip(&perm) {
            map[x] = y;
        }
        let ok = (0..n).all(|u| (0..n).all(|v| ma[u * n + v] == mb[map[u] * n + map[v]]));
        if ok {
            return true;
        }
    }
    false
}

/// Betweenness by enumerating every shortest path explicitly.
pub fn betweenness_by_path_enumeration(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut bc = vec![0.0f64; n];
    for s in 0..n {
        let dist = graphanon::metrics::bfs_distances(g, s);
        for t in (s + 1)..n {
            if dist[t] == usize::MAX {
                continue;
            }
            // walk the predecessor DAG from t back to s, enumerating paths
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![t]];
            while let Some(path) = stack.pop() {
                let head = *path.last().unwrap();
                if head == s {
                    paths.push(path);
                    continue;
                }
                for &p in g.neighbors(head) {
                    if dist[p] + 1 == dist[head] {
                        let mut next = path.clone();
                        next.push(p);
                        stack.push(next);
                    }
                }
            }
            let total = paths.len() as f64;
            for path in paths {
                for &v in &path[1..path.len() - 1] {
                    bc[v] += 1.0 / total;
                }
            }
        }
    }
    bc
}

/// Independent H1/H2/SG signature computation for the bucket oracles.
pub fn slow_signature(g: &Graph, v: usize, q: QueryId) -> Vec<usize> {
    match q {
        QueryId::H1 => vec![g.degree(v)],
        QueryId::H2 => {
            let mut ds: Vec<usize> = g.neighbors(v).iter().map(|&u| g.degree(u)).collect();
            ds.sort_unstable();
            ds
        }
        QueryId::SG => {
            let mut members: Vec<usize> = g.neighbors(v).to_vec();
            members.push(v);
            let mut count = 0;
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    if g.has_edge(a, b) {
                        count += 1;
                    }
                }
            }
            vec![count]
        }
        _ => unreachable!("fingerprints have their own brute-force path"),
    }
}
