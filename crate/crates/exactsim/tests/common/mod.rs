//! Independent brute-force oracles, deliberately implemented with
//! different algorithms than the library code they check.

// not every test target uses every oracle
#![allow(dead_code)]

use std::collections::BTreeMap;

use exactsim::{Graph, NodeId};

/// First-meeting mass Z_l(k,q) for l = 1..=max_level by exhaustive
/// enumeration of all pairs of length-l in-neighbor paths: a pair
/// contributes c^l * w1 * w2 to the level and node of its first
/// co-location.
pub fn brute_z_tables(
    g: &Graph,
    k: NodeId,
    c: f64,
    max_level: usize,
) -> Vec<BTreeMap<NodeId, f64>> {
    // all forced reverse paths of length `max_level` from k (shorter
    // prefixes are read off the same list), with their probabilities
    let mut paths: Vec<(Vec<NodeId>, f64)> = vec![(vec![k], 1.0)];
    let mut out: Vec<BTreeMap<NodeId, f64>> = vec![BTreeMap::new(); max_level];
    for level in 1..=max_level {
        let mut extended = Vec::new();
        for (path, w) in &paths {
            let last = *path.last().unwrap();
            let nbrs = g.in_neighbors(last);
            for &u in nbrs {
                let mut p = path.clone();
                p.push(u);
                extended.push((p, w / nbrs.len() as f64));
            }
        }
        paths = extended;
        for (p1, w1) in &paths {
            for (p2, w2) in &paths {
                // first co-location must be at exactly `level`
                let first_meet = (1..=level).find(|&s| p1[s] == p2[s]);
                if first_meet == Some(level) {
                    *out[level - 1].entry(p1[level]).or_insert(0.0) +=
                        c.powi(level as i32) * w1 * w2;
                }
            }
        }
    }
    out
}

/// Exact D(k,k) by a dense ordered-pair absorbing DP: states are ordered
/// pairs (u,v) of alive positions that never met, stepped until the alive
/// mass is negligible. Independent of the library's unordered sparse DP.
pub fn dense_pair_diag(g: &Graph, k: NodeId, c: f64) -> f64 {
    let n = g.node_count();
    let mut alive = vec![0.0f64; n * n];
    alive[k as usize * n + k as usize] = 1.0;
    let mut meet = 0.0;
    let mut mass = 1.0;
    while mass > 1e-14 {
        let mut next = vec![0.0f64; n * n];
        for u in 0..n as NodeId {
            for v in 0..n as NodeId {
                let m = alive[u as usize * n + v as usize];
                if m == 0.0 {
                    continue;
                }
                let iu = g.in_neighbors(u);
                let iv = g.in_neighbors(v);
                if iu.is_empty() || iv.is_empty() {
                    continue;
                }
                let w = c * m / (iu.len() * iv.len()) as f64;
                for &a in iu {
                    for &b in iv {
                        if a == b {
                            meet += w;
                        } else {
                            next[a as usize * n + b as usize] += w;
                        }
                    }
                }
            }
        }
        alive = next;
        mass = alive.iter().sum();
    }
    1.0 - meet
}

/// The n=200 acceptance suite: 10 Erdos-Renyi digraphs and 10 random
/// undirected graphs, all at mean degree 5.
pub fn suite() -> Vec<Graph> {
    let mut graphs = Vec::new();
    for seed in 0..10 {
        graphs.push(exactsim::synth::erdos_renyi_digraph(200, 5.0, seed));
    }
    for seed in 1000..1010 {
        graphs.push(exactsim::synth::random_undirected(200, 5.0, seed));
    }
    graphs
}

/// Small random digraph from a seed, with dense-id arcs.
pub fn random_digraph(n: usize, arcs: usize, seed: u64) -> Graph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let list: Vec<(NodeId, NodeId)> = (0..arcs)
        .map(|_| {
            (
                rng.gen_range(0..n as NodeId),
                rng.gen_range(0..n as NodeId),
            )
        })
        .collect();
    Graph::from_arcs(n, &list)
}
