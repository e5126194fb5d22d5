//! Seeded synthetic graphs for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};

/// Directed G(n, m) with m = n * mean_degree arcs drawn uniformly
/// (self-loops excluded, duplicates collapse in the CSR build).
pub fn erdos_renyi_digraph(n: usize, mean_degree: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = (n as f64 * mean_degree).round() as usize;
    let mut arcs = Vec::with_capacity(m);
    while arcs.len() < m {
        let u = rng.gen_range(0..n as NodeId);
        let v = rng.gen_range(0..n as NodeId);
        if u != v {
            arcs.push((u, v));
        }
    }
    Graph::from_arcs(n, &arcs)
}

/// Random undirected graph: each sampled edge contributes both arcs.
pub fn random_undirected(n: usize, mean_degree: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = (n as f64 * mean_degree / 2.0).round() as usize;
    let mut arcs = Vec::with_capacity(2 * m);
    let mut edges = 0;
    while edges < m {
        let u = rng.gen_range(0..n as NodeId);
        let v = rng.gen_range(0..n as NodeId);
        if u != v {
            arcs.push((u, v));
            arcs.push((v, u));
            edges += 1;
        }
    }
    Graph::from_arcs(n, &arcs)
}

/// Power-law digraph by preferential attachment: node t sends
/// `arcs_per_node` arcs to earlier nodes chosen proportionally to
/// in-degree + 1 (the classic repeated-endpoint trick).
pub fn power_law_digraph(n: usize, arcs_per_node: usize, seed: u64) -> Graph {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::with_capacity(n * arcs_per_node);
    // endpoint pool: every node once (the +1 smoothing) plus one entry
    // per received arc
    let mut pool: Vec<NodeId> = vec![0];
    for t in 1..n as NodeId {
        for _ in 0..arcs_per_node {
            let target = pool[rng.gen_range(0..pool.len())];
            arcs.push((t, target));
            pool.push(target);
        }
        pool.push(t);
    }
    Graph::from_arcs(n, &arcs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_shape_and_determinism() {
        let g = erdos_renyi_digraph(200, 5.0, 42);
        assert_eq!(g.node_count(), 200);
        let m = g.arc_count();
        assert!((900..=1000).contains(&m), "m={m}"); // duplicates collapse
        let h = erdos_renyi_digraph(200, 5.0, 42);
        assert_eq!(h.arc_count(), m);
        assert_ne!(erdos_renyi_digraph(200, 5.0, 43).arc_count(), 0);
    }

    #[test]
    fn undirected_is_symmetric() {
        let g = random_undirected(100, 6.0, 7);
        for u in 0..100u32 {
            for &v in g.out_neighbors(u) {
                assert!(g.out_neighbors(v).contains(&u));
            }
        }
    }

    #[test]
    fn power_law_skew() {
        let g = power_law_digraph(2000, 5, 3);
        assert_eq!(g.node_count(), 2000);
        let mut degs: Vec<usize> = (0..2000u32).map(|v| g.in_degree(v)).collect();
        degs.sort_unstable_by(|a, b| b.cmp(a));
        // heavy head: the top node collects far more than the mean
        assert!(degs[0] > 50, "max in-degree {}", degs[0]);
        // most nodes stay near zero
        let small = degs.iter().filter(|&&d| d <= 5).count();
        assert!(small > 1000, "small={small}");
    }
}
