//! Seeded simulation of sqrt(c)-walks and paired meeting trials.
//!
//! A sqrt(c)-walk stops with probability 1-sqrt(c) at each step and
//! otherwise moves to a uniform in-neighbor; a node without in-neighbors
//! stops the walk unconditionally. Two walks meet when they occupy the
//! same node at the same step (step >= 1) while both are still active;
//! stopped walks never meet.
//!
//! Every trial draws from a substream keyed by (purpose, node, trial), so
//! parallel and serial runs agree bit-for-bit regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};

/// Purpose tag mixed into substream keys so different consumers of the
/// same master seed never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    DiagTrial,
    McWalk,
    QuerySample,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::DiagTrial => 1,
            StreamPurpose::McWalk => 2,
            StreamPurpose::QuerySample => 3,
        }
    }
}

/// Deterministic substream factory over a single master seed.
#[derive(Debug, Clone, Copy)]
pub struct RandomSource {
    master_seed: u64,
}

impl RandomSource {
    pub fn new(master_seed: u64) -> RandomSource {
        RandomSource { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Derive the stream for (purpose, node, trial). Identical keys yield
    /// identical byte streams; distinct keys yield independent streams.
    pub fn stream(&self, purpose: StreamPurpose, node: NodeId, trial: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&purpose.tag().to_le_bytes());
        seed[16..24].copy_from_slice(&(node as u64).to_le_bytes());
        seed[24..32].copy_from_slice(&trial.to_le_bytes());
        ChaCha8Rng::from_seed(seed)
    }
}

/// Outcome of a non-stop prefix pair trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixTrialOutcome {
    /// The walks co-located at some step 1..=prefix_len.
    MetWithinPrefix,
    /// A walk was forced onto a node with no in-neighbors before the
    /// prefix completed; the underlying sqrt(c)-walk would have stopped.
    WalkDied,
    /// Both walks completed the prefix without meeting. The survivors are
    /// distinct except in the degenerate prefix_len = 0 case.
    Survived(NodeId, NodeId),
}

/// One sqrt(c)-walk step. Returns None when the walk stops (dead end or
/// stop draw), otherwise the next node.
#[inline]
fn step<R: Rng>(g: &Graph, u: NodeId, sqrt_c: f64, rng: &mut R) -> Option<NodeId> {
    let nbrs = g.in_neighbors(u);
    if nbrs.is_empty() {
        return None;
    }
    if rng.gen::<f64>() >= sqrt_c {
        return None;
    }
    Some(nbrs[rng.gen_range(0..nbrs.len())])
}

/// Run two plain sqrt(c)-walks from `a` and `b` until one stops; true iff
/// they co-locate at some step >= 1 while both active.
fn walks_meet<R: Rng>(g: &Graph, mut a: NodeId, mut b: NodeId, sqrt_c: f64, rng: &mut R) -> bool {
    loop {
        let na = step(g, a, sqrt_c, rng);
        let nb = step(g, b, sqrt_c, rng);
        match (na, nb) {
            (Some(x), Some(y)) => {
                if x == y {
                    return true;
                }
                a = x;
                b = y;
            }
            _ => return false,
        }
    }
}

/// Two independent sqrt(c)-walks from `k`; true iff they meet.
/// The shared start at step 0 does not count as a meeting.
pub fn paired_meeting_trial<R: Rng>(g: &Graph, k: NodeId, sqrt_c: f64, rng: &mut R) -> bool {
    walks_meet(g, k, k, sqrt_c, rng)
}

/// Two walks from `k` that cannot stop for `prefix_len` steps.
pub fn nonstop_prefix_pair_trial<R: Rng>(
    g: &Graph,
    k: NodeId,
    prefix_len: usize,
    rng: &mut R,
) -> PrefixTrialOutcome {
    let (mut a, mut b) = (k, k);
    for _ in 0..prefix_len {
        let na = forced_step(g, a, rng);
        let nb = forced_step(g, b, rng);
        match (na, nb) {
            (Some(x), Some(y)) => {
                if x == y {
                    return PrefixTrialOutcome::MetWithinPrefix;
                }
                a = x;
                b = y;
            }
            _ => return PrefixTrialOutcome::WalkDied,
        }
    }
    PrefixTrialOutcome::Survived(a, b)
}

#[inline]
fn forced_step<R: Rng>(g: &Graph, u: NodeId, rng: &mut R) -> Option<NodeId> {
    let nbrs = g.in_neighbors(u);
    if nbrs.is_empty() {
        None
    } else {
        Some(nbrs[rng.gen_range(0..nbrs.len())])
    }
}

/// Plain sqrt(c)-walks from the survivors of a prefix trial. With
/// `x == y == k` (degenerate prefix 0) this reproduces
/// [`paired_meeting_trial`] exactly, draw for draw.
pub fn continuation_meet_trial<R: Rng>(
    g: &Graph,
    x: NodeId,
    y: NodeId,
    sqrt_c: f64,
    rng: &mut R,
) -> bool {
    walks_meet(g, x, y, sqrt_c, rng)
}

/// Simulate one capped sqrt(c)-walk and return the visited nodes at steps
/// 1..=len (start node excluded). Used by the Monte-Carlo baseline.
pub fn capped_walk<R: Rng>(
    g: &Graph,
    start: NodeId,
    sqrt_c: f64,
    cap: usize,
    rng: &mut R,
) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut u = start;
    for _ in 0..cap {
        match step(g, u, sqrt_c, rng) {
            Some(v) => {
                out.push(v);
                u = v;
            }
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    const C: f64 = 0.6;

    fn k3() -> Graph {
        Graph::from_arcs(3, &[(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)])
    }

    #[test]
    fn dead_end_never_meets() {
        let g = Graph::from_arcs(2, &[(0, 1)]); // node 0 has d_in = 0
        let src = RandomSource::new(7);
        for t in 0..100 {
            let mut rng = src.stream(StreamPurpose::DiagTrial, 0, t);
            assert!(!paired_meeting_trial(&g, 0, C.sqrt(), &mut rng));
        }
    }

    #[test]
    fn two_cycle_meet_fraction_is_c() {
        let g = Graph::from_arcs(2, &[(0, 1), (1, 0)]);
        let src = RandomSource::new(42);
        let n = 100_000u64;
        let mut meets = 0u64;
        for t in 0..n {
            let mut rng = src.stream(StreamPurpose::DiagTrial, 0, t);
            if paired_meeting_trial(&g, 0, C.sqrt(), &mut rng) {
                meets += 1;
            }
        }
        let frac = meets as f64 / n as f64;
        assert!((frac - C).abs() < 0.006, "frac={frac}");
    }

    #[test]
    fn k3_meet_fraction() {
        // pair-chain oracle value: 21/55
        let g = k3();
        let src = RandomSource::new(1);
        let n = 100_000u64;
        let mut meets = 0u64;
        for t in 0..n {
            let mut rng = src.stream(StreamPurpose::DiagTrial, 0, t);
            if paired_meeting_trial(&g, 0, C.sqrt(), &mut rng) {
                meets += 1;
            }
        }
        let frac = meets as f64 / n as f64;
        assert!((frac - 21.0 / 55.0).abs() < 0.006, "frac={frac}");
    }

    #[test]
    fn k3_continuation_from_distinct_starts() {
        // pair-chain oracle from distinct states: 3/11
        let g = k3();
        let src = RandomSource::new(2);
        let n = 100_000u64;
        let mut meets = 0u64;
        for t in 0..n {
            let mut rng = src.stream(StreamPurpose::DiagTrial, 0, t);
            if continuation_meet_trial(&g, 0, 1, C.sqrt(), &mut rng) {
                meets += 1;
            }
        }
        let frac = meets as f64 / n as f64;
        assert!((frac - 3.0 / 11.0).abs() < 0.006, "frac={frac}");
    }

    #[test]
    fn prefix_trial_cases() {
        let g = Graph::from_arcs(2, &[(0, 1), (1, 0)]);
        let src = RandomSource::new(3);
        let mut rng = src.stream(StreamPurpose::DiagTrial, 0, 0);
        // degenerate prefix returns both at k
        assert_eq!(
            nonstop_prefix_pair_trial(&g, 0, 0, &mut rng),
            PrefixTrialOutcome::Survived(0, 0)
        );
        // single in-neighbor forces co-location
        assert_eq!(
            nonstop_prefix_pair_trial(&g, 0, 1, &mut rng),
            PrefixTrialOutcome::MetWithinPrefix
        );
        // two dead-end in-neighbors: the walks either co-locate at step 1
        // or hit the dead ends at step 2 — nothing survives a prefix of 2
        let g = Graph::from_arcs(3, &[(0, 2), (1, 2)]);
        let (mut saw_met, mut saw_died) = (false, false);
        for t in 0..200 {
            let mut rng = src.stream(StreamPurpose::DiagTrial, 2, t);
            match nonstop_prefix_pair_trial(&g, 2, 2, &mut rng) {
                PrefixTrialOutcome::MetWithinPrefix => saw_met = true,
                PrefixTrialOutcome::WalkDied => saw_died = true,
                PrefixTrialOutcome::Survived(..) => panic!("cannot survive"),
            }
        }
        assert!(saw_met && saw_died);
    }

    #[test]
    fn determinism_across_key_reuse() {
        let g = k3();
        let src = RandomSource::new(99);
        for t in 0..50 {
            let mut a = src.stream(StreamPurpose::DiagTrial, 1, t);
            let mut b = src.stream(StreamPurpose::DiagTrial, 1, t);
            assert_eq!(
                paired_meeting_trial(&g, 1, C.sqrt(), &mut a),
                paired_meeting_trial(&g, 1, C.sqrt(), &mut b)
            );
        }
    }

    #[test]
    fn walk_length_is_geometric() {
        // chi-square goodness of fit on a dead-end-free graph,
        // significance 0.001
        let g = Graph::from_arcs(2, &[(0, 1), (1, 0)]);
        let sqrt_c = C.sqrt();
        let src = RandomSource::new(5);
        let trials = 100_000usize;
        let max_bin = 12usize; // last bin is the tail >= max_bin
        let mut counts = vec![0u64; max_bin + 1];
        for t in 0..trials {
            let walk = capped_walk(&g, 0, sqrt_c, 10_000, &mut src.stream(StreamPurpose::McWalk, 0, t as u64));
            counts[walk.len().min(max_bin)] += 1;
        }
        let mut chi2 = 0.0;
        for (len, &obs) in counts.iter().enumerate() {
            let p = if len < max_bin {
                (1.0 - sqrt_c) * sqrt_c.powi(len as i32)
            } else {
                sqrt_c.powi(max_bin as i32)
            };
            let expect = p * trials as f64;
            assert!(expect >= 5.0);
            chi2 += (obs as f64 - expect).powi(2) / expect;
        }
        // chi-square critical value at p = 0.001, df = 12
        assert!(chi2 < 32.909, "chi2={chi2}");
    }
}
