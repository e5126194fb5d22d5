//! Estimation of the diagonal correction matrix D.
//!
//! D(k,k) is the probability that two sqrt(c)-walks from k never meet; it
//! lies in [1-c, 1]. The basic estimator simulates paired walks and counts
//! non-meetings. The optimized estimator first computes the first-meeting
//! mass Z_l(k) exactly up to an adaptive level l(k) under an edge budget,
//! then samples only the residual tail, cutting variance by roughly a
//! factor of c^{l(k)}.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::ppr::SparseVector;
use crate::walk::{
    continuation_meet_trial, nonstop_prefix_pair_trial, paired_meeting_trial, PrefixTrialOutcome,
    RandomSource, StreamPurpose,
};

/// Default ceiling on the total pair-walk sample count R; the formula
/// blows past any workable budget at small eps, and refusing beats
/// silently truncating.
pub const DEFAULT_SAMPLE_CAP: u64 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AllocationStrategy {
    /// R(k) = ceil(R * pi(k))
    Proportional,
    /// R' = ceil(|pi|^2 * R), R(k) = ceil(R' * pi(k)^2 / |pi|^2)
    SquaredNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DiagMethod {
    Basic,
    Optimized,
}

/// Per-node diagonal estimates plus the sample/level bookkeeping that
/// produced them. Nodes with no allocated samples hold the placeholder
/// 1-c; the pipeline only ever multiplies those against zero PPR entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagEstimate {
    pub values: Vec<f64>,
    pub samples: Vec<u64>,
    pub det_level: Vec<u32>,
    pub method: DiagMethod,
}

impl DiagEstimate {
    /// Exact diagonal, for tests and for ParSim-style substitution.
    pub fn from_values(values: Vec<f64>, method: DiagMethod) -> DiagEstimate {
        let n = values.len();
        DiagEstimate {
            values,
            samples: vec![1; n],
            det_level: vec![0; n],
            method,
        }
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "node,value,samples,det_level")?;
        for k in 0..self.values.len() {
            writeln!(
                w,
                "{},{:.17e},{},{}",
                k, self.values[k], self.samples[k], self.det_level[k]
            )?;
        }
        Ok(())
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let io_err = |e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        self.write_csv(&mut f).map_err(io_err)
    }

    pub fn read_csv<R: BufRead>(r: R, method: DiagMethod) -> Result<DiagEstimate> {
        let mut values = Vec::new();
        let mut samples = Vec::new();
        let mut det_level = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            if idx == 0 {
                continue; // header
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad {what}: {s}"),
                })
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let node = parse(fields[0], "node")? as usize;
            if node != values.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("node ids must be consecutive from 0, got {node}"),
                });
            }
            values.push(parse(fields[1], "value")?);
            samples.push(parse(fields[2], "samples")? as u64);
            det_level.push(parse(fields[3], "det_level")? as u32);
        }
        Ok(DiagEstimate {
            values,
            samples,
            det_level,
            method,
        })
    }
}

/// First-meeting mass tables: `levels[l-1]` maps q to Z_l(k,q), the
/// probability the two walks from k first meet at q at step l.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZTable {
    pub levels: Vec<BTreeMap<NodeId, f64>>,
}

impl ZTable {
    /// Z_l(k) = sum_q Z_l(k,q); `level` is 1-based.
    pub fn level_total(&self, level: usize) -> f64 {
        self.levels
            .get(level - 1)
            .map(|m| m.values().sum())
            .unwrap_or(0.0)
    }

    /// Total first-meeting mass through all computed levels; at most c.
    pub fn total(&self) -> f64 {
        self.levels.iter().flat_map(|m| m.values()).sum()
    }
}

/// Total pair-walk sample count R = ceil(6 ln n / ((1-sqrt(c))^4 eps^2)).
///
/// Refuses (rather than truncates) when R exceeds `cap`; the caller can
/// retry with a larger eps or raise the cap.
pub fn total_sample_count(n: usize, eps: f64, c: f64, cap: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 nodes, got {n}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidEps(eps));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidDecay(c));
    }
    let gap = 1.0 - c.sqrt();
    let r = (6.0 * (n as f64).ln() / (gap.powi(4) * eps * eps)).ceil();
    if !r.is_finite() || r > cap as f64 {
        return Err(Error::SampleBudgetExceeded {
            required: if r.is_finite() { r as u128 } else { u128::MAX },
            cap,
        });
    }
    Ok(r as u64)
}

/// Distribute R pair-walk samples over the support of the aggregate PPR
/// vector. Returns a dense per-node count; nodes outside the support get 0.
pub fn allocate_samples(
    agg: &SparseVector,
    n: usize,
    r: u64,
    strategy: AllocationStrategy,
    sq_norm: f64,
) -> Result<Vec<u64>> {
    if agg.is_empty() {
        return Err(Error::ZeroAggregate);
    }
    let mut out = vec![0u64; n];
    match strategy {
        AllocationStrategy::Proportional => {
            for &(k, pi) in agg.entries() {
                out[k as usize] = (r as f64 * pi).ceil() as u64;
            }
        }
        AllocationStrategy::SquaredNorm => {
            let r_eff = (sq_norm * r as f64).ceil();
            for &(k, pi) in agg.entries() {
                out[k as usize] = (r_eff * pi * pi / sq_norm).ceil() as u64;
            }
        }
    }
    Ok(out)
}

/// Fraction of paired trials from k that never meet; unbiased for D(k,k).
pub fn estimate_basic<R: Rng>(g: &Graph, k: NodeId, c: f64, r_k: u64, rng: &mut R) -> f64 {
    let sqrt_c = c.sqrt();
    let mut meets = 0u64;
    for _ in 0..r_k {
        if paired_meeting_trial(g, k, sqrt_c, rng) {
            meets += 1;
        }
    }
    // written as 1 - meets/R so the optimized estimator with an empty Z
    // table reduces to it bit for bit
    1.0 - meets as f64 / r_k as f64
}

struct RowStore {
    /// (P^T)^l rows keyed by (origin, level); level 0 is implicit.
    rows: HashMap<(NodeId, u32), BTreeMap<NodeId, f64>>,
    traversals: u64,
    budget: u64,
}

impl RowStore {
    fn new(budget: u64) -> RowStore {
        RowStore {
            rows: HashMap::new(),
            traversals: 0,
            budget,
        }
    }

    /// Extend (P^T)^l from `q` level by level; false when the edge budget
    /// runs out before the row is complete.
    fn ensure(&mut self, g: &Graph, q: NodeId, level: u32) -> bool {
        for l in 1..=level {
            if self.rows.contains_key(&(q, l)) {
                continue;
            }
            let prev: Vec<(NodeId, f64)> = if l == 1 {
                vec![(q, 1.0)]
            } else {
                self.rows[&(q, l - 1)].iter().map(|(&v, &w)| (v, w)).collect()
            };
            let mut next = BTreeMap::new();
            for (v, w) in prev {
                let d = g.in_degree(v);
                for &u in g.in_neighbors(v) {
                    if self.traversals >= self.budget {
                        return false;
                    }
                    self.traversals += 1;
                    *next.entry(u).or_insert(0.0) += w / d as f64;
                }
            }
            self.rows.insert((q, l), next);
        }
        true
    }

    fn row(&self, q: NodeId, level: u32) -> &BTreeMap<NodeId, f64> {
        &self.rows[&(q, level)]
    }

    fn stored_entries(&self) -> usize {
        self.rows.values().map(|r| r.len()).sum()
    }
}

fn z_tables_impl(
    g: &Graph,
    k: NodeId,
    c: f64,
    edge_budget: u64,
    max_level: Option<usize>,
) -> (usize, ZTable, u64, usize) {
    let mut store = RowStore::new(edge_budget);
    let mut z = ZTable::default();
    let mut level = 0usize;
    'outer: loop {
        if max_level.is_some_and(|cap| level >= cap) {
            break;
        }
        let next = level + 1;
        // rows needed for Z_next: (P^T)^next from k plus, for every prior
        // first-meeting site q' at level next-l', the row (P^T)^{l'} from q'
        if !store.ensure(g, k, next as u32) {
            break;
        }
        for lp in 1..=level {
            for q in z.levels[level - lp].keys().copied().collect::<Vec<_>>() {
                if !store.ensure(g, q, lp as u32) {
                    break 'outer;
                }
            }
        }
        let row_k = store.row(k, next as u32).clone();
        if row_k.is_empty() {
            // no co-location mass at this or any deeper level
            break;
        }
        let mut z_next = BTreeMap::new();
        for (&q, &p) in &row_k {
            // c^next * (P^T)^next(k,q)^2 minus the mass of pairs that
            // already met at some (q', l') and then both drifted to q
            let mut val = c.powi(next as i32) * p * p;
            for lp in 1..=level {
                let scale = c.powi(lp as i32);
                for (&qp, &zv) in &z.levels[level - lp] {
                    if let Some(&pq) = store.row(qp, lp as u32).get(&q) {
                        val -= scale * pq * pq * zv;
                    }
                }
            }
            if val <= 0.0 {
                // tiny negatives are floating-point cancellation
                debug_assert!(val > -1e-9, "Z_{next}(k,{q}) = {val}");
            } else {
                z_next.insert(q, val);
            }
        }
        z.levels.push(z_next);
        level = next;
    }
    let entries = store.stored_entries();
    (level, z, store.traversals, entries)
}

/// Exact first-meeting tables through the deepest level the edge budget
/// allows. Every arc traversal during row extension spends one unit of
/// budget; a level interrupted mid-extension is discarded, so Z is always
/// complete through the returned level.
pub fn local_z_tables(g: &Graph, k: NodeId, c: f64, edge_budget: u64) -> (usize, ZTable) {
    let (l, z, _, _) = z_tables_impl(g, k, c, edge_budget, None);
    (l, z)
}

/// [`local_z_tables`] with a hard level ceiling, for oracle comparisons.
pub fn local_z_tables_capped(
    g: &Graph,
    k: NodeId,
    c: f64,
    edge_budget: u64,
    max_level: usize,
) -> (usize, ZTable) {
    let (l, z, _, _) = z_tables_impl(g, k, c, edge_budget, Some(max_level));
    (l, z)
}

/// Optimized estimator with an explicit edge budget. Budget 0 degenerates
/// to [`estimate_basic`] bit for bit under the same rng (for d_in != 1;
/// the d_in = 1 shortcut returns the exact value without sampling).
pub fn estimate_optimized_budgeted<R: Rng>(
    g: &Graph,
    k: NodeId,
    c: f64,
    r_k: u64,
    edge_budget: u64,
    rng: &mut R,
) -> (f64, usize) {
    match g.in_degree(k) {
        0 => return (1.0, 0),
        1 => return (1.0 - c, 0),
        _ => {}
    }
    // deeper determinization than c^l ~ 1e-12 buys no further variance
    // reduction, and the recursion cost grows quadratically with depth
    let depth_cap = (((1e-12f64).ln() / c.ln()).ceil() as usize).min(64);
    let (lk, z) = local_z_tables_capped(g, k, c, edge_budget, depth_cap);
    let sqrt_c = c.sqrt();
    let mut meets = 0u64;
    for _ in 0..r_k {
        match nonstop_prefix_pair_trial(g, k, lk, rng) {
            PrefixTrialOutcome::Survived(x, y) => {
                if continuation_meet_trial(g, x, y, sqrt_c, rng) {
                    meets += 1;
                }
            }
            // met inside the prefix: mass already in Z; died: the real
            // walk would have stopped, so no later meeting
            PrefixTrialOutcome::MetWithinPrefix | PrefixTrialOutcome::WalkDied => {}
        }
    }
    let d = 1.0 - z.total() - c.powi(lk as i32) * (meets as f64 / r_k as f64);
    (d, lk)
}

/// Optimized estimator with the standard budget ceil(2 R_k / sqrt(c)),
/// the expected step count of the sampling phase.
pub fn estimate_optimized<R: Rng>(
    g: &Graph,
    k: NodeId,
    c: f64,
    r_k: u64,
    rng: &mut R,
) -> (f64, usize) {
    let budget = (2.0 * r_k as f64 / c.sqrt()).ceil() as u64;
    estimate_optimized_budgeted(g, k, c, r_k, budget, rng)
}

/// Estimate D(k,k) for every node with a positive allocation. Jobs run in
/// descending-R(k) order across workers; each node draws from its own
/// substream, so results match serial execution exactly.
pub fn estimate_all(
    g: &Graph,
    c: f64,
    alloc: &[u64],
    method: DiagMethod,
    src: &RandomSource,
) -> Result<DiagEstimate> {
    if alloc.len() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            actual: alloc.len(),
        });
    }
    let mut jobs: Vec<NodeId> = (0..g.node_count() as NodeId)
        .filter(|&k| alloc[k as usize] > 0)
        .collect();
    jobs.sort_unstable_by_key(|&k| (std::cmp::Reverse(alloc[k as usize]), k));
    let results: Vec<(NodeId, f64, u32)> = jobs
        .par_iter()
        .map(|&k| {
            let r_k = alloc[k as usize];
            let mut rng = src.stream(StreamPurpose::DiagTrial, k, 0);
            match method {
                DiagMethod::Basic => (k, estimate_basic(g, k, c, r_k, &mut rng), 0),
                DiagMethod::Optimized => {
                    let (d, l) = estimate_optimized(g, k, c, r_k, &mut rng);
                    (k, d, l as u32)
                }
            }
        })
        .collect();
    let n = g.node_count();
    let mut est = DiagEstimate {
        values: vec![1.0 - c; n],
        samples: vec![0; n],
        det_level: vec![0; n],
        method,
    };
    for (k, d, l) in results {
        est.values[k as usize] = d;
        est.samples[k as usize] = alloc[k as usize];
        est.det_level[k as usize] = l;
    }
    Ok(est)
}
