//! The end-to-end single-source pipeline: hop table, diagonal estimation,
//! and the backward accumulation
//! `s^l = sqrt(c) P^T s^{l-1} + (1/(1-sqrt(c))) D-hat pi_i^{L-l}`.

use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diag::{
    allocate_samples, estimate_all, total_sample_count, AllocationStrategy, DiagEstimate,
    DiagMethod, DEFAULT_SAMPLE_CAP,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::ppr::{compute_hop_table, HopTable};
use crate::walk::RandomSource;

/// Configuration of a single-source query.
///
/// `sample_override` bypasses the theoretical sample-count formula, which
/// is far beyond desk-scale budgets at small eps; accuracy then rests on
/// the empirical behavior of the override, not on the formal guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOptions {
    pub eps: f64,
    pub c: f64,
    pub allocation: AllocationStrategy,
    pub diag_method: DiagMethod,
    pub sparse: bool,
    pub seed: u64,
    pub l_override: Option<usize>,
    pub sample_cap: u64,
    pub sample_override: Option<u64>,
}

impl QueryOptions {
    pub fn new(eps: f64) -> QueryOptions {
        QueryOptions {
            eps,
            c: 0.6,
            allocation: AllocationStrategy::Proportional,
            diag_method: DiagMethod::Optimized,
            sparse: true,
            seed: 0,
            l_override: None,
            sample_cap: DEFAULT_SAMPLE_CAP,
            sample_override: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidEps(self.eps));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidDecay(self.c));
        }
        Ok(())
    }
}

/// Everything about a run except the scores. Wall times live under
/// `timings_ms` and are the only fields excluded from determinism checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMeta {
    pub source: NodeId,
    pub options: QueryOptions,
    pub l: usize,
    pub r_total: u64,
    pub hop_nnz: usize,
    pub allocated_samples: u128,
    pub sq_norm: f64,
    pub timings_ms: PhaseTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PhaseTimings {
    pub hop: f64,
    pub diag: f64,
    pub backward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSourceResult {
    pub source: NodeId,
    pub scores: Vec<f64>,
    pub meta: QueryMeta,
}

/// L = ceil(ln(2/eps) / ln(1/c)), floored at 0.
pub fn iterations_for(eps: f64, c: f64) -> usize {
    let l = ((2.0 / eps).ln() / (1.0 / c).ln()).ceil();
    if l > 0.0 {
        l as usize
    } else {
        0
    }
}

/// Backward pass of Eq-(10) form: s^0 = (1/(1-sqrt(c))) D-hat pi^L, then
/// L applications of sqrt(c) P^T with one hop-vector deposit each. Only
/// two dense buffers are live at any point.
pub fn backward_accumulate(
    g: &Graph,
    diag: &DiagEstimate,
    t: &HopTable,
    c: f64,
) -> Result<Vec<f64>> {
    if diag.values.len() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            actual: diag.values.len(),
        });
    }
    for hop in &t.hops {
        for &(k, _) in hop.entries() {
            if diag.samples[k as usize] == 0 {
                return Err(Error::MissingDiagonal { node: k as usize });
            }
        }
    }
    let sqrt_c = c.sqrt();
    let stop = 1.0 - sqrt_c;
    let big_l = t.levels();
    let mut s = vec![0.0; g.node_count()];
    deposit(&mut s, diag, &t.hops[big_l], stop);
    for l in 1..=big_l {
        let mut next = g.apply_p_transpose(&s)?;
        for v in next.iter_mut() {
            *v *= sqrt_c;
        }
        deposit(&mut next, diag, &t.hops[big_l - l], stop);
        s = next;
    }
    Ok(s)
}

// dividing by the stop probability (rather than multiplying by its
// reciprocal) keeps degenerate sources exact: D*pi^0(i)/(1-sqrt(c)) is
// bitwise D when pi^0(i) = 1-sqrt(c) survived sparsification
fn deposit(s: &mut [f64], diag: &DiagEstimate, hop: &crate::ppr::SparseVector, stop: f64) {
    for &(k, v) in hop.entries() {
        s[k as usize] += diag.values[k as usize] * v / stop;
    }
}

/// Run the full pipeline for source `i`.
pub fn single_source(g: &Graph, i: NodeId, opts: &QueryOptions) -> Result<SingleSourceResult> {
    g.check_node(i)?;
    opts.validate()?;
    let c = opts.c;
    let sqrt_c = c.sqrt();
    // sparse runs split eps: half for sparsification, half for
    // truncation + sampling
    let eps_inner = if opts.sparse { opts.eps / 2.0 } else { opts.eps };
    let big_l = opts.l_override.unwrap_or_else(|| iterations_for(eps_inner, c));
    let threshold = if opts.sparse {
        (1.0 - sqrt_c).powi(2) * eps_inner
    } else {
        0.0
    };

    let t0 = Instant::now();
    let table = compute_hop_table(g, i, big_l, c, threshold)?;
    let hop_ms = t0.elapsed().as_secs_f64() * 1e3;

    let r_total = match opts.sample_override {
        Some(r) => r.max(1),
        None => total_sample_count(g.node_count(), eps_inner, c, opts.sample_cap)?,
    };
    let alloc = allocate_samples(
        &table.aggregate,
        g.node_count(),
        r_total,
        opts.allocation,
        table.sq_norm,
    )?;
    let allocated_samples: u128 = alloc.iter().map(|&r| r as u128).sum();

    let t0 = Instant::now();
    let src = RandomSource::new(opts.seed);
    let diag = estimate_all(g, c, &alloc, opts.diag_method, &src)?;
    let diag_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t0 = Instant::now();
    let scores = backward_accumulate(g, &diag, &table, c)?;
    let backward_ms = t0.elapsed().as_secs_f64() * 1e3;

    Ok(SingleSourceResult {
        source: i,
        scores,
        meta: QueryMeta {
            source: i,
            options: opts.clone(),
            l: big_l,
            r_total,
            hop_nnz: table.total_nnz(),
            allocated_samples,
            sq_norm: table.sq_norm,
            timings_ms: PhaseTimings {
                hop: hop_ms,
                diag: diag_ms,
                backward: backward_ms,
            },
        },
    })
}

/// Scores as CSV `node,score`, sorted by node id, 17 significant digits.
pub fn write_scores_csv<W: Write>(w: &mut W, scores: &[f64]) -> std::io::Result<()> {
    writeln!(w, "node,score")?;
    for (k, v) in scores.iter().enumerate() {
        writeln!(w, "{k},{v:.16e}")?;
    }
    Ok(())
}

pub fn write_scores_csv_path<P: AsRef<Path>>(path: P, scores: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    write_scores_csv(&mut f, scores).map_err(io_err)
}

pub fn read_scores_csv<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        if idx == 0 {
            continue;
        }
        let mut it = line.split(',');
        let (node, score) = match (it.next(), it.next(), it.next()) {
            (Some(n), Some(s), None) => (n, s),
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "expected node,score".into(),
                })
            }
        };
        let node: usize = node.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad node id: {node}"),
        })?;
        if node != out.len() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("node ids must be consecutive from 0, got {node}"),
            });
        }
        out.push(score.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad score: {score}"),
        })?);
    }
    Ok(out)
}

pub fn read_scores_csv_path<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_scores_csv(std::io::BufReader::new(f))
}

pub fn write_meta_json_path<P: AsRef<Path>>(path: P, meta: &QueryMeta) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let json = serde_json::to_string_pretty(meta)
        .map_err(|e| Error::Invalid(format!("meta serialization: {e}")))?;
    std::fs::write(path, json + "\n").map_err(io_err)
}

pub fn read_meta_json_path<P: AsRef<Path>>(path: P) -> Result<QueryMeta> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("bad meta file: {e}")))
}
