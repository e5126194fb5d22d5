//! l-hop Personalized PageRank vectors and their sparsified hop table.
//!
//! The hop vector at level `l` is `(1-sqrt(c)) * (sqrt(c) P)^l e_i`: the
//! probability that a sqrt(c)-walk from the source stops at each node in
//! exactly `l` steps. Every level is computed exactly from two transient
//! dense buffers and only then sparsified for storage, so truncation errors
//! never compound across levels.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Sorted sparse vector with strictly positive values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(NodeId, f64)>,
}

impl SparseVector {
    pub fn new(mut entries: Vec<(NodeId, f64)>) -> SparseVector {
        entries.retain(|&(_, v)| v > 0.0);
        entries.sort_unstable_by_key(|&(k, _)| k);
        SparseVector { entries }
    }

    /// Keep entries strictly above `threshold` from a dense buffer.
    pub fn from_dense_above(dense: &[f64], threshold: f64) -> SparseVector {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v > threshold)
            .map(|(k, &v)| (k as NodeId, v))
            .collect();
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: NodeId) -> f64 {
        match self.entries.binary_search_by_key(&k, |&(i, _)| i) {
            Ok(idx) => self.entries[idx].1,
            Err(_) => 0.0,
        }
    }

    pub fn l1(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(k, v) in &self.entries {
            out[k as usize] = v;
        }
        out
    }
}

/// Hop vectors `pi_i^0 .. pi_i^L`, their aggregate, and the squared norm
/// of the aggregate. `threshold` records the sparsification cutoff used.
#[derive(Debug, Clone)]
pub struct HopTable {
    pub source: NodeId,
    pub decay: f64,
    pub hops: Vec<SparseVector>,
    pub aggregate: SparseVector,
    pub sq_norm: f64,
    pub threshold: f64,
}

impl HopTable {
    pub fn levels(&self) -> usize {
        self.hops.len() - 1
    }

    pub fn total_nnz(&self) -> usize {
        self.hops.iter().map(|h| h.nnz()).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.hops.iter().map(|h| h.l1()).sum()
    }

    /// Debug dump as CSV rows `level,node,value` (format not stable).
    pub fn dump_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "level,node,value")?;
        for (l, hop) in self.hops.iter().enumerate() {
            for &(k, v) in hop.entries() {
                writeln!(w, "{l},{k},{v:.17e}")?;
            }
        }
        Ok(())
    }

    pub fn dump_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?);
        self.dump_csv(&mut f).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// Compute the hop table for `source` with `levels` hops beyond level 0.
///
/// Entries at or below `threshold` are dropped after each level is computed
/// exactly; pass 0 for a dense-exact table. The aggregate and squared norm
/// are taken over retained entries, matching what the backward pass sees.
pub fn compute_hop_table(
    g: &Graph,
    source: NodeId,
    levels: usize,
    c: f64,
    threshold: f64,
) -> Result<HopTable> {
    g.check_node(source)?;
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidDecay(c));
    }
    if threshold < 0.0 {
        return Err(Error::Invalid(format!("negative threshold {threshold}")));
    }
    let sqrt_c = c.sqrt();
    let n = g.node_count();

    let mut dense = vec![0.0; n];
    dense[source as usize] = 1.0 - sqrt_c;
    let mut hops = Vec::with_capacity(levels + 1);
    let mut agg = vec![0.0; n];

    for level in 0..=levels {
        let sparse = SparseVector::from_dense_above(&dense, threshold);
        for &(k, v) in sparse.entries() {
            agg[k as usize] += v;
        }
        hops.push(sparse);
        if level < levels {
            let mut next = g.apply_p(&dense)?;
            for v in next.iter_mut() {
                *v *= sqrt_c;
            }
            dense = next;
        }
    }

    let aggregate = SparseVector::from_dense_above(&agg, 0.0);
    let sq_norm = aggregate.entries().iter().map(|&(_, v)| v * v).sum();
    Ok(HopTable {
        source,
        decay: c,
        hops,
        aggregate,
        sq_norm,
        threshold,
    })
}

/// Squared Euclidean norm of the aggregate PPR vector.
pub fn squared_norm(t: &HopTable) -> f64 {
    t.sq_norm
}
