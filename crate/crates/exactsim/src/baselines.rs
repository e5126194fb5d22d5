//! Reference algorithms: power-method ground truth, Monte-Carlo and
//! ParSim approximations, and a brute-force pair-chain oracle for the
//! diagonal correction.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::diag::{DiagEstimate, DiagMethod};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::ppr::compute_hop_table;
use crate::query::backward_accumulate;
use crate::walk::{capped_walk, RandomSource, StreamPurpose};

pub const DEFAULT_NODE_CAP: usize = 10_000;
pub const PAIR_STATE_CAP: usize = 2_000;

const MATRIX_MAGIC: &[u8; 8] = b"XSIMMAT1";

/// Dense symmetric SimRank matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimMatrix {
    pub fn identity(n: usize) -> SimMatrix {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        SimMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        self.data[i as usize * self.n + j as usize]
    }

    pub fn row(&self, i: NodeId) -> &[f64] {
        let i = i as usize;
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row-major binary dump: magic, u64 n, n*n f64 little-endian.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let io_err = |e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        (|| {
            w.write_all(MATRIX_MAGIC)?;
            w.write_all(&(self.n as u64).to_le_bytes())?;
            for v in &self.data {
                w.write_all(&v.to_le_bytes())?;
            }
            w.flush()
        })()
        .map_err(io_err)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<SimMatrix> {
        let path = path.as_ref();
        let io_err = |e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut r = std::io::BufReader::new(std::fs::File::open(path).map_err(io_err)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MATRIX_MAGIC {
            return Err(Error::BadCache("bad matrix magic".into()));
        }
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8).map_err(io_err)?;
        let n = u64::from_le_bytes(buf8) as usize;
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            r.read_exact(&mut buf8).map_err(io_err)?;
            data.push(f64::from_le_bytes(buf8));
        }
        if r.read(&mut [0u8; 1]).map_err(io_err)? != 0 {
            return Err(Error::BadCache("trailing bytes in matrix file".into()));
        }
        Ok(SimMatrix { n, data })
    }
}

/// All-pairs SimRank by power iteration `S <- (c P^T S P) v I`; entrywise
/// error after L_p iterations is at most c^{L_p}. Also returns the
/// max-norm residual between consecutive iterates.
pub fn power_method_trace(
    g: &Graph,
    c: f64,
    l_p: usize,
    node_cap: usize,
) -> Result<(SimMatrix, Vec<f64>)> {
    let n = g.node_count();
    if n > node_cap {
        return Err(Error::NodeCapExceeded { n, cap: node_cap });
    }
    let mut s = SimMatrix::identity(n);
    let mut residuals = Vec::with_capacity(l_p);
    let mut t_buf = vec![0.0; n * n];
    for _ in 0..l_p {
        // T = S P, computed row by row: T(i,.) = P^T applied to S(i,.)
        t_buf
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, t_row)| {
                let s_row = &s.data[i * n..(i + 1) * n];
                for k in 0..n {
                    let nbrs = g.in_neighbors(k as NodeId);
                    if nbrs.is_empty() {
                        t_row[k] = 0.0;
                    } else {
                        let sum: f64 = nbrs.iter().map(|&j| s_row[j as usize]).sum();
                        t_row[k] = sum / nbrs.len() as f64;
                    }
                }
            });
        // S' = (c P^T T) v I, row i combining in-neighbor rows of T
        let t_ref = &t_buf;
        let mut next = vec![0.0; n * n];
        next.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let nbrs = g.in_neighbors(i as NodeId);
            if !nbrs.is_empty() {
                let scale = c / nbrs.len() as f64;
                for &k in nbrs {
                    let t_row = &t_ref[k as usize * n..(k as usize + 1) * n];
                    for (out, tv) in row.iter_mut().zip(t_row) {
                        *out += tv;
                    }
                }
                for v in row.iter_mut() {
                    *v *= scale;
                }
            }
            row[i] = row[i].max(1.0);
        });
        // the update is symmetric in exact arithmetic; mirror the upper
        // triangle so rounding cannot break it
        for i in 0..n {
            for j in i + 1..n {
                next[j * n + i] = next[i * n + j];
            }
        }
        let resid = next
            .par_iter()
            .zip(&s.data)
            .map(|(a, b)| (a - b).abs())
            .reduce(|| 0.0, f64::max);
        residuals.push(resid);
        s.data = next;
    }
    Ok((s, residuals))
}

pub fn power_method(g: &Graph, c: f64, l_p: usize, node_cap: usize) -> Result<SimMatrix> {
    power_method_trace(g, c, l_p, node_cap).map(|(s, _)| s)
}

/// Monte-Carlo single-source estimate: the t-th walk of the source is
/// paired with the t-th walk of every other node, and S-hat(i,j) is the
/// fraction of pairs that co-locate at some equal step within `walk_cap`.
pub fn mc_single_source(
    g: &Graph,
    i: NodeId,
    c: f64,
    walk_cap: usize,
    walks_per_node: u64,
    src: &RandomSource,
) -> Result<Vec<f64>> {
    g.check_node(i)?;
    let sqrt_c = c.sqrt();
    let r = walks_per_node;
    let source_walks: Vec<Vec<NodeId>> = (0..r)
        .map(|t| capped_walk(g, i, sqrt_c, walk_cap, &mut src.stream(StreamPurpose::McWalk, i, t)))
        .collect();
    let mut scores: Vec<f64> = (0..g.node_count() as NodeId)
        .into_par_iter()
        .map(|j| {
            if j == i {
                return 1.0;
            }
            let mut meets = 0u64;
            for (t, iw) in source_walks.iter().enumerate() {
                let jw = capped_walk(
                    g,
                    j,
                    sqrt_c,
                    walk_cap,
                    &mut src.stream(StreamPurpose::McWalk, j, t as u64),
                );
                if iw.iter().zip(&jw).any(|(a, b)| a == b) {
                    meets += 1;
                }
            }
            meets as f64 / r as f64
        })
        .collect();
    scores[i as usize] = 1.0;
    Ok(scores)
}

/// ParSim: the linearized sum with the diagonal fixed at (1-c)I — no
/// first-meeting correction. Deterministic.
pub fn parsim_single_source(g: &Graph, i: NodeId, c: f64, l: usize) -> Result<Vec<f64>> {
    let diag = DiagEstimate::from_values(vec![1.0 - c; g.node_count()], DiagMethod::Basic);
    let t = compute_hop_table(g, i, l, c, 0.0)?;
    let mut s = backward_accumulate(g, &diag, &t, c)?;
    // self-similarity is 1 by definition; the uncorrected diagonal only
    // biases the off-diagonal scores
    s[i as usize] = 1.0;
    Ok(s)
}

/// Exact D(k,k) by dynamic programming over unordered pair states.
///
/// M_t({u,v}) is the probability that both walks are alive at {u,v} at
/// step t without ever having met; each step both survive with
/// probability c and route through in-neighbors, co-locations absorb into
/// the meet mass, and dead ends kill the pair. Runs until the alive mass
/// drops below `tol`.
pub fn pair_chain_diag_oracle(g: &Graph, k: NodeId, c: f64, tol: f64) -> Result<f64> {
    g.check_node(k)?;
    let n = g.node_count();
    if n > PAIR_STATE_CAP {
        return Err(Error::PairStateCapExceeded {
            n,
            cap: PAIR_STATE_CAP,
        });
    }
    let mut alive: HashMap<(NodeId, NodeId), f64> = HashMap::new();
    alive.insert((k, k), 1.0);
    let mut meet = 0.0;
    let mut alive_mass = 1.0;
    while alive_mass > tol && !alive.is_empty() {
        let mut next: HashMap<(NodeId, NodeId), f64> = HashMap::new();
        for (&(u, v), &m) in &alive {
            let iu = g.in_neighbors(u);
            let iv = g.in_neighbors(v);
            if iu.is_empty() || iv.is_empty() {
                continue; // a walk stops unconditionally: the pair never meets
            }
            let w = c * m / (iu.len() * iv.len()) as f64;
            for &a in iu {
                for &b in iv {
                    if a == b {
                        meet += w;
                    } else {
                        let key = if a < b { (a, b) } else { (b, a) };
                        *next.entry(key).or_insert(0.0) += w;
                    }
                }
            }
        }
        alive = next;
        alive_mass = alive.values().sum();
    }
    Ok((1.0 - meet).clamp(1.0 - c, 1.0))
}
