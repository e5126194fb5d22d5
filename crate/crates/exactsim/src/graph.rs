//! Immutable directed graphs in CSR form, plus the two transition
//! operators `P` and `P^T` that every other module consumes.
//!
//! `P` is the reverse transition matrix: `P(i,j) = 1/d_in(j)` when the arc
//! `i -> j` exists. A node with in-degree zero has a zero column, so mass
//! routed through it disappears; walk semantics at such nodes live in
//! [`crate::walk`].

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = u32;

const CACHE_MAGIC: &[u8; 8] = b"XSGRAPH1";

/// Immutable directed graph with both adjacency directions in CSR layout.
///
/// Neighbor lists are sorted ascending with parallel arcs removed;
/// self-loops are kept. Node ids are dense `0..n-1`; `labels` maps them
/// back to the ids found in the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    m: usize,
    in_offsets: Vec<usize>,
    in_neighbors: Vec<NodeId>,
    out_offsets: Vec<usize>,
    out_neighbors: Vec<NodeId>,
    labels: Vec<u64>,
}

/// Options for [`Graph::load_edge_list`].
#[derive(Debug, Clone, Copy)]
pub struct EdgeListOptions {
    /// Materialize each input line as two opposing arcs.
    pub undirected: bool,
    /// Lines starting with this character are skipped.
    pub comment_prefix: char,
}

impl Default for EdgeListOptions {
    fn default() -> Self {
        EdgeListOptions {
            undirected: false,
            comment_prefix: '#',
        }
    }
}

impl Graph {
    /// Build a graph from raw arcs over labeled node ids. Labels are
    /// remapped to dense ids in first-appearance order (sources before
    /// targets, line order preserved).
    pub fn from_labeled_arcs(arcs: &[(u64, u64)]) -> Result<Graph> {
        if arcs.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut ids: HashMap<u64, NodeId> = HashMap::new();
        let mut labels: Vec<u64> = Vec::new();
        let intern = |label: u64, ids: &mut HashMap<u64, NodeId>, labels: &mut Vec<u64>| {
            *ids.entry(label).or_insert_with(|| {
                labels.push(label);
                (labels.len() - 1) as NodeId
            })
        };
        let mut dense: Vec<(NodeId, NodeId)> = Vec::with_capacity(arcs.len());
        for &(u, v) in arcs {
            let du = intern(u, &mut ids, &mut labels);
            let dv = intern(v, &mut ids, &mut labels);
            dense.push((du, dv));
        }
        Ok(Self::from_dense_arcs(labels.len(), dense, labels))
    }

    /// Build from arcs already using dense ids `0..n`.
    pub fn from_arcs(n: usize, arcs: &[(NodeId, NodeId)]) -> Graph {
        let labels = (0..n as u64).collect();
        Self::from_dense_arcs(n, arcs.to_vec(), labels)
    }

    fn from_dense_arcs(n: usize, mut arcs: Vec<(NodeId, NodeId)>, labels: Vec<u64>) -> Graph {
        arcs.sort_unstable();
        arcs.dedup();
        let m = arcs.len();

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(u, v) in &arcs {
            out_offsets[u as usize + 1] += 1;
            in_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut out_neighbors = vec![0 as NodeId; m];
        let mut in_neighbors = vec![0 as NodeId; m];
        let mut out_fill = out_offsets.clone();
        let mut in_fill = in_offsets.clone();
        for &(u, v) in &arcs {
            out_neighbors[out_fill[u as usize]] = v;
            out_fill[u as usize] += 1;
            in_neighbors[in_fill[v as usize]] = u;
            in_fill[v as usize] += 1;
        }
        // arcs sorted by (u,v) makes out lists sorted; in lists need a sort
        let mut g = Graph {
            n,
            m,
            in_offsets,
            in_neighbors,
            out_offsets,
            out_neighbors,
            labels,
        };
        for v in 0..n {
            let (s, e) = (g.in_offsets[v], g.in_offsets[v + 1]);
            g.in_neighbors[s..e].sort_unstable();
        }
        g
    }

    /// Parse a whitespace-separated edge list (`u v` per line, SNAP style).
    pub fn load_edge_list<P: AsRef<Path>>(path: P, opts: EdgeListOptions) -> Result<Graph> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let reader = BufReader::new(file);
        let mut arcs: Vec<(u64, u64)> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(opts.comment_prefix) {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let (a, b, extra) = (tokens.next(), tokens.next(), tokens.next());
            let (a, b) = match (a, b, extra) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("expected two integer tokens, got {trimmed:?}"),
                    })
                }
            };
            let parse = |tok: &str, line_no: usize| -> Result<u64> {
                tok.parse::<u64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("non-integer token {tok:?}"),
                })
            };
            let u = parse(a, idx + 1)?;
            let v = parse(b, idx + 1)?;
            arcs.push((u, v));
            if opts.undirected {
                arcs.push((v, u));
            }
        }
        Self::from_labeled_arcs(&arcs)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.m
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_neighbors[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_neighbors[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    /// Original input label of a dense node id.
    pub fn label(&self, v: NodeId) -> u64 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node: v as usize,
                n: self.n,
            })
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            })
        }
    }

    /// `y = P x` with `y(k) = sum over j in O(k) of x(j)/d_in(j)`.
    ///
    /// Mass conservation: `sum(y)` equals the mass of `x` on nodes with
    /// positive in-degree.
    pub fn apply_p(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut y = vec![0.0; self.n];
        y.par_iter_mut().enumerate().for_each(|(k, yk)| {
            let mut acc = 0.0;
            for &j in self.out_neighbors(k as NodeId) {
                acc += x[j as usize] / self.in_degree(j) as f64;
            }
            *yk = acc;
        });
        Ok(y)
    }

    /// `y = P^T x` with `y(k) = (1/d_in(k)) * sum over j in I(k) of x(j)`;
    /// `y(k) = 0` when `d_in(k) = 0`.
    pub fn apply_p_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut y = vec![0.0; self.n];
        y.par_iter_mut().enumerate().for_each(|(k, yk)| {
            let nbrs = self.in_neighbors(k as NodeId);
            if nbrs.is_empty() {
                return;
            }
            let mut acc = 0.0;
            for &j in nbrs {
                acc += x[j as usize];
            }
            *yk = acc / nbrs.len() as f64;
        });
        Ok(y)
    }

    /// Write the binary cache: magic `XSGRAPH1`, `n`, `m` as u64 LE, then
    /// CSR offsets and neighbors for in- and out-adjacency as u64 LE.
    pub fn save_cache<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut w = BufWriter::new(file);
        self.write_cache(&mut w).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    fn write_cache<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.m as u64).to_le_bytes())?;
        for &x in &self.in_offsets {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        for &x in &self.in_neighbors {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        for &x in &self.out_offsets {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        for &x in &self.out_neighbors {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        w.flush()
    }

    /// Load a binary cache written by [`Graph::save_cache`]. Labels become
    /// the identity mapping; emit the label sidecar at convert time if the
    /// original ids matter.
    pub fn load_cache<P: AsRef<Path>>(path: P) -> Result<Graph> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut r = BufReader::new(file);
        let io = |e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::BadCache("wrong magic bytes".into()));
        }
        let read_u64 = |r: &mut BufReader<File>| -> Result<u64> {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf).map_err(io)?;
            Ok(u64::from_le_bytes(buf))
        };
        let n = read_u64(&mut r)? as usize;
        let m = read_u64(&mut r)? as usize;
        let read_vec = |r: &mut BufReader<File>, len: usize| -> Result<Vec<u64>> {
            let mut out = Vec::with_capacity(len);
            let mut buf = [0u8; 8];
            for _ in 0..len {
                r.read_exact(&mut buf).map_err(io)?;
                out.push(u64::from_le_bytes(buf));
            }
            Ok(out)
        };
        let in_offsets: Vec<usize> = read_vec(&mut r, n + 1)?.iter().map(|&x| x as usize).collect();
        let in_neighbors: Vec<NodeId> = read_vec(&mut r, m)?.iter().map(|&x| x as NodeId).collect();
        let out_offsets: Vec<usize> =
            read_vec(&mut r, n + 1)?.iter().map(|&x| x as usize).collect();
        let out_neighbors: Vec<NodeId> =
            read_vec(&mut r, m)?.iter().map(|&x| x as NodeId).collect();
        if in_offsets.last() != Some(&m) || out_offsets.last() != Some(&m) {
            return Err(Error::BadCache("offset arrays inconsistent with m".into()));
        }
        let g = Graph {
            n,
            m,
            in_offsets,
            in_neighbors,
            out_offsets,
            out_neighbors,
            labels: (0..n as u64).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Consistency check: mutually consistent adjacency, sorted unique
    /// neighbor lists, degree sums.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::BadCache(msg.into()));
        let sum_in: usize = (0..self.n).map(|v| self.in_degree(v as NodeId)).sum();
        if sum_in != self.m {
            return bad("in-degree sum != m");
        }
        for v in 0..self.n as NodeId {
            for w in [self.in_neighbors(v), self.out_neighbors(v)] {
                if w.windows(2).any(|p| p[0] >= p[1]) {
                    return bad("neighbor list not strictly ascending");
                }
                if w.iter().any(|&u| u as usize >= self.n) {
                    return bad("neighbor id out of range");
                }
            }
            for &u in self.in_neighbors(v) {
                if self.out_neighbors(u).binary_search(&v).is_err() {
                    return bad("in/out adjacency inconsistent");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn two_arc_cycle() {
        let f = write_lines(&["0 1", "1 0"]);
        let g = Graph::load_edge_list(f.path(), EdgeListOptions::default()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arc_count(), 2);
        assert_eq!(g.in_neighbors(0), &[1]);
        assert_eq!(g.in_neighbors(1), &[0]);
    }

    #[test]
    fn comment_and_symmetrization() {
        let f = write_lines(&["# c", "0 1"]);
        let g = Graph::load_edge_list(
            f.path(),
            EdgeListOptions {
                undirected: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arc_count(), 2);
        assert_eq!(g.in_neighbors(0), &[1]);
        assert_eq!(g.in_neighbors(1), &[0]);
    }

    #[test]
    fn duplicate_arc_removed() {
        let f = write_lines(&["0 1", "0 1"]);
        let g = Graph::load_edge_list(f.path(), EdgeListOptions::default()).unwrap();
        assert_eq!(g.arc_count(), 1);
    }

    #[test]
    fn malformed_line_reports_number() {
        let f = write_lines(&["0 1", "0 x"]);
        let err = Graph::load_edge_list(f.path(), EdgeListOptions::default()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_error() {
        let f = write_lines(&["# only comments"]);
        assert!(matches!(
            Graph::load_edge_list(f.path(), EdgeListOptions::default()),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn labels_remap_first_appearance() {
        let g = Graph::from_labeled_arcs(&[(10, 7), (7, 10)]).unwrap();
        assert_eq!(g.labels(), &[10, 7]);
    }

    #[test]
    fn apply_p_examples() {
        // 2-cycle routes all mass
        let g = Graph::from_arcs(2, &[(0, 1), (1, 0)]);
        let y = g.apply_p(&[1.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 1.0]);

        // star c -> a, c -> b (c=0, a=1, b=2)
        let g = Graph::from_arcs(3, &[(0, 1), (0, 2)]);
        let y = g.apply_p(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 0.0]);
        // dead-end column is zero
        let y = g.apply_p(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn apply_p_transpose_examples() {
        let g = Graph::from_arcs(2, &[(0, 1), (1, 0)]);
        let y = g.apply_p_transpose(&[1.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 1.0]);

        let g = Graph::from_arcs(3, &[(0, 1), (0, 2)]);
        let y = g.apply_p_transpose(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 1.0, 1.0]);
        let y = g.apply_p_transpose(&[0.0; 3]).unwrap();
        assert_eq!(y, vec![0.0; 3]);
    }

    #[test]
    fn cache_round_trip() {
        let g = Graph::from_arcs(4, &[(0, 1), (1, 2), (2, 0), (3, 3), (0, 2)]);
        let f = tempfile::NamedTempFile::new().unwrap();
        g.save_cache(f.path()).unwrap();
        let g2 = Graph::load_cache(f.path()).unwrap();
        assert_eq!(g.n, g2.n);
        assert_eq!(g.in_offsets, g2.in_offsets);
        assert_eq!(g.in_neighbors, g2.in_neighbors);
        assert_eq!(g.out_offsets, g2.out_offsets);
        assert_eq!(g.out_neighbors, g2.out_neighbors);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..12, proptest::collection::vec((0u32..12, 0u32..12), 1..40)).prop_map(|(n, arcs)| {
            let arcs: Vec<(NodeId, NodeId)> = arcs
                .into_iter()
                .map(|(u, v)| (u % n as u32, v % n as u32))
                .collect();
            Graph::from_arcs(n, &arcs)
        })
    }

    proptest! {
        #[test]
        fn adjointness(g in arb_graph(), seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = g.node_count();
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let px = g.apply_p(&x).unwrap();
            let pty = g.apply_p_transpose(&y).unwrap();
            let lhs: f64 = px.iter().zip(&y).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(&pty).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn l1_contraction(g in arb_graph(), seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = g.node_count();
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let px = g.apply_p(&x).unwrap();
            let lx: f64 = x.iter().sum();
            let lpx: f64 = px.iter().sum();
            prop_assert!(lpx <= lx + 1e-12);
            if (0..n).all(|v| g.in_degree(v as NodeId) > 0) {
                prop_assert!((lpx - lx).abs() < 1e-10);
            }
        }
    }
}
