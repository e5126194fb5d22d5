//! Metrics (MaxError, Precision@k, pooled relative precision) and a
//! multi-query experiment runner.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{mc_single_source, parsim_single_source, power_method, DEFAULT_NODE_CAP};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::query::{single_source, QueryOptions};
use crate::walk::RandomSource;

/// Descending-score ranking with ties broken by ascending node id.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub entries: Vec<(NodeId, f64)>,
    pub requested_k: usize,
}

impl Ranking {
    /// True when fewer than the requested k nodes were available.
    pub fn is_short(&self) -> bool {
        self.entries.len() < self.requested_k
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|&(n, _)| n)
    }
}

/// Largest absolute entrywise difference.
pub fn max_error(est: &[f64], truth: &[f64]) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: est.len(),
        });
    }
    Ok(est
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Best k nodes by score; the source is usually excluded since its score
/// is pinned at 1.
pub fn top_k(scores: &[f64], k: usize, exclude_source: Option<NodeId>) -> Ranking {
    let mut entries: Vec<(NodeId, f64)> = scores
        .iter()
        .enumerate()
        .map(|(n, &s)| (n as NodeId, s))
        .filter(|&(n, _)| Some(n) != exclude_source)
        .collect();
    entries.sort_unstable_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    entries.truncate(k);
    Ranking {
        entries,
        requested_k: k,
    }
}

/// k-th largest value of `truth` over the candidate set (source
/// excluded); the hit threshold for precision. When fewer than k
/// candidates exist every candidate passes.
fn hit_threshold(truth: &[f64], k: usize, exclude_source: Option<NodeId>) -> f64 {
    let mut vals: Vec<f64> = truth
        .iter()
        .enumerate()
        .filter(|&(n, _)| Some(n as NodeId) != exclude_source)
        .map(|(_, &v)| v)
        .collect();
    vals.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    if vals.len() >= k {
        vals[k - 1]
    } else {
        f64::NEG_INFINITY
    }
}

/// Fraction of the returned nodes whose true score reaches the k-th
/// largest true score. Ties at the boundary never penalize: any node
/// tied with the k-th value counts as a hit.
pub fn precision_at_k(
    est: &Ranking,
    truth: &[f64],
    k: usize,
    exclude_source: Option<NodeId>,
) -> f64 {
    let thr = hit_threshold(truth, k, exclude_source);
    let considered: Vec<NodeId> = est.nodes().take(k).collect();
    if considered.is_empty() {
        return 0.0;
    }
    let hits = considered
        .iter()
        .filter(|&&n| truth[n as usize] >= thr)
        .count();
    hits as f64 / considered.len() as f64
}

/// Relative precision by pooling: merge every algorithm's top-k set,
/// re-score the pool with the verifier, and score each algorithm against
/// the best k of the pool (same tie rule as [`precision_at_k`]).
pub fn pool_evaluate(
    rankings: &[Ranking],
    k: usize,
    verifier: &[f64],
    exclude_source: Option<NodeId>,
) -> Result<Vec<f64>> {
    if rankings.len() < 2 {
        return Err(Error::Invalid("pooling needs at least 2 rankings".into()));
    }
    let mut pool: Vec<NodeId> = rankings
        .iter()
        .flat_map(|r| r.nodes().take(k))
        .filter(|&n| Some(n) != exclude_source)
        .collect();
    pool.sort_unstable();
    pool.dedup();
    let mut pool_vals: Vec<f64> = pool.iter().map(|&n| verifier[n as usize]).collect();
    pool_vals.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let thr = if pool_vals.len() >= k {
        pool_vals[k - 1]
    } else {
        f64::NEG_INFINITY
    };
    Ok(rankings
        .iter()
        .map(|r| {
            let considered: Vec<NodeId> = r.nodes().take(k).collect();
            if considered.is_empty() {
                return 0.0;
            }
            let hits = considered
                .iter()
                .filter(|&&n| verifier[n as usize] >= thr)
                .count();
            hits as f64 / considered.len() as f64
        })
        .collect())
}

/// One benchmark contender.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    ExactSim(QueryOptions),
    MonteCarlo {
        walk_cap: usize,
        walks_per_node: u64,
        seed: u64,
    },
    ParSim {
        iterations: usize,
    },
    /// The power method itself, as a sanity contender.
    Power {
        iterations: usize,
    },
}

impl Algorithm {
    pub fn label(&self) -> String {
        match self {
            Algorithm::ExactSim(o) => format!("exactsim(eps={})", o.eps),
            Algorithm::MonteCarlo { walks_per_node, .. } => format!("mc(r={walks_per_node})"),
            Algorithm::ParSim { iterations } => format!("parsim(L={iterations})"),
            Algorithm::Power { iterations } => format!("power(L={iterations})"),
        }
    }

    fn run(&self, g: &Graph, source: NodeId, c: f64) -> Result<Vec<f64>> {
        match self {
            Algorithm::ExactSim(opts) => {
                let mut opts = opts.clone();
                opts.c = c;
                Ok(single_source(g, source, &opts)?.scores)
            }
            Algorithm::MonteCarlo {
                walk_cap,
                walks_per_node,
                seed,
            } => mc_single_source(
                g,
                source,
                c,
                *walk_cap,
                *walks_per_node,
                &RandomSource::new(*seed),
            ),
            Algorithm::ParSim { iterations } => parsim_single_source(g, source, c, *iterations),
            Algorithm::Power { iterations } => {
                Ok(power_method(g, c, *iterations, DEFAULT_NODE_CAP)?
                    .row(source)
                    .to_vec())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub query_id: String,
    pub algorithm: String,
    pub max_error: f64,
    pub precision_at_k: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "query_id,algorithm,max_error,precision_at_k,wall_ms")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.3}",
                r.query_id, r.algorithm, r.max_error, r.precision_at_k, r.wall_ms
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
}

/// Run every algorithm on `num_queries` uniformly sampled sources against
/// power-method truth; per-query rows plus one "avg" row per algorithm.
pub fn run_experiment(
    g: &Graph,
    c: f64,
    algorithms: &[Algorithm],
    num_queries: usize,
    k: usize,
    seed: u64,
) -> Result<Report> {
    let truth_matrix = power_method(g, c, 60, DEFAULT_NODE_CAP)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<NodeId> = (0..num_queries)
        .map(|_| rng.gen_range(0..g.node_count() as NodeId))
        .collect();
    let mut report = Report::default();
    let mut sums: Vec<(f64, f64)> = vec![(0.0, 0.0); algorithms.len()];
    for (qid, &source) in sources.iter().enumerate() {
        let truth = truth_matrix.row(source);
        for (ai, algo) in algorithms.iter().enumerate() {
            let t0 = Instant::now();
            let scores = algo.run(g, source, c)?;
            let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
            let me = max_error(&scores, truth)?;
            let ranking = top_k(&scores, k, Some(source));
            let prec = precision_at_k(&ranking, truth, k, Some(source));
            sums[ai].0 += me;
            sums[ai].1 += prec;
            report.rows.push(ReportRow {
                query_id: qid.to_string(),
                algorithm: algo.label(),
                max_error: me,
                precision_at_k: prec,
                wall_ms,
            });
        }
    }
    let q = num_queries.max(1) as f64;
    for (ai, algo) in algorithms.iter().enumerate() {
        report.rows.push(ReportRow {
            query_id: "avg".into(),
            algorithm: algo.label(),
            max_error: sums[ai].0 / q,
            precision_at_k: sums[ai].1 / q,
            wall_ms: 0.0,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_error_basics() {
        assert_eq!(max_error(&[0.1, 0.2], &[0.1, 0.2]).unwrap(), 0.0);
        let e = max_error(&[0.1, 0.2 + 1e-3], &[0.1, 0.2]).unwrap();
        assert!((e - 1e-3).abs() < 1e-15);
        assert!(max_error(&[0.1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn top_k_tie_rule() {
        let scores = [1.0, 0.5, 0.5];
        let r = top_k(&scores, 2, Some(0));
        assert_eq!(r.nodes().collect::<Vec<_>>(), vec![1, 2]);
        assert!(!r.is_short());

        let r = top_k(&scores, 10, Some(0));
        assert_eq!(r.entries.len(), 2);
        assert!(r.is_short());
    }

    #[test]
    fn precision_cases() {
        let truth = [1.0, 0.9, 0.8, 0.3, 0.2];
        let est = top_k(&truth, 2, Some(0));
        assert_eq!(precision_at_k(&est, &truth, 2, Some(0)), 1.0);

        // disjoint with a strict gap
        let bad = Ranking {
            entries: vec![(3, 0.99), (4, 0.98)],
            requested_k: 2,
        };
        assert_eq!(precision_at_k(&bad, &truth, 2, Some(0)), 0.0);

        // 3-way tie at rank k: either tied node is a hit
        let truth = [1.0, 0.9, 0.5, 0.5, 0.5];
        for pick in [2u32, 3, 4] {
            let est = Ranking {
                entries: vec![(1, 0.9), (pick, 0.5)],
                requested_k: 2,
            };
            assert_eq!(precision_at_k(&est, &truth, 2, Some(0)), 1.0);
        }
    }

    #[test]
    fn precision_rank_invariance() {
        let truth = [1.0, 0.8, 0.6, 0.4, 0.2, 0.1];
        let est = [1.0, 0.7, 0.65, 0.5, 0.3, 0.05];
        let k = 3;
        let base = precision_at_k(&top_k(&est, k, Some(0)), &truth, k, Some(0));
        // strictly monotone rescaling preserves ranks, hence precision
        let squashed: Vec<f64> = est.iter().map(|v| v.powi(3) * 2.0 + 1.0).collect();
        let p = precision_at_k(&top_k(&squashed, k, Some(0)), &truth, k, Some(0));
        assert_eq!(base, p);
    }

    #[test]
    fn precision_one_under_gap() {
        // if max error <= eps and the truth gap at rank k exceeds 2*eps,
        // precision must be 1
        let truth = [1.0, 0.9, 0.8, 0.5, 0.4];
        let eps = 0.05;
        let est = [1.0, 0.9 - eps, 0.8 + eps, 0.5 + eps, 0.4 - eps];
        let k = 2;
        assert!(max_error(&est, &truth).unwrap() <= eps + 1e-12);
        let p = precision_at_k(&top_k(&est, k, Some(0)), &truth, k, Some(0));
        assert_eq!(p, 1.0);
    }

    #[test]
    fn pool_cases() {
        let truth = [1.0, 0.9, 0.8, 0.3, 0.2];
        let good = top_k(&truth, 2, Some(0));
        let same = good.clone();
        let p = pool_evaluate(&[good.clone(), same], 2, &truth, Some(0)).unwrap();
        assert_eq!(p, vec![1.0, 1.0]);

        let bad = Ranking {
            entries: vec![(3, 0.99), (4, 0.98)],
            requested_k: 2,
        };
        let p = pool_evaluate(&[good, bad], 2, &truth, Some(0)).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);

        // everything tied: all algorithms perfect
        let truth = [1.0, 0.5, 0.5, 0.5];
        let a = Ranking {
            entries: vec![(1, 0.5), (2, 0.5)],
            requested_k: 2,
        };
        let b = Ranking {
            entries: vec![(2, 0.5), (3, 0.5)],
            requested_k: 2,
        };
        let p = pool_evaluate(&[a, b], 2, &truth, Some(0)).unwrap();
        assert_eq!(p, vec![1.0, 1.0]);
    }

    #[test]
    fn experiment_truth_contender_is_perfect() {
        let g = Graph::from_arcs(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let report =
            run_experiment(&g, 0.6, &[Algorithm::Power { iterations: 60 }], 1, 2, 5).unwrap();
        for row in &report.rows {
            assert_eq!(row.max_error, 0.0);
            assert_eq!(row.precision_at_k, 1.0);
        }
    }

    #[test]
    fn experiment_deterministic() {
        let g = Graph::from_arcs(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3)]);
        let algos = [
            Algorithm::ParSim { iterations: 20 },
            Algorithm::MonteCarlo {
                walk_cap: 20,
                walks_per_node: 200,
                seed: 3,
            },
        ];
        let a = run_experiment(&g, 0.6, &algos, 3, 2, 11).unwrap();
        let b = run_experiment(&g, 0.6, &algos, 3, 2, 11).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.max_error, y.max_error);
            assert_eq!(x.precision_at_k, y.precision_at_k);
        }
    }

    #[test]
    fn mc_error_shrinks_with_more_walks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 30usize;
        let arcs: Vec<(NodeId, NodeId)> = (0..120)
            .map(|_| (rng.gen_range(0..n as NodeId), rng.gen_range(0..n as NodeId)))
            .collect();
        let g = Graph::from_arcs(n, &arcs);
        let avg = |r: u64| {
            let report = run_experiment(
                &g,
                0.6,
                &[Algorithm::MonteCarlo {
                    walk_cap: 30,
                    walks_per_node: r,
                    seed: 9,
                }],
                5,
                5,
                13,
            )
            .unwrap();
            report
                .rows
                .iter()
                .find(|row| row.query_id == "avg")
                .unwrap()
                .max_error
        };
        assert!(avg(10_000) < avg(100));
    }
}
