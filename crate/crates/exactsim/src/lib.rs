//! Probabilistically-exact single-source SimRank.
//!
//! The pipeline: build the sparsified l-hop Personalized PageRank table
//! of the source, estimate the diagonal correction D by paired
//! sqrt(c)-walks (optionally with exact local first-meeting tables), and
//! accumulate scores backward through the graph. Baselines (power method,
//! Monte Carlo, ParSim) and an evaluation harness round out the crate.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability; the `exactsim` binary wraps the same entry points.

pub mod baselines;
pub mod diag;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ppr;
pub mod query;
pub mod synth;
pub mod walk;

pub use baselines::{
    mc_single_source, pair_chain_diag_oracle, parsim_single_source, power_method,
    power_method_trace, SimMatrix,
};
pub use diag::{
    allocate_samples, estimate_all, estimate_basic, estimate_optimized, local_z_tables,
    total_sample_count, AllocationStrategy, DiagEstimate, DiagMethod, ZTable,
};
pub use error::{Error, Result};
pub use eval::{max_error, pool_evaluate, precision_at_k, run_experiment, top_k, Algorithm, Ranking};
pub use graph::{EdgeListOptions, Graph, NodeId};
pub use ppr::{compute_hop_table, HopTable, SparseVector};
pub use query::{
    backward_accumulate, iterations_for, single_source, QueryMeta, QueryOptions,
    SingleSourceResult,
};
pub use walk::{RandomSource, StreamPurpose};
