use std::path::PathBuf;

/// Errors raised by graph loading, query execution, and the evaluation
/// harness.
///
/// `is_refusal` distinguishes resource-guard refusals (caps, budgets) from
/// plain usage or I/O errors; the CLI maps refusals to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("edge list contains no arcs")]
    EmptyGraph,

    #[error("vector length {actual} does not match node count {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("node id {node} out of range (graph has {n} nodes)")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("decay factor must lie in (0,1), got {0}")]
    InvalidDecay(f64),

    #[error("error parameter must be positive, got {0}")]
    InvalidEps(f64),

    #[error("sample budget exceeded: formula requires {required} pair-walk samples, cap is {cap}; increase eps or raise the cap")]
    SampleBudgetExceeded { required: u128, cap: u64 },

    #[error("graph has {n} nodes, above the node cap {cap} for dense all-pairs computation")]
    NodeCapExceeded { n: usize, cap: usize },

    #[error("graph has {n} nodes, above the pair-state cap {cap} for the diagonal oracle")]
    PairStateCapExceeded { n: usize, cap: usize },

    #[error("allocation requires a nonempty aggregate PPR vector")]
    ZeroAggregate,

    #[error("diagonal estimate missing coverage for node {node} (no samples)")]
    MissingDiagonal { node: usize },

    #[error("bad binary cache: {0}")]
    BadCache(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// True for resource-guard refusals (node caps, sample budgets).
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::SampleBudgetExceeded { .. }
                | Error::NodeCapExceeded { .. }
                | Error::PairStateCapExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
