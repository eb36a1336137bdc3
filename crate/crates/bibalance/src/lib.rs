//! Balance-theory analytics and link-sign prediction for signed bipartite
//! networks.
//!
//! A signed bipartite network connects two disjoint node sets — called
//! *buyers* and *sellers* throughout this crate, though they may equally be
//! legislators and bills, or reviewers and products — by edges carrying a
//! sign: `+1` for agreement/trust, `-1` for disagreement/distrust. Because
//! every cycle in a bipartite graph has even length, the classic triangle
//! analysis of signed networks does not apply; the smallest cycle is the
//! 4-cycle, or **butterfly**. This crate is built around that observation:
//!
//! - [`butterflies`] — census of the seven sign-isomorphism classes of
//!   butterflies, their expected shares under a sign-shuffled null model, and
//!   standardized *surprise* scores measuring over/under-representation.
//! - [`caterpillars`] — 3-edge simple paths between a buyer and a seller (one
//!   edge short of a butterfly), counted per sign pattern, and the
//!   balance-suggestion scores `Ŝ`: for each non-linked pair, how many
//!   balanced butterflies adding the link would create, net of unbalanced
//!   ones.
//! - [`classifier`] — class-weighted logistic regression over signed-degree
//!   or caterpillar features (the supervised baselines `SCd` / `SCsc`).
//! - [`factorization`] — hinge-loss matrix factorization (`MF`) and its
//!   balance-aware extension (`MFwBT`) that also fits the implicit links
//!   suggested by `Ŝ`.
//! - [`randomwalk`] — signed propagation over a block matrix combining the
//!   bipartite graph with one-mode projections (`SBRW`), and the lazy-walk
//!   baseline (`LazyRW`).
//! - [`metrics`] / [`experiment`] — rank AUC, positive-class F1, seeded
//!   train/validation/test splits, grid search, and a planted-faction graph
//!   generator for controlled benchmarks.
//!
//! # Where to start
//!
//! The `examples/` directory is the primary interface; each file is a small,
//! deterministic, self-contained program:
//!
//! ```text
//! cargo run --example census_report          # butterfly census + surprise table
//! cargo run --example caterpillar_profiles   # per-pair sign-pattern path counts
//! cargo run --example suggest_links          # top balance-suggested links
//! cargo run --example supervised_classifiers # SCd vs SCsc
//! cargo run --example train_factorization    # MF vs MFwBT
//! cargo run --example signed_random_walk     # LazyRW vs SBRW, effect of ω
//! cargo run --example grid_sweep             # validation-AUC grid search
//! cargo run --example full_benchmark         # all six methods, median AUC/F1
//! ```
//!
//! A thin `bibalance` binary wraps the same entry points for file-based
//! pipelines (`bibalance census --input graph.tsv`, `bibalance evaluate
//! --method SBRW ...`); see the README for the file formats.
//!
//! # A three-minute tour
//!
//! ```
//! use bibalance::graph::SignedBipartiteGraph;
//! use bibalance::butterflies::count_butterflies;
//! use bibalance::caterpillars::balance_suggestion_matrix;
//!
//! let graph = SignedBipartiteGraph::from_tsv_reader(
//!     "alice\tshop1\t1\nbob\tshop1\t1\nalice\tshop2\t1\nbob\tshop2\t-1\n".as_bytes(),
//! )?;
//! let census = count_butterflies(&graph);
//! assert_eq!(census.total(), 1); // one butterfly, three + edges and one -
//! assert_eq!(census.balanced_total(), 0); // ... which is unbalanced
//!
//! // No non-linked pairs here, so nothing to suggest:
//! assert!(balance_suggestion_matrix(&graph).is_empty());
//! # Ok::<(), bibalance::Error>(())
//! ```

pub mod butterflies;
pub mod caterpillars;
pub mod classifier;
pub mod experiment;
pub mod factorization;
pub mod graph;
pub mod metrics;
pub mod randomwalk;

#[cfg(test)]
pub(crate) mod testutil;

/// Crate-wide error type. Variants are grouped by failure family rather than
/// by module so callers can match on what went wrong, not where.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A line of an input file could not be understood.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The same (buyer, seller) pair appeared with a second sign.
    #[error("duplicate edge: ({buyer}, {seller}) already has a sign")]
    DuplicateEdge { buyer: String, seller: String },

    /// A node index exceeded the side it was addressed into.
    #[error("{side} index {index} out of range ({limit} nodes)")]
    IndexOutOfRange {
        side: &'static str,
        index: usize,
        limit: usize,
    },

    /// A node id was not present in the graph.
    #[error("unknown {side} id: {id:?}")]
    UnknownId { side: &'static str, id: String },

    /// A configuration value violated its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An edge set was too small (or the fractions too skewed) to split.
    #[error("split error: {0}")]
    Split(String),

    /// Training labels contained a single class.
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// A metric is undefined on the given records (e.g. one true class).
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// A null-model quantity has no variance (expected fraction 0 or 1, or an
    /// empty census), so surprise is undefined.
    #[error("degenerate null model: {0}")]
    DegenerateNull(String),

    /// Fixed-point iteration exhausted its budget before reaching tolerance.
    #[error("no convergence after {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
