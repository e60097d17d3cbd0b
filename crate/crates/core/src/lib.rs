//! Exact extreme-point enumeration for coupling polytopes and minimum-entropy
//! coupling.
//!
//! Every polytope computation runs over exact rationals; floating point only
//! appears when an entropy functional is evaluated.

pub mod arith;
pub mod entropy;
pub mod enumerate;
pub mod graph;
pub mod local;
pub mod model;
pub mod peel;

pub use arith::{
    determinant, rat_from_decimal, solve_linear, ArithError, RatMatrix, Rational, Solution,
};
pub use entropy::{min_entropy, EntropyError, EntropyFunctional, MinimizationReport, PhiH};
pub use enumerate::{
    binomial, build_structure_matrix, candidate_from_subset, delinearize, enumerate_extremes,
    linearize, rank_subset, structure_rhs, subset_size, unrank_subset, Candidate, CandidateSubset,
    EnumError, EnumOptions, ExtremePoint, ExtremePointSet, Rejection, ScanCounts,
};
pub use graph::{
    classify, component_count, forest_cardinality, forest_cardinality_check, has_circuit,
    is_complete, vertex_partition, Classification, GraphError, SupportSet, VertexPartition,
};
pub use local::{
    greedy_coupling, lemma1_transform, lemma2_transform, lemma_2xn_transform, local_optimize,
    local_optimize_with_cap, verify_local_optimal, Block, Check, LocalError, LocalOptimalityReport,
    Relabel, TransformKind, TransformStep,
};
pub use model::{
    kappa, kappa_with_budget, majorizes, marginals_of, validate_distribution, Coupling,
    Distribution, Kappa, KappaBudget, MajorizationOrder, ModelError,
};
pub use peel::{peel_coupling, peel_with, PeelError, PeelState, PeelStep};

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Peel(#[from] PeelError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Local(#[from] LocalError),
}
