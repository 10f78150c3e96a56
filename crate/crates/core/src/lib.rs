//! Core numerics: Hermitian linear algebra, density operators, quantum
//! divergences, covariance embeddings, model classes, information
//! projections, and the experiment harness built on top of them.

pub mod density;
pub mod divergence;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod hermitian;
pub mod io;
pub mod model;
pub mod projection;
pub mod rng;

/// Eigenvalues at or below this threshold are treated as zero everywhere a
/// support decision is made (matrix logarithms, rank counts, pmf clipping).
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

pub use density::{maximally_mixed, pinch, pinch_diagonal, DensityOperator, Povm, ProbabilityVector};
pub use divergence::{
    default_povm_family, kl, measured_re, pinsker_gap, qre, qre_variational_lb, thompson,
    von_neumann_entropy,
};
pub use embedding::{covariance_embed, empirical_embed, make_embedding, perturbed_empirical, sample_iid, EmbeddingKind, EmpiricalSample, FeatureEmbedding};
pub use error::{Error, Result};
pub use experiment::{
    compute_bound_context, matrix_concentration_check, regret_comparison,
    run_concentration_experiment, run_rate_experiment, BoundContext, ExperimentConfig,
    MatrixKind, MatrixSource, RateOutcome, Regime, TrialRecord,
};
pub use model::{classical_mlp, qmlp, ClassicalClass, ClassicalProjection, ModelClass, ProjectionResult};
pub use projection::{i_projection, pinch_class, prop1_check, prop3_bound_check, pythagorean_residual, MixtureFamily, PinchVerdict, Prop3Check};
pub use hermitian::{eig_hermitian, matrix_fn, op_norm, trace_norm, HermitianMatrix, OrthonormalBasis, SpectralDecomposition, SupportPolicy};
