//! Numerical engine for multi-user continuous-variable QKD with Gaussian
//! multipartite states.
//!
//! The crate builds GHZ-like, downstream-access-network (DAN) and six-mode
//! quotient-graph-state resources from squeezer specifications, evolves
//! them through lossy noisy channels, and evaluates asymptotic and
//! finite-size secret-key rates for conference, post-conference bipartite
//! and independent bipartite key generation.
//!
//! Everything is generic over the floating-point scalar via [`Scalar`];
//! the `*64` aliases below fix `f64`, which is what the scan CLI and the
//! acceptance suite use.
//!
//! Module map:
//! - [`gaussian`]: covariance-matrix calculus (symplectic spectra, von
//!   Neumann entropy, homodyne conditioning, channels, Gaussian mutual
//!   information).
//! - [`williamson`]: Williamson normal form and purification.
//! - [`states`]: the three multipartite state builders and the trusted
//!   impurity model.
//! - [`quotient`]: finite dual-rail lattices and the coloring/congruence
//!   quotient down to the six-mode state.
//! - [`keyrates`]: protocol scenarios and asymptotic key rates.
//! - [`finitesize`]: estimator statistics, conservative channels and
//!   finite-size rates.

// Validation guards are written as negated comparisons on purpose:
// `!(x > 0.0)` also rejects NaN, which `x <= 0.0` lets through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finitesize;
pub mod gaussian;
pub mod keyrates;
pub mod linalg;
pub mod quotient;
pub mod scalar;
pub mod states;
pub mod williamson;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use gaussian::{
    apply_lossy_channel, condition_on_homodyne, homodyne_differential_entropy,
    homodyne_mutual_information, symplectic_spectrum, von_neumann_entropy, ChannelParams,
    CovMatrix, MeasurementSpec, SymplecticSpectrum,
};
pub use keyrates::{
    assignment_for, bipartite_post_cka_rate, conditional_correlation_classify,
    conference_key_rate, holevo_bound, independent_bipartite_sum, key_rate, CorrelationClass,
    Distribution, KeyRateResult, PartyAssignment, PostCkaRow, RateKind, ScenarioSpec, Scheme,
};
pub use quotient::{
    build_dual_rail, color_classes, neighbourhood_preservation_check, quotient_adjacency,
    quotient_covariance, quotient_purity_report, selector_adjacency, selector_covariance,
    ColorPartition, DualRailLattice, SelectorKind, SelectorMatrix,
};
pub use states::{
    beamsplitter, build_dan, build_ghz_like, build_six_mode, build_state,
    extend_with_trusted_ancillas, purify_squeezer, squeezed_mode, ModeMap, PurifiedSqueezer,
    SixModeBlocks, SqueezerSpec, StateKind,
};
pub use finitesize::{
    conservative_channel, correlation_multiplicity, delta_n, estimator_variances,
    finite_key_rate, simulate_estimation, var_xdxu, EcOrdering, EstimatorStats,
    FiniteSizeParams,
};

/// `f64` concrete aliases for the main value types.
pub type CovMatrix64 = CovMatrix<f64>;
pub type ChannelParams64 = ChannelParams<f64>;
pub type SqueezerSpec64 = SqueezerSpec<f64>;
pub type ScenarioSpec64 = ScenarioSpec<f64>;
pub type KeyRateResult64 = KeyRateResult<f64>;
pub type FiniteSizeParams64 = FiniteSizeParams<f64>;
pub type EstimatorStats64 = EstimatorStats<f64>;
