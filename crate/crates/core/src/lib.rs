//! Finite-dimensional operational measurement toolkit: effects, POVMs,
//! Lüders instruments and translation-covariant localization on a cyclic
//! lattice, with checkers for commutativity, nondisturbance, objectivity,
//! sharpness and causality conditions.
//!
//! Everything is finite dimensional. The checkers gather numerical evidence
//! on concrete model families; they do not prove statements about
//! continuum systems.

pub mod causality;
pub mod effects;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod localization;
pub mod luders;
pub mod matrix;
pub mod pom;
pub mod random;

pub use num_complex::Complex64;

pub use causality::{
    inflated_set, leakage_scan, schlieder_scan, strong_causality_chain, ChainReport, LeakageSeries,
    ScanOptions, SchliederReport, Verdict,
};
pub use effects::{annihilation_equivalence, validate_effect, Effect, Endpoint, Projection};
pub use error::{Error, Result};
pub use linalg::{commutator_norm, eig_hermitian, is_hermitian, op_norm, psd_sqrt, HermitianEigen};
pub use localization::{
    coherent_state_povm, position_marginal, sharp_position_map, smeared_position_map,
    spacelike_separated, Construction, LatticeModel, LocalizationMap, ModelConfig, SpatialSet,
};
pub use luders::{LudersInstrument, State};
pub use matrix::Matrix;
pub use pom::{Outcome, Pom};

/// Project-wide numerical tolerances. Every public predicate also accepts
/// an explicit override.
pub mod tolerance {
    /// Eigen-reconstruction, unitarity and normalization checks.
    pub const TAU_EIG: f64 = 1e-10;
    /// Hermiticity: `‖M − M†‖_op`.
    pub const TAU_HERM: f64 = 1e-10;
    /// Eigenvalues in `[−τ_psd, 0)` count as zero.
    pub const TAU_PSD: f64 = 1e-9;
    /// Clustering of eigenvalues at the spectral endpoints 0 and 1.
    pub const ENDPOINT: f64 = 1e-8;
    /// Default tolerance for equivalence verdicts.
    pub const VERDICT: f64 = 1e-8;
    /// Trace preservation of states and channels.
    pub const TRACE: f64 = 1e-10;
}
