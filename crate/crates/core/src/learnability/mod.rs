//! Bounds on the set of Bethe-learnable marginals and the classifier that
//! combines them.

pub mod bounds;
pub mod classify;
pub mod hessian;

pub use bounds::{
    inner_bound_unique, lemma1_test, lemma2_test, lemma3_test, lemma3_threshold,
    nonbacktracking_spectral_radius, CanonicalBpOutcome, HessianOutcome, HomogeneousOutcome,
    UniquenessOutcome, DEFAULT_EIG_TOL, DEFAULT_LEMMA1_MARGIN, LEMMA3_TOL,
};
pub use classify::{classify, ClassifyOptions, Evidence, Verdict, VerdictStatus};
pub use hessian::{bethe_entropy_hessian, HessianMatrix, HomogeneousEntries};
