//! Bethe-likelihood learning and the homogeneous brute-force oracles.

pub mod ascent;
pub mod homogeneous;

pub use ascent::{
    bethe_likelihood, learn_subgradient, moment_matching_check, LearnOptions, LearnRecord,
    LearnStatus, LearnTrace, MatchOutcome, StepSchedule,
};
pub use homogeneous::{
    figure1_search, homogeneous_entropy, homogeneous_grid_argmax, Figure1Result, GridArgmax,
    GridPoint, HomogeneousGrid, ThetaGrid, HULL_TOL, MAXIMIZER_F_TOL,
};
