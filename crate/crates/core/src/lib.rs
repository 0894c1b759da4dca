//! Bethe learnability of binary pairwise Markov random fields.
//!
//! Given empirical marginals, decides whether Bethe-approximate maximum
//! likelihood can reproduce them (moment matching), using closed-form Hessian
//! outer bounds, a canonical-parameter belief propagation outer bound, a
//! BP-uniqueness inner bound, and empirical subgradient learning.

pub mod error;
pub mod graph;
pub mod inference;
pub mod io;
pub mod learnability;
pub mod learning;
pub mod model;
pub mod scan;

pub use error::{Error, Result};
pub use graph::{build_graph, Graph, GraphKind};
pub use model::{
    canonical_parameters, convert_marginals, in_local_polytope, table_to_ising, IsingPotentials,
    Marginals, MinimalMarginals, TableMarginals, TablePotentials,
};
pub use learnability::{classify, ClassifyOptions, Verdict, VerdictStatus};
