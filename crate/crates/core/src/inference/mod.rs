//! Belief propagation, Bethe energies and exact enumeration.

pub mod bp;
pub mod energy;
pub mod exact;

pub use bp::{
    multi_restart_bp, multi_restart_bp_with, sum_product, sum_product_from, BpOptions, BpResult,
    FixedPoint, FixedPointSet, Message, MessageInit, Restarts, RunSummary,
};
pub use energy::{
    bethe_entropy, bethe_entropy_table, bethe_free_energy, bethe_free_energy_table,
    bethe_log_partition, BetheEstimate,
};
pub use exact::{exact_inference, ExactResult, MAX_EXACT_NODES};
