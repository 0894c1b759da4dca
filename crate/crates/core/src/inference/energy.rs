//! Bethe entropy and negative Bethe free energy.

use serde::Serialize;

use super::bp::{multi_restart_bp, BpOptions, Restarts};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{MinimalMarginals, TableMarginals, TablePotentials};

#[inline]
pub(crate) fn xlogx(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

/// `H_B(mu) = Σ_i (d_i - 1) Σ_x mu_i log mu_i - Σ_ij Σ mu_ij log mu_ij`.
/// Zero entries contribute zero. No polytope check.
pub fn bethe_entropy_table(mu: &TableMarginals, graph: &Graph) -> f64 {
    let nodes: f64 = mu
        .node
        .iter()
        .zip(graph.degrees())
        .map(|(m, &d)| (d as f64 - 1.0) * (xlogx(m[0]) + xlogx(m[1])))
        .sum();
    let edges: f64 = mu.edge.iter().map(|t| t.iter().map(|&p| xlogx(p)).sum::<f64>()).sum();
    nodes - edges
}

/// Bethe entropy of minimal marginals, after a polytope check.
pub fn bethe_entropy(mu: &MinimalMarginals, graph: &Graph) -> Result<f64> {
    Ok(bethe_entropy_table(&mu.to_table(graph)?, graph))
}

/// `F(mu; theta) = mu . theta + H_B(mu)`. No polytope check.
pub fn bethe_free_energy_table(mu: &TableMarginals, theta: &TablePotentials, graph: &Graph) -> f64 {
    theta.dot(mu) + bethe_entropy_table(mu, graph)
}

pub fn bethe_free_energy(
    mu: &MinimalMarginals,
    theta: &TablePotentials,
    graph: &Graph,
) -> Result<f64> {
    theta.validate(graph)?;
    Ok(bethe_free_energy_table(&mu.to_table(graph)?, theta, graph))
}

/// Best-effort Bethe log partition function: the largest `F` over the BP
/// fixed points found by restarts. The true maximum over the local polytope
/// can only be larger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetheEstimate {
    pub value: f64,
    pub argmax: TableMarginals,
    pub distinct_fixed_points: usize,
}

pub fn bethe_log_partition(
    theta: &TablePotentials,
    graph: &Graph,
    opts: &BpOptions,
    restarts: &Restarts,
) -> Result<BetheEstimate> {
    let set = multi_restart_bp(theta, graph, restarts, opts)?;
    let best = set.best().ok_or_else(|| Error::NoFixedPoint {
        runs: set.runs.len(),
        best_residual: set.smallest_residual(),
    })?;
    Ok(BetheEstimate {
        value: best.free_energy,
        argmax: best.beliefs.clone(),
        distinct_fixed_points: set.points.len(),
    })
}
