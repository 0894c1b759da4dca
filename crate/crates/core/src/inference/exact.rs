//! Brute-force enumeration over all `2^N_V` joint assignments.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{TableMarginals, TablePotentials};

pub const MAX_EXACT_NODES: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub log_partition: f64,
    pub marginals: TableMarginals,
}

#[inline]
fn score(theta: &TablePotentials, graph: &Graph, assignment: u32) -> f64 {
    let bit = |i: usize| ((assignment >> i) & 1) as usize;
    let nodes: f64 = theta.node.iter().enumerate().map(|(i, t)| t[bit(i)]).sum();
    let edges: f64 = graph
        .edges()
        .iter()
        .zip(&theta.edge)
        .map(|(&(i, j), t)| t[2 * bit(i) + bit(j)])
        .sum();
    nodes + edges
}

/// Exact `log Z(theta)` and marginals of `p(x; theta)`.
pub fn exact_inference(theta: &TablePotentials, graph: &Graph) -> Result<ExactResult> {
    let n = graph.num_nodes();
    if n > MAX_EXACT_NODES {
        return Err(Error::TooLarge {
            nodes: n,
            max: MAX_EXACT_NODES,
        });
    }
    theta.validate(graph)?;
    let count = 1u32 << n;
    let top = (0..count)
        .map(|a| score(theta, graph, a))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut z = 0.0;
    let mut node = vec![[0.0; 2]; n];
    let mut edge = vec![[0.0; 4]; graph.num_edges()];
    for a in 0..count {
        let w = (score(theta, graph, a) - top).exp();
        z += w;
        for (i, acc) in node.iter_mut().enumerate() {
            acc[((a >> i) & 1) as usize] += w;
        }
        for (acc, &(i, j)) in edge.iter_mut().zip(graph.edges()) {
            acc[2 * ((a >> i) & 1) as usize + ((a >> j) & 1) as usize] += w;
        }
    }
    node.iter_mut().flatten().for_each(|v| *v /= z);
    edge.iter_mut().flatten().for_each(|v| *v /= z);
    Ok(ExactResult {
        log_partition: top + z.ln(),
        marginals: TableMarginals { node, edge },
    })
}
