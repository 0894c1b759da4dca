//! Hessian of the Bethe entropy in minimal coordinates.
//!
//! Coordinates are ordered nodes first (`mu_i`), then edges (`mu_ij`) in
//! canonical edge order. With `q_ij = 1 - mu_i - mu_j + mu_ij`:
//!
//! ```text
//! A[i,i] = (d_i - 1)(1/mu_i + 1/(1-mu_i)) - Σ_{j~i} [1/(mu_i - mu_ij) + 1/q_ij]
//! A[i,j] = -1/q_ij                                   (i ~ j)
//! A[i,e] = 1/(mu_i - mu_ij) + 1/q_ij                 (i ∈ e)
//! A[e,e] = -1/mu_ij - 1/(mu_i - mu_ij) - 1/(mu_j - mu_ij) - 1/q_ij
//! ```

use nalgebra::DMatrix;

use crate::error::Result;
use crate::graph::Graph;
use crate::model::MinimalMarginals;

#[derive(Debug, Clone, PartialEq)]
pub struct HessianMatrix {
    pub matrix: DMatrix<f64>,
    pub num_nodes: usize,
    pub num_edges: usize,
}

impl HessianMatrix {
    pub fn dim(&self) -> usize {
        self.num_nodes + self.num_edges
    }

    /// Row/column of edge `e`.
    pub fn edge_coord(&self, e: usize) -> usize {
        self.num_nodes + e
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let m = &self.matrix;
        (&self.matrix - m.transpose()).amax()
    }
}

/// Exact Hessian of `H_B` at strictly interior `mu`.
pub fn bethe_entropy_hessian(mu: &MinimalMarginals, graph: &Graph) -> Result<HessianMatrix> {
    mu.to_table(graph)?.require_interior()?;
    let nv = graph.num_nodes();
    let ne = graph.num_edges();
    let mut a = DMatrix::zeros(nv + ne, nv + ne);
    for i in 0..nv {
        let m = mu.node[i];
        a[(i, i)] = (graph.degree(i) as f64 - 1.0) * (1.0 / m + 1.0 / (1.0 - m));
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let (mi, mj, mij) = (mu.node[i], mu.node[j], mu.edge[e]);
        let q = 1.0 - mi - mj + mij;
        let ri = mi - mij;
        let rj = mj - mij;
        let k = nv + e;
        a[(i, i)] -= 1.0 / ri + 1.0 / q;
        a[(j, j)] -= 1.0 / rj + 1.0 / q;
        a[(i, j)] = -1.0 / q;
        a[(j, i)] = -1.0 / q;
        a[(i, k)] = 1.0 / ri + 1.0 / q;
        a[(k, i)] = a[(i, k)];
        a[(j, k)] = 1.0 / rj + 1.0 / q;
        a[(k, j)] = a[(j, k)];
        a[(k, k)] = -1.0 / mij - 1.0 / ri - 1.0 / rj - 1.0 / q;
    }
    Ok(HessianMatrix {
        matrix: a,
        num_nodes: nv,
        num_edges: ne,
    })
}

/// The handful of distinct Hessian entries at homogeneous marginals
/// `(mu_v, mu_e)`: node diagonals `a_i = (d_i - 1) a_hat - d_i c`, node-node
/// `b`, node-edge `c`, edge diagonal `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousEntries {
    pub a_hat: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl HomogeneousEntries {
    pub fn new(mu_v: f64, mu_e: f64) -> Self {
        let a_hat = 1.0 / mu_v + 1.0 / (1.0 - mu_v);
        let q = 1.0 - 2.0 * mu_v + mu_e;
        let b = -1.0 / q;
        let c = 1.0 / (mu_v - mu_e) + 1.0 / q;
        let d = -1.0 / mu_e - 1.0 / (mu_v - mu_e) - c;
        HomogeneousEntries { a_hat, b, c, d }
    }

    pub fn node_diagonal(&self, degree: usize) -> f64 {
        (degree as f64 - 1.0) * self.a_hat - degree as f64 * self.c
    }

    /// Places the entries by the block pattern of the homogeneous Hessian,
    /// independent of [`bethe_entropy_hessian`].
    pub fn assemble(&self, graph: &Graph) -> HessianMatrix {
        let nv = graph.num_nodes();
        let ne = graph.num_edges();
        let node_of_edge = |k: usize, l: usize| {
            let (i, j) = graph.edges()[l - nv];
            k == i || k == j
        };
        let a = DMatrix::from_fn(nv + ne, nv + ne, |k, l| match (k < nv, l < nv) {
            (true, true) if k == l => self.node_diagonal(graph.degree(k)),
            (true, true) if graph.edge_index(k, l).is_some() => self.b,
            (true, false) if node_of_edge(k, l) => self.c,
            (false, true) if node_of_edge(l, k) => self.c,
            (false, false) if k == l => self.d,
            _ => 0.0,
        });
        HessianMatrix {
            matrix: a,
            num_nodes: nv,
            num_edges: ne,
        }
    }

    /// `z^T A z` for `z = 1` on nodes and `z` on edges:
    /// `(2 N_E - N_V) a_hat - 2 N_E c + 2 N_E b + N_E d z^2 + 4 N_E c z`.
    pub fn quadratic_form(&self, num_nodes: usize, num_edges: usize, z: f64) -> f64 {
        let (nv, ne) = (num_nodes as f64, num_edges as f64);
        (2.0 * ne - nv) * self.a_hat - 2.0 * ne * self.c + 2.0 * ne * self.b
            + ne * z * z * self.d
            + 4.0 * ne * self.c * z
    }

    /// Positive exactly when the quadratic in `z` reaches positive values:
    /// `c^2 - d (a_hat - c + b) / 2 + (N_V / 4 N_E) d a_hat`.
    pub fn discriminant(&self, num_nodes: usize, num_edges: usize) -> f64 {
        let r = num_nodes as f64 / (4.0 * num_edges as f64);
        self.c * self.c - 0.5 * self.d * (self.a_hat - self.c + self.b) + r * self.d * self.a_hat
    }
}
