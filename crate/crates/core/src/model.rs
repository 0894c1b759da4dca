//! Parameters and pseudo-marginals of binary pairwise models.
//!
//! Table layout: node vectors are indexed by `x_i`, edge tables by
//! `2 * x_i + x_j`, i.e. `(0,0), (0,1), (1,0), (1,1)`, where `i < j` are the
//! endpoints of the edge in canonical order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Smallest table entry accepted where logarithms or reciprocals of the
/// marginals are taken.
pub const EPS_INTERIOR: f64 = 1e-9;

/// Slack used when validating marginals that come out of arithmetic.
pub const POLYTOPE_TOL: f64 = 1e-9;

pub const EDGE_STATES: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Full-table parameters `theta_i(x_i)` and `theta_ij(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePotentials {
    #[serde(rename = "theta_node")]
    pub node: Vec<[f64; 2]>,
    #[serde(rename = "theta_edge")]
    pub edge: Vec<[f64; 4]>,
}

impl TablePotentials {
    pub fn zeros(graph: &Graph) -> Self {
        TablePotentials {
            node: vec![[0.0; 2]; graph.num_nodes()],
            edge: vec![[0.0; 4]; graph.num_edges()],
        }
    }

    /// Checks the vectors line up with `graph` and that every entry is finite.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        check_len("theta_node", self.node.len(), graph.num_nodes())?;
        check_len("theta_edge", self.edge.len(), graph.num_edges())?;
        for (i, t) in self.node.iter().enumerate() {
            if !t.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("theta_node[{i}]")));
            }
        }
        for (e, t) in self.edge.iter().enumerate() {
            if !t.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("theta_edge[{e}]")));
            }
        }
        Ok(())
    }

    /// `mu . theta` over the full table representation.
    pub fn dot(&self, mu: &TableMarginals) -> f64 {
        let nodes: f64 = self
            .node
            .iter()
            .zip(&mu.node)
            .map(|(t, m)| t[0] * m[0] + t[1] * m[1])
            .sum();
        let edges: f64 = self
            .edge
            .iter()
            .zip(&mu.edge)
            .map(|(t, m)| t.iter().zip(m).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        nodes + edges
    }

    /// `self + scale * direction`, entrywise.
    pub fn add_scaled(&self, direction: &TableMarginals, scale: f64) -> Self {
        TablePotentials {
            node: self
                .node
                .iter()
                .zip(&direction.node)
                .map(|(t, d)| [t[0] + scale * d[0], t[1] + scale * d[1]])
                .collect(),
            edge: self
                .edge
                .iter()
                .zip(&direction.edge)
                .map(|(t, d)| std::array::from_fn(|k| t[k] + scale * d[k]))
                .collect(),
        }
    }
}

/// Spin-form parameters: `p(s) ∝ exp(Σ h_i s_i + Σ J_ij s_i s_j)` with
/// `s = 2x - 1 ∈ {-1, +1}`. Non-negative couplings are ferromagnetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingPotentials {
    pub field: Vec<f64>,
    pub coupling: Vec<f64>,
}

impl IsingPotentials {
    pub fn homogeneous(graph: &Graph, field: f64, coupling: f64) -> Self {
        IsingPotentials {
            field: vec![field; graph.num_nodes()],
            coupling: vec![coupling; graph.num_edges()],
        }
    }

    /// Table form of the same model: `theta_i(x) = h_i s(x)`,
    /// `theta_ij(x_i, x_j) = J_ij s(x_i) s(x_j)`.
    pub fn to_table(&self) -> TablePotentials {
        TablePotentials {
            node: self.field.iter().map(|&h| [-h, h]).collect(),
            edge: self.coupling.iter().map(|&j| [j, -j, -j, j]).collect(),
        }
    }
}

/// Converts table parameters to spin form. The two parameterizations define
/// the same distribution; the exponents differ by a constant.
pub fn table_to_ising(theta: &TablePotentials, graph: &Graph) -> IsingPotentials {
    let mut field: Vec<f64> = theta.node.iter().map(|t| 0.5 * (t[1] - t[0])).collect();
    let mut coupling = Vec::with_capacity(graph.num_edges());
    for (&(i, j), t) in graph.edges().iter().zip(&theta.edge) {
        let [t00, t01, t10, t11] = *t;
        field[i] += 0.25 * (t10 + t11 - t00 - t01);
        field[j] += 0.25 * (t01 + t11 - t00 - t10);
        coupling.push(0.25 * (t11 + t00 - t01 - t10));
    }
    IsingPotentials { field, coupling }
}

/// Minimal binary marginals: `mu_i = P(x_i = 1)`, `mu_ij = P(x_i = 1, x_j = 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalMarginals {
    #[serde(rename = "mu_node")]
    pub node: Vec<f64>,
    #[serde(rename = "mu_edge")]
    pub edge: Vec<f64>,
}

/// Full-table pseudo-marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMarginals {
    #[serde(rename = "mu_node")]
    pub node: Vec<[f64; 2]>,
    #[serde(rename = "mu_edge")]
    pub edge: Vec<[f64; 4]>,
}

/// Either marginal representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginals {
    Minimal(MinimalMarginals),
    Table(TableMarginals),
}

/// Local polytope constraints for homogeneous marginals:
/// `0 < mu_v < 1` and `max(0, 2 mu_v - 1) <= mu_e <= mu_v` (up to 1e-12).
pub fn check_homogeneous(mu_v: f64, mu_e: f64) -> Result<()> {
    const TOL: f64 = 1e-12;
    let fail = |constraint, value| Error::PolytopeViolation {
        location: "homogeneous marginals".into(),
        constraint,
        value,
    };
    if !(mu_v.is_finite() && mu_e.is_finite()) {
        return Err(Error::NonFinite("homogeneous marginals".into()));
    }
    if mu_v <= 0.0 || mu_v >= 1.0 {
        return Err(fail("0 < mu_v < 1", mu_v));
    }
    if mu_e < -TOL {
        return Err(fail("mu_e >= 0", mu_e));
    }
    if mu_e > mu_v + TOL {
        return Err(fail("mu_e <= mu_v", mu_v - mu_e));
    }
    if mu_e < 2.0 * mu_v - 1.0 - TOL {
        return Err(fail("2 mu_v - 1 <= mu_e", mu_e - (2.0 * mu_v - 1.0)));
    }
    Ok(())
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what} has {got} entries, graph needs {want}")));
    }
    Ok(())
}

fn edge_table(mi: f64, mj: f64, mij: f64) -> [f64; 4] {
    [1.0 - mi - mj + mij, mj - mij, mi - mij, mij]
}

impl MinimalMarginals {
    /// Every node gets `mu_v`, every edge `mu_e`. Requires `0 < mu_v < 1` and
    /// `max(0, 2 mu_v - 1) <= mu_e <= mu_v`.
    pub fn homogeneous(graph: &Graph, mu_v: f64, mu_e: f64) -> Result<Self> {
        check_homogeneous(mu_v, mu_e)?;
        Ok(MinimalMarginals {
            node: vec![mu_v; graph.num_nodes()],
            edge: vec![mu_e; graph.num_edges()],
        })
    }

    /// Validates the local polytope inequalities with slack `tol`, naming the
    /// first inequality that fails.
    pub fn check(&self, graph: &Graph, tol: f64) -> Result<()> {
        check_len("mu_node", self.node.len(), graph.num_nodes())?;
        check_len("mu_edge", self.edge.len(), graph.num_edges())?;
        for (i, &m) in self.node.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::NonFinite(format!("mu_node[{i}]")));
            }
            if m < -tol {
                return Err(violation(format!("node {i}"), "mu_i >= 0", m));
            }
            if 1.0 - m < -tol {
                return Err(violation(format!("node {i}"), "mu_i <= 1", 1.0 - m));
            }
        }
        for (e, (&(i, j), &mij)) in graph.edges().iter().zip(&self.edge).enumerate() {
            if !mij.is_finite() {
                return Err(Error::NonFinite(format!("mu_edge[{e}]")));
            }
            let (mi, mj) = (self.node[i], self.node[j]);
            let checks = [
                ("mu_ij >= 0", mij),
                ("mu_i - mu_ij >= 0", mi - mij),
                ("mu_j - mu_ij >= 0", mj - mij),
                ("1 - mu_i - mu_j + mu_ij >= 0", 1.0 - mi - mj + mij),
            ];
            for (name, slack) in checks {
                if slack < -tol {
                    return Err(violation(format!("edge {e} ({i}, {j})"), name, slack));
                }
            }
        }
        Ok(())
    }

    pub fn to_table(&self, graph: &Graph) -> Result<TableMarginals> {
        self.check(graph, POLYTOPE_TOL)?;
        Ok(TableMarginals {
            node: self.node.iter().map(|&m| [1.0 - m, m]).collect(),
            edge: graph
                .edges()
                .iter()
                .zip(&self.edge)
                .map(|(&(i, j), &mij)| edge_table(self.node[i], self.node[j], mij))
                .collect(),
        })
    }

    /// `(mu_v, mu_e)` when all node entries agree and all edge entries agree.
    pub fn as_homogeneous(&self) -> Option<(f64, f64)> {
        let v = *self.node.first()?;
        let e = self.edge.first().copied().unwrap_or(0.0);
        let same = |xs: &[f64], x: f64| xs.iter().all(|&y| (y - x).abs() <= 1e-12);
        (same(&self.node, v) && same(&self.edge, e)).then_some((v, e))
    }
}

fn violation(location: String, constraint: &'static str, value: f64) -> Error {
    Error::PolytopeViolation {
        location,
        constraint,
        value,
    }
}

impl TableMarginals {
    /// Checks non-negativity, normalization and edge-to-node consistency.
    pub fn check(&self, graph: &Graph, tol: f64) -> Result<()> {
        check_len("mu_node", self.node.len(), graph.num_nodes())?;
        check_len("mu_edge", self.edge.len(), graph.num_edges())?;
        for (i, m) in self.node.iter().enumerate() {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("mu_node[{i}]")));
            }
            if let Some(&v) = m.iter().find(|&&v| v < -tol) {
                return Err(violation(format!("node {i}"), "mu_i(x) >= 0", v));
            }
            let s = m[0] + m[1];
            if (s - 1.0).abs() > tol {
                return Err(violation(format!("node {i}"), "sum_x mu_i(x) = 1", s - 1.0));
            }
        }
        for (e, (&(i, j), t)) in graph.edges().iter().zip(&self.edge).enumerate() {
            let loc = || format!("edge {e} ({i}, {j})");
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("mu_edge[{e}]")));
            }
            if let Some(&v) = t.iter().find(|&&v| v < -tol) {
                return Err(violation(loc(), "mu_ij(x_i, x_j) >= 0", v));
            }
            for x in 0..2 {
                let row = t[2 * x] + t[2 * x + 1];
                if (row - self.node[i][x]).abs() > tol {
                    return Err(violation(loc(), "sum_xj mu_ij = mu_i", row - self.node[i][x]));
                }
                let col = t[x] + t[2 + x];
                if (col - self.node[j][x]).abs() > tol {
                    return Err(violation(loc(), "sum_xi mu_ij = mu_j", col - self.node[j][x]));
                }
            }
        }
        Ok(())
    }

    pub fn to_minimal(&self, graph: &Graph) -> Result<MinimalMarginals> {
        self.check(graph, POLYTOPE_TOL)?;
        Ok(MinimalMarginals {
            node: self.node.iter().map(|m| m[1]).collect(),
            edge: self.edge.iter().map(|t| t[3]).collect(),
        })
    }

    /// Largest absolute entrywise difference over node and edge tables.
    pub fn max_abs_diff(&self, other: &TableMarginals) -> f64 {
        let nodes = self
            .node
            .iter()
            .zip(&other.node)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()));
        let edges = self
            .edge
            .iter()
            .zip(&other.edge)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()));
        nodes.chain(edges).fold(0.0, f64::max)
    }

    /// `self - other`, entrywise, reusing the marginal layout.
    pub fn difference(&self, other: &TableMarginals) -> TableMarginals {
        TableMarginals {
            node: self
                .node
                .iter()
                .zip(&other.node)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
                .collect(),
            edge: self
                .edge
                .iter()
                .zip(&other.edge)
                .map(|(a, b)| std::array::from_fn(|k| a[k] - b[k]))
                .collect(),
        }
    }

    /// Smallest entry together with a description of where it sits.
    pub fn min_entry(&self) -> (f64, String) {
        let mut best = (f64::INFINITY, String::new());
        for (i, m) in self.node.iter().enumerate() {
            for (x, &v) in m.iter().enumerate() {
                if v < best.0 {
                    best = (v, format!("mu_node[{i}][x={x}]"));
                }
            }
        }
        for (e, t) in self.edge.iter().enumerate() {
            for (k, &v) in t.iter().enumerate() {
                if v < best.0 {
                    let (a, b) = EDGE_STATES[k];
                    best = (v, format!("mu_edge[{e}][({a},{b})]"));
                }
            }
        }
        best
    }

    pub(crate) fn require_interior(&self) -> Result<()> {
        let (v, location) = self.min_entry();
        if v < EPS_INTERIOR {
            return Err(Error::BoundaryMarginal {
                location,
                value: v,
                threshold: EPS_INTERIOR,
            });
        }
        Ok(())
    }
}

/// Converts between the minimal and table representations.
pub fn convert_marginals(input: &Marginals, graph: &Graph) -> Result<Marginals> {
    match input {
        Marginals::Minimal(m) => m.to_table(graph).map(Marginals::Table),
        Marginals::Table(t) => t.to_minimal(graph).map(Marginals::Minimal),
    }
}

/// True iff every local polytope inequality holds with slack at least `-tol`.
pub fn in_local_polytope(mu: &MinimalMarginals, graph: &Graph, tol: f64) -> bool {
    mu.check(graph, tol).is_ok()
}

/// Canonical parameters: `theta_i(x) = log mu_i(x)` and
/// `theta_ij(x_i, x_j) = log mu_ij(x_i, x_j) / (mu_i(x_i) mu_j(x_j))`.
pub fn canonical_parameters(mu: &MinimalMarginals, graph: &Graph) -> Result<TablePotentials> {
    let table = mu.to_table(graph)?;
    table.require_interior()?;
    Ok(canonical_from_table(&table, graph))
}

pub(crate) fn canonical_from_table(table: &TableMarginals, graph: &Graph) -> TablePotentials {
    TablePotentials {
        node: table.node.iter().map(|m| [m[0].ln(), m[1].ln()]).collect(),
        edge: graph
            .edges()
            .iter()
            .zip(&table.edge)
            .map(|(&(i, j), t)| {
                std::array::from_fn(|k| {
                    let (a, b) = EDGE_STATES[k];
                    (t[k] / (table.node[i][a] * table.node[j][b])).ln()
                })
            })
            .collect(),
    }
}
