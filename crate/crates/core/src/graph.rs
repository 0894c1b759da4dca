//! Undirected simple graphs.
//!
//! Edges are stored as `(i, j)` with `i < j`, sorted lexicographically. That
//! order is the indexing contract for every edge-aligned vector in the crate
//! (edge potentials, edge marginals, Hessian edge coordinates).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    /// Per node: `(neighbor, edge index)`, sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
    degrees: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    num_nodes: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Edges may be given in
    /// either orientation; self-loops, duplicates and out-of-range indices
    /// are rejected.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::GraphDimension {
                param: "num_nodes",
                reason: "graph needs at least one node".into(),
            });
        }
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a node outside [0, {num_nodes})"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); num_nodes];
        for (e, &(i, j)) in canon.iter().enumerate() {
            adjacency[i].push((j, e));
            adjacency[j].push((i, e));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let degrees = adjacency.iter().map(Vec::len).collect();
        Ok(Graph {
            num_nodes,
            edges: canon,
            adjacency,
            degrees,
        })
    }

    /// Two-dimensional grid with wrap-around in both directions.
    pub fn torus(rows: usize, cols: usize) -> Result<Self> {
        if rows < 3 {
            return Err(dim_err("rows", rows, 3, "torus"));
        }
        if cols < 3 {
            return Err(dim_err("cols", cols, 3, "torus"));
        }
        let id = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::with_capacity(2 * rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                edges.push((id(r, c), id(r, (c + 1) % cols)));
                edges.push((id(r, c), id((r + 1) % rows, c)));
            }
        }
        Graph::new(rows * cols, edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(dim_err("n", n, 3, "cycle"));
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn chain(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(dim_err("n", n, 2, "chain"));
        }
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(dim_err("n", n, 2, "complete"));
        }
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// `(neighbor, edge index)` pairs of `node`, sorted by neighbor.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    /// Index of edge `{a, b}` in the canonical order, if present.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    /// True when the graph is connected and has no cycles.
    pub fn is_tree(&self) -> bool {
        self.num_edges() + 1 == self.num_nodes && self.is_connected()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.num_nodes
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Graph::new(file.num_nodes, file.edges.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            num_nodes: self.num_nodes,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialization cannot fail")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Graph::from_json_str(&std::fs::read_to_string(path)?)
    }
}

fn dim_err(param: &'static str, got: usize, min: usize, kind: &str) -> Error {
    Error::GraphDimension {
        param,
        reason: format!("{kind} requires {param} >= {min}, got {got}"),
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphFile {
            num_nodes: self.num_nodes,
            edges: self.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = GraphFile::deserialize(d)?;
        Graph::new(file.num_nodes, file.edges.into_iter().map(|[a, b]| (a, b)))
            .map_err(serde::de::Error::custom)
    }
}

/// A graph family plus its size, as written on the command line
/// (`torus:3x3`, `cycle:6`, `chain:5`, `complete:10`, `file:PATH`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphKind {
    Torus { rows: usize, cols: usize },
    Cycle(usize),
    Chain(usize),
    Complete(usize),
    File(PathBuf),
}

impl GraphKind {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphKind::Torus { rows, cols } => Graph::torus(*rows, *cols),
            GraphKind::Cycle(n) => Graph::cycle(*n),
            GraphKind::Chain(n) => Graph::chain(*n),
            GraphKind::Complete(n) => Graph::complete(*n),
            GraphKind::File(path) => Graph::from_file(path),
        }
    }
}

/// Builds the graph described by `kind`.
pub fn build_graph(kind: &GraphKind) -> Result<Graph> {
    kind.build()
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, arg) = s.split_once(':').ok_or_else(|| {
            Error::InvalidArgument(format!("graph spec `{s}` must look like family:size"))
        })?;
        let count = |param: &'static str, v: &str| -> Result<usize> {
            v.trim().parse::<usize>().map_err(|_| Error::GraphDimension {
                param,
                reason: format!("`{v}` is not a non-negative integer"),
            })
        };
        match family {
            "torus" => {
                let (r, c) = arg.split_once(['x', 'X']).ok_or_else(|| {
                    Error::InvalidArgument(format!("torus spec `{arg}` must be RxC"))
                })?;
                Ok(GraphKind::Torus {
                    rows: count("rows", r)?,
                    cols: count("cols", c)?,
                })
            }
            "cycle" => Ok(GraphKind::Cycle(count("n", arg)?)),
            "chain" => Ok(GraphKind::Chain(count("n", arg)?)),
            "complete" => Ok(GraphKind::Complete(count("n", arg)?)),
            "file" if !arg.is_empty() => Ok(GraphKind::File(PathBuf::from(arg))),
            _ => Err(Error::InvalidArgument(format!(
                "unknown graph family `{family}` (expected torus, cycle, chain, complete or file)"
            ))),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Torus { rows, cols } => write!(f, "torus:{rows}x{cols}"),
            GraphKind::Cycle(n) => write!(f, "cycle:{n}"),
            GraphKind::Chain(n) => write!(f, "chain:{n}"),
            GraphKind::Complete(n) => write!(f, "complete:{n}"),
            GraphKind::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}
