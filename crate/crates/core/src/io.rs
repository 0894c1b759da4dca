//! Model and marginals file formats.
//!
//! A model file is a JSON object with `theta_node` (`N_V` pairs),
//! `theta_edge` (`N_E` quadruples in the order `(0,0),(0,1),(1,0),(1,1)`)
//! and an optional `graph`, given inline as `{"num_nodes", "edges"}` or as a
//! string holding either a graph spec (`torus:3x3`) or a path to a graph
//! file. Relative paths resolve against the model file's directory.
//!
//! A marginals file holds `mu_node` (`N_V` values) and `mu_edge` (`N_E`
//! values) in minimal form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind};
use crate::model::{MinimalMarginals, TablePotentials};

/// Where a file's graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Inline(Graph),
    Spec(GraphKind),
    Path(PathBuf),
}

impl GraphSource {
    fn from_value(value: serde_json::Value) -> Result<Self> {
        match value {
            serde_json::Value::String(s) => Ok(match s.parse::<GraphKind>() {
                Ok(kind) => GraphSource::Spec(kind),
                Err(_) if !s.is_empty() => GraphSource::Path(PathBuf::from(s)),
                Err(e) => return Err(e),
            }),
            obj @ serde_json::Value::Object(_) => Ok(GraphSource::Inline(
                serde_json::from_value(obj).map_err(|e| Error::InvalidGraph(e.to_string()))?,
            )),
            other => Err(Error::InvalidGraph(format!(
                "`graph` must be an object or a string, got {other}"
            ))),
        }
    }

    /// Builds the graph, resolving relative paths against `base`.
    pub fn resolve(&self, base: Option<&Path>) -> Result<Graph> {
        let rebase = |p: &Path| match base {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        };
        match self {
            GraphSource::Inline(g) => Ok(g.clone()),
            GraphSource::Spec(GraphKind::File(p)) => Graph::from_file(rebase(p)),
            GraphSource::Spec(kind) => kind.build(),
            GraphSource::Path(p) => Graph::from_file(rebase(p)),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default)]
    graph: Option<serde_json::Value>,
    theta_node: Vec<[f64; 2]>,
    theta_edge: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub graph: Option<GraphSource>,
    pub theta: TablePotentials,
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    let raw: RawModel = serde_json::from_str(text)?;
    Ok(ModelFile {
        graph: raw.graph.map(GraphSource::from_value).transpose()?,
        theta: TablePotentials {
            node: raw.theta_node,
            edge: raw.theta_edge,
        },
    })
}

/// Serializes a model with its graph inline.
pub fn model_to_json(graph: &Graph, theta: &TablePotentials) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        graph: &'a Graph,
        theta_node: &'a [[f64; 2]],
        theta_edge: &'a [[f64; 4]],
    }
    serde_json::to_string_pretty(&Out {
        graph,
        theta_node: &theta.node,
        theta_edge: &theta.edge,
    })
    .expect("model serialization cannot fail")
}

/// Reads a model file. A graph named in the file takes precedence over
/// `fallback`; with neither, or with both disagreeing, the input is rejected.
pub fn load_model(path: &Path, fallback: Option<&Graph>) -> Result<(Graph, TablePotentials)> {
    let text = std::fs::read_to_string(path)?;
    let model = parse_model(&text)?;
    let graph = match (&model.graph, fallback) {
        (Some(src), fb) => {
            let g = src.resolve(path.parent())?;
            if let Some(other) = fb {
                if other.num_nodes() != g.num_nodes() || other.edges() != g.edges() {
                    return Err(Error::InvalidArgument(
                        "the model file's graph differs from the one given on the command line".into(),
                    ));
                }
            }
            g
        }
        (None, Some(g)) => g.clone(),
        (None, None) => {
            return Err(Error::InvalidArgument(
                "the model file names no graph and none was given".into(),
            ))
        }
    };
    model.theta.validate(&graph)?;
    Ok((graph, model.theta))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarginals {
    mu_node: Vec<f64>,
    mu_edge: Vec<f64>,
}

/// Parses minimal marginals; no polytope check.
pub fn parse_marginals(text: &str) -> Result<MinimalMarginals> {
    let raw: RawMarginals = serde_json::from_str(text)?;
    Ok(MinimalMarginals {
        node: raw.mu_node,
        edge: raw.mu_edge,
    })
}

pub fn load_marginals(path: &Path) -> Result<MinimalMarginals> {
    parse_marginals(&std::fs::read_to_string(path)?)
}
