//! Command implementations.

use std::io::Write;

use bethe_core::inference::{bethe_log_partition, exact_inference, sum_product, BpResult};
use bethe_core::learning::{figure1_search, learn_subgradient, HomogeneousGrid, LearnStatus, LearnTrace};
use bethe_core::scan::{coordinate_decimals, scan_homogeneous, write_csv, Flag, ScanRow};
use bethe_core::{
    classify, io, ClassifyOptions, Graph, GraphKind, MinimalMarginals, TableMarginals, TablePotentials,
    Verdict,
};
use serde::Serialize;

use crate::{CliError, Command, Settings, EXIT_NONCONVERGENCE};

pub fn dispatch(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Infer(a) => infer(&Settings::resolve(a)?),
        Command::Learn(a) => learn(&Settings::resolve(a)?),
        Command::Classify(a) => classify_cmd(&Settings::resolve(a)?),
        Command::Scan(a) => scan(&Settings::resolve(a)?),
        Command::Figure1(a) => figure1(&Settings::resolve(a)?),
    }
}

fn graph_from_flag(s: &Settings) -> Result<Option<Graph>, CliError> {
    let Some(spec) = &s.graph else {
        return Ok(None);
    };
    let kind: GraphKind = spec.parse().map_err(|e| CliError::core("parsing --graph", e))?;
    kind.build().map(Some).map_err(|e| CliError::core("building graph", e))
}

fn require_graph(s: &Settings) -> Result<Graph, CliError> {
    graph_from_flag(s)?.ok_or_else(|| CliError::input("building graph", "--graph is required"))
}

fn target_marginals(s: &Settings, graph: &Graph) -> Result<MinimalMarginals, CliError> {
    let mu = match (&s.homogeneous, &s.marginals) {
        (Some(_), Some(_)) => {
            return Err(CliError::input("reading marginals", "give --homogeneous or --marginals, not both"))
        }
        (Some((v, e)), None) => {
            MinimalMarginals::homogeneous(graph, *v, *e).map_err(|e| CliError::core("reading marginals", e))?
        }
        (None, Some(path)) => io::load_marginals(path).map_err(|e| CliError::core("reading marginals", e))?,
        (None, None) => return Err(CliError::input("reading marginals", "--homogeneous or --marginals is required")),
    };
    mu.check(graph, bethe_core::model::POLYTOPE_TOL)
        .map_err(|e| CliError::core("reading marginals", e))?;
    Ok(mu)
}

fn emit(s: &Settings, bytes: &[u8]) -> Result<(), CliError> {
    let res = match &s.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(bytes).map_err(|e| e.to_string()),
    };
    res.map_err(|m| CliError::input("writing output", m))
}

fn emit_json<T: Serialize>(s: &Settings, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    emit(s, text.as_bytes())
}

fn metadata_object(s: &Settings, command: &str) -> serde_json::Map<String, serde_json::Value> {
    s.metadata(command)
        .into_iter()
        .map(|(k, v)| (k, serde_json::Value::String(v)))
        .collect()
}

#[derive(Serialize)]
struct BpReport<'a> {
    converged: bool,
    iterations: usize,
    residual: f64,
    beliefs: &'a TableMarginals,
}

impl<'a> From<&'a BpResult> for BpReport<'a> {
    fn from(r: &'a BpResult) -> Self {
        BpReport {
            converged: r.converged,
            iterations: r.iterations,
            residual: r.residual,
            beliefs: &r.beliefs,
        }
    }
}

#[derive(Serialize)]
struct BetheReport {
    log_partition: f64,
    /// Best `F` over the fixed points found; the true maximum can be larger.
    approximate: bool,
    distinct_fixed_points: usize,
}

#[derive(Serialize)]
struct ExactReport {
    log_partition: f64,
    marginals: TableMarginals,
}

#[derive(Serialize)]
struct InferReport<'a> {
    metadata: serde_json::Map<String, serde_json::Value>,
    bp: BpReport<'a>,
    bethe: BetheReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactReport>,
}

fn infer(s: &Settings) -> Result<i32, CliError> {
    let model_path = s
        .model
        .as_deref()
        .ok_or_else(|| CliError::input("reading model", "--model is required"))?;
    let fallback = graph_from_flag(s)?;
    let (graph, theta) =
        io::load_model(model_path, fallback.as_ref()).map_err(|e| CliError::core("reading model", e))?;
    let bp = sum_product(&theta, &graph, &s.bp()).map_err(|e| CliError::core("belief propagation", e))?;
    let estimate = bethe_log_partition(&theta, &graph, &s.bp(), &s.restart_schedule())
        .map_err(|e| CliError::core("Bethe log partition", e))?;
    let exact = if s.exact {
        let r = exact_inference(&theta, &graph).map_err(|e| CliError::core("exact inference", e))?;
        Some(ExactReport {
            log_partition: r.log_partition,
            marginals: r.marginals,
        })
    } else {
        None
    };
    emit_json(
        s,
        &InferReport {
            metadata: metadata_object(s, "infer"),
            bp: BpReport::from(&bp),
            bethe: BetheReport {
                log_partition: estimate.value,
                approximate: true,
                distinct_fixed_points: estimate.distinct_fixed_points,
            },
            exact,
        },
    )?;
    if !bp.converged {
        eprintln!(
            "belief propagation: no convergence after {} iterations (residual {:.3e})",
            bp.iterations, bp.residual
        );
        return Ok(EXIT_NONCONVERGENCE);
    }
    Ok(0)
}

#[derive(Serialize)]
struct ModelOut<'a> {
    graph: &'a Graph,
    theta_node: &'a [[f64; 2]],
    theta_edge: &'a [[f64; 4]],
}

#[derive(Serialize)]
struct LearnReport<'a> {
    metadata: serde_json::Map<String, serde_json::Value>,
    status: LearnStatus,
    iterations: usize,
    final_residual: f64,
    records: &'a [bethe_core::learning::LearnRecord],
    model: ModelOut<'a>,
}

fn learn_report<'a>(s: &Settings, graph: &'a Graph, trace: &'a LearnTrace) -> LearnReport<'a> {
    let theta: &TablePotentials = &trace.theta;
    LearnReport {
        metadata: metadata_object(s, "learn"),
        status: trace.status,
        iterations: trace.records.len(),
        final_residual: trace.final_residual(),
        records: &trace.records,
        model: ModelOut {
            graph,
            theta_node: &theta.node,
            theta_edge: &theta.edge,
        },
    }
}

fn learn(s: &Settings) -> Result<i32, CliError> {
    let graph = require_graph(s)?;
    let mu = target_marginals(s, &graph)?;
    let trace = learn_subgradient(&mu, &graph, &s.learn()).map_err(|e| CliError::core("learning", e))?;
    emit_json(s, &learn_report(s, &graph, &trace))?;
    Ok(0)
}

fn classify_options(s: &Settings, empirical: bool) -> ClassifyOptions {
    ClassifyOptions {
        bp: s.bp(),
        restarts: s.restart_schedule(),
        run_all_bounds: s.all_bounds,
        empirical: empirical.then(|| s.learn()),
        ..ClassifyOptions::default()
    }
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    metadata: serde_json::Map<String, serde_json::Value>,
    #[serde(flatten)]
    verdict: &'a Verdict,
}

fn classify_cmd(s: &Settings) -> Result<i32, CliError> {
    let graph = require_graph(s)?;
    let mu = target_marginals(s, &graph)?;
    let verdict = classify(&mu, &graph, &classify_options(s, true)).map_err(|e| CliError::core("classify", e))?;
    emit_json(
        s,
        &ClassifyReport {
            metadata: metadata_object(s, "classify"),
            verdict: &verdict,
        },
    )?;
    Ok(0)
}

/// First point where the inner bound and an outer bound both fire.
pub fn disjointness_violation(rows: &[ScanRow]) -> Option<&ScanRow> {
    rows.iter().find(|r| r.inner == Flag::Yes && r.outer())
}

fn scan(s: &Settings) -> Result<i32, CliError> {
    let graph = require_graph(s)?;
    let resolution = s.resolution.unwrap_or(0.01);
    let opts = classify_options(s, s.empirical);
    let rows = scan_homogeneous(&graph, resolution, &opts).map_err(|e| CliError::core("scan", e))?;
    let mut meta = s.metadata("scan");
    meta.push(("resolution".into(), resolution.to_string()));
    meta.push(("empirical".into(), s.empirical.to_string()));
    meta.push(("all_bounds".into(), s.all_bounds.to_string()));
    let mut buf = Vec::new();
    write_csv(&mut buf, &meta, &rows, resolution).map_err(|e| CliError::input("writing output", e))?;
    emit(s, &buf)?;
    if let Some(r) = disjointness_violation(&rows) {
        return Err(CliError {
            kind: crate::Failure::Numerical,
            stage: "scan".into(),
            message: format!(
                "inner and outer bounds both fired at mu_v={}, mu_e={}",
                r.mu_v, r.mu_e
            ),
        });
    }
    Ok(0)
}

fn figure1(s: &Settings) -> Result<i32, CliError> {
    let graph = require_graph(s)?;
    let (mu_v, mu_e) = s
        .homogeneous
        .ok_or_else(|| CliError::input("reading marginals", "--homogeneous is required"))?;
    let resolution = s.resolution.unwrap_or(0.002);
    let grid = s.theta_grid();
    let r = figure1_search(mu_v, mu_e, &graph, &grid, resolution).map_err(|e| CliError::core("figure1 search", e))?;
    let surface_grid = HomogeneousGrid::new(&graph, resolution).map_err(|e| CliError::core("figure1 surface", e))?;
    let surface = surface_grid.surface(r.field, r.coupling);

    let d = coordinate_decimals(resolution);
    let mut out = Vec::new();
    let mut line = |text: String| {
        out.extend_from_slice(text.as_bytes());
        out.push(b'\n');
    };
    for (k, v) in s.metadata("figure1") {
        line(format!("# {k}={v}"));
    }
    line(format!("# resolution={resolution}"));
    line(format!("# theta_resolution={}", grid.resolution));
    line(format!("# h_range={},{}", grid.h_min, grid.h_max));
    line(format!("# j_range={},{}", grid.j_min, grid.j_max));
    line(format!("# mu_bar={mu_v},{mu_e}"));
    line(format!("# field={}", r.field));
    line(format!("# coupling={}", r.coupling));
    line(format!("# likelihood={}", r.likelihood));
    line(format!("# f_at_mu={}", r.f_at_mu));
    line(format!("# f_max={}", r.f_max));
    line(format!("# hull_distance={}", r.hull_distance));
    line(format!("# hull_contains_mu={}", r.hull_contains_mu));
    line(format!("# maximizers={}", r.maximizers.len()));
    for p in &r.maximizers {
        line(format!("# maximizer={:.d$},{:.d$},{}", p.mu_v, p.mu_e, p.free_energy));
    }
    line("mu_v,mu_e,free_energy".to_string());
    for (idx, f) in surface.iter().enumerate() {
        let (v, e) = surface_grid.coords(idx);
        line(format!("{v:.d$},{e:.d$},{f}"));
    }
    emit(s, &out)?;
    Ok(0)
}
