//! Synchronous sum-product belief propagation on binary pairwise models.
//!
//! Messages live on directed edges: for canonical edge `e = (i, j)` the
//! message `i -> j` has index `2e` and `j -> i` has index `2e + 1`. Each
//! message is a normalized length-2 vector over the receiving variable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::energy::bethe_free_energy_table;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{TableMarginals, TablePotentials};

pub type Message = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MessageInit {
    Uniform,
    /// Componentwise uniform draws in (0, 1), normalized.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BpOptions {
    pub max_iter: usize,
    /// Convergence threshold on the largest undamped message change.
    pub tol: f64,
    /// Fraction of the previous message retained at each update.
    pub damping: f64,
    pub init: MessageInit,
}

impl Default for BpOptions {
    fn default() -> Self {
        BpOptions {
            max_iter: 10_000,
            tol: 1e-10,
            damping: 0.5,
            init: MessageInit::Uniform,
        }
    }
}

impl BpOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidArgument("damping must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BpResult {
    pub beliefs: TableMarginals,
    pub converged: bool,
    pub iterations: usize,
    /// Largest undamped message change in the last sweep.
    pub residual: f64,
    pub messages: Vec<Message>,
}

/// Index of the directed message `from -> to` along edge `e`.
#[inline]
pub fn directed(from: usize, to: usize, e: usize) -> usize {
    if from < to {
        2 * e
    } else {
        2 * e + 1
    }
}

#[inline]
fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Entry of the edge table of `e` for the orientation `from -> to`, with the
/// sender's state first.
#[inline]
fn edge_entry(theta_e: &[f64; 4], from: usize, to: usize, x_from: usize, x_to: usize) -> f64 {
    if from < to {
        theta_e[2 * x_from + x_to]
    } else {
        theta_e[2 * x_to + x_from]
    }
}

pub fn uniform_messages(graph: &Graph) -> Vec<Message> {
    vec![[0.5, 0.5]; 2 * graph.num_edges()]
}

pub fn random_messages(graph: &Graph, rng: &mut impl Rng) -> Vec<Message> {
    (0..2 * graph.num_edges())
        .map(|_| {
            let mut draw = || loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            };
            let (a, b) = (draw(), draw());
            [a / (a + b), b / (a + b)]
        })
        .collect()
}

fn initial_messages(graph: &Graph, init: MessageInit) -> Vec<Message> {
    match init {
        MessageInit::Uniform => uniform_messages(graph),
        MessageInit::Random { seed } => random_messages(graph, &mut ChaCha8Rng::seed_from_u64(seed)),
    }
}

fn log_messages(messages: &[Message]) -> Vec<[f64; 2]> {
    messages.iter().map(|m| [m[0].ln(), m[1].ln()]).collect()
}

/// Sum of incoming log-messages at `node`, skipping the one from `skip`.
#[inline]
fn cavity(
    theta: &TablePotentials,
    graph: &Graph,
    logm: &[[f64; 2]],
    node: usize,
    skip: Option<usize>,
) -> [f64; 2] {
    let mut acc = theta.node[node];
    for &(k, e) in graph.neighbors(node) {
        if Some(k) == skip {
            continue;
        }
        let m = logm[directed(k, node, e)];
        acc[0] += m[0];
        acc[1] += m[1];
    }
    acc
}

/// `log(exp(a) + exp(b))` for `a` finite.
#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// Writes the message every directed edge would send given `messages` into
/// `out`. `ratio` is scratch space of the same length.
fn sweep(theta: &TablePotentials, graph: &Graph, messages: &[Message], ratio: &mut [f64], out: &mut [Message]) {
    for (r, m) in ratio.iter_mut().zip(messages) {
        *r = (m[1] / m[0]).ln();
    }
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        let th = &theta.edge[e];
        for (from, to) in [(a, b), (b, a)] {
            // log-odds of the sender without the receiver's message
            let mut delta = theta.node[from][1] - theta.node[from][0];
            for &(k, f) in graph.neighbors(from) {
                if k != to {
                    delta += ratio[directed(k, from, f)];
                }
            }
            let entry = |xf, xt| edge_entry(th, from, to, xf, xt);
            let d = if delta.is_infinite() {
                let xf = usize::from(delta > 0.0);
                entry(xf, 1) - entry(xf, 0)
            } else {
                log_add(entry(0, 1), delta + entry(1, 1)) - log_add(entry(0, 0), delta + entry(1, 0))
            };
            let t = (-d.abs()).exp();
            let (big, small) = (1.0 / (1.0 + t), t / (1.0 + t));
            out[directed(from, to, e)] = if d >= 0.0 { [small, big] } else { [big, small] };
        }
    }
}

/// One undamped sweep: the message every directed edge would send given
/// `messages`.
pub fn update_messages(
    theta: &TablePotentials,
    graph: &Graph,
    messages: &[Message],
) -> Vec<Message> {
    let mut ratio = vec![0.0; messages.len()];
    let mut out = vec![[0.0; 2]; messages.len()];
    sweep(theta, graph, messages, &mut ratio, &mut out);
    out
}

/// Node and edge beliefs implied by a message set.
pub fn beliefs(theta: &TablePotentials, graph: &Graph, messages: &[Message]) -> TableMarginals {
    let logm = log_messages(messages);
    let node = (0..graph.num_nodes())
        .map(|i| {
            let l = cavity(theta, graph, &logm, i, None);
            let z = log_sum_exp2(l[0], l[1]);
            [(l[0] - z).exp(), (l[1] - z).exp()]
        })
        .collect();
    let edge = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            let ci = cavity(theta, graph, &logm, i, Some(j));
            let cj = cavity(theta, graph, &logm, j, Some(i));
            let l: [f64; 4] = std::array::from_fn(|k| ci[k / 2] + cj[k % 2] + theta.edge[e][k]);
            let z = log_sum_exp2(log_sum_exp2(l[0], l[1]), log_sum_exp2(l[2], l[3]));
            std::array::from_fn(|k| (l[k] - z).exp())
        })
        .collect();
    TableMarginals { node, edge }
}

/// Runs damped synchronous sum-product from `opts.init`.
pub fn sum_product(theta: &TablePotentials, graph: &Graph, opts: &BpOptions) -> Result<BpResult> {
    sum_product_from(theta, graph, opts, initial_messages(graph, opts.init))
}

/// Runs damped synchronous sum-product from the given messages.
///
/// Non-convergence is reported through `converged = false`; a NaN anywhere
/// in the messages is an error.
pub fn sum_product_from(
    theta: &TablePotentials,
    graph: &Graph,
    opts: &BpOptions,
    mut messages: Vec<Message>,
) -> Result<BpResult> {
    opts.validate()?;
    theta.validate(graph)?;
    if messages.len() != 2 * graph.num_edges() {
        return Err(Error::Dimension(format!(
            "{} initial messages for {} directed edges",
            messages.len(),
            2 * graph.num_edges()
        )));
    }
    let keep = opts.damping;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut ratio = vec![0.0; messages.len()];
    let mut fresh = vec![[0.0; 2]; messages.len()];
    for it in 1..=opts.max_iter {
        iterations = it;
        sweep(theta, graph, &messages, &mut ratio, &mut fresh);
        residual = 0.0;
        for (new, old) in fresh.iter().zip(&messages) {
            let d = (new[0] - old[0]).abs().max((new[1] - old[1]).abs());
            if d.is_nan() {
                return Err(Error::Numerical(format!(
                    "NaN message at belief propagation iteration {it}"
                )));
            }
            residual = residual.max(d);
        }
        if residual <= opts.tol {
            // keep the message set whose own update is within tol
            converged = true;
            break;
        }
        for (old, new) in messages.iter_mut().zip(&fresh) {
            let a = keep * old[0] + (1.0 - keep) * new[0];
            let b = keep * old[1] + (1.0 - keep) * new[1];
            *old = [a / (a + b), b / (a + b)];
        }
    }
    let beliefs = beliefs(theta, graph, &messages);
    Ok(BpResult {
        beliefs,
        converged,
        iterations,
        residual,
        messages,
    })
}

/// Restart schedule for multi-start belief propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Restarts {
    /// Random-initialization runs, on top of the uniform-initialization run.
    pub count: usize,
    pub seed: u64,
    /// Two fixed points closer than this in belief max-norm are the same.
    pub dedupe_tol: f64,
}

impl Default for Restarts {
    fn default() -> Self {
        Restarts {
            count: 20,
            seed: 0,
            dedupe_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    /// Run index: 0 is the uniform run, `1..=count` random runs, then any
    /// caller-supplied starts.
    pub run: usize,
    pub beliefs: TableMarginals,
    #[serde(skip)]
    pub messages: Vec<Message>,
    /// Negative Bethe free energy `F(beliefs; theta)`.
    pub free_energy: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Distinct converged fixed points, sorted by free energy (largest first),
/// plus per-run diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
    pub runs: Vec<RunSummary>,
}

impl FixedPointSet {
    pub fn best(&self) -> Option<&FixedPoint> {
        self.points.first()
    }

    pub fn smallest_residual(&self) -> f64 {
        self.runs.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min)
    }
}

fn run_seed_messages(graph: &Graph, seed: u64, run: usize) -> Vec<Message> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    random_messages(graph, &mut rng)
}

/// Runs BP from uniform messages and from `restarts.count` random starts,
/// and returns the distinct converged fixed points with their `F` values.
/// `opts.init` is ignored.
pub fn multi_restart_bp(
    theta: &TablePotentials,
    graph: &Graph,
    restarts: &Restarts,
    opts: &BpOptions,
) -> Result<FixedPointSet> {
    multi_restart_bp_with(theta, graph, restarts, opts, Vec::new())
}

/// As [`multi_restart_bp`], with extra starting message sets appended after
/// the random runs.
pub fn multi_restart_bp_with(
    theta: &TablePotentials,
    graph: &Graph,
    restarts: &Restarts,
    opts: &BpOptions,
    extra: Vec<Vec<Message>>,
) -> Result<FixedPointSet> {
    opts.validate()?;
    theta.validate(graph)?;
    let mut starts: Vec<Vec<Message>> = Vec::with_capacity(restarts.count + 1 + extra.len());
    starts.push(uniform_messages(graph));
    starts.extend((1..=restarts.count).map(|run| run_seed_messages(graph, restarts.seed, run)));
    starts.extend(extra);

    let results: Vec<Result<BpResult>> = starts
        .into_par_iter()
        .map(|init| sum_product_from(theta, graph, opts, init))
        .collect();

    let mut runs = Vec::with_capacity(results.len());
    let mut points: Vec<FixedPoint> = Vec::new();
    for (run, result) in results.into_iter().enumerate() {
        let r = result?;
        runs.push(RunSummary {
            run,
            converged: r.converged,
            iterations: r.iterations,
            residual: r.residual,
        });
        if !r.converged {
            continue;
        }
        let duplicate = points
            .iter()
            .any(|p| p.beliefs.max_abs_diff(&r.beliefs) <= restarts.dedupe_tol);
        if duplicate {
            continue;
        }
        let free_energy = bethe_free_energy_table(&r.beliefs, theta, graph);
        points.push(FixedPoint {
            run,
            beliefs: r.beliefs,
            messages: r.messages,
            free_energy,
            iterations: r.iterations,
        });
    }
    points.sort_by(|a, b| b.free_energy.total_cmp(&a.free_energy));
    Ok(FixedPointSet { points, runs })
}
