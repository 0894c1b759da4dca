//! Bethe likelihood, BP-driven subgradient ascent and moment-matching checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::inference::{
    bethe_free_energy_table, bethe_log_partition, multi_restart_bp, multi_restart_bp_with,
    sum_product_from, BpOptions, Message, Restarts,
};
use crate::model::{canonical_from_table, MinimalMarginals, TableMarginals, TablePotentials};

/// Two fixed points whose `F` values differ by less than this tie for the top.
pub const F_TIE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    Constant,
    InvSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LearnOptions {
    pub step0: f64,
    pub schedule: StepSchedule,
    pub max_iter: usize,
    pub match_tol: f64,
    pub bp: BpOptions,
    pub restarts: Restarts,
    pub warm_start: bool,
    /// With warm starts on, every this many iterations the full restart set is
    /// run again.
    pub cold_restart_every: usize,
    /// Stop as stalled when the best residual has not improved for this many
    /// iterations.
    pub stall_window: usize,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            step0: 0.1,
            schedule: StepSchedule::InvSqrt,
            max_iter: 500,
            match_tol: 0.01,
            bp: BpOptions::default(),
            restarts: Restarts::default(),
            warm_start: true,
            cold_restart_every: 25,
            stall_window: 100,
        }
    }
}

impl LearnOptions {
    fn validate(&self) -> Result<()> {
        if !(self.step0 > 0.0) {
            return Err(Error::InvalidArgument("step0 must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if self.cold_restart_every < 1 {
            return Err(Error::InvalidArgument("cold_restart_every must be at least 1".into()));
        }
        Ok(())
    }

    fn step(&self, t: usize) -> f64 {
        match self.schedule {
            StepSchedule::Constant => self.step0,
            StepSchedule::InvSqrt => self.step0 / ((t + 1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnStatus {
    Matched,
    Stalled,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LearnRecord {
    pub iteration: usize,
    /// `mu_bar . theta - F_best(theta)`; an upper estimate because `F_best`
    /// comes from the fixed points BP happened to find.
    pub likelihood: f64,
    /// `max |mu_bar - mu_BP(theta)|` over node and edge tables.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnTrace {
    pub records: Vec<LearnRecord>,
    pub theta: TablePotentials,
    pub status: LearnStatus,
}

impl LearnTrace {
    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.residual)
    }
}

fn target_table(mu_bar: &MinimalMarginals, graph: &Graph) -> Result<TableMarginals> {
    let t = mu_bar.to_table(graph)?;
    t.require_interior()?;
    Ok(t)
}

/// `l_B(theta; mu_bar) = mu_bar . theta - F(theta)`, with `F(theta)` from
/// restarted BP. Since that `F` is a lower bound, the value returned is an
/// upper estimate of the true Bethe likelihood.
pub fn bethe_likelihood(
    theta: &TablePotentials,
    mu_bar: &MinimalMarginals,
    graph: &Graph,
    bp: &BpOptions,
    restarts: &Restarts,
) -> Result<f64> {
    let target = mu_bar.to_table(graph)?;
    let f = bethe_log_partition(theta, graph, bp, restarts)?;
    Ok(theta.dot(&target) - f.value)
}

struct Inference {
    beliefs: TableMarginals,
    free_energy: f64,
    messages: Vec<Message>,
}

fn best_fixed_point(
    theta: &TablePotentials,
    graph: &Graph,
    opts: &LearnOptions,
    warm: Option<&Vec<Message>>,
    cold: bool,
) -> Result<Inference> {
    if !cold {
        if let Some(init) = warm {
            let r = sum_product_from(theta, graph, &opts.bp, init.clone())?;
            if r.converged {
                let free_energy = bethe_free_energy_table(&r.beliefs, theta, graph);
                return Ok(Inference {
                    beliefs: r.beliefs,
                    free_energy,
                    messages: r.messages,
                });
            }
        }
    }
    let extra = warm.cloned().into_iter().collect();
    let set = multi_restart_bp_with(theta, graph, &opts.restarts, &opts.bp, extra)?;
    let best_residual = set.smallest_residual();
    let runs = set.runs.len();
    let best = set
        .points
        .into_iter()
        .next()
        .ok_or(Error::NoFixedPoint { runs, best_residual })?;
    Ok(Inference {
        beliefs: best.beliefs,
        free_energy: best.free_energy,
        messages: best.messages,
    })
}

/// Subgradient ascent on the Bethe likelihood from the canonical parameters:
/// `theta <- theta + eta_t (mu_bar - mu_BP(theta))` in table coordinates,
/// where `mu_BP` is the highest-`F` fixed point found.
pub fn learn_subgradient(mu_bar: &MinimalMarginals, graph: &Graph, opts: &LearnOptions) -> Result<LearnTrace> {
    opts.validate()?;
    let target = target_table(mu_bar, graph)?;
    let mut theta = canonical_from_table(&target, graph);
    let mut warm: Option<Vec<Message>> = None;
    let mut records = Vec::new();
    let mut best_residual = f64::INFINITY;
    let mut last_improvement = 0;
    let mut status = LearnStatus::MaxIter;

    for t in 0..opts.max_iter {
        let cold = !opts.warm_start || t % opts.cold_restart_every == 0;
        let inf = best_fixed_point(&theta, graph, opts, warm.as_ref(), cold).map_err(|e| Error::Ascent {
            iteration: t,
            source: Box::new(e),
        })?;
        let residual = target.max_abs_diff(&inf.beliefs);
        records.push(LearnRecord {
            iteration: t,
            likelihood: theta.dot(&target) - inf.free_energy,
            residual,
        });
        if residual <= opts.match_tol {
            status = LearnStatus::Matched;
            break;
        }
        if residual < best_residual - 1e-9 {
            best_residual = residual;
            last_improvement = t;
        } else if t - last_improvement >= opts.stall_window {
            status = LearnStatus::Stalled;
            break;
        }
        if t + 1 == opts.max_iter {
            break;
        }
        let direction = target.difference(&inf.beliefs);
        theta = theta.add_scaled(&direction, opts.step(t));
        if opts.warm_start {
            warm = Some(inf.messages);
        }
    }
    Ok(LearnTrace {
        records,
        theta,
        status,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchOutcome {
    pub matched: bool,
    /// Max-norm distance between `mu_bar` and the highest-`F` fixed point.
    pub residual: f64,
    /// No other found fixed point ties the top `F` within [`F_TIE_TOL`].
    pub unique_top: bool,
    pub fixed_points_found: usize,
}

/// Moment matching holds when the highest-`F` fixed point is within `tol` of
/// `mu_bar` and no other fixed point ties it.
pub fn moment_matching_check(
    theta: &TablePotentials,
    mu_bar: &MinimalMarginals,
    graph: &Graph,
    tol: f64,
    bp: &BpOptions,
    restarts: &Restarts,
) -> Result<MatchOutcome> {
    let target = mu_bar.to_table(graph)?;
    let set = multi_restart_bp(theta, graph, restarts, bp)?;
    let best = set.best().ok_or_else(|| Error::NoFixedPoint {
        runs: set.runs.len(),
        best_residual: set.smallest_residual(),
    })?;
    let residual = target.max_abs_diff(&best.beliefs);
    let unique_top = set.points[1..]
        .iter()
        .all(|p| p.free_energy < best.free_energy - F_TIE_TOL);
    Ok(MatchOutcome {
        matched: residual < tol && unique_top,
        residual,
        unique_top,
        fixed_points_found: set.points.len(),
    })
}
