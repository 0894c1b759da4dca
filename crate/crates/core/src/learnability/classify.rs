//! Learnability verdicts combining the bounds with empirical learning.

use std::fmt;

use serde::Serialize;

use super::bounds::{
    inner_bound_unique, lemma1_test, lemma2_test, lemma3_test, DEFAULT_EIG_TOL, DEFAULT_LEMMA1_MARGIN,
};
use crate::error::Result;
use crate::graph::Graph;
use crate::inference::{BpOptions, Restarts};
use crate::learning::{learn_subgradient, moment_matching_check, LearnOptions, LearnStatus};
use crate::model::{canonical_parameters, MinimalMarginals, POLYTOPE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VerdictStatus {
    UnlearnableLemma3,
    UnlearnableLemma2,
    UnlearnableLemma1,
    LearnableInnerBound,
    EmpiricalMatch,
    EmpiricalNoMatch,
    Undetermined,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::UnlearnableLemma3 => "UnlearnableLemma3",
            VerdictStatus::UnlearnableLemma2 => "UnlearnableLemma2",
            VerdictStatus::UnlearnableLemma1 => "UnlearnableLemma1",
            VerdictStatus::LearnableInnerBound => "LearnableInnerBound",
            VerdictStatus::EmpiricalMatch => "EmpiricalMatch",
            VerdictStatus::EmpiricalNoMatch => "EmpiricalNoMatch",
            VerdictStatus::Undetermined => "Undetermined",
        }
    }

    /// Certified (not empirical) non-membership.
    pub fn is_unlearnable(self) -> bool {
        matches!(
            self,
            VerdictStatus::UnlearnableLemma3 | VerdictStatus::UnlearnableLemma2 | VerdictStatus::UnlearnableLemma1
        )
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub run: usize,
    pub free_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalBpEvidence {
    pub unlearnable: bool,
    pub reference_free_energy: f64,
    pub witnesses: Vec<Witness>,
    pub fixed_points_found: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalEvidence {
    pub matched: bool,
    pub learn_status: Option<LearnStatus>,
    pub iterations: usize,
    /// Moment residual of the learned parameters, when learning finished.
    pub residual: Option<f64>,
    pub unique_top: Option<bool>,
    /// Set when the learning stage failed.
    pub failure: Option<String>,
}

/// Results of every test that ran; `None` means the test did not run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Evidence {
    /// Closed-form homogeneous expression; positive means unlearnable.
    pub lemma3_lhs: Option<f64>,
    pub max_eigenvalue: Option<f64>,
    pub spectral_radius: Option<f64>,
    pub canonical_bp: Option<CanonicalBpEvidence>,
    pub empirical: Option<EmpiricalEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub eig_tol: f64,
    pub lemma1_margin: f64,
    pub bp: BpOptions,
    pub restarts: Restarts,
    /// Run every bound even after one is decisive. The status still follows
    /// the usual precedence.
    pub run_all_bounds: bool,
    /// Learning options for the empirical stage; `None` skips it.
    pub empirical: Option<LearnOptions>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            eig_tol: DEFAULT_EIG_TOL,
            lemma1_margin: DEFAULT_LEMMA1_MARGIN,
            bp: BpOptions::default(),
            restarts: Restarts::default(),
            run_all_bounds: false,
            empirical: Some(LearnOptions::default()),
        }
    }
}

/// Runs, in order, the homogeneous closed form (homogeneous inputs only),
/// the Hessian test, the uniqueness inner bound on the canonical parameters,
/// the canonical BP test and finally empirical learning, and reports the
/// first decisive outcome.
pub fn classify(mu: &MinimalMarginals, graph: &Graph, opts: &ClassifyOptions) -> Result<Verdict> {
    mu.check(graph, POLYTOPE_TOL)?;
    let theta = canonical_parameters(mu, graph)?;
    let mut ev = Evidence::default();
    let mut status: Option<VerdictStatus> = None;
    let decide = |status: &mut Option<VerdictStatus>, fired: bool, s: VerdictStatus| {
        if fired && status.is_none() {
            *status = Some(s);
        }
    };
    let proceed = |status: &Option<VerdictStatus>| status.is_none() || opts.run_all_bounds;

    if let Some((mu_v, mu_e)) = mu.as_homogeneous() {
        if graph.num_edges() > 0 {
            let r = lemma3_test(graph.num_nodes(), graph.num_edges(), mu_v, mu_e)?;
            ev.lemma3_lhs = Some(r.lhs);
            decide(&mut status, r.unlearnable, VerdictStatus::UnlearnableLemma3);
        }
    }
    if proceed(&status) {
        let r = lemma2_test(mu, graph, opts.eig_tol)?;
        ev.max_eigenvalue = Some(r.max_eigenvalue);
        decide(&mut status, r.unlearnable, VerdictStatus::UnlearnableLemma2);
    }
    if proceed(&status) {
        let r = inner_bound_unique(&theta, graph)?;
        ev.spectral_radius = Some(r.spectral_radius);
        decide(&mut status, r.learnable_certificate, VerdictStatus::LearnableInnerBound);
    }
    if proceed(&status) {
        let r = lemma1_test(mu, graph, &opts.bp, &opts.restarts, opts.lemma1_margin)?;
        ev.canonical_bp = Some(CanonicalBpEvidence {
            unlearnable: r.unlearnable,
            reference_free_energy: r.reference_free_energy,
            witnesses: r
                .witnesses
                .iter()
                .map(|p| Witness {
                    run: p.run,
                    free_energy: p.free_energy,
                })
                .collect(),
            fixed_points_found: r.fixed_points_found,
        });
        decide(&mut status, r.unlearnable, VerdictStatus::UnlearnableLemma1);
    }
    if status.is_none() {
        if let Some(learn) = &opts.empirical {
            let (s, e) = empirical_stage(mu, graph, learn)?;
            ev.empirical = Some(e);
            status = Some(s);
        }
    }
    Ok(Verdict {
        status: status.unwrap_or(VerdictStatus::Undetermined),
        evidence: ev,
    })
}

fn empirical_stage(
    mu: &MinimalMarginals,
    graph: &Graph,
    learn: &LearnOptions,
) -> Result<(VerdictStatus, EmpiricalEvidence)> {
    let trace = match learn_subgradient(mu, graph, learn) {
        Ok(t) => t,
        Err(e) => {
            return Ok((
                VerdictStatus::Undetermined,
                EmpiricalEvidence {
                    matched: false,
                    learn_status: None,
                    iterations: 0,
                    residual: None,
                    unique_top: None,
                    failure: Some(e.to_string()),
                },
            ))
        }
    };
    let check = moment_matching_check(&trace.theta, mu, graph, learn.match_tol, &learn.bp, &learn.restarts)?;
    let status = if check.matched {
        VerdictStatus::EmpiricalMatch
    } else {
        VerdictStatus::EmpiricalNoMatch
    };
    Ok((
        status,
        EmpiricalEvidence {
            matched: check.matched,
            learn_status: Some(trace.status),
            iterations: trace.records.len(),
            residual: Some(check.residual),
            unique_top: Some(check.unique_top),
            failure: None,
        },
    ))
}
