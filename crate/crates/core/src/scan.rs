//! Classification over the homogeneous marginal grid, with CSV output.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::Graph;
use crate::learnability::bounds::LEMMA3_TOL;
use crate::learnability::{classify, ClassifyOptions, Verdict, VerdictStatus};
use crate::learning::homogeneous::grid_steps;
use crate::model::MinimalMarginals;

pub const CSV_HEADER: &str = "mu_v,mu_e,lemma3,lemma2,lemma1,inner,empirical_match,verdict,residual";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Yes,
    No,
    Skipped,
}

impl Flag {
    fn from_test(result: Option<bool>) -> Self {
        match result {
            Some(true) => Flag::Yes,
            Some(false) => Flag::No,
            None => Flag::Skipped,
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::Yes => "yes",
            Flag::No => "no",
            Flag::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub mu_v: f64,
    pub mu_e: f64,
    pub lemma3: Flag,
    pub lemma2: Flag,
    pub lemma1: Flag,
    pub inner: Flag,
    pub empirical_match: Flag,
    pub verdict: VerdictStatus,
    /// Moment residual from the empirical stage, when it ran to completion.
    pub residual: Option<f64>,
}

impl ScanRow {
    pub fn from_verdict(mu_v: f64, mu_e: f64, verdict: &Verdict, eig_tol: f64) -> Self {
        let ev = &verdict.evidence;
        let empirical = ev.empirical.as_ref();
        ScanRow {
            mu_v,
            mu_e,
            lemma3: Flag::from_test(ev.lemma3_lhs.map(|l| l > LEMMA3_TOL)),
            lemma2: Flag::from_test(ev.max_eigenvalue.map(|l| l > eig_tol)),
            lemma1: Flag::from_test(ev.canonical_bp.as_ref().map(|c| c.unlearnable)),
            inner: Flag::from_test(ev.spectral_radius.map(|r| r < 1.0)),
            empirical_match: Flag::from_test(empirical.filter(|e| e.failure.is_none()).map(|e| e.matched)),
            verdict: verdict.status,
            residual: empirical.and_then(|e| e.residual),
        }
    }

    /// Any certified outer bound fired.
    pub fn outer(&self) -> bool {
        [self.lemma3, self.lemma2, self.lemma1].contains(&Flag::Yes)
    }
}

/// Interior grid points `(k/n, m/n)` with every table entry positive, in
/// row-major order (`mu_v` outer, `mu_e` inner).
pub fn interior_grid(resolution: f64) -> Result<Vec<(f64, f64)>> {
    let n = grid_steps(resolution)?;
    let mut out = Vec::new();
    for k in 1..n {
        for m in (2 * k).saturating_sub(n) + 1..k {
            out.push((k as f64 / n as f64, m as f64 / n as f64));
        }
    }
    Ok(out)
}

/// Classifies every interior grid point. Points are processed in parallel
/// and returned in grid order.
pub fn scan_homogeneous(graph: &Graph, resolution: f64, opts: &ClassifyOptions) -> Result<Vec<ScanRow>> {
    interior_grid(resolution)?
        .into_par_iter()
        .map(|(mu_v, mu_e)| {
            let mu = MinimalMarginals::homogeneous(graph, mu_v, mu_e)?;
            let verdict = classify(&mu, graph, opts)?;
            Ok(ScanRow::from_verdict(mu_v, mu_e, &verdict, opts.eig_tol))
        })
        .collect()
}

/// Decimal places needed to print grid coordinates at `resolution` exactly.
pub fn coordinate_decimals(resolution: f64) -> usize {
    (0..12).find(|&d| ((resolution * 10f64.powi(d as i32)).round() - resolution * 10f64.powi(d as i32)).abs() < 1e-9).unwrap_or(12)
}

/// Writes `# key=value` metadata lines, the header and one line per row.
pub fn write_csv<W: Write>(out: &mut W, metadata: &[(String, String)], rows: &[ScanRow], resolution: f64) -> std::io::Result<()> {
    let d = coordinate_decimals(resolution);
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let residual = r.residual.map(|x| format!("{x:.6e}")).unwrap_or_default();
        writeln!(
            out,
            "{:.d$},{:.d$},{},{},{},{},{},{},{}",
            r.mu_v, r.mu_e, r.lemma3, r.lemma2, r.lemma1, r.inner, r.empirical_match, r.verdict, residual
        )?;
    }
    Ok(())
}
