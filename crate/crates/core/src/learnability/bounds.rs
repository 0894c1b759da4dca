//! Outer bounds (marginals that cannot be Bethe learnable) and the
//! BP-uniqueness inner bound.

use serde::Serialize;

use super::hessian::bethe_entropy_hessian;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::inference::{bethe_free_energy_table, multi_restart_bp, BpOptions, FixedPoint, Restarts};
use crate::model::{canonical_parameters, check_homogeneous, table_to_ising, MinimalMarginals, TablePotentials};

pub const DEFAULT_EIG_TOL: f64 = 1e-9;
pub const DEFAULT_LEMMA1_MARGIN: f64 = 1e-6;
/// Values of the homogeneous closed form this close to zero are rounding
/// noise from points on the exact boundary.
pub const LEMMA3_TOL: f64 = 1e-12;
const POWER_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HessianOutcome {
    pub unlearnable: bool,
    pub max_eigenvalue: f64,
}

/// Not learnable when the Bethe entropy Hessian has an eigenvalue above
/// `eig_tol`.
pub fn lemma2_test(mu: &MinimalMarginals, graph: &Graph, eig_tol: f64) -> Result<HessianOutcome> {
    let max_eigenvalue = bethe_entropy_hessian(mu, graph)?.max_eigenvalue();
    Ok(HessianOutcome {
        unlearnable: max_eigenvalue > eig_tol,
        max_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneousOutcome {
    pub unlearnable: bool,
    /// `(mu_e - mu_v^2)(1 - N_V/2N_E) - (N_V/2N_E) mu_v (1 - mu_v)`.
    pub lhs: f64,
}

/// Closed-form test for homogeneous marginals: unlearnable when
/// `lhs > LEMMA3_TOL`.
pub fn lemma3_test(num_nodes: usize, num_edges: usize, mu_v: f64, mu_e: f64) -> Result<HomogeneousOutcome> {
    if num_edges == 0 {
        return Err(Error::InvalidArgument("the closed-form test needs at least one edge".into()));
    }
    check_homogeneous(mu_v, mu_e)?;
    let r = num_nodes as f64 / (2.0 * num_edges as f64);
    let lhs = (mu_e - mu_v * mu_v) * (1.0 - r) - r * mu_v * (1.0 - mu_v);
    Ok(HomogeneousOutcome {
        unlearnable: lhs > LEMMA3_TOL,
        lhs,
    })
}

/// Edge marginal above which [`lemma3_test`] fires at this `mu_v`, or `None`
/// if no `mu_e <= mu_v` exceeds it.
pub fn lemma3_threshold(num_nodes: usize, num_edges: usize, mu_v: f64) -> Option<f64> {
    if num_edges == 0 || !(mu_v > 0.0 && mu_v < 1.0) {
        return None;
    }
    let r = num_nodes as f64 / (2.0 * num_edges as f64);
    if 1.0 - r <= 0.0 {
        return None;
    }
    let t = mu_v * mu_v + r * mu_v * (1.0 - mu_v) / (1.0 - r);
    (t < mu_v).then_some(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalBpOutcome {
    pub unlearnable: bool,
    /// `F(mu_bar; theta_c(mu_bar))`.
    pub reference_free_energy: f64,
    /// Fixed points whose `F` beats the reference by more than the margin.
    pub witnesses: Vec<FixedPoint>,
    pub fixed_points_found: usize,
}

/// Runs restarted BP on the canonical parameters and looks for a fixed point
/// with higher `F` than `mu_bar` itself. A negative answer only means no
/// witness was found.
pub fn lemma1_test(
    mu: &MinimalMarginals,
    graph: &Graph,
    bp: &BpOptions,
    restarts: &Restarts,
    margin: f64,
) -> Result<CanonicalBpOutcome> {
    let theta = canonical_parameters(mu, graph)?;
    let reference_free_energy = bethe_free_energy_table(&mu.to_table(graph)?, &theta, graph);
    let set = multi_restart_bp(&theta, graph, restarts, bp)?;
    let fixed_points_found = set.points.len();
    let witnesses: Vec<FixedPoint> = set
        .points
        .into_iter()
        .filter(|p| p.free_energy > reference_free_energy + margin)
        .collect();
    Ok(CanonicalBpOutcome {
        unlearnable: !witnesses.is_empty(),
        reference_free_energy,
        witnesses,
        fixed_points_found,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessOutcome {
    pub learnable_certificate: bool,
    pub spectral_radius: f64,
}

/// Weighted non-backtracking operator on directed edges:
/// `(M v)[i->j] = Σ_{k ~ j, k != i} tanh|J_jk| v[j->k]`.
fn apply_nonbacktracking(graph: &Graph, weight: &[f64], v: &[f64], out: &mut [f64]) {
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        for (i, j, d) in [(a, b, 2 * e), (b, a, 2 * e + 1)] {
            out[d] = graph
                .neighbors(j)
                .iter()
                .filter(|&&(k, _)| k != i)
                .map(|&(k, f)| weight[f] * v[crate::inference::bp::directed(j, k, f)])
                .sum();
        }
    }
}

/// Spectral radius of the weighted non-backtracking matrix, by power
/// iteration.
pub fn nonbacktracking_spectral_radius(graph: &Graph, coupling: &[f64]) -> Result<f64> {
    let weight: Vec<f64> = coupling.iter().map(|j| j.abs().tanh()).collect();
    let n = 2 * graph.num_edges();
    if n == 0 {
        return Ok(0.0);
    }
    // nilpotent case (forests, zero couplings): M^n 1 = 0
    let mut v = vec![1.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..=n {
        apply_nonbacktracking(graph, &weight, &v, &mut next);
        std::mem::swap(&mut v, &mut next);
        if v.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        let s = v.iter().cloned().fold(0.0, f64::max);
        v.iter_mut().for_each(|x| *x /= s);
    }

    // power iteration on M + I keeps the iterate positive and aperiodic
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_STEPS {
        apply_nonbacktracking(graph, &weight, &v, &mut next);
        for (o, x) in next.iter_mut().zip(&v) {
            *o += x;
        }
        let (lo, hi) = next
            .iter()
            .zip(&v)
            .map(|(a, b)| a / b)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::Numerical("power iteration overflowed".into()));
        }
        if hi - lo <= 1e-12 * hi {
            return Ok(0.5 * (hi + lo) - 1.0);
        }
        if (norm - prev).abs() <= 1e-15 * norm {
            return Ok(norm - 1.0);
        }
        prev = norm;
        for (x, o) in v.iter_mut().zip(&next) {
            *x = o / norm;
        }
    }
    Err(Error::PowerIteration(POWER_MAX_STEPS))
}

/// Field-independent uniqueness certificate: BP on `theta` has a unique fixed
/// point when the spectral radius of the `tanh|J|`-weighted non-backtracking
/// matrix is below one.
pub fn inner_bound_unique(theta: &TablePotentials, graph: &Graph) -> Result<UniquenessOutcome> {
    theta.validate(graph)?;
    let ising = table_to_ising(theta, graph);
    let spectral_radius = nonbacktracking_spectral_radius(graph, &ising.coupling)?;
    Ok(UniquenessOutcome {
        learnable_certificate: spectral_radius < 1.0,
        spectral_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IsingPotentials;

    #[test]
    fn lemma3_examples() {
        let r = lemma3_test(9, 18, 0.5, 0.35).unwrap();
        assert!(r.unlearnable);
        assert!((r.lhs - 0.0125).abs() < 1e-15);
        let r = lemma3_test(9, 18, 0.5, 1.0 / 3.0).unwrap();
        assert!(!r.unlearnable);
        assert!(r.lhs.abs() < 1e-15);
        assert!(lemma3_test(9, 18, 0.5, 0.55).is_err());
    }

    #[test]
    fn exact_boundary_points_do_not_fire() {
        // (0.4, 0.24) and (0.3, 0.16) sit exactly on the torus boundary
        for (v, e) in [(0.4, 0.24), (0.3, 0.16), (0.6, 0.44), (0.7, 0.56)] {
            let r = lemma3_test(9, 18, v, e).unwrap();
            assert!(r.lhs.abs() < 1e-15);
            assert!(!r.unlearnable);
        }
    }

    #[test]
    fn lemma3_never_fires_on_cycles() {
        for n in [3, 6, 11] {
            for k in 1..100 {
                for m in 1..k {
                    let (v, e) = (k as f64 / 100.0, m as f64 / 100.0);
                    if e <= 2.0 * v - 1.0 {
                        continue;
                    }
                    assert!(!lemma3_test(n, n, v, e).unwrap().unlearnable);
                }
            }
            assert_eq!(lemma3_threshold(n, n, 0.3), None);
        }
    }

    #[test]
    fn thresholds() {
        assert!((lemma3_threshold(9, 18, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((lemma3_threshold(10, 45, 0.5).unwrap() - 0.28125).abs() < 1e-15);
        assert_eq!(lemma3_threshold(5, 4, 0.5), None);
        assert_eq!(lemma3_threshold(2, 1, 0.5), None);
    }

    #[test]
    fn zero_coupling_radius() {
        let g = Graph::torus(3, 3).unwrap();
        let r = inner_bound_unique(&TablePotentials::zeros(&g), &g).unwrap();
        assert_eq!(r.spectral_radius, 0.0);
        assert!(r.learnable_certificate);
    }

    #[test]
    fn regular_graph_radius_is_row_sum() {
        let g = Graph::torus(3, 3).unwrap();
        let j = 0.25 * (0.09f64 / 0.04).ln();
        let th = IsingPotentials::homogeneous(&g, 0.3, j).to_table();
        let r = inner_bound_unique(&th, &g).unwrap();
        assert!((r.spectral_radius - 3.0 * j.tanh()).abs() < 1e-10);
        assert!((r.spectral_radius - 0.6).abs() < 1e-10);
        assert!(r.learnable_certificate);
    }

    #[test]
    fn tree_radius_is_zero() {
        let g = Graph::chain(6).unwrap();
        let th = IsingPotentials::homogeneous(&g, 0.0, 2.0).to_table();
        assert_eq!(inner_bound_unique(&th, &g).unwrap().spectral_radius, 0.0);
    }

    #[test]
    fn radius_matches_dense_eigenvalues() {
        // irregular graph with mixed couplings; compare against a dense solve
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (1, 4)]).unwrap();
        let coupling = [0.4, -0.9, 0.2, 1.3, 0.7, -0.5, 0.3, 0.8];
        let radius = nonbacktracking_spectral_radius(&g, &coupling).unwrap();
        let n = 2 * g.num_edges();
        let mut dense = nalgebra::DMatrix::zeros(n, n);
        for col in 0..n {
            let mut unit = vec![0.0; n];
            unit[col] = 1.0;
            let mut out = vec![0.0; n];
            let w: Vec<f64> = coupling.iter().map(|j: &f64| j.abs().tanh()).collect();
            apply_nonbacktracking(&g, &w, &unit, &mut out);
            for row in 0..n {
                dense[(row, col)] = out[row];
            }
        }
        let want = dense
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!((radius - want).abs() < 1e-8, "{radius} vs {want}");
    }
}
