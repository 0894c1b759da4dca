//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints a result line; exits nonzero if any criterion fails.

mod common;

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bethe_core::inference::{bethe_log_partition, sum_product, BpOptions, Restarts};
use bethe_core::learnability::{
    bethe_entropy_hessian, inner_bound_unique, lemma2_test, lemma3_test, lemma3_threshold, HomogeneousEntries,
    DEFAULT_EIG_TOL, LEMMA3_TOL,
};
use bethe_core::learning::{figure1_search, LearnOptions, ThetaGrid, HULL_TOL};
use bethe_core::scan::{interior_grid, scan_homogeneous, write_csv, Flag, ScanRow};
use bethe_core::{canonical_parameters, classify, ClassifyOptions, Graph, MinimalMarginals, VerdictStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a criterion reports: a one-line summary and the bytes that must not
/// change between runs.
struct Outcome {
    summary: String,
    artifact: Vec<u8>,
}

type Check = Result<Outcome, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn bits(out: &mut String, xs: &[f64]) {
    for x in xs {
        write!(out, "{:016x} ", x.to_bits()).unwrap();
    }
    out.push('\n');
}

fn torus() -> Graph {
    Graph::torus(3, 3).unwrap()
}

fn tree_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_z, mut worst_mu) = (0.0f64, 0.0f64);
    let mut art = String::new();
    for _ in 0..50 {
        let n = rng.random_range(2..=10);
        let g = common::random_tree(n, &mut rng);
        let theta = common::random_theta(&g, 2.0, &mut rng);
        let (log_z, exact) = common::brute_force(&theta, &g);
        let est = bethe_log_partition(&theta, &g, &BpOptions::default(), &Restarts::default())
            .map_err(|e| e.to_string())?;
        let bp = sum_product(&theta, &g, &BpOptions::default()).map_err(|e| e.to_string())?;
        ensure!(bp.converged, "BP did not converge on a tree with {n} nodes");
        let got = bp.beliefs.to_minimal(&g).map_err(|e| e.to_string())?;
        worst_z = worst_z.max((est.value - log_z).abs());
        for (a, b) in got.node.iter().chain(&got.edge).zip(exact.node.iter().chain(&exact.edge)) {
            worst_mu = worst_mu.max((a - b).abs());
        }
        bits(&mut art, &[est.value]);
        bits(&mut art, &got.node);
    }
    ensure!(worst_z < 1e-6, "log Z error {worst_z:.3e}");
    ensure!(worst_mu < 1e-8, "marginal error {worst_mu:.3e}");
    Ok(Outcome {
        summary: format!("50 trees, max |log Z error| {worst_z:.1e}, max marginal error {worst_mu:.1e}"),
        artifact: art.into_bytes(),
    })
}

fn canonical_matching() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut art = String::new();
    for _ in 0..50 {
        let n = rng.random_range(2..=10);
        let g = common::random_tree(n, &mut rng);
        let mu = common::random_interior(&g, 0.01, &mut rng);
        let theta = canonical_parameters(&mu, &g).map_err(|e| e.to_string())?;
        let bp = sum_product(&theta, &g, &BpOptions::default()).map_err(|e| e.to_string())?;
        ensure!(bp.converged, "BP did not converge");
        let got = bp.beliefs.to_minimal(&g).map_err(|e| e.to_string())?;
        for (a, b) in got.node.iter().chain(&got.edge).zip(mu.node.iter().chain(&mu.edge)) {
            worst = worst.max((a - b).abs());
        }
        bits(&mut art, &got.edge);
    }
    ensure!(worst < 1e-8, "recovered marginals off by {worst:.3e}");
    Ok(Outcome {
        summary: format!("50 trees, max deviation from target {worst:.1e}"),
        artifact: art.into_bytes(),
    })
}

/// Homogeneous Hessian entries from their closed forms.
fn homogeneous_entries(v: f64, e: f64) -> (f64, f64, f64, f64) {
    let q = 1.0 - 2.0 * v + e;
    let a_hat = 1.0 / v + 1.0 / (1.0 - v);
    let b = -1.0 / q;
    let c = 1.0 / q + 1.0 / (v - e);
    let d = -(1.0 / e + 2.0 / (v - e) + 1.0 / q);
    (a_hat, b, c, d)
}

fn hessian_validation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_fd = 0.0f64;
    let mut art = String::new();
    for k in 0..20 {
        let g = match k % 4 {
            0 => Graph::torus(3, 3).unwrap(),
            1 => Graph::cycle(rng.random_range(3..9)).unwrap(),
            2 => common::random_tree(rng.random_range(3..9), &mut rng),
            _ => common::random_connected(rng.random_range(4..8), 0.5, &mut rng),
        };
        let mu = common::random_interior(&g, 0.05, &mut rng);
        let h = bethe_entropy_hessian(&mu, &g).map_err(|e| e.to_string())?;
        let nv = g.num_nodes();
        let x: Vec<f64> = mu.node.iter().chain(&mu.edge).copied().collect();
        let f = |y: &[f64]| {
            common::bethe_entropy(&MinimalMarginals { node: y[..nv].to_vec(), edge: y[nv..].to_vec() }, &g)
        };
        let fd = common::fd_hessian(f, &x, 1e-5);
        for (a, row) in fd.iter().enumerate() {
            for (b, &want) in row.iter().enumerate() {
                worst_fd = worst_fd.max((h.matrix[(a, b)] - want).abs());
            }
        }
        bits(&mut art, h.matrix.as_slice());
    }
    ensure!(worst_fd < 1e-4, "finite-difference error {worst_fd:.3e}");

    let g = torus();
    let mut worst_exact = 0.0f64;
    for (v, e) in interior_grid(0.05).map_err(|e| e.to_string())? {
        let mu = MinimalMarginals::homogeneous(&g, v, e).map_err(|e| e.to_string())?;
        let h = bethe_entropy_hessian(&mu, &g).map_err(|e| e.to_string())?;
        let (a_hat, b, c, d) = homogeneous_entries(v, e);
        let nv = g.num_nodes();
        for r in 0..h.dim() {
            for s in 0..h.dim() {
                let want = match (r < nv, s < nv) {
                    (true, true) if r == s => (g.degree(r) as f64 - 1.0) * a_hat - g.degree(r) as f64 * c,
                    (true, true) => g.edge_index(r, s).map_or(0.0, |_| b),
                    (true, false) => {
                        let (i, j) = g.edges()[s - nv];
                        if r == i || r == j { c } else { 0.0 }
                    }
                    (false, true) => {
                        let (i, j) = g.edges()[r - nv];
                        if s == i || s == j { c } else { 0.0 }
                    }
                    (false, false) => if r == s { d } else { 0.0 },
                };
                worst_exact = worst_exact.max((h.matrix[(r, s)] - want).abs());
            }
        }
        let built = HomogeneousEntries::new(v, e).assemble(&g);
        worst_exact = worst_exact.max((&h.matrix - &built.matrix).amax());
    }
    ensure!(worst_exact <= 1e-12, "homogeneous construction differs by {worst_exact:.3e}");
    Ok(Outcome {
        summary: format!("finite differences {worst_fd:.1e} (20 pairs), homogeneous construction {worst_exact:.1e}"),
        artifact: art.into_bytes(),
    })
}

fn lemma_hierarchy() -> Check {
    let g = torus();
    let (nv, ne) = (g.num_nodes(), g.num_edges());
    let r = nv as f64 / (2.0 * ne as f64);
    let (mut positive, mut zero_band) = (0, 0);
    let mut art = String::new();
    let points = interior_grid(0.01).map_err(|e| e.to_string())?;
    for &(v, e) in &points {
        let lhs = (e - v * v) * (1.0 - r) - r * v * (1.0 - v);
        let l3 = lemma3_test(nv, ne, v, e).map_err(|e| e.to_string())?;
        ensure!((l3.lhs - lhs).abs() < 1e-15, "closed form disagrees at ({v}, {e})");
        let mu = MinimalMarginals::homogeneous(&g, v, e).map_err(|e| e.to_string())?;
        let l2 = lemma2_test(&mu, &g, DEFAULT_EIG_TOL).map_err(|e| e.to_string())?;
        if l3.unlearnable {
            positive += 1;
            ensure!(
                l2.max_eigenvalue > DEFAULT_EIG_TOL,
                "closed form positive but largest eigenvalue {:.3e} at ({v}, {e})",
                l2.max_eigenvalue
            );
        }
        let (a_hat, b, c, d) = homogeneous_entries(v, e);
        let disc = c * c - 0.5 * d * (a_hat - c + b) + nv as f64 / (4.0 * ne as f64) * d * a_hat;
        if lhs.abs() > LEMMA3_TOL {
            ensure!((disc > 0.0) == (lhs > 0.0), "sign mismatch at ({v}, {e}): disc {disc:.3e}, lhs {lhs:.3e}");
        } else {
            zero_band += 1;
        }
        bits(&mut art, &[l3.lhs, l2.max_eigenvalue, disc]);
    }
    Ok(Outcome {
        summary: format!(
            "{} points, {positive} closed-form positive, all with positive eigenvalue; signs agree ({zero_band} exact zeros)",
            points.len()
        ),
        artifact: art.into_bytes(),
    })
}

fn tree_and_cycle_emptiness() -> Check {
    let mut art = String::new();
    let mut summary = Vec::new();
    for g in [Graph::chain(5).unwrap(), Graph::cycle(6).unwrap()] {
        let (mut l3, mut l2, mut top) = (0, 0, f64::NEG_INFINITY);
        for (v, e) in interior_grid(0.01).map_err(|e| e.to_string())? {
            if lemma3_test(g.num_nodes(), g.num_edges(), v, e).map_err(|e| e.to_string())?.unlearnable {
                l3 += 1;
            }
            let mu = MinimalMarginals::homogeneous(&g, v, e).map_err(|e| e.to_string())?;
            let h = lemma2_test(&mu, &g, DEFAULT_EIG_TOL).map_err(|e| e.to_string())?;
            if h.unlearnable {
                l2 += 1;
            }
            top = top.max(h.max_eigenvalue);
        }
        ensure!(l3 == 0 && l2 == 0, "{} closed-form and {} Hessian hits on {} nodes", l3, l2, g.num_nodes());
        summary.push(format!("{} nodes: largest eigenvalue {top:.2e}", g.num_nodes()));
        bits(&mut art, &[top]);
    }
    Ok(Outcome {
        summary: format!("zero hits on chain(5) and cycle(6); {}", summary.join(", ")),
        artifact: art.into_bytes(),
    })
}

fn torus_threshold() -> Check {
    let g = torus();
    let t = lemma3_threshold(9, 18, 0.5).ok_or("no threshold")?;
    ensure!((t - 1.0 / 3.0).abs() <= 1e-9, "closed-form threshold {t}");

    let radius = |e: f64| -> Result<f64, String> {
        let mu = MinimalMarginals::homogeneous(&g, 0.5, e).map_err(|e| e.to_string())?;
        let theta = canonical_parameters(&mu, &g).map_err(|e| e.to_string())?;
        Ok(inner_bound_unique(&theta, &g).map_err(|e| e.to_string())?.spectral_radius)
    };
    let (mut lo, mut hi) = (0.26, 0.45);
    ensure!(radius(lo)? < 1.0 && radius(hi)? > 1.0, "spectral radius does not cross 1");
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if radius(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let boundary = 0.5 * (lo + hi);
    ensure!((boundary - 1.0 / 3.0).abs() <= 1e-3, "inner boundary at {boundary}");

    let opts = ClassifyOptions {
        run_all_bounds: true,
        empirical: None,
        ..ClassifyOptions::default()
    };
    let mut rows = Vec::new();
    for m in 1..50 {
        let e = m as f64 / 100.0;
        let mu = MinimalMarginals::homogeneous(&g, 0.5, e).map_err(|e| e.to_string())?;
        let v = classify(&mu, &g, &opts).map_err(|e| e.to_string())?;
        rows.push(ScanRow::from_verdict(0.5, e, &v, opts.eig_tol));
    }
    for r in &rows {
        ensure!(!(r.inner == Flag::Yes && r.outer()), "inner and outer both fire at mu_e = {}", r.mu_e);
        if r.mu_e > 1.0 / 3.0 {
            ensure!(r.lemma3 == Flag::Yes, "closed form silent at mu_e = {}", r.mu_e);
            ensure!(r.inner == Flag::No, "inner bound fires at mu_e = {}", r.mu_e);
        } else {
            ensure!(r.lemma3 == Flag::No, "closed form fires at mu_e = {}", r.mu_e);
        }
    }
    let silent: Vec<f64> = rows
        .iter()
        .filter(|r| r.mu_e < 1.0 / 3.0 && r.inner != Flag::Yes)
        .map(|r| r.mu_e)
        .collect();
    if let (Some(first), Some(last)) = (silent.first(), silent.last()) {
        return Err(format!(
            "boundaries at {t:.9} and {boundary:.6} with no overlap, but the inner bound is silent for \
             mu_e in [{first}, {last}] ({} rows): the certificate holds only on (1/6, 1/3)",
            silent.len()
        ));
    }
    let mut art = Vec::new();
    write_csv(&mut art, &[], &rows, 0.01).map_err(|e| e.to_string())?;
    Ok(Outcome {
        summary: format!("closed form {t:.9}, spectral boundary {boundary:.6}, mu_v = 0.5 row splits at 1/3"),
        artifact: art,
    })
}

fn ferromagnetic_limit() -> Check {
    let mut values = Vec::new();
    for n in [5usize, 10, 20, 50, 200] {
        let g = Graph::complete(n).unwrap();
        values.push(lemma3_threshold(g.num_nodes(), g.num_edges(), 0.5).ok_or(format!("no threshold at n = {n}"))?);
    }
    ensure!(values.windows(2).all(|w| w[1] < w[0]), "not decreasing: {values:?}");
    ensure!((values[1] - 0.28125).abs() < 1e-12, "n = 10 gives {}", values[1]);
    ensure!((values[4] - 0.25).abs() < 0.005, "n = 200 gives {}", values[4]);
    let mut art = String::new();
    bits(&mut art, &values);
    Ok(Outcome {
        summary: format!(
            "thresholds {}",
            values.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>().join(" > ")
        ),
        artifact: art.into_bytes(),
    })
}

fn split_optimum() -> Check {
    let r = figure1_search(0.5, 0.40, &torus(), &ThetaGrid::default(), 0.002).map_err(|e| e.to_string())?;
    ensure!(r.maximizers.len() >= 2, "{} maximizers", r.maximizers.len());
    ensure!(r.hull_distance <= HULL_TOL, "hull distance {}", r.hull_distance);
    ensure!(r.f_max - r.f_at_mu >= 1e-3, "F gap {}", r.f_max - r.f_at_mu);
    let pts: Vec<String> = r.maximizers.iter().map(|p| format!("({:.3}, {:.3})", p.mu_v, p.mu_e)).collect();
    Ok(Outcome {
        summary: format!(
            "h = {:.2}, J = {:.2}, maximizers {}, hull distance {:.4}, F gap {:.4}",
            r.field,
            r.coupling,
            pts.join(" "),
            r.hull_distance,
            r.f_max - r.f_at_mu
        ),
        artifact: format!("{r:?}").into_bytes(),
    })
}

fn region_map() -> Check {
    let g = torus();
    let opts = ClassifyOptions {
        run_all_bounds: true,
        restarts: Restarts {
            seed: 7,
            ..Restarts::default()
        },
        empirical: Some(LearnOptions {
            restarts: Restarts {
                seed: 7,
                ..Restarts::default()
            },
            ..LearnOptions::default()
        }),
        ..ClassifyOptions::default()
    };
    let rows = scan_homogeneous(&g, 0.01, &opts).map_err(|e| e.to_string())?;
    let inner: Vec<&ScanRow> = rows.iter().filter(|r| r.verdict == VerdictStatus::LearnableInnerBound).collect();
    let outer: Vec<&ScanRow> = rows.iter().filter(|r| r.verdict.is_unlearnable()).collect();
    let rest: Vec<&ScanRow> = rows
        .iter()
        .filter(|r| r.verdict != VerdictStatus::LearnableInnerBound && !r.verdict.is_unlearnable())
        .collect();
    ensure!(!inner.is_empty() && !outer.is_empty() && !rest.is_empty(), "an empty region");
    if let Some(r) = rows.iter().find(|r| r.inner == Flag::Yes && r.outer()) {
        return Err(format!("inner and outer both fire at ({}, {})", r.mu_v, r.mu_e));
    }
    let at = |v: f64, e: f64| rows.iter().find(|r| (r.mu_v - v).abs() < 1e-9 && (r.mu_e - e).abs() < 1e-9);
    ensure!(
        at(0.5, 0.25).is_some_and(|r| r.verdict == VerdictStatus::LearnableInnerBound),
        "independent point not inner"
    );
    ensure!(at(0.5, 0.45).is_some_and(|r| r.verdict.is_unlearnable()), "strongly correlated point not outer");
    let matched = rest.iter().filter(|r| r.residual.is_some_and(|x| x < 0.01)).count();
    let share = matched as f64 / rest.len() as f64;
    ensure!(share >= 0.9, "only {matched} of {} remainder points matched", rest.len());
    let mut art = Vec::new();
    write_csv(&mut art, &[("seed".into(), "7".into())], &rows, 0.01).map_err(|e| e.to_string())?;
    Ok(Outcome {
        summary: format!(
            "{} inner, {} outer, {} remainder with {matched} ({:.1}%) matched below 0.01",
            inner.len(),
            outer.len(),
            rest.len(),
            100.0 * share
        ),
        artifact: art,
    })
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { name: "tree exactness", limit: Duration::from_secs(10), run: tree_exactness },
    Criterion { name: "canonical moment matching on trees", limit: Duration::from_secs(5), run: canonical_matching },
    Criterion { name: "Hessian validation", limit: Duration::from_secs(10), run: hessian_validation },
    Criterion { name: "lemma hierarchy", limit: Duration::from_secs(60), run: lemma_hierarchy },
    Criterion { name: "tree and cycle emptiness", limit: Duration::from_secs(60), run: tree_and_cycle_emptiness },
    Criterion { name: "torus threshold", limit: Duration::from_secs(60), run: torus_threshold },
    Criterion { name: "ferromagnetic limit", limit: Duration::from_secs(1), run: ferromagnetic_limit },
    Criterion { name: "split optimum at an unlearnable point", limit: Duration::from_secs(600), run: split_optimum },
    Criterion { name: "region map", limit: Duration::from_secs(1800), run: region_map },
];

fn attempt(c: &Criterion) -> (Result<Outcome, String>, Duration) {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let elapsed = start.elapsed();
    let result = match result {
        Ok(_) if elapsed > c.limit => Err(format!("took {:.1} s, limit {} s", elapsed.as_secs_f64(), c.limit.as_secs())),
        other => other,
    };
    (result, elapsed)
}

fn main() {
    let mut failures = 0;
    let mut first_artifacts = Vec::new();
    for (idx, c) in CRITERIA.iter().enumerate() {
        let (result, elapsed) = attempt(c);
        let secs = elapsed.as_secs_f64();
        match result {
            Ok(o) => {
                println!("criterion {} ({}): PASS  {}  [{secs:.1} s]", idx + 1, c.name, o.summary);
                first_artifacts.push(Some(o.artifact));
            }
            Err(msg) => {
                failures += 1;
                println!("criterion {} ({}): FAIL  {msg}  [{secs:.1} s]", idx + 1, c.name);
                first_artifacts.push(None);
            }
        }
    }

    let start = Instant::now();
    let mut diverged = Vec::new();
    for (idx, c) in CRITERIA.iter().enumerate() {
        let (again, _) = attempt(c);
        let same = match (&first_artifacts[idx], &again) {
            (Some(a), Ok(b)) => *a == b.artifact,
            (None, Err(_)) => true,
            _ => false,
        };
        if !same {
            diverged.push(idx + 1);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if diverged.is_empty() {
        println!("criterion 10 (determinism): PASS  criteria 1-9 rerun with identical outputs  [{secs:.1} s]");
    } else {
        failures += 1;
        println!("criterion 10 (determinism): FAIL  outputs changed for criteria {diverged:?}  [{secs:.1} s]");
    }

    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
