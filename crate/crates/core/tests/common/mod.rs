//! Reference computations written directly from the definitions, sharing no
//! code with the library beyond the graph and parameter containers.

#![allow(dead_code)]

use bethe_core::{Graph, MinimalMarginals, TablePotentials};
use rand::Rng;

/// `log Z` and minimal marginals by enumerating every assignment.
pub fn brute_force(theta: &TablePotentials, graph: &Graph) -> (f64, MinimalMarginals) {
    let n = graph.num_nodes();
    let scores: Vec<f64> = (0..1u32 << n)
        .map(|x| {
            let bit = |i: usize| ((x >> i) & 1) as usize;
            let mut s: f64 = (0..n).map(|i| theta.node[i][bit(i)]).sum();
            for (e, &(i, j)) in graph.edges().iter().enumerate() {
                s += theta.edge[e][2 * bit(i) + bit(j)];
            }
            s
        })
        .collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut node = vec![0.0; n];
    let mut edge = vec![0.0; graph.num_edges()];
    for (x, w) in weights.iter().enumerate() {
        let p = w / z;
        for (i, slot) in node.iter_mut().enumerate() {
            if (x >> i) & 1 == 1 {
                *slot += p;
            }
        }
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            if (x >> i) & 1 == 1 && (x >> j) & 1 == 1 {
                edge[e] += p;
            }
        }
    }
    (top + z.ln(), MinimalMarginals { node, edge })
}

fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Bethe entropy from the minimal parameterization.
pub fn bethe_entropy(mu: &MinimalMarginals, graph: &Graph) -> f64 {
    let mut h = 0.0;
    for (i, &m) in mu.node.iter().enumerate() {
        h += (graph.degree(i) as f64 - 1.0) * (xlogx(m) + xlogx(1.0 - m));
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let (a, b, p) = (mu.node[i], mu.node[j], mu.edge[e]);
        h -= xlogx(1.0 - a - b + p) + xlogx(b - p) + xlogx(a - p) + xlogx(p);
    }
    h
}

/// Node marginals of the minimal form as `[P(0), P(1)]` and edge tables.
pub fn table_of(mu: &MinimalMarginals, graph: &Graph) -> (Vec<[f64; 2]>, Vec<[f64; 4]>) {
    let node = mu.node.iter().map(|&m| [1.0 - m, m]).collect();
    let edge = graph
        .edges()
        .iter()
        .zip(&mu.edge)
        .map(|(&(i, j), &p)| {
            let (a, b) = (mu.node[i], mu.node[j]);
            [1.0 - a - b + p, b - p, a - p, p]
        })
        .collect();
    (node, edge)
}

/// Random labelled tree on `n` nodes: each node attaches to an earlier one.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Graph {
    let edges: Vec<(usize, usize)> = (1..n).map(|k| (rng.random_range(0..k), k)).collect();
    Graph::new(n, edges).unwrap()
}

/// Random connected graph: a random tree plus extra edges with probability `p`.
pub fn random_connected(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|k| (rng.random_range(0..k), k)).collect();
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_theta(graph: &Graph, scale: f64, rng: &mut impl Rng) -> TablePotentials {
    let mut draw = || rng.random_range(-scale..=scale);
    TablePotentials {
        node: (0..graph.num_nodes()).map(|_| [draw(), draw()]).collect(),
        edge: (0..graph.num_edges()).map(|_| [draw(), draw(), draw(), draw()]).collect(),
    }
}

/// Interior point of the local polytope with every table entry at least
/// `margin`.
pub fn random_interior(graph: &Graph, margin: f64, rng: &mut impl Rng) -> MinimalMarginals {
    let node: Vec<f64> = (0..graph.num_nodes())
        .map(|_| rng.random_range(2.0 * margin..1.0 - 2.0 * margin))
        .collect();
    let edge = graph
        .edges()
        .iter()
        .map(|&(i, j)| {
            let lo = (node[i] + node[j] - 1.0).max(0.0) + margin;
            let hi = node[i].min(node[j]) - margin;
            rng.random_range(lo..hi)
        })
        .collect();
    MinimalMarginals { node, edge }
}

/// Symmetric central-difference Hessian of `f` at `x`.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let eval = |da: (usize, f64), db: (usize, f64)| {
        let mut y = x.to_vec();
        y[da.0] += da.1;
        y[db.0] += db.1;
        f(&y)
    };
    let mut h = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let v = (eval((a, step), (b, step)) - eval((a, step), (b, -step)) - eval((a, -step), (b, step))
                + eval((a, -step), (b, -step)))
                / (4.0 * step * step);
            h[a][b] = v;
            h[b][a] = v;
        }
    }
    h
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_max_eigenvalue(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
}
