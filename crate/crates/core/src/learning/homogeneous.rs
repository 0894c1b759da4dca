//! Brute-force maximization of `F(mu; theta)` over homogeneous marginals, for
//! homogeneous spin parameters `(h, J)`, and the exhaustive homogeneous-theta
//! search built on it.
//!
//! For homogeneous `mu = (mu_v, mu_e)` and spin parameters `(h, J)`:
//!
//! ```text
//! mu . theta = N_V h (2 mu_v - 1) + N_E J (1 - 4 mu_v + 4 mu_e)
//! H_B(mu)    = (2 N_E - N_V) Σ_x p_v log p_v - N_E Σ p_e log p_e
//! ```

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::inference::energy::xlogx;
use crate::model::check_homogeneous;

/// One `(mu_v, mu_e)` grid point with its `F` value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub mu_v: f64,
    pub mu_e: f64,
    pub free_energy: f64,
}

/// Closed homogeneous polytope `0 <= mu_v <= 1`,
/// `max(0, 2 mu_v - 1) <= mu_e <= mu_v`, sampled at `mu_v = k/n`,
/// `mu_e = m/n`.
#[derive(Debug, Clone)]
pub struct HomogeneousGrid {
    n: usize,
    num_nodes: f64,
    num_edges: f64,
    /// `(k, m)` per point, row-major in `k` then `m`.
    cells: Vec<(usize, usize)>,
    entropy: Vec<f64>,
    node_term: Vec<f64>,
    edge_term: Vec<f64>,
    /// `(n + 1)^2` lookup from `(k, m)` to point index.
    lookup: Vec<Option<usize>>,
}

/// Number of grid steps per unit for `resolution`, which must divide 1.
pub fn grid_steps(resolution: f64) -> Result<usize> {
    if !(resolution > 0.0 && resolution <= 0.05) {
        return Err(Error::InvalidArgument(format!(
            "resolution must lie in (0, 0.05], got {resolution}"
        )));
    }
    let n = (1.0 / resolution).round();
    if (n * resolution - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} does not divide 1"
        )));
    }
    Ok(n as usize)
}

/// Homogeneous Bethe entropy, counting `Σ_i (d_i - 1) = 2 N_E - N_V`.
pub fn homogeneous_entropy(num_nodes: usize, num_edges: usize, mu_v: f64, mu_e: f64) -> f64 {
    let sv = xlogx(mu_v) + xlogx(1.0 - mu_v);
    let se = xlogx(mu_e) + 2.0 * xlogx(mu_v - mu_e) + xlogx(1.0 - 2.0 * mu_v + mu_e);
    (2.0 * num_edges as f64 - num_nodes as f64) * sv - num_edges as f64 * se
}

impl HomogeneousGrid {
    pub fn new(graph: &Graph, resolution: f64) -> Result<Self> {
        let n = grid_steps(resolution)?;
        let (nv, ne) = (graph.num_nodes(), graph.num_edges());
        let mut cells = Vec::new();
        let mut lookup = vec![None; (n + 1) * (n + 1)];
        for k in 0..=n {
            for m in (2 * k).saturating_sub(n)..=k {
                lookup[k * (n + 1) + m] = Some(cells.len());
                cells.push((k, m));
            }
        }
        let coords = |&(k, m): &(usize, usize)| (k as f64 / n as f64, m as f64 / n as f64);
        let entropy = cells
            .iter()
            .map(|c| {
                let (v, e) = coords(c);
                homogeneous_entropy(nv, ne, v, e)
            })
            .collect();
        let node_term = cells.iter().map(|c| nv as f64 * (2.0 * coords(c).0 - 1.0)).collect();
        let edge_term = cells
            .iter()
            .map(|c| {
                let (v, e) = coords(c);
                ne as f64 * (1.0 - 4.0 * v + 4.0 * e)
            })
            .collect();
        Ok(HomogeneousGrid {
            n,
            num_nodes: nv as f64,
            num_edges: ne as f64,
            cells,
            entropy,
            node_term,
            edge_term,
            lookup,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (k, m) = self.cells[idx];
        (k as f64 / self.n as f64, m as f64 / self.n as f64)
    }

    /// `mu . theta` at arbitrary homogeneous `(mu_v, mu_e)`.
    pub fn linear_term(&self, h: f64, j: f64, mu_v: f64, mu_e: f64) -> f64 {
        h * self.num_nodes * (2.0 * mu_v - 1.0) + j * self.num_edges * (1.0 - 4.0 * mu_v + 4.0 * mu_e)
    }

    /// `F` at every grid point.
    pub fn surface(&self, h: f64, j: f64) -> Vec<f64> {
        (0..self.len())
            .map(|p| h * self.node_term[p] + j * self.edge_term[p] + self.entropy[p])
            .collect()
    }

    /// Largest `F` over the grid.
    pub fn max_free_energy(&self, h: f64, j: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for p in 0..self.len() {
            best = best.max(h * self.node_term[p] + j * self.edge_term[p] + self.entropy[p]);
        }
        best
    }

    /// Grid points not exceeded by any of their (up to 8) grid neighbors,
    /// sorted by `F` descending.
    pub fn local_maxima(&self, surface: &[f64]) -> Vec<GridPoint> {
        let n = self.n as isize;
        let mut out: Vec<GridPoint> = Vec::new();
        for (p, &(k, m)) in self.cells.iter().enumerate() {
            let f = surface[p];
            let mut is_max = true;
            'nbr: for dk in -1isize..=1 {
                for dm in -1isize..=1 {
                    if dk == 0 && dm == 0 {
                        continue;
                    }
                    let (kk, mm) = (k as isize + dk, m as isize + dm);
                    if kk < 0 || mm < 0 || kk > n || mm > n {
                        continue;
                    }
                    if let Some(q) = self.lookup[kk as usize * (self.n + 1) + mm as usize] {
                        if surface[q] > f {
                            is_max = false;
                            break 'nbr;
                        }
                    }
                }
            }
            if is_max {
                let (mu_v, mu_e) = self.coords(p);
                out.push(GridPoint {
                    mu_v,
                    mu_e,
                    free_energy: f,
                });
            }
        }
        out.sort_by(|a, b| b.free_energy.total_cmp(&a.free_energy));
        out
    }

    /// `F` off the grid.
    pub fn free_energy_at(&self, h: f64, j: f64, mu_v: f64, mu_e: f64) -> f64 {
        self.linear_term(h, j, mu_v, mu_e)
            + homogeneous_entropy(self.num_nodes as usize, self.num_edges as usize, mu_v, mu_e)
    }

    /// Continuous maximization of `F` within one grid step of `p` in `mu_v`.
    /// `F` is concave in `mu_e` at fixed `mu_v`, so the inner search is exact
    /// up to the golden-section tolerance.
    pub fn refine(&self, h: f64, j: f64, p: GridPoint) -> GridPoint {
        let step = 1.0 / self.n as f64;
        let best_e = |v: f64| {
            let e = golden_max((2.0 * v - 1.0).max(0.0), v, |e| self.free_energy_at(h, j, v, e));
            (e, self.free_energy_at(h, j, v, e))
        };
        let v = golden_max((p.mu_v - step).max(0.0), (p.mu_v + step).min(1.0), |v| best_e(v).1);
        let (e, f) = best_e(v);
        if f > p.free_energy {
            GridPoint {
                mu_v: v,
                mu_e: e,
                free_energy: f,
            }
        } else {
            p
        }
    }
}

fn golden_max(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - R * (hi - lo);
    let mut b = lo + R * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-12 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + R * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - R * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridArgmax {
    /// Grid-local maxima, best first.
    pub maxima: Vec<GridPoint>,
    pub global: GridPoint,
    /// `global` polished off the grid; at least as high.
    pub refined: GridPoint,
}

/// Evaluates `F(mu; h, J)` on the homogeneous polytope grid and returns its
/// local maxima and the global maximum, plus the global maximum refined off
/// the grid.
pub fn homogeneous_grid_argmax(field: f64, coupling: f64, graph: &Graph, resolution: f64) -> Result<GridArgmax> {
    let grid = HomogeneousGrid::new(graph, resolution)?;
    let maxima = grid.local_maxima(&grid.surface(field, coupling));
    Ok(GridArgmax {
        global: maxima[0],
        refined: grid.refine(field, coupling, maxima[0]),
        maxima,
    })
}

/// Axis-aligned grid of homogeneous spin parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaGrid {
    pub h_min: f64,
    pub h_max: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub resolution: f64,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        ThetaGrid {
            h_min: -1.0,
            h_max: 1.0,
            j_min: 0.0,
            j_max: 1.5,
            resolution: 0.01,
        }
    }
}

impl ThetaGrid {
    fn axis(lo: f64, hi: f64, res: f64) -> Vec<f64> {
        if hi < lo {
            return Vec::new();
        }
        let steps = ((hi - lo) / res + 1e-9).floor() as usize;
        (0..=steps).map(|i| lo + i as f64 * res).collect()
    }

    pub fn fields(&self) -> Vec<f64> {
        Self::axis(self.h_min, self.h_max, self.resolution)
    }

    pub fn couplings(&self) -> Vec<f64> {
        Self::axis(self.j_min, self.j_max, self.resolution)
    }
}

pub const HULL_TOL: f64 = 0.02;
pub const MAXIMIZER_F_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Result {
    pub field: f64,
    pub coupling: f64,
    /// Bethe likelihood at the selected parameters.
    pub likelihood: f64,
    /// Global maximizers of `F(.; theta_B)` within [`MAXIMIZER_F_TOL`].
    pub maximizers: Vec<GridPoint>,
    pub hull_distance: f64,
    pub hull_contains_mu: bool,
    pub f_at_mu: f64,
    pub f_max: f64,
}

/// Exhaustive search for the Bethe-likelihood maximizer among homogeneous
/// `(h, J)`, with the inner maximization over `F` done on the homogeneous
/// grid. Reports whether `mu_bar` lies in the convex hull of the maximizers
/// of `F(.; theta_B)`.
pub fn figure1_search(
    mu_v: f64,
    mu_e: f64,
    graph: &Graph,
    theta_grid: &ThetaGrid,
    mu_resolution: f64,
) -> Result<Figure1Result> {
    check_homogeneous(mu_v, mu_e)?;
    let grid = HomogeneousGrid::new(graph, mu_resolution)?;
    let fields = theta_grid.fields();
    let couplings = theta_grid.couplings();
    if fields.is_empty() || couplings.is_empty() {
        return Err(Error::InvalidArgument("empty parameter grid".into()));
    }
    let thetas: Vec<(f64, f64)> = fields
        .iter()
        .flat_map(|&h| couplings.iter().map(move |&j| (h, j)))
        .collect();
    let scores: Vec<f64> = thetas
        .par_iter()
        .map(|&(h, j)| grid.linear_term(h, j, mu_v, mu_e) - grid.max_free_energy(h, j))
        .collect();
    // first index wins ties so the choice does not depend on scheduling
    let (best, likelihood) = scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
    let (field, coupling) = thetas[best];

    let maxima = grid.local_maxima(&grid.surface(field, coupling));
    let f_max = maxima[0].free_energy;
    let maximizers: Vec<GridPoint> = maxima
        .into_iter()
        .filter(|p| p.free_energy >= f_max - MAXIMIZER_F_TOL)
        .collect();
    let pts: Vec<(f64, f64)> = maximizers.iter().map(|p| (p.mu_v, p.mu_e)).collect();
    let hull_distance = hull::distance_to_hull(&pts, (mu_v, mu_e));
    let f_at_mu = grid.linear_term(field, coupling, mu_v, mu_e)
        + homogeneous_entropy(graph.num_nodes(), graph.num_edges(), mu_v, mu_e);
    Ok(Figure1Result {
        field,
        coupling,
        likelihood,
        maximizers,
        hull_distance,
        hull_contains_mu: hull_distance <= HULL_TOL,
        f_at_mu,
        f_max,
    })
}

pub mod hull {
    //! Planar convex hull and point-to-hull distance.

    type P = (f64, f64);

    fn cross(o: P, a: P, b: P) -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    }

    /// Counter-clockwise hull (monotone chain); collinear points dropped.
    pub fn convex_hull(points: &[P]) -> Vec<P> {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup();
        if pts.len() < 3 {
            return pts;
        }
        let mut lower: Vec<P> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<P> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    }

    fn segment_distance(a: P, b: P, p: P) -> f64 {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
        };
        ((a.0 + t * dx - p.0).powi(2) + (a.1 + t * dy - p.1).powi(2)).sqrt()
    }

    /// Euclidean distance from `p` to the convex hull of `points`; zero inside.
    pub fn distance_to_hull(points: &[P], p: P) -> f64 {
        let h = convex_hull(points);
        match h.len() {
            0 => f64::INFINITY,
            1 => segment_distance(h[0], h[0], p),
            2 => segment_distance(h[0], h[1], p),
            n => {
                let inside = (0..n).all(|i| cross(h[i], h[(i + 1) % n], p) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..n)
                        .map(|i| segment_distance(h[i], h[(i + 1) % n], p))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }
}
