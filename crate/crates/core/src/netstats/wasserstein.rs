//! Exact 1-Wasserstein distance between finitely supported measures with L1 ground cost.

use crate::error::{Error, Result};

/// Largest combined support handled exactly.
pub const MAX_SUPPORT: usize = 2000;

const WEIGHT_TOLERANCE: f64 = 1e-9;
const FLOW_EPS: f64 = 1e-15;

/// A probability measure on `[0,1]^d` with finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPoints {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidParameter("need a nonempty point set with one weight per point".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidParameter("points differ in dimension".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
        }
        Ok(WeightedPoints { points, weights })
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let n = points.len();
        Self::new(points, vec![w; n])
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Merges coincident atoms and drops zero weights; points come out sorted.
    pub fn merged(&self) -> WeightedPoints {
        let mut idx: Vec<usize> = (0..self.points.len()).filter(|&i| self.weights[i] > 0.0).collect();
        idx.sort_by(|&a, &b| {
            self.points[a]
                .iter()
                .zip(&self.points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for i in idx {
            if points.last() == Some(&self.points[i]) {
                *weights.last_mut().unwrap() += self.weights[i];
            } else {
                points.push(self.points[i].clone());
                weights.push(self.weights[i]);
            }
        }
        WeightedPoints { points, weights }
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `∫ |F_A − F_B|` for measures on the line.
fn on_line(a: &WeightedPoints, b: &WeightedPoints) -> f64 {
    let mut events: Vec<(f64, f64)> = a
        .points
        .iter()
        .zip(&a.weights)
        .map(|(p, &w)| (p[0], w))
        .chain(b.points.iter().zip(&b.weights).map(|(p, &w)| (p[0], -w)))
        .collect();
    events.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for w in events.windows(2) {
        diff += w[0].1;
        total += diff.abs() * (w[1].0 - w[0].0);
    }
    total
}

/// Successive shortest paths on the dense bipartite transport network.
///
/// Node 0 is the super source, `1..=m` the atoms of `a`, `m+1..=m+k` the atoms
/// of `b`, and `m+k+1` the super sink.
fn transport(a: &WeightedPoints, b: &WeightedPoints) -> f64 {
    let (m, k) = (a.points.len(), b.points.len());
    let cost: Vec<f64> = (0..m).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| l1(&a.points[i], &b.points[j])).collect();
    let scale_a: f64 = a.weights.iter().sum();
    let scale_b: f64 = b.weights.iter().sum();
    let supply: Vec<f64> = a.weights.iter().map(|w| w / scale_a).collect();
    let demand: Vec<f64> = b.weights.iter().map(|w| w / scale_b).collect();
    let mut sup_rem = supply.clone();
    let mut dem_rem = demand.clone();
    let mut flow = vec![0.0; m * k];
    let v = m + k + 2;
    let (src, sink) = (0, m + k + 1);
    let mut pot = vec![0.0; v];
    let mut remaining: f64 = 1.0;

    // residual edges out of `u` as (target, capacity, cost)
    let neighbors = |u: usize, sup_rem: &[f64], dem_rem: &[f64], flow: &[f64], out: &mut Vec<(usize, f64, f64)>| {
        out.clear();
        if u == src {
            for i in 0..m {
                out.push((1 + i, sup_rem[i], 0.0));
            }
        } else if u <= m {
            let i = u - 1;
            out.push((src, supply[i] - sup_rem[i], 0.0));
            for j in 0..k {
                out.push((1 + m + j, f64::INFINITY, cost[i * k + j]));
            }
        } else if u < sink {
            let j = u - 1 - m;
            for i in 0..m {
                out.push((1 + i, flow[i * k + j], -cost[i * k + j]));
            }
            out.push((sink, dem_rem[j], 0.0));
        } else {
            for j in 0..k {
                out.push((1 + m + j, demand[j] - dem_rem[j], 0.0));
            }
        }
    };

    let mut edges = Vec::with_capacity(m.max(k) + 1);
    let mut iterations = 0usize;
    while remaining > 1e-12 && iterations < 8 * (m + k) * (m + k) {
        iterations += 1;
        let mut dist = vec![f64::INFINITY; v];
        let mut prev = vec![usize::MAX; v];
        let mut done = vec![false; v];
        dist[src] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for x in 0..v {
                if !done[x] && dist[x] < best {
                    best = dist[x];
                    u = x;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            neighbors(u, &sup_rem, &dem_rem, &flow, &mut edges);
            for &(t, cap, c) in &edges {
                if cap > FLOW_EPS && !done[t] {
                    let nd = dist[u] + (c + pot[u] - pot[t]).max(0.0);
                    if nd < dist[t] {
                        dist[t] = nd;
                        prev[t] = u;
                    }
                }
            }
        }
        if !dist[sink].is_finite() {
            break;
        }
        let reach_max = dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
        for x in 0..v {
            pot[x] += if dist[x].is_finite() { dist[x] } else { reach_max };
        }
        // bottleneck along the path
        let mut bottleneck = f64::INFINITY;
        let mut x = sink;
        while x != src {
            let u = prev[x];
            let cap = residual(u, x, m, k, &supply, &demand, &sup_rem, &dem_rem, &flow);
            bottleneck = bottleneck.min(cap);
            x = u;
        }
        let mut x = sink;
        while x != src {
            let u = prev[x];
            push(u, x, bottleneck, m, k, &mut sup_rem, &mut dem_rem, &mut flow);
            x = u;
        }
        remaining -= bottleneck;
    }
    flow.iter().zip(&cost).map(|(f, c)| f * c).sum()
}

#[allow(clippy::too_many_arguments)]
fn residual(u: usize, x: usize, m: usize, k: usize, supply: &[f64], demand: &[f64], sup_rem: &[f64], dem_rem: &[f64], flow: &[f64]) -> f64 {
    let sink = m + k + 1;
    match (u, x) {
        (0, i) => sup_rem[i - 1],
        (i, 0) => supply[i - 1] - sup_rem[i - 1],
        (j, t) if t == sink => dem_rem[j - 1 - m],
        (t, j) if t == sink => demand[j - 1 - m] - dem_rem[j - 1 - m],
        (i, j) if i <= m => {
            let _ = j;
            f64::INFINITY
        }
        (j, i) => flow[(i - 1) * k + (j - 1 - m)],
    }
}

#[allow(clippy::too_many_arguments)]
fn push(u: usize, x: usize, amount: f64, m: usize, k: usize, sup_rem: &mut [f64], dem_rem: &mut [f64], flow: &mut [f64]) {
    let sink = m + k + 1;
    match (u, x) {
        (0, i) => sup_rem[i - 1] -= amount,
        (i, 0) => sup_rem[i - 1] += amount,
        (j, t) if t == sink => dem_rem[j - 1 - m] -= amount,
        (t, j) if t == sink => dem_rem[j - 1 - m] += amount,
        (i, j) if i <= m => flow[(i - 1) * k + (j - 1 - m)] += amount,
        (j, i) => flow[(i - 1) * k + (j - 1 - m)] -= amount,
    }
}

/// The 1-Wasserstein distance with ground metric `‖x − y‖₁`.
pub fn wasserstein1(a: &WeightedPoints, b: &WeightedPoints) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidParameter("measures live in different dimensions".into()));
    }
    let (a, b) = (a.merged(), b.merged());
    if a.dim() == 1 {
        return Ok(on_line(&a, &b));
    }
    let support = a.points.len() + b.points.len();
    if support > MAX_SUPPORT {
        return Err(Error::Guard(format!("combined support {support} exceeds {MAX_SUPPORT}; subsample first")));
    }
    Ok(transport(&a, &b))
}
