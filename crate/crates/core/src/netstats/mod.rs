//! Joint degree distributions, their Wasserstein distance to limits, and clustering.

mod clustering;
mod wasserstein;

use serde::{Deserialize, Serialize};

pub use clustering::{
    clustering, clustering_with, limit_clustering, limit_clustering_step, ClusteringReport, Distinctness,
    LimitClustering, DEFAULT_LIMIT_SAMPLES,
};
pub use wasserstein::{wasserstein1, WeightedPoints, MAX_SUPPORT};

use crate::cutmetric::{cut_distance_upper, DistanceResult};
use crate::error::{Error, Result};
use crate::models::subsample_indices;
use crate::multiplex::{Mode, Multiplex};
use crate::multiplexon::{
    degree_profile, discretize, step_degree_profile, AnalyticMultiplexon, DegreeProfile, StepMultiplexon,
    DEFAULT_SUBSAMPLES,
};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDegreeSample {
    pub n: usize,
    pub r: usize,
    /// `degrees[i][S − 1] = d_{Ḡ_S}(i) / n` over nonempty bitmasks `S`.
    pub degrees: Vec<Vec<f64>>,
}

impl JointDegreeSample {
    pub fn degree(&self, i: usize, s: Subset) -> f64 {
        self.degrees[i][s.index() - 1]
    }

    /// The empirical joint degree distribution.
    pub fn distribution(&self) -> WeightedPoints {
        WeightedPoints::uniform(self.degrees.clone()).expect("n is positive")
    }

    /// Header `vertex,{1},{2},{1,2},...` then one row per vertex.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex");
        for s in Subset::nonempty(self.r) {
            out.push_str(&format!(",\"{s}\""));
        }
        out.push('\n');
        for (i, row) in self.degrees.iter().enumerate() {
            out.push_str(&i.to_string());
            for d in row {
                out.push_str(&format!(",{d}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Normalized degrees of every vertex in every cumulative layer.
pub fn joint_degrees(g: &Multiplex) -> JointDegreeSample {
    let (n, r) = (g.n(), g.r());
    let degrees = (0..n)
        .map(|i| {
            let mut counts = vec![0usize; 1 << r];
            for j in 0..n {
                for s in g.link(i, j).nonempty_subsets() {
                    counts[s.index()] += 1;
                }
            }
            counts[1..].iter().map(|&c| c as f64 / n as f64).collect()
        })
        .collect();
    JointDegreeSample { n, r, degrees }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeOptions {
    /// Midpoint cells used for analytic limits.
    pub cells: usize,
    /// Annealing budget for the cut-distance bound.
    pub budget: usize,
    pub seed: u64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions { cells: 64, budget: 200, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeConvergence {
    pub wass: f64,
    /// `2 R δ` with `δ` the cut-distance upper estimate.
    pub bound: f64,
    pub cut_distance: DistanceResult,
    /// Error of the limit degree discretization (0 for step limits).
    pub discretization_error: f64,
    /// Vertices kept when the sample had to be subsampled for exact transport.
    pub vertices_used: usize,
}

fn profile_points(p: &DegreeProfile) -> WeightedPoints {
    let total: f64 = p.weights.iter().sum();
    WeightedPoints { points: p.vectors(), weights: p.weights.iter().map(|w| w / total).collect() }
}

fn sample_points(g: &Multiplex, room: usize, seed: u64) -> (WeightedPoints, usize) {
    let sample = joint_degrees(g);
    let merged = sample.distribution().merged();
    if merged.points.len() <= room {
        return (merged, g.n());
    }
    let keep = subsample_indices(g.n(), room, seed);
    let pts = keep.iter().map(|&i| sample.degrees[i].clone()).collect();
    (WeightedPoints::uniform(pts).expect("room is positive"), room)
}

fn compare(g: &Multiplex, limit: &DegreeProfile, step: &StepMultiplexon, opts: &DegreeOptions, extra: f64) -> Result<DegreeConvergence> {
    if g.r() != step.r() {
        return Err(Error::LayerMismatch { expected: step.r(), got: g.r() });
    }
    let target = profile_points(limit);
    let target = target.merged();
    let room = MAX_SUPPORT.saturating_sub(target.points.len()).max(1);
    let (sample, vertices_used) = sample_points(g, room, opts.seed);
    let wass = wasserstein1(&sample, &target)?;
    let cut_distance = cut_distance_upper(&StepMultiplexon::empirical(g), step, opts.budget, opts.seed)?;
    let bound = 2.0 * (1u64 << g.r()) as f64 * cut_distance.upper_bound;
    Ok(DegreeConvergence { wass, bound, cut_distance, discretization_error: limit.error + extra, vertices_used })
}

/// Compares the joint degree distribution of `g` with a cumulative step limit.
pub fn degree_convergence_step(g: &Multiplex, w: &StepMultiplexon, opts: &DegreeOptions) -> Result<DegreeConvergence> {
    if w.mode() != Mode::Cumulative {
        return Err(Error::ModeMismatch("degree convergence needs a cumulative multiplexon".into()));
    }
    compare(g, &step_degree_profile(w), w, opts, 0.0)
}

/// Compares the joint degree distribution of `g` with a limit multiplexon.
///
/// Piecewise-constant limits are handled exactly. Other limits use an
/// `opts.cells`-point midpoint discretization of the degree vector; the
/// reported discretization error adds the quadrature error to the distance
/// between the `cells`- and `2·cells`-point discretizations.
pub fn degree_convergence(g: &Multiplex, w: &AnalyticMultiplexon, opts: &DegreeOptions) -> Result<DegreeConvergence> {
    if let Some(step) = w.as_step() {
        return degree_convergence_step(g, &step, opts);
    }
    if opts.cells == 0 {
        return Err(Error::InvalidParameter("need at least one cell".into()));
    }
    let coarse = degree_profile(w, opts.cells);
    let fine = degree_profile(w, 2 * opts.cells);
    let gap = wasserstein1(&profile_points(&coarse), &profile_points(&fine))? + fine.error;
    let step = discretize(w, opts.cells, DEFAULT_SUBSAMPLES)?;
    compare(g, &coarse, &step, opts, gap)
}
