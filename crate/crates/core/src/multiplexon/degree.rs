use rayon::prelude::*;

use crate::multiplex::Mode;
use crate::multiplexon::{moebius, Multiplexon, StepMultiplexon};
use crate::subset::Subset;

/// Midpoint nodes used for analytic degree integrals.
pub const QUADRATURE_NODES: usize = 4096;

/// Limit degrees `d_{W̄_S}(x) = ∫ W̄_S(x, y) dy` on a weighted set of points `x`.
///
/// For step multiplexons the points are cell midpoints weighted by cell widths,
/// which represents the law of `(d_{W̄_S}(η))_S` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeProfile {
    pub r: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[p][S]` for every subset bitmask (the empty set gives 1).
    pub values: Vec<Vec<f64>>,
    /// Largest gap between the 2048- and 4096-node quadratures (0 when exact).
    pub error: f64,
}

impl DegreeProfile {
    pub fn degree(&self, s: Subset, point: usize) -> f64 {
        self.values[point][s.index()]
    }

    /// `∫ d_{W̄_S}(x) dx`, the edge density of layer `S`.
    pub fn mass(&self, s: Subset) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v[s.index()]).sum()
    }

    /// Degree vectors over the nonempty subsets, one per point.
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.values.iter().map(|v| v[1..].to_vec()).collect()
    }
}

/// Exact profile of a step multiplexon (either mode).
pub fn step_degree_profile(w: &StepMultiplexon) -> DegreeProfile {
    let r = w.r();
    let k = w.k();
    let per_subset: Vec<Vec<f64>> = Subset::all(r).map(|s| w.row_averages(s)).collect();
    let values = (0..k)
        .map(|a| {
            let mut v: Vec<f64> = per_subset.iter().map(|col| col[a]).collect();
            if w.mode() == Mode::Disjoint {
                moebius::superset_sums(&mut v, r);
            }
            v[0] = 1.0;
            v
        })
        .collect();
    let b = w.breaks();
    DegreeProfile {
        r,
        points: b.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect(),
        weights: w.widths(),
        values,
        error: 0.0,
    }
}

fn midpoint_rule<W: Multiplexon + ?Sized>(w: &W, s: Subset, x: f64, nodes: usize) -> f64 {
    let h = 1.0 / nodes as f64;
    (0..nodes).map(|j| w.cumulative_at(s, x, (j as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Quadrature profile at the midpoints of `m` equal cells.
pub fn degree_profile<W: Multiplexon + ?Sized>(w: &W, m: usize) -> DegreeProfile {
    let r = w.r();
    let points: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let rows: Vec<(Vec<f64>, f64)> = points
        .par_iter()
        .map(|&x| {
            let mut v = vec![1.0; 1 << r];
            let mut err = 0.0f64;
            for s in Subset::nonempty(r) {
                let fine = midpoint_rule(w, s, x, QUADRATURE_NODES);
                let coarse = midpoint_rule(w, s, x, QUADRATURE_NODES / 2);
                v[s.index()] = fine;
                err = err.max((fine - coarse).abs());
            }
            (v, err)
        })
        .collect();
    let error = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    DegreeProfile {
        r,
        points,
        weights: vec![1.0 / m as f64; m],
        values: rows.into_iter().map(|r| r.0).collect(),
        error,
    }
}
