//! Multiplexons: step functions, builtin closed-form families, discretization
//! and degree profiles.

mod analytic;
mod degree;
pub mod moebius;
mod step;

pub use analytic::AnalyticMultiplexon;
pub use degree::{degree_profile, step_degree_profile, DegreeProfile, QUADRATURE_NODES};
pub use step::{common_refinement, equipartition, DecomposabilityReport, StepMultiplexon};


use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiplex::Mode;
use crate::subset::Subset;

/// Default tolerance for decomposability and round-trip checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default number of midpoint subsamples per cell side in [`discretize`].
pub const DEFAULT_SUBSAMPLES: usize = 8;

/// Pointwise access to a multiplexon in cumulative and disjoint form.
pub trait Multiplexon: Sync {
    fn r(&self) -> usize;

    /// `W̄_S(x, y)`; the empty set gives 1.
    fn cumulative_at(&self, s: Subset, x: f64, y: f64) -> f64;

    /// Writes `Ŵ_S(x, y)` for every subset (including the empty set) into `out`,
    /// which has length `2^r`.
    fn disjoint_at(&self, x: f64, y: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.cumulative_at(Subset(i as u8), x, y);
        }
        out[0] = 1.0;
        moebius::superset_differences(out, self.r());
    }
}

/// Equipartition step approximation whose cells hold the `m × m` midpoint-rule
/// average of every cumulative layer.
pub fn discretize<W: Multiplexon + ?Sized>(w: &W, k: usize, m: usize) -> Result<StepMultiplexon> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidParameter("cell and subsample counts must be positive".into()));
    }
    let r = w.r();
    let size = 1usize << r;
    let h = 1.0 / (k * m) as f64;
    let cells: Vec<Vec<f64>> = (0..k * k)
        .into_par_iter()
        .map(|c| {
            let (a, b) = (c / k, c % k);
            let mut acc = vec![0.0; size];
            for u in 0..m {
                let x = ((a * m + u) as f64 + 0.5) * h;
                for v in 0..m {
                    let y = ((b * m + v) as f64 + 0.5) * h;
                    for (s, slot) in acc.iter_mut().enumerate().skip(1) {
                        *slot += w.cumulative_at(Subset(s as u8), x, y);
                    }
                }
            }
            let norm = (m * m) as f64;
            acc.iter_mut().for_each(|v| *v /= norm);
            acc
        })
        .collect();
    let mut layers = vec![vec![0.0; k * k]; size];
    for (c, vals) in cells.iter().enumerate() {
        let (a, b) = (c / k, c % k);
        for s in 1..size {
            // symmetrize against midpoint round-off
            let v = if a <= b { vals[s] } else { cells[b * k + a][s] };
            layers[s][c] = v;
        }
    }
    StepMultiplexon::from_flat(r, Mode::Cumulative, equipartition(k), layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretized_constant_is_exact() {
        let w = AnalyticMultiplexon::constant(2, &[0.5, 0.5, 0.25]).unwrap();
        for k in [1, 3, 7] {
            let d = discretize(&w, k, DEFAULT_SUBSAMPLES).unwrap();
            assert_eq!(d.k(), k);
            assert!(d.layer(Subset(3)).iter().all(|&v| v == 0.25));
            assert_eq!(d.eval_layer(Subset(1), 0.3, 0.9).unwrap(), 0.5);
        }
    }

    #[test]
    fn discretized_threshold_cells_approach_areas() {
        // a = 0.5 on two cells: the lower-left cell is cut in half by x + y = 1/2,
        // every other cell lies above the line.
        let w = AnalyticMultiplexon::threshold(0.5, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for m in [8, 32, 128] {
            let d = discretize(&w, 2, m).unwrap();
            let l = d.layer(Subset(1));
            assert_eq!(&l[1..], &[0.0, 0.0, 0.0]);
            let err = (l[0] - 0.5).abs();
            assert!(err <= 1.0 / m as f64 + 1e-12);
            assert!(err < prev);
            prev = err;
        }
        // a = 1 splits the off-diagonal cells in half.
        let w = AnalyticMultiplexon::threshold(1.0, 1.0).unwrap();
        let d = discretize(&w, 2, 64).unwrap();
        let l = d.layer(Subset(1));
        assert_eq!(l[0], 1.0);
        assert_eq!(l[3], 0.0);
        assert!((l[1] - 0.5).abs() <= 1.0 / 64.0);
        assert_eq!(l[1], l[2]);
    }

    #[test]
    fn discretize_evaluates_to_cell_averages_at_midpoints() {
        let w = AnalyticMultiplexon::UniformAttachment;
        let d = discretize(&w, 4, 8).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let (x, y) = ((a as f64 + 0.5) / 4.0, (b as f64 + 0.5) / 4.0);
                for s in Subset::nonempty(2) {
                    assert_eq!(d.eval_layer(s, x, y).unwrap(), d.value(s, a, b));
                }
            }
        }
        assert!(d.check_decomposable(DEFAULT_TOLERANCE).decomposable);
    }

    #[test]
    fn default_disjoint_view_inverts_cumulative() {
        let w = AnalyticMultiplexon::constant(2, &[0.5, 0.5, 0.25]).unwrap();
        let mut out = [0.0; 4];
        w.disjoint_at(0.1, 0.2, &mut out);
        assert_eq!(out, [0.25; 4]);
    }
}
