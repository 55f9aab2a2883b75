//! Homomorphism counting between multiplexes and motif densities in multiplexons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplex::{Mode, Multiplex};
use crate::multiplexon::{Multiplexon, StepMultiplexon};
use crate::rng::{self, tag};
use crate::subset::Subset;

/// Largest pattern handled by exhaustive enumeration.
pub const MAX_PATTERN_VERTICES: usize = 9;

/// Largest number of cell assignments `k^v` summed by [`t_motif_step`].
pub const MAX_CELL_ASSIGNMENTS: f64 = 1e8;

/// Samples per Monte Carlo work item.
const MC_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomDensity {
    pub t: f64,
    /// `None` when the pattern has more vertices than the target.
    pub t_inj: Option<f64>,
    pub hom_count: u128,
    pub injective_count: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub stderr: f64,
    /// 0 for exact results.
    pub samples: u64,
}

/// The edges of a pattern's disjoint decomposition, each labeled by its multilink.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifPattern {
    pub vertices: usize,
    pub r: usize,
    /// `(u, v, S)` with `u < v`, lexicographic.
    pub edges: Vec<(usize, usize, Subset)>,
}

pub fn motif_pattern(h: &Multiplex) -> MotifPattern {
    let n = h.n();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let s = h.link(u, v);
            if !s.is_empty() {
                edges.push((u, v, s));
            }
        }
    }
    MotifPattern { vertices: n, r: h.r(), edges }
}

impl MotifPattern {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// For each vertex, its labeled edges to earlier vertices.
    fn back_edges(&self) -> Vec<Vec<(usize, Subset)>> {
        let mut back = vec![Vec::new(); self.vertices];
        for &(u, v, s) in &self.edges {
            back[v].push((u, s));
        }
        back
    }
}

fn check_pattern_size(v: usize) -> Result<()> {
    if v > MAX_PATTERN_VERTICES {
        Err(Error::Guard(format!("pattern has {v} vertices, at most {MAX_PATTERN_VERTICES} supported")))
    } else {
        Ok(())
    }
}

fn falling_factorial(n: usize, v: usize) -> f64 {
    (0..v).map(|i| (n - i) as f64).product()
}

/// Counts the maps `V(H) → V(G)` that are homomorphisms in every layer at once.
pub fn hom_density(h: &Multiplex, g: &Multiplex) -> Result<HomDensity> {
    if h.r() != g.r() {
        return Err(Error::LayerMismatch { expected: g.r(), got: h.r() });
    }
    let v = h.n();
    check_pattern_size(v)?;
    let n = g.n();
    let back = motif_pattern(h).back_edges();

    struct Search<'a> {
        g: &'a Multiplex,
        back: &'a [Vec<(usize, Subset)>],
        phi: Vec<usize>,
        used: Vec<u32>,
        hom: u128,
        inj: u128,
    }
    impl Search<'_> {
        fn go(&mut self, depth: usize) {
            if depth == self.phi.len() {
                self.hom += 1;
                if self.used.iter().all(|&c| c <= 1) {
                    self.inj += 1;
                }
                return;
            }
            for x in 0..self.g.n() {
                let ok = self.back[depth]
                    .iter()
                    .all(|&(u, s)| s.is_subset_of(self.g.link(self.phi[u], x)));
                if ok {
                    self.phi[depth] = x;
                    self.used[x] += 1;
                    self.go(depth + 1);
                    self.used[x] -= 1;
                }
            }
        }
    }

    // Split on the image of vertex 0 so the work parallelizes; counts are integers,
    // so the reduction is order independent.
    let (hom, inj) = if v == 0 {
        (1, 1)
    } else {
        (0..n)
            .into_par_iter()
            .map(|x0| {
                let mut s = Search { g, back: &back, phi: vec![0; v], used: vec![0; n], hom: 0, inj: 0 };
                s.phi[0] = x0;
                s.used[x0] = 1;
                s.go(1);
                (s.hom, s.inj)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    let t = hom as f64 / (n as f64).powi(v as i32);
    let t_inj = (v <= n).then(|| inj as f64 / falling_factorial(n, v));
    Ok(HomDensity { t, t_inj, hom_count: hom, injective_count: inj })
}

/// Exact `t(P, W)` for a cumulative step multiplexon, summing over all cell assignments.
pub fn t_motif_step(p: &MotifPattern, w: &StepMultiplexon) -> Result<DensityEstimate> {
    if w.mode() != Mode::Cumulative {
        return Err(Error::ModeMismatch("motif densities need a cumulative step multiplexon".into()));
    }
    if p.r != w.r() {
        return Err(Error::LayerMismatch { expected: w.r(), got: p.r });
    }
    check_pattern_size(p.vertices)?;
    let k = w.k();
    if (k as f64).powi(p.vertices as i32) > MAX_CELL_ASSIGNMENTS {
        return Err(Error::Guard(format!(
            "{k}^{} cell assignments exceed {MAX_CELL_ASSIGNMENTS:e}; discretize coarser or sample",
            p.vertices
        )));
    }
    if p.vertices == 0 {
        return Ok(DensityEstimate { value: 1.0, stderr: 0.0, samples: 0 });
    }
    let back = p.back_edges();
    let widths = w.widths();

    fn go(w: &StepMultiplexon, back: &[Vec<(usize, Subset)>], widths: &[f64], cells: &mut [usize], depth: usize, acc: f64) -> f64 {
        if depth == cells.len() {
            return acc;
        }
        let mut total = 0.0;
        for c in 0..widths.len() {
            let mut f = acc * widths[c];
            for &(u, s) in &back[depth] {
                f *= w.value(s, cells[u], c);
                if f == 0.0 {
                    break;
                }
            }
            if f != 0.0 {
                cells[depth] = c;
                total += go(w, back, widths, cells, depth + 1, f);
            }
        }
        total
    }

    let partial: Vec<f64> = (0..k)
        .into_par_iter()
        .map(|c0| {
            let mut cells = vec![0; p.vertices];
            cells[0] = c0;
            go(w, &back, &widths, &mut cells, 1, widths[c0])
        })
        .collect();
    Ok(DensityEstimate { value: partial.iter().sum(), stderr: 0.0, samples: 0 })
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * (o.n as f64 / n as f64),
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64),
        }
    }
}

/// Monte Carlo estimate of `t(P, W)` from i.i.d. uniform vertex coordinates.
///
/// Samples are drawn in fixed chunks, each from its own counter-addressed
/// stream, and chunk statistics are merged in chunk order, so the result
/// depends only on `(P, W, samples, seed)`.
pub fn t_motif_mc<W: Multiplexon + ?Sized>(p: &MotifPattern, w: &W, samples: u64, seed: u64) -> Result<DensityEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if p.r != w.r() {
        return Err(Error::LayerMismatch { expected: w.r(), got: p.r });
    }
    let chunks = samples.div_ceil(MC_CHUNK as u64);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, tag::MONTE_CARLO, c);
            let len = (samples - c * MC_CHUNK as u64).min(MC_CHUNK as u64);
            let mut xs = vec![0.0; p.vertices];
            let mut m = Moments::default();
            for _ in 0..len {
                xs.iter_mut().for_each(|x| *x = rng::uniform(&mut rng));
                let f: f64 = p.edges.iter().map(|&(u, v, s)| w.cumulative_at(s, xs[u], xs[v])).product();
                m.push(f);
            }
            m
        })
        .collect();
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let stderr = if m.n > 1 { (m.m2 / (m.n - 1) as f64).sqrt() / (m.n as f64).sqrt() } else { 0.0 };
    Ok(DensityEstimate { value: m.mean, stderr, samples })
}
