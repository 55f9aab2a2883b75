//! Layered cut norms and cut-distance upper bounds for step multiplexons.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplex::Mode;
use crate::multiplexon::{common_refinement, StepMultiplexon, DEFAULT_TOLERANCE};
use crate::rng::{self, tag};
use crate::subset::Subset;

/// Largest cell count for exhaustive row-set enumeration.
pub const EXACT_CUT_MAX_CELLS: usize = 20;
/// Random starts of the heuristic cut norm.
pub const HEURISTIC_STARTS: usize = 64;
/// Largest cell count for exhaustive permutation search.
pub const EXHAUSTIVE_PERMUTATION_CELLS: usize = 8;
/// Largest common grid used by the cut distance.
pub const MAX_DISTANCE_CELLS: usize = 64;

const ANNEAL_RESTARTS: u64 = 4;
const ANNEAL_FINAL_RATIO: f64 = 1e-3;
const HEURISTIC_MAX_ROUNDS: usize = 64;
/// Inside annealing, grids up to this size use exact norms; larger ones use a
/// warm-started heuristic.
const ANNEAL_EXACT_CELLS: usize = 10;
const ANNEAL_RANDOM_STARTS: usize = 3;

/// A signed symmetric step kernel, stored as the cell masses `w_a w_b D(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellKernel {
    k: usize,
    mass: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutMode {
    Exact,
    Heuristic { seed: u64 },
    /// Exact when the grid allows it, heuristic otherwise.
    Auto { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    pub value: f64,
    /// Row and column cell sets attaining `value`.
    pub witness: (Vec<usize>, Vec<usize>),
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayeredCut {
    pub layers: BTreeMap<Subset, CutResult>,
    pub total: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub upper_bound: f64,
    /// Cell `a` of the working grid is matched with cell `permutation[a]` of the second argument.
    pub permutation: Vec<usize>,
    /// Every permutation of the working grid was examined.
    pub exact_search: bool,
    /// The reported norms are exact (otherwise heuristic lower estimates of the norm).
    pub norm_exact: bool,
    /// Cell count of the working grid.
    pub cells: usize,
    /// The arguments had to be averaged onto a coarser grid.
    pub coarsened: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    /// `‖Û − Ŵ‖ / R`
    pub lhs: f64,
    /// `‖Ū − W̄‖`
    pub mid: f64,
    /// `R ‖Û − Ŵ‖`
    pub rhs: f64,
    pub disjoint: f64,
    pub ok: bool,
}

impl CellKernel {
    /// Kernel with the given cell widths and row-major values.
    pub fn new(widths: &[f64], values: &[f64]) -> Result<Self> {
        let k = widths.len();
        if k == 0 || values.len() != k * k {
            return Err(Error::InvalidParameter("kernel needs k widths and k*k values".into()));
        }
        let mut mass = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                mass[a * k + b] = widths[a] * widths[b] * values[a * k + b];
            }
        }
        Ok(CellKernel { k, mass })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `Σ |mass|`, the L1 norm of the kernel.
    pub fn l1(&self) -> f64 {
        self.mass.iter().map(|m| m.abs()).sum()
    }

    fn rect(&self, rows: &[bool], cols: &[bool]) -> f64 {
        let k = self.k;
        let mut acc = 0.0;
        for a in (0..k).filter(|&a| rows[a]) {
            for b in (0..k).filter(|&b| cols[b]) {
                acc += self.mass[a * k + b];
            }
        }
        acc
    }

    /// The better of the two sign-greedy column choices for a fixed row sum vector.
    fn greedy_columns(col: &[f64]) -> (f64, bool) {
        let pos: f64 = col.iter().filter(|&&c| c > 0.0).sum();
        let neg: f64 = -col.iter().filter(|&&c| c < 0.0).sum::<f64>();
        if pos >= neg {
            (pos, true)
        } else {
            (neg, false)
        }
    }

    fn finish(&self, rows: Vec<bool>, cols: Vec<bool>, exact: bool) -> CutResult {
        let value = self.rect(&rows, &cols).abs();
        let idx = |v: &[bool]| v.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect();
        CutResult { value, witness: (idx(&rows), idx(&cols)), exact }
    }

    fn exact(&self) -> Result<CutResult> {
        let k = self.k;
        if k > EXACT_CUT_MAX_CELLS {
            return Err(Error::Guard(format!("exact cut norm supports at most {EXACT_CUT_MAX_CELLS} cells, got {k}")));
        }
        let low = k.min(12);
        let high = k - low;
        let best = (0u64..1 << high)
            .into_par_iter()
            .map(|h| {
                let base = (h as usize) << low;
                let mut col = vec![0.0; k];
                for a in (low..k).filter(|&a| base >> a & 1 == 1) {
                    for b in 0..k {
                        col[b] += self.mass[a * k + b];
                    }
                }
                let mut best = (Self::greedy_columns(&col).0, base);
                let mut gray = 0usize;
                for g in 1..1usize << low {
                    let bit = g.trailing_zeros() as usize;
                    gray ^= 1 << bit;
                    let sign = if gray >> bit & 1 == 1 { 1.0 } else { -1.0 };
                    for b in 0..k {
                        col[b] += sign * self.mass[bit * k + b];
                    }
                    let v = Self::greedy_columns(&col).0;
                    if v > best.0 {
                        best = (v, base | gray);
                    }
                }
                best
            })
            .reduce(|| (f64::NEG_INFINITY, usize::MAX), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        let rows: Vec<bool> = (0..k).map(|a| best.1 >> a & 1 == 1).collect();
        let col = self.col_sums(&rows);
        let (_, positive) = Self::greedy_columns(&col);
        let cols = col.iter().map(|&c| if positive { c > 0.0 } else { c < 0.0 }).collect();
        Ok(self.finish(rows, cols, true))
    }

    fn col_sums(&self, rows: &[bool]) -> Vec<f64> {
        let k = self.k;
        let mut col = vec![0.0; k];
        for a in (0..k).filter(|&a| rows[a]) {
            for b in 0..k {
                col[b] += self.mass[a * k + b];
            }
        }
        col
    }

    /// Alternating sign-greedy ascent from `rows` for the sign `sign`.
    fn ascend(&self, mut rows: Vec<bool>, sign: f64) -> (f64, Vec<bool>, Vec<bool>) {
        let k = self.k;
        let mut best = f64::NEG_INFINITY;
        let mut cols = vec![false; k];
        for _ in 0..HEURISTIC_MAX_ROUNDS {
            let col = self.col_sums(&rows);
            cols = col.iter().map(|&c| sign * c > 0.0).collect();
            // rows given columns; the kernel is symmetric, so row sums over
            // `cols` are column sums over `cols`.
            let row = self.col_sums(&cols);
            let new_rows: Vec<bool> = row.iter().map(|&c| sign * c > 0.0).collect();
            let v: f64 = row.iter().map(|&c| (sign * c).max(0.0)).sum();
            if v <= best {
                break;
            }
            best = v;
            rows = new_rows;
        }
        (best.max(0.0), rows, cols)
    }

    fn heuristic_from(&self, warm: &[Vec<bool>], rng: &mut ChaCha8Rng, random: usize) -> CutResult {
        let k = self.k;
        let mut starts: Vec<Vec<bool>> = warm.to_vec();
        for _ in 0..random {
            starts.push((0..k).map(|_| rng.random::<bool>()).collect());
        }
        let mut best = (f64::NEG_INFINITY, vec![false; k], vec![false; k]);
        for s in starts {
            for sign in [1.0, -1.0] {
                let cand = self.ascend(s.clone(), sign);
                if cand.0 > best.0 {
                    best = cand;
                }
            }
        }
        self.finish(best.1, best.2, false)
    }

    fn heuristic(&self, seed: u64) -> CutResult {
        let results: Vec<CutResult> = (0..HEURISTIC_STARTS as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::stream(seed, tag::CUT_HEURISTIC, i);
                self.heuristic_from(&[], &mut rng, 1)
            })
            .collect();
        let mut best = results[0].clone();
        for r in results.into_iter().skip(1) {
            if r.value > best.value {
                best = r;
            }
        }
        best
    }
}

/// Cut norm `sup_{S,T} |∫_{S×T} D|` of a step kernel; the supremum is attained
/// on unions of cells.
pub fn cut_norm_cell(d: &CellKernel, mode: CutMode) -> Result<CutResult> {
    match mode {
        CutMode::Exact => d.exact(),
        CutMode::Heuristic { seed } => Ok(d.heuristic(seed)),
        CutMode::Auto { seed } => {
            if d.k <= EXACT_CUT_MAX_CELLS {
                d.exact()
            } else {
                Ok(d.heuristic(seed))
            }
        }
    }
}

fn layer_keys(r: usize, mode: Mode) -> Vec<Subset> {
    match mode {
        Mode::Cumulative => Subset::nonempty(r).collect(),
        Mode::Disjoint => Subset::all(r).collect(),
    }
}

fn difference_kernel(u: &StepMultiplexon, w: &StepMultiplexon, s: Subset) -> CellKernel {
    let diff: Vec<f64> = u.layer(s).iter().zip(w.layer(s)).map(|(a, b)| a - b).collect();
    CellKernel::new(&u.widths(), &diff).expect("aligned layers")
}

fn align(u: &StepMultiplexon, w: &StepMultiplexon) -> Result<(StepMultiplexon, StepMultiplexon)> {
    if u.r() != w.r() {
        return Err(Error::LayerMismatch { expected: u.r(), got: w.r() });
    }
    if u.mode() != w.mode() {
        return Err(Error::ModeMismatch("cut norms compare multiplexons written in the same mode".into()));
    }
    if u.breaks() == w.breaks() {
        return Ok((u.clone(), w.clone()));
    }
    let b = common_refinement(u.breaks(), w.breaks());
    Ok((u.refine(&b)?, w.refine(&b)?))
}

/// `Σ_S ‖U_S − W_S‖_□` over the layers of the common mode (cumulative: nonempty
/// subsets; disjoint: all subsets), on the common refinement of both grids.
pub fn layered_cut_norm(u: &StepMultiplexon, w: &StepMultiplexon, mode: CutMode) -> Result<LayeredCut> {
    let (u, w) = align(u, w)?;
    layered_aligned(&u, &w, mode)
}

fn layered_aligned(u: &StepMultiplexon, w: &StepMultiplexon, mode: CutMode) -> Result<LayeredCut> {
    let mut layers = BTreeMap::new();
    for s in layer_keys(u.r(), u.mode()) {
        layers.insert(s, cut_norm_cell(&difference_kernel(u, w, s), mode)?);
    }
    let total = layers.values().map(|c| c.value).sum();
    let exact = layers.values().all(|c| c.exact);
    Ok(LayeredCut { layers, total, exact })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Orders cells by total degree so that averaging onto a coarse grid merges
/// cells that look alike.
fn sort_by_degree(w: &StepMultiplexon) -> StepMultiplexon {
    let k = w.k();
    let mut deg = vec![0.0; k];
    for s in Subset::nonempty(w.r()) {
        for (d, v) in deg.iter_mut().zip(w.row_averages(s)) {
            *d += v;
        }
    }
    let mut perm: Vec<usize> = (0..k).collect();
    perm.sort_by(|&a, &b| deg[a].total_cmp(&deg[b]));
    w.permute_cells(&perm)
}

struct Objective<'a> {
    u: &'a StepMultiplexon,
    w: &'a StepMultiplexon,
    keys: Vec<Subset>,
}

impl Objective<'_> {
    fn kernels(&self, perm: &[usize]) -> Vec<CellKernel> {
        let wp = self.w.permute_cells(perm);
        self.keys.iter().map(|&s| difference_kernel(self.u, &wp, s)).collect()
    }

    fn exact(&self, perm: &[usize]) -> f64 {
        self.kernels(perm).iter().map(|d| d.exact().expect("small grid").value).sum()
    }

    /// Warm-started heuristic value; updates the per-layer warm starts.
    fn fast(&self, perm: &[usize], warm: &mut [Vec<bool>], rng: &mut ChaCha8Rng) -> f64 {
        if self.u.k() <= ANNEAL_EXACT_CELLS {
            return self.exact(perm);
        }
        let mut total = 0.0;
        for (d, start) in self.kernels(perm).iter().zip(warm.iter_mut()) {
            let res = d.heuristic_from(std::slice::from_ref(start), rng, ANNEAL_RANDOM_STARTS);
            let mut rows = vec![false; d.k];
            res.witness.0.iter().for_each(|&a| rows[a] = true);
            *start = rows;
            total += res.value;
        }
        total
    }

    fn final_value(&self, perm: &[usize], seed: u64) -> (f64, bool) {
        let mut total = 0.0;
        let mut exact = true;
        for d in self.kernels(perm) {
            let c = cut_norm_cell(&d, CutMode::Auto { seed }).expect("auto mode never fails");
            exact &= c.exact;
            total += c.value;
        }
        (total, exact)
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn exhaustive(obj: &Objective, k: usize) -> (f64, Vec<usize>) {
    (0..k)
        .into_par_iter()
        .map(|first| {
            let mut rest: Vec<usize> = (0..k).filter(|&c| c != first).collect();
            let mut best = (f64::INFINITY, Vec::new());
            loop {
                let mut perm = Vec::with_capacity(k);
                perm.push(first);
                perm.extend_from_slice(&rest);
                let v = obj.exact(&perm);
                if v < best.0 {
                    best = (v, perm);
                }
                if !next_permutation(&mut rest) {
                    break;
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, Vec::new()), |a, b| if b.0 < a.0 { b } else { a })
}

fn anneal(obj: &Objective, k: usize, budget: usize, seed: u64) -> Vec<usize> {
    let proposals = (64 * budget.max(1)) as u64;
    let per_restart = proposals.div_ceil(ANNEAL_RESTARTS).max(1);
    let runs: Vec<(f64, Vec<usize>)> = (0..ANNEAL_RESTARTS)
        .into_par_iter()
        .map(|restart| {
            let mut rng = rng::stream(seed, tag::ANNEAL, restart);
            let mut warm = vec![vec![false; k]; obj.keys.len()];
            let mut perm: Vec<usize> = (0..k).collect();
            let mut cur = obj.fast(&perm, &mut warm, &mut rng);
            // Initial temperature: uphill moves of average size accepted half the time.
            let mut ups = Vec::new();
            for _ in 0..16 {
                let (a, b) = (rng.random_range(0..k), rng.random_range(0..k));
                let mut p = perm.clone();
                p.swap(a, b);
                let v = obj.fast(&p, &mut warm.clone(), &mut rng);
                if v > cur {
                    ups.push(v - cur);
                }
            }
            let mean_up = if ups.is_empty() { 1e-3 } else { ups.iter().sum::<f64>() / ups.len() as f64 };
            let t0 = mean_up / std::f64::consts::LN_2;
            let cooling = ANNEAL_FINAL_RATIO.powf(1.0 / per_restart as f64);
            let mut temp = t0;
            let mut best = (cur, perm.clone());
            for _ in 0..per_restart {
                let a = rng.random_range(0..k);
                let mut b = rng.random_range(0..k - 1);
                if b >= a {
                    b += 1;
                }
                perm.swap(a, b);
                let mut trial_warm = warm.clone();
                let v = obj.fast(&perm, &mut trial_warm, &mut rng);
                let accept = v <= cur || rng::uniform(&mut rng) < ((cur - v) / temp).exp();
                if accept {
                    cur = v;
                    warm = trial_warm;
                    if v < best.0 {
                        best = (v, perm.clone());
                    }
                } else {
                    perm.swap(a, b);
                }
                temp *= cooling;
            }
            best
        })
        .collect();
    runs.into_iter()
        .fold((f64::INFINITY, Vec::new()), |a, b| if b.0 < a.0 { b } else { a })
        .1
}

/// Upper bound on the cut distance by searching over cell relabelings of `w`.
///
/// Both arguments must live on equipartitions. When either side is constant,
/// relabeling cannot change the norm and the layered norm is returned directly.
pub fn cut_distance_upper(u: &StepMultiplexon, w: &StepMultiplexon, budget: usize, seed: u64) -> Result<DistanceResult> {
    if u.r() != w.r() {
        return Err(Error::LayerMismatch { expected: u.r(), got: w.r() });
    }
    if u.mode() != w.mode() {
        return Err(Error::ModeMismatch("cut distance compares multiplexons written in the same mode".into()));
    }
    if !u.is_equipartition() || !w.is_equipartition() {
        return Err(Error::InvalidParameter("cut distance needs equipartition step multiplexons".into()));
    }
    if u.is_constant() || w.is_constant() {
        let cut = layered_cut_norm(u, w, CutMode::Auto { seed })?;
        let k = common_refinement(u.breaks(), w.breaks()).len() - 1;
        return Ok(DistanceResult {
            upper_bound: cut.total,
            permutation: (0..k).collect(),
            exact_search: true,
            norm_exact: cut.exact,
            cells: k,
            coarsened: false,
        });
    }
    let (ku, kw) = (u.k(), w.k());
    let lcm = ku / gcd(ku, kw) * kw;
    let (uu, ww, k, coarsened) = if lcm <= MAX_DISTANCE_CELLS {
        (u.resample_equipartition(lcm)?, w.resample_equipartition(lcm)?, lcm, false)
    } else {
        let k = MAX_DISTANCE_CELLS;
        let cu = sort_by_degree(u).resample_equipartition(k)?;
        let cw = sort_by_degree(w).resample_equipartition(k)?;
        let exact = |orig: usize| k % orig == 0;
        (cu, cw, k, !(exact(ku) && exact(kw)))
    };
    let obj = Objective { u: &uu, w: &ww, keys: layer_keys(u.r(), u.mode()) };
    let (perm, exact_search) = if k <= EXHAUSTIVE_PERMUTATION_CELLS {
        (exhaustive(&obj, k).1, true)
    } else {
        let identity: Vec<usize> = (0..k).collect();
        let found = anneal(&obj, k, budget, seed);
        // keep the better of the annealed and the identity alignment
        let a = obj.final_value(&found, seed).0;
        let b = obj.final_value(&identity, seed).0;
        (if a <= b { found } else { identity }, false)
    };
    let (upper_bound, norm_exact) = obj.final_value(&perm, seed);
    Ok(DistanceResult { upper_bound, permutation: perm, exact_search, norm_exact: norm_exact && !coarsened, cells: k, coarsened })
}

/// Evaluates both sides of `‖Û − Ŵ‖/R ≤ ‖Ū − W̄‖ ≤ R‖Û − Ŵ‖` with exact norms.
pub fn sandwich_check(u: &StepMultiplexon, w: &StepMultiplexon) -> Result<SandwichResult> {
    if u.mode() != Mode::Cumulative || w.mode() != Mode::Cumulative {
        return Err(Error::ModeMismatch("sandwich check takes cumulative multiplexons".into()));
    }
    let mid = layered_cut_norm(u, w, CutMode::Exact)?.total;
    let ud = u.to_mode(Mode::Disjoint, DEFAULT_TOLERANCE)?;
    let wd = w.to_mode(Mode::Disjoint, DEFAULT_TOLERANCE)?;
    let disjoint = layered_cut_norm(&ud, &wd, CutMode::Exact)?.total;
    let big_r = (1usize << u.r()) as f64;
    let (lhs, rhs) = (disjoint / big_r, big_r * disjoint);
    let slack = 1e-12;
    let ok = lhs <= mid + slack && mid <= rhs + slack;
    Ok(SandwichResult { lhs, mid, rhs, disjoint, ok })
}
