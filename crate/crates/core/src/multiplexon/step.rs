use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::multiplex::{check_layer_count, Mode, Multiplex};
use crate::multiplexon::moebius::{superset_differences, superset_sums};
use crate::multiplexon::{Multiplexon, DEFAULT_TOLERANCE};
use crate::subset::Subset;

/// Breaks closer than this are merged when forming common refinements.
const BREAK_MERGE: f64 = 1e-12;

/// A piecewise-constant multiplexon on the cells `(b_{i-1}, b_i]` of a common
/// interval partition.
///
/// Layers are stored for every subset bitmask `0..2^r`. In cumulative mode the
/// empty-set layer is the constant 1 (the total mass), which makes the Möbius
/// transforms exact inverses; it is never serialized.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMultiplexon {
    r: usize,
    mode: Mode,
    breaks: Vec<f64>,
    layers: Vec<Vec<f64>>,
}

/// Outcome of a decomposability check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecomposabilityReport {
    pub decomposable: bool,
    /// Largest amount by which some disjoint value falls below 0 (0 when none does).
    pub worst_violation: f64,
    /// Cell pair and subset where the worst value occurs; the empty set flags
    /// layers summing past 1.
    pub worst_cell: (usize, usize),
    pub worst_subset: Subset,
}

pub fn equipartition(k: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    b[k] = 1.0;
    b
}

fn check_breaks(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::InvalidParameter("need at least one cell".into()));
    }
    if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
        return Err(Error::InvalidParameter("breaks must start at 0 and end at 1".into()));
    }
    if breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("breaks must be strictly increasing".into()));
    }
    Ok(())
}

/// Union of two break sequences, merging near-coincident points.
pub fn common_refinement(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        match out.last() {
            Some(&last) if x - last <= BREAK_MERGE => {}
            _ => out.push(x),
        }
    }
    *out.last_mut().unwrap() = 1.0;
    out
}

/// Index of the right-closed cell containing `x`; 0 belongs to the first cell.
pub(crate) fn cell_index(breaks: &[f64], x: f64) -> usize {
    let k = breaks.len() - 1;
    // first i >= 1 with x <= breaks[i]
    let i = breaks[1..].partition_point(|&b| b < x);
    i.min(k - 1)
}

impl StepMultiplexon {
    /// Builds and validates a step multiplexon from per-subset `k × k` matrices.
    ///
    /// Cumulative mode needs every nonempty subset. Disjoint mode needs every
    /// nonempty subset and may omit the empty set, which is then filled as
    /// `1 - sum`.
    pub fn new(
        r: usize,
        mode: Mode,
        breaks: Vec<f64>,
        values: BTreeMap<Subset, Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_layer_count(r)?;
        check_breaks(&breaks)?;
        let k = breaks.len() - 1;
        let mut layers = vec![Vec::new(); 1 << r];
        for (s, m) in values {
            if !s.is_valid_for(r) || (mode == Mode::Cumulative && s.is_empty()) {
                return Err(Error::UnknownSubset { subset: s });
            }
            if m.len() != k || m.iter().any(|row| row.len() != k) {
                return Err(Error::Malformed(format!("layer {s}: expected a {k}x{k} matrix")));
            }
            layers[s.index()] = m.into_iter().flatten().collect();
        }
        for s in Subset::nonempty(r) {
            if layers[s.index()].is_empty() {
                return Err(Error::Malformed(format!("missing layer {s}")));
            }
        }
        if layers[0].is_empty() {
            layers[0] = match mode {
                Mode::Cumulative => vec![1.0; k * k],
                Mode::Disjoint => (0..k * k)
                    .map(|c| 1.0 - layers[1..].iter().map(|l| l[c]).sum::<f64>())
                    .collect(),
            };
        }
        let w = StepMultiplexon { r, mode, breaks, layers };
        w.validate(DEFAULT_TOLERANCE)?;
        Ok(w)
    }

    /// Builds from flat row-major layers indexed by subset bitmask, then validates.
    pub(crate) fn from_flat(r: usize, mode: Mode, breaks: Vec<f64>, mut layers: Vec<Vec<f64>>) -> Result<Self> {
        check_layer_count(r)?;
        check_breaks(&breaks)?;
        let k = breaks.len() - 1;
        if layers.len() != 1 << r {
            return Err(Error::Malformed("wrong number of layers".into()));
        }
        if mode == Mode::Cumulative {
            layers[0] = vec![1.0; k * k];
        }
        if layers.iter().any(|l| l.len() != k * k) {
            return Err(Error::Malformed(format!("layers must have {k}x{k} cells")));
        }
        let w = StepMultiplexon { r, mode, breaks, layers };
        w.validate(DEFAULT_TOLERANCE)?;
        Ok(w)
    }

    /// One-cell multiplexon with the given per-subset constants (indexed by bitmask).
    pub fn constant(r: usize, mode: Mode, values: &[f64]) -> Result<Self> {
        check_layer_count(r)?;
        if values.len() != 1 << r {
            return Err(Error::InvalidParameter(format!("expected {} subset values", 1 << r)));
        }
        let mut layers: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        if mode == Mode::Disjoint {
            layers[0] = vec![1.0 - values[1..].iter().sum::<f64>()];
        }
        Self::from_flat(r, mode, vec![0.0, 1.0], layers)
    }

    /// The empirical multiplexon: cumulative indicator layers on the `n`-cell
    /// equipartition, zero on diagonal cells.
    pub fn empirical(g: &Multiplex) -> Self {
        let n = g.n();
        let r = g.r();
        let mut layers = vec![vec![0.0; n * n]; 1 << r];
        layers[0].fill(1.0);
        for i in 0..n {
            for j in 0..n {
                for s in g.link(i, j).nonempty_subsets() {
                    layers[s.index()][i * n + j] = 1.0;
                }
            }
        }
        StepMultiplexon { r, mode: Mode::Cumulative, breaks: equipartition(n), layers }
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of cells.
    #[inline]
    pub fn k(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn widths(&self) -> Vec<f64> {
        self.breaks.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Row-major `k × k` values of layer `s`.
    pub fn layer(&self, s: Subset) -> &[f64] {
        &self.layers[s.index()]
    }

    #[inline]
    pub fn value(&self, s: Subset, a: usize, b: usize) -> f64 {
        self.layers[s.index()][a * self.k() + b]
    }

    pub fn cell_of(&self, x: f64) -> usize {
        cell_index(&self.breaks, x)
    }

    fn check_key(&self, s: Subset) -> Result<()> {
        if !s.is_valid_for(self.r) || (self.mode == Mode::Cumulative && s.is_empty()) {
            Err(Error::UnknownSubset { subset: s })
        } else {
            Ok(())
        }
    }

    /// Value of layer `s` (in this multiplexon's own mode) at `(x, y)`.
    pub fn eval_layer(&self, s: Subset, x: f64, y: f64) -> Result<f64> {
        self.check_key(s)?;
        Ok(self.value(s, self.cell_of(x), self.cell_of(y)))
    }

    pub fn is_equipartition(&self) -> bool {
        let k = self.k() as f64;
        self.widths().iter().all(|w| (w - 1.0 / k).abs() <= 1e-12)
    }

    /// Whether every layer is constant across cells.
    pub fn is_constant(&self) -> bool {
        self.layers.iter().all(|l| l.iter().all(|&v| v == l[0]))
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let k = self.k();
        for s in Subset::all(self.r) {
            let l = &self.layers[s.index()];
            for a in 0..k {
                for b in 0..k {
                    let v = l[a * k + b];
                    if !v.is_finite() || v < -tol || v > 1.0 + tol {
                        return Err(Error::InvalidParameter(format!(
                            "layer {s} cell ({a},{b}) = {v} outside [0,1]"
                        )));
                    }
                    if (v - l[b * k + a]).abs() > tol {
                        return Err(Error::InvalidParameter(format!("layer {s} is not symmetric")));
                    }
                }
            }
        }
        let report = self.check_decomposable(tol);
        if !report.decomposable {
            return Err(Error::NotDecomposable(format!(
                "value {:.3e} below zero at cell {:?}, subset {}",
                report.worst_violation, report.worst_cell, report.worst_subset
            )));
        }
        if self.mode == Mode::Disjoint {
            for c in 0..k * k {
                let sum: f64 = self.layers.iter().map(|l| l[c]).sum();
                if (sum - 1.0).abs() > tol {
                    return Err(Error::NotDecomposable(format!(
                        "disjoint layers sum to {sum} at cell ({},{})",
                        c / k,
                        c % k
                    )));
                }
            }
        }
        Ok(())
    }

    /// Disjoint values of cell `c` (flat index) for every subset.
    fn disjoint_cell(&self, c: usize, out: &mut [f64]) {
        for (o, l) in out.iter_mut().zip(&self.layers) {
            *o = l[c];
        }
        if self.mode == Mode::Cumulative {
            superset_differences(out, self.r);
        }
    }

    /// Checks that the Möbius-inverted values form a probability vector in every cell.
    pub fn check_decomposable(&self, tol: f64) -> DecomposabilityReport {
        let k = self.k();
        let mut buf = vec![0.0; 1 << self.r];
        let mut worst = (0.0f64, (0, 0), Subset::EMPTY);
        for a in 0..k {
            for b in 0..k {
                self.disjoint_cell(a * k + b, &mut buf);
                for (s, &v) in buf.iter().enumerate() {
                    if -v > worst.0 {
                        worst = (-v, (a, b), Subset(s as u8));
                    }
                }
            }
        }
        DecomposabilityReport {
            decomposable: worst.0 <= tol,
            worst_violation: worst.0,
            worst_cell: worst.1,
            worst_subset: worst.2,
        }
    }

    /// Rewrites the layers in the other decomposition by cellwise inclusion–exclusion.
    pub fn to_mode(&self, target: Mode, tol: f64) -> Result<Self> {
        if target == self.mode {
            return Ok(self.clone());
        }
        let k = self.k();
        let size = 1usize << self.r;
        let mut layers = vec![vec![0.0; k * k]; size];
        let mut buf = vec![0.0; size];
        for c in 0..k * k {
            for (o, l) in buf.iter_mut().zip(&self.layers) {
                *o = l[c];
            }
            match target {
                Mode::Disjoint => superset_differences(&mut buf, self.r),
                Mode::Cumulative => superset_sums(&mut buf, self.r),
            }
            for (l, &v) in layers.iter_mut().zip(&buf) {
                l[c] = v;
            }
        }
        if target == Mode::Cumulative {
            layers[0].fill(1.0);
        }
        let w = StepMultiplexon { r: self.r, mode: target, breaks: self.breaks.clone(), layers };
        w.validate(tol)?;
        Ok(w)
    }

    /// Re-expresses the multiplexon on a refinement of its breaks.
    pub fn refine(&self, breaks: &[f64]) -> Result<Self> {
        check_breaks(breaks)?;
        let map: Vec<usize> = breaks
            .windows(2)
            .map(|w| self.cell_of(0.5 * (w[0] + w[1])))
            .collect();
        for &b in &self.breaks {
            if !breaks.iter().any(|&x| (x - b).abs() <= BREAK_MERGE) {
                return Err(Error::InvalidParameter("target breaks do not refine the source".into()));
            }
        }
        let k_old = self.k();
        let k = map.len();
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut out = Vec::with_capacity(k * k);
                for &a in &map {
                    for &b in &map {
                        out.push(l[a * k_old + b]);
                    }
                }
                out
            })
            .collect();
        Ok(StepMultiplexon { r: self.r, mode: self.mode, breaks: breaks.to_vec(), layers })
    }

    /// Cell averages over the `k`-cell equipartition.
    pub fn resample_equipartition(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("cell count must be positive".into()));
        }
        let target = equipartition(k);
        // overlap[A][a] = |new cell A ∩ old cell a|
        let k_old = self.k();
        let mut overlap = vec![vec![0.0; k_old]; k];
        for (big, row) in overlap.iter_mut().enumerate() {
            let (lo, hi) = (target[big], target[big + 1]);
            for (a, o) in row.iter_mut().enumerate() {
                let (l2, h2) = (self.breaks[a], self.breaks[a + 1]);
                *o = (hi.min(h2) - lo.max(l2)).max(0.0);
            }
        }
        let w_new = 1.0 / k as f64;
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut out = vec![0.0; k * k];
                for aa in 0..k {
                    for bb in 0..k {
                        let mut acc = 0.0;
                        for a in 0..k_old {
                            let oa = overlap[aa][a];
                            if oa == 0.0 {
                                continue;
                            }
                            for b in 0..k_old {
                                acc += oa * overlap[bb][b] * l[a * k_old + b];
                            }
                        }
                        out[aa * k + bb] = acc / (w_new * w_new);
                    }
                }
                out
            })
            .collect();
        let mut w = StepMultiplexon { r: self.r, mode: self.mode, breaks: target, layers };
        if w.mode == Mode::Cumulative {
            w.layers[0].fill(1.0);
        }
        Ok(w)
    }

    /// `W^σ` for a cell permutation: cell `a` takes the values of cell `perm[a]`.
    ///
    /// Only meaningful on equipartitions, where relabeling cells is measure preserving.
    pub fn permute_cells(&self, perm: &[usize]) -> Self {
        let k = self.k();
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut out = vec![0.0; k * k];
                for a in 0..k {
                    for b in 0..k {
                        out[a * k + b] = l[perm[a] * k + perm[b]];
                    }
                }
                out
            })
            .collect();
        StepMultiplexon { r: self.r, mode: self.mode, breaks: self.breaks.clone(), layers }
    }

    /// Row averages `∫ W_S(x, y) dy`, one value per cell and subset (mode-agnostic).
    pub(crate) fn row_averages(&self, s: Subset) -> Vec<f64> {
        let k = self.k();
        let widths = self.widths();
        let l = &self.layers[s.index()];
        (0..k)
            .map(|a| (0..k).map(|b| l[a * k + b] * widths[b]).sum())
            .collect()
    }

    /// Per-subset nested matrices, as serialized.
    pub fn values_map(&self) -> BTreeMap<Subset, Vec<Vec<f64>>> {
        let k = self.k();
        Subset::all(self.r)
            .filter(|s| self.mode == Mode::Disjoint || !s.is_empty())
            .map(|s| (s, self.layers[s.index()].chunks(k).map(<[f64]>::to_vec).collect()))
            .collect()
    }
}

impl Multiplexon for StepMultiplexon {
    fn r(&self) -> usize {
        self.r
    }

    fn cumulative_at(&self, s: Subset, x: f64, y: f64) -> f64 {
        let (a, b) = (self.cell_of(x), self.cell_of(y));
        match self.mode {
            Mode::Cumulative => self.value(s, a, b),
            Mode::Disjoint => Subset::all(self.r)
                .filter(|t| s.is_subset_of(*t))
                .map(|t| self.value(t, a, b))
                .sum(),
        }
    }

    fn disjoint_at(&self, x: f64, y: f64, out: &mut [f64]) {
        let c = self.cell_of(x) * self.k() + self.cell_of(y);
        self.disjoint_cell(c, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplex::fixtures::triangle_and_star;
    use proptest::prelude::*;

    const EPS: f64 = DEFAULT_TOLERANCE;

    fn s(layers: &[usize]) -> Subset {
        Subset::from_layers(layers)
    }

    fn constant_cum(v1: f64, v2: f64, v12: f64) -> Result<StepMultiplexon> {
        StepMultiplexon::constant(2, Mode::Cumulative, &[1.0, v1, v2, v12])
    }

    #[test]
    fn empirical_of_triangle_and_star() {
        let w = StepMultiplexon::empirical(&triangle_and_star());
        assert_eq!(w.k(), 3);
        let triangle = [0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let star = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert_eq!(w.layer(s(&[1])), &triangle);
        assert_eq!(w.layer(s(&[2])), &star);
        assert_eq!(w.layer(s(&[1, 2])), &star);
        let rep = w.check_decomposable(0.0);
        assert!(rep.decomposable);
    }

    #[test]
    fn empirical_single_edge_and_empty() {
        let g = Multiplex::new(2, 1, &[vec![(0, 1)]]).unwrap();
        assert_eq!(StepMultiplexon::empirical(&g).layer(Subset(1)), &[0.0, 1.0, 1.0, 0.0]);
        let e = StepMultiplexon::empirical(&Multiplex::empty(4, 2).unwrap());
        for t in Subset::nonempty(2) {
            assert!(e.layer(t).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn moebius_independent_constants() {
        let w = constant_cum(0.5, 0.5, 0.25).unwrap();
        let d = w.to_mode(Mode::Disjoint, EPS).unwrap();
        for t in Subset::all(2) {
            assert_eq!(d.value(t, 0, 0), 0.25);
        }
    }

    #[test]
    fn moebius_all_zero_cumulative() {
        let w = StepMultiplexon::constant(3, Mode::Cumulative, &[0.0; 8]).unwrap();
        let d = w.to_mode(Mode::Disjoint, EPS).unwrap();
        assert_eq!(d.value(Subset::EMPTY, 0, 0), 1.0);
        assert!(Subset::nonempty(3).all(|t| d.value(t, 0, 0) == 0.0));
    }

    #[test]
    fn moebius_perfectly_correlated() {
        let d = constant_cum(0.3, 0.3, 0.3).unwrap().to_mode(Mode::Disjoint, EPS).unwrap();
        assert_eq!(d.value(s(&[1]), 0, 0), 0.0);
        assert_eq!(d.value(s(&[2]), 0, 0), 0.0);
        assert_eq!(d.value(s(&[1, 2]), 0, 0), 0.3);
        assert!((d.value(Subset::EMPTY, 0, 0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn decomposability_verdicts() {
        let ok = StepMultiplexon::from_flat(2, Mode::Cumulative, vec![0.0, 1.0], vec![vec![1.0], vec![0.5], vec![0.5], vec![0.25]]).unwrap();
        assert!(ok.check_decomposable(EPS).decomposable);
        let como = constant_cum(0.2, 0.2, 0.2).unwrap();
        assert!(como.check_decomposable(EPS).decomposable);
        // construct the invalid one without validation
        let bad = StepMultiplexon {
            r: 2,
            mode: Mode::Cumulative,
            breaks: vec![0.0, 1.0],
            layers: vec![vec![1.0], vec![0.1], vec![0.1], vec![0.5]],
        };
        let rep = bad.check_decomposable(EPS);
        assert!(!rep.decomposable);
        assert!((rep.worst_violation - 0.4).abs() < 1e-12);
        assert!(rep.worst_subset == s(&[1]) || rep.worst_subset == s(&[2]));
        assert!(matches!(constant_cum(0.1, 0.1, 0.5), Err(Error::NotDecomposable(_))));
    }

    #[test]
    fn sum_above_one_is_flagged_on_the_empty_set() {
        let bad = StepMultiplexon {
            r: 2,
            mode: Mode::Cumulative,
            breaks: vec![0.0, 1.0],
            layers: vec![vec![1.0], vec![0.9], vec![0.9], vec![0.5]],
        };
        let rep = bad.check_decomposable(EPS);
        assert!(!rep.decomposable);
        assert_eq!(rep.worst_subset, Subset::EMPTY);
        assert!((rep.worst_violation - 0.3).abs() < 1e-12);
    }

    #[test]
    fn right_closed_cells() {
        let w = StepMultiplexon::empirical(&triangle_and_star());
        assert_eq!(w.cell_of(0.0), 0);
        assert_eq!(w.cell_of(1.0 / 3.0), 0);
        assert_eq!(w.cell_of(0.34), 1);
        assert_eq!(w.cell_of(1.0), 2);
        assert_eq!(w.eval_layer(s(&[1]), 0.1, 0.5).unwrap(), 1.0);
        assert!(matches!(w.eval_layer(Subset::EMPTY, 0.1, 0.5), Err(Error::UnknownSubset { .. })));
        assert!(w.eval_layer(Subset(4), 0.1, 0.5).is_err());
    }

    #[test]
    fn refine_and_resample() {
        let w = StepMultiplexon::empirical(&triangle_and_star());
        let fine = w.refine(&equipartition(6)).unwrap();
        assert_eq!(fine.k(), 6);
        assert_eq!(fine.value(s(&[1]), 0, 2), 1.0);
        assert_eq!(fine.value(s(&[1]), 0, 1), 0.0);
        assert!(w.refine(&equipartition(4)).is_err());
        let back = fine.resample_equipartition(3).unwrap();
        for t in Subset::nonempty(2) {
            for (a, b) in back.layer(t).iter().zip(w.layer(t)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let coarse = w.resample_equipartition(1).unwrap();
        assert!((coarse.value(s(&[1]), 0, 0) - 6.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let mut m = BTreeMap::new();
        m.insert(Subset(1), vec![vec![0.2, 0.3], vec![0.4, 0.2]]);
        assert!(StepMultiplexon::new(1, Mode::Cumulative, equipartition(2), m.clone()).is_err());
        m.insert(Subset(1), vec![vec![0.2, 1.3], vec![1.3, 0.2]]);
        assert!(StepMultiplexon::new(1, Mode::Cumulative, equipartition(2), m.clone()).is_err());
        m.insert(Subset(1), vec![vec![0.2, 0.3], vec![0.3, 0.2]]);
        assert!(StepMultiplexon::new(1, Mode::Cumulative, vec![0.0, 0.7, 0.7, 1.0], m.clone()).is_err());
        assert!(StepMultiplexon::new(1, Mode::Cumulative, equipartition(2), m).is_ok());
    }

    /// Random decomposable cumulative step multiplexon built from random disjoint probability vectors.
    pub(crate) fn arb_decomposable(max_r: usize, max_k: usize) -> impl Strategy<Value = StepMultiplexon> {
        (1..=max_r, 1..=max_k).prop_flat_map(|(r, k)| {
            let size = 1usize << r;
            proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, size), k * (k + 1) / 2).prop_map(
                move |cells| {
                    let mut layers = vec![vec![0.0; k * k]; size];
                    let mut it = cells.into_iter();
                    for a in 0..k {
                        for b in a..k {
                            let raw = it.next().unwrap();
                            let total: f64 = raw.iter().sum::<f64>().max(1e-9);
                            for (t, v) in raw.iter().enumerate() {
                                layers[t][a * k + b] = v / total;
                                layers[t][b * k + a] = v / total;
                            }
                        }
                    }
                    let d = StepMultiplexon::from_flat(r, Mode::Disjoint, equipartition(k), layers).unwrap();
                    d.to_mode(Mode::Cumulative, EPS).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn moebius_round_trip(w in arb_decomposable(3, 5)) {
            let d = w.to_mode(Mode::Disjoint, EPS).unwrap();
            let back = d.to_mode(Mode::Cumulative, EPS).unwrap();
            for t in Subset::nonempty(w.r()) {
                for (a, b) in back.layer(t).iter().zip(w.layer(t)) {
                    prop_assert!((a - b).abs() <= EPS);
                }
            }
            let k = w.k();
            for c in 0..k * k {
                let sum: f64 = Subset::all(w.r()).map(|t| d.layer(t)[c]).sum();
                prop_assert!((sum - 1.0).abs() <= EPS);
            }
        }

        #[test]
        fn cumulative_layers_are_antitone(w in arb_decomposable(3, 4)) {
            for s1 in Subset::nonempty(w.r()) {
                for s2 in Subset::nonempty(w.r()) {
                    if s1.is_subset_of(s2) {
                        for (big, small) in w.layer(s1).iter().zip(w.layer(s2)) {
                            prop_assert!(*small <= big + EPS);
                        }
                    }
                }
            }
        }

        #[test]
        fn empirical_is_always_exactly_decomposable(
            n in 1usize..7,
            masks in proptest::collection::vec(0u8..8, 21),
        ) {
            let mut rows = Vec::new();
            let mut it = masks.into_iter();
            for i in 0..n {
                rows.push((i + 1..n).map(|_| it.next().unwrap()).collect());
            }
            let g = Multiplex::from_upper_rows(n, 3, rows).unwrap();
            prop_assert!(StepMultiplexon::empirical(&g).check_decomposable(0.0).decomposable);
        }
    }
}
