//! Random multiplex generators and their limit multiplexons.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplex::{check_layer_count, Mode, Multiplex};
use crate::multiplexon::{moebius, AnalyticMultiplexon, Multiplexon, StepMultiplexon, DEFAULT_TOLERANCE};
use crate::rng::{self, tag};

/// Longest Markov horizon for which the limit is enumerated.
pub const MAX_DYNAMIC_HORIZON: usize = 16;

/// A model family with its parameters, as stored in descriptor files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "lowercase")]
pub enum Model {
    /// Constant multiplexon; `probs` lists the nonempty subsets in bitmask order.
    Er {
        r: usize,
        #[serde(default = "cumulative")]
        mode: Mode,
        probs: Vec<f64>,
    },
    /// Block model; `table[a][b]` holds the disjoint probabilities of all `2^r`
    /// subsets (bitmask order, empty set first) for blocks `a`, `b`.
    Csbm { r: usize, q: Vec<f64>, table: Vec<Vec<Vec<f64>>> },
    Threshold { a: f64, b: f64 },
    Ua {},
    Dynamic(DynamicParams),
    Wrandom { multiplexon: StepMultiplexon },
}

fn cumulative() -> Mode {
    Mode::Cumulative
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    #[serde(flatten)]
    pub model: Model,
    pub seed: u64,
    /// Default vertex count for one-off sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

/// Markov edge process: the initial edge probability, the hold probabilities of
/// the absent and present states, and the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicParams {
    pub p: f64,
    pub q0: f64,
    pub q1: f64,
    #[serde(rename = "T")]
    pub t: usize,
}

impl DynamicParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q0", self.q0), ("q1", self.q1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0,1]")));
            }
        }
        if self.t > MAX_DYNAMIC_HORIZON {
            return Err(Error::InvalidParameter(format!("horizon {} exceeds {MAX_DYNAMIC_HORIZON}", self.t)));
        }
        Ok(())
    }

    /// `P(X_{t+1} = 1 | X_t = state)`.
    fn up(&self, state: bool) -> f64 {
        if state {
            self.q1
        } else {
            1.0 - self.q0
        }
    }
}

/// A sampled multiplex with the randomness needed to audit it.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub multiplex: Multiplex,
    pub latents: Option<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
    pub seed: u64,
    pub descriptor: Option<ModelDescriptor>,
}

impl SampleRecord {
    fn bare(multiplex: Multiplex, seed: u64) -> Self {
        SampleRecord { multiplex, latents: None, labels: None, seed, descriptor: None }
    }
}

/// Draws the subset whose cumulative probability first exceeds `u`.
fn categorical(probs: &[f64], u: f64) -> u8 {
    let mut acc = 0.0;
    let mut last = 0;
    for (s, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = s;
            if u < acc {
                return s as u8;
            }
        }
    }
    last as u8
}

fn sample_rows(n: usize, r: usize, seed: u64, pair: impl Fn(usize, usize, &mut [f64]) -> Result<()> + Sync) -> Result<Multiplex> {
    let rows: Result<Vec<Vec<u8>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, tag::PAIRS, i as u64);
            let mut probs = vec![0.0; 1 << r];
            (i + 1..n)
                .map(|j| {
                    pair(i, j, &mut probs)?;
                    Ok(categorical(&probs, rng::uniform(&mut rng)))
                })
                .collect()
        })
        .collect();
    Multiplex::from_upper_rows(n, r, rows?)
}

fn check_probabilities(probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|&&p| p < -DEFAULT_TOLERANCE) {
        return Err(Error::NotDecomposable(format!("negative subset probability {p}")));
    }
    Ok(())
}

/// Samples `G(n, W)`: latent uniforms, then one categorical subset per pair.
pub fn sample_w_random<W: Multiplexon + ?Sized>(n: usize, w: &W, seed: u64) -> Result<SampleRecord> {
    if n == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let r = w.r();
    let mut lat_rng = rng::stream(seed, tag::LATENTS, 0);
    let eta: Vec<f64> = (0..n).map(|_| rng::uniform(&mut lat_rng)).collect();
    let g = sample_rows(n, r, seed, |i, j, probs| {
        w.disjoint_at(eta[i], eta[j], probs);
        check_probabilities(probs)
    })?;
    Ok(SampleRecord { latents: Some(eta), ..SampleRecord::bare(g, seed) })
}

/// Samples from a step multiplexon, checking decomposability up front.
pub fn sample_step(n: usize, w: &StepMultiplexon, seed: u64) -> Result<SampleRecord> {
    let rep = w.check_decomposable(DEFAULT_TOLERANCE);
    if !rep.decomposable {
        return Err(Error::NotDecomposable(format!("violation {:.3e}", rep.worst_violation)));
    }
    sample_w_random(n, w, seed)
}

/// Constant multiplexon for Erdős–Rényi parameters given in either decomposition.
pub fn er_limit(r: usize, probs: &[f64], mode: Mode) -> Result<AnalyticMultiplexon> {
    match mode {
        Mode::Cumulative => AnalyticMultiplexon::constant(r, probs),
        Mode::Disjoint => AnalyticMultiplexon::constant_disjoint(r, probs),
    }
}

pub fn er_multiplex(n: usize, r: usize, probs: &[f64], mode: Mode, seed: u64) -> Result<SampleRecord> {
    let w = er_limit(r, probs, mode)?;
    let rec = sample_w_random(n, &w, seed)?;
    Ok(SampleRecord { latents: None, ..rec })
}

fn check_csbm(r: usize, q: &[f64], table: &[Vec<Vec<f64>>]) -> Result<()> {
    check_layer_count(r)?;
    let k = q.len();
    if k == 0 || q.iter().any(|&x| x <= 0.0) || (q.iter().sum::<f64>() - 1.0).abs() > DEFAULT_TOLERANCE {
        return Err(Error::InvalidParameter("q must be a probability vector with positive entries".into()));
    }
    if table.len() != k || table.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidParameter(format!("table must be {k}x{k}")));
    }
    for a in 0..k {
        for b in 0..k {
            let cell = &table[a][b];
            if cell.len() != 1 << r {
                return Err(Error::InvalidParameter(format!("table cell ({a},{b}) needs {} entries", 1 << r)));
            }
            if cell.iter().any(|&p| p < 0.0) || (cell.iter().sum::<f64>() - 1.0).abs() > DEFAULT_TOLERANCE {
                return Err(Error::NotDecomposable(format!("table cell ({a},{b}) is not a probability vector")));
            }
            if cell.iter().zip(&table[b][a]).any(|(x, y)| (x - y).abs() > DEFAULT_TOLERANCE) {
                return Err(Error::InvalidParameter("table must be symmetric in the block pair".into()));
            }
        }
    }
    Ok(())
}

/// Cumulative step limit of a block model, on breaks at the partial sums of `q`.
pub fn csbm_limit(r: usize, q: &[f64], table: &[Vec<Vec<f64>>]) -> Result<StepMultiplexon> {
    check_csbm(r, q, table)?;
    let k = q.len();
    let mut breaks = vec![0.0];
    let mut acc = 0.0;
    for &x in &q[..k - 1] {
        acc += x;
        breaks.push(acc);
    }
    breaks.push(1.0);
    let mut layers = vec![vec![0.0; k * k]; 1 << r];
    for a in 0..k {
        for b in 0..k {
            for (s, l) in layers.iter_mut().enumerate() {
                l[a * k + b] = table[a][b][s];
            }
        }
    }
    StepMultiplexon::from_flat(r, Mode::Disjoint, breaks, layers)?.to_mode(Mode::Cumulative, DEFAULT_TOLERANCE)
}

fn block_of(q: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (a, &x) in q.iter().enumerate() {
        acc += x;
        if u < acc {
            return a;
        }
    }
    q.len() - 1
}

pub fn csbm(n: usize, r: usize, q: &[f64], table: &[Vec<Vec<f64>>], seed: u64) -> Result<SampleRecord> {
    check_csbm(r, q, table)?;
    if n == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let mut lab_rng = rng::stream(seed, tag::LABELS, 0);
    let labels: Vec<usize> = (0..n).map(|_| block_of(q, rng::uniform(&mut lab_rng))).collect();
    let g = sample_rows(n, r, seed, |i, j, probs| {
        probs.copy_from_slice(&table[labels[i]][labels[j]]);
        Ok(())
    })?;
    Ok(SampleRecord { labels: Some(labels), ..SampleRecord::bare(g, seed) })
}

/// Deterministic two-layer threshold multiplex on labels `1..=n`:
/// `{i, j}` is in layer 1 iff `i + j ≤ ⌈a n⌉` (layer 2 likewise with `b`).
pub fn threshold_multiplex(n: usize, a: f64, b: f64) -> Result<Multiplex> {
    AnalyticMultiplexon::threshold(a, b)?;
    let ca = (a * n as f64).ceil() as usize;
    let cb = (b * n as f64).ceil() as usize;
    let rows = (1..=n)
        .map(|i| {
            (i + 1..=n)
                .map(|j| (u8::from(i + j <= ca)) | (u8::from(i + j <= cb) << 1))
                .collect()
        })
        .collect();
    Multiplex::from_upper_rows(n, 2, rows)
}

pub fn threshold_limit(a: f64, b: f64) -> Result<AnalyticMultiplexon> {
    AnalyticMultiplexon::threshold(a, b)
}

/// Two-layer uniform attachment on vertices `0..n`.
///
/// At step `m` (`2 ≤ m ≤ n`) vertex `m - 1` arrives; every pair absent from
/// layer 1 joins it with probability `1/m`, then every layer-1 pair absent from
/// layer 2 joins layer 2 with probability `1/m`.
pub fn uniform_attachment(n: usize, seed: u64) -> Result<SampleRecord> {
    Multiplex::empty(n, 2)?;
    let mut rng = rng::stream(seed, tag::ATTACHMENT, 0);
    // upper-triangular multilinks, row-major over i < j
    let mut links = vec![vec![0u8; n]; n];
    for m in 2..=n {
        let p = 1.0 / m as f64;
        for j in 1..m {
            for i in 0..j {
                if links[i][j] & 1 == 0 && rng::uniform(&mut rng) < p {
                    links[i][j] |= 1;
                }
            }
        }
        for j in 1..m {
            for i in 0..j {
                if links[i][j] == 1 && rng::uniform(&mut rng) < p {
                    links[i][j] |= 2;
                }
            }
        }
    }
    let rows = (0..n).map(|i| links[i][i + 1..].to_vec()).collect();
    Ok(SampleRecord::bare(Multiplex::from_upper_rows(n, 2, rows)?, seed))
}

pub fn ua_limit() -> AnalyticMultiplexon {
    AnalyticMultiplexon::UniformAttachment
}

/// Snapshots `0..=T` of independent two-state edge chains, as layers `1..=T+1`.
pub fn dynamic_markov(n: usize, params: DynamicParams, seed: u64) -> Result<SampleRecord> {
    params.validate()?;
    let r = params.t + 1;
    check_layer_count(r)?;
    if n == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let rows: Vec<Vec<u8>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, tag::MARKOV, i as u64);
            (i + 1..n)
                .map(|_| {
                    let mut state = rng::uniform(&mut rng) < params.p;
                    let mut mask = u8::from(state);
                    for t in 1..=params.t {
                        state = rng::uniform(&mut rng) < params.up(state);
                        mask |= u8::from(state) << t;
                    }
                    mask
                })
                .collect()
        })
        .collect();
    Ok(SampleRecord::bare(Multiplex::from_upper_rows(n, r, rows)?, seed))
}

/// `W̄_S = P(X_s = 1 for all s ∈ S)` for every `S ⊆ {0..T}` (bit `s` for time `s`),
/// by enumerating all `2^{T+1}` paths.
pub fn dynamic_cumulative(params: &DynamicParams) -> Result<Vec<f64>> {
    params.validate()?;
    let len = params.t + 1;
    let mut v = vec![0.0; 1 << len];
    for (path, slot) in v.iter_mut().enumerate() {
        let bit = |t: usize| path >> t & 1 == 1;
        let mut prob = if bit(0) { params.p } else { 1.0 - params.p };
        for t in 1..len {
            let up = params.up(bit(t - 1));
            prob *= if bit(t) { up } else { 1.0 - up };
        }
        *slot = prob;
    }
    moebius::superset_sums(&mut v, len);
    v[0] = 1.0;
    Ok(v)
}

pub fn dynamic_limit(params: DynamicParams) -> Result<AnalyticMultiplexon> {
    AnalyticMultiplexon::dynamic(params)
}

impl Model {
    pub fn r(&self) -> usize {
        match self {
            Model::Er { r, .. } | Model::Csbm { r, .. } => *r,
            Model::Threshold { .. } | Model::Ua {} => 2,
            Model::Dynamic(p) => p.t + 1,
            Model::Wrandom { multiplexon } => multiplexon.r(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Er { .. } => "er",
            Model::Csbm { .. } => "csbm",
            Model::Threshold { .. } => "threshold",
            Model::Ua {} => "ua",
            Model::Dynamic(_) => "dynamic",
            Model::Wrandom { .. } => "wrandom",
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleRecord> {
        match self {
            Model::Er { r, mode, probs } => er_multiplex(n, *r, probs, *mode, seed),
            Model::Csbm { r, q, table } => csbm(n, *r, q, table, seed),
            Model::Threshold { a, b } => Ok(SampleRecord::bare(threshold_multiplex(n, *a, *b)?, seed)),
            Model::Ua {} => uniform_attachment(n, seed),
            Model::Dynamic(p) => dynamic_markov(n, *p, seed),
            Model::Wrandom { multiplexon } => sample_step(n, multiplexon, seed),
        }
    }

    pub fn limit(&self) -> Result<AnalyticMultiplexon> {
        match self {
            Model::Er { r, mode, probs } => er_limit(*r, probs, *mode),
            Model::Csbm { r, q, table } => Ok(AnalyticMultiplexon::Step(csbm_limit(*r, q, table)?)),
            Model::Threshold { a, b } => threshold_limit(*a, *b),
            Model::Ua {} => Ok(ua_limit()),
            Model::Dynamic(p) => dynamic_limit(*p),
            Model::Wrandom { multiplexon } => {
                Ok(AnalyticMultiplexon::Step(multiplexon.to_mode(Mode::Cumulative, DEFAULT_TOLERANCE)?))
            }
        }
    }
}

impl ModelDescriptor {
    pub fn sample(&self, n: usize) -> Result<SampleRecord> {
        let rec = self.model.sample(n, self.seed)?;
        Ok(SampleRecord { descriptor: Some(self.clone()), ..rec })
    }
}

/// Fraction of upper pairs whose multilink equals each subset (bitmask order).
pub fn subset_frequencies(g: &Multiplex) -> Vec<f64> {
    let n = g.n();
    let mut counts = vec![0usize; 1 << g.r()];
    for i in 0..n {
        for j in i + 1..n {
            counts[g.link(i, j).index()] += 1;
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
    counts.into_iter().map(|c| c as f64 / pairs).collect()
}

/// Draws `m` distinct indices from `0..n` (via a seeded partial shuffle).
pub fn subsample_indices(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, tag::SUBSAMPLE, 0);
    let mut idx: Vec<usize> = (0..n).collect();
    let m = m.min(n);
    for i in 0..m {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(m);
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::Subset;

    fn four_sigma(p: f64, trials: f64) -> f64 {
        4.0 * (p * (1.0 - p) / trials).sqrt()
    }

    #[test]
    fn w_random_subset_frequencies() {
        let w = AnalyticMultiplexon::constant_disjoint(2, &[0.25, 0.25, 0.25]).unwrap();
        let n = 2000;
        let rec = sample_w_random(n, &w, 42).unwrap();
        let pairs = (n * (n - 1) / 2) as f64;
        for f in subset_frequencies(&rec.multiplex) {
            assert!((f - 0.25).abs() <= four_sigma(0.25, pairs), "{f}");
        }
        assert_eq!(rec.latents.as_ref().unwrap().len(), n);
        assert_eq!(rec, sample_w_random(n, &w, 42).unwrap());
    }

    #[test]
    fn empty_set_mass_one_gives_empty_multiplex() {
        let w = AnalyticMultiplexon::constant_disjoint(2, &[0.0, 0.0, 0.0]).unwrap();
        let rec = sample_w_random(50, &w, 1).unwrap();
        assert_eq!(rec.multiplex, Multiplex::empty(50, 2).unwrap());
    }

    #[test]
    fn perfect_coupling_duplicates_layers() {
        let rec = er_multiplex(60, 2, &[0.4, 0.4, 0.4], Mode::Cumulative, 3).unwrap();
        let g = rec.multiplex;
        assert_eq!(g.layer_edges(1), g.layer_edges(2));
        assert!(!g.layer_edges(1).is_empty());
        assert!(rec.latents.is_none());
    }

    #[test]
    fn product_coupling_is_uncorrelated() {
        let (p1, p2) = (0.4, 0.7);
        let g = er_multiplex(600, 2, &[p1, p2, p1 * p2], Mode::Cumulative, 8).unwrap().multiplex;
        let f = subset_frequencies(&g);
        let (m1, m2, m12) = (f[1] + f[3], f[2] + f[3], f[3]);
        let corr = (m12 - m1 * m2) / (m1 * (1.0 - m1) * m2 * (1.0 - m2)).sqrt();
        let pairs = (600.0 * 599.0 / 2.0) as f64;
        assert!(corr.abs() < 4.0 / pairs.sqrt(), "{corr}");
    }

    #[test]
    fn invalid_er_parameters() {
        assert!(er_multiplex(10, 2, &[0.1, 0.1, 0.5], Mode::Cumulative, 0).is_err());
        assert!(er_multiplex(10, 2, &[0.5, 0.5, 0.5], Mode::Disjoint, 0).is_err());
        assert!(er_multiplex(10, 2, &[0.5, 0.5], Mode::Cumulative, 0).is_err());
    }

    fn two_block_table(within: f64) -> Vec<Vec<Vec<f64>>> {
        let cell = |p: f64| vec![1.0 - p, 0.0, 0.0, p];
        vec![vec![cell(within), cell(0.0)], vec![cell(0.0), cell(within)]]
    }

    #[test]
    fn csbm_limit_is_block_diagonal() {
        let w = csbm_limit(2, &[0.5, 0.5], &two_block_table(0.3)).unwrap();
        assert_eq!(w.breaks(), &[0.0, 0.5, 1.0]);
        assert_eq!(w.layer(Subset(3)), &[0.3, 0.0, 0.0, 0.3]);
        assert_eq!(w.layer(Subset(1)), &[0.3, 0.0, 0.0, 0.3]);
    }

    #[test]
    fn csbm_within_block_frequency() {
        let n = 2000;
        let rec = csbm(n, 2, &[0.5, 0.5], &two_block_table(0.3), 9).unwrap();
        let labels = rec.labels.unwrap();
        let (mut hits, mut total) = (0usize, 0usize);
        for i in 0..n {
            for j in i + 1..n {
                if labels[i] == labels[j] {
                    total += 1;
                    hits += usize::from(rec.multiplex.link(i, j) == Subset(3));
                } else {
                    assert!(rec.multiplex.link(i, j).is_empty());
                }
            }
        }
        let f = hits as f64 / total as f64;
        assert!((f - 0.3).abs() <= four_sigma(0.3, total as f64));
    }

    #[test]
    fn single_block_csbm_is_erdos_renyi() {
        let table = vec![vec![vec![0.25, 0.25, 0.25, 0.25]]];
        let w = csbm_limit(2, &[1.0], &table).unwrap();
        let er = er_limit(2, &[0.25, 0.25, 0.25], Mode::Disjoint).unwrap().as_step().unwrap();
        assert_eq!(w, er);
        assert!(csbm_limit(2, &[0.5, 0.5], &[vec![vec![0.5, 0.5, 0.5, 0.5]]]).is_err());
        assert!(csbm_limit(2, &[1.0, 0.0], &two_block_table(0.3)).is_err());
    }

    #[test]
    fn threshold_rules() {
        let g = threshold_multiplex(3, 1.0, 1.0).unwrap();
        assert_eq!(g.layer_edges(1), vec![(0, 1)]);
        assert_eq!(g.layer_edges(2), vec![(0, 1)]);
        for n in [1, 5, 40] {
            assert!(threshold_multiplex(n, 0.0, 0.5).unwrap().layer_edges(1).is_empty());
        }
    }

    #[test]
    fn dynamic_limit_values() {
        let p = DynamicParams { p: 0.3, q0: 0.6, q1: 0.8, t: 3 };
        let v = dynamic_cumulative(&p).unwrap();
        assert!((v[1] - 0.3).abs() < 1e-15);
        let one = dynamic_cumulative(&DynamicParams { p: 1.0, q0: 0.2, q1: 1.0, t: 4 }).unwrap();
        assert!(one.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let half = dynamic_cumulative(&DynamicParams { p: 0.5, q0: 0.5, q1: 0.5, t: 1 }).unwrap();
        assert!((half[3] - 0.25).abs() < 1e-15);
        assert!(DynamicParams { p: 1.5, q0: 0.0, q1: 0.0, t: 1 }.validate().is_err());
        assert!(dynamic_limit(DynamicParams { p: 0.5, q0: 0.5, q1: 0.5, t: 8 }).is_err());
        assert_eq!(dynamic_cumulative(&DynamicParams { p: 0.5, q0: 0.5, q1: 0.5, t: 16 }).unwrap().len(), 1 << 17);
    }

    #[test]
    fn dynamic_samples_match_layer_masses() {
        let p = DynamicParams { p: 0.4, q0: 0.7, q1: 0.6, t: 2 };
        let g = dynamic_markov(400, p, 4).unwrap().multiplex;
        let lim = dynamic_cumulative(&p).unwrap();
        let pairs = 400.0 * 399.0 / 2.0;
        for s in 1..=3 {
            let f = g.edge_count(s) as f64 / pairs;
            let target = lim[1 << (s - 1)];
            assert!((f - target).abs() <= four_sigma(target, pairs));
        }
    }

    #[test]
    fn uniform_attachment_structure() {
        let rec = uniform_attachment(40, 5).unwrap();
        let g = &rec.multiplex;
        for (i, j) in g.layer_edges(2) {
            assert!(g.has_edge(1, i, j));
        }
        assert_eq!(rec, uniform_attachment(40, 5).unwrap());
        let single = uniform_attachment(1, 5).unwrap();
        assert_eq!(single.multiplex.n(), 1);
    }

    #[test]
    fn descriptors_round_trip() {
        let d = ModelDescriptor {
            model: Model::Er { r: 2, mode: Mode::Cumulative, probs: vec![0.5, 0.5, 0.25] },
            seed: 7,
            n: Some(20),
        };
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains("\"model\":\"er\""));
        assert_eq!(serde_json::from_str::<ModelDescriptor>(&text).unwrap(), d);
        let ua: ModelDescriptor = serde_json::from_str(r#"{"model":"ua","params":{},"seed":1}"#).unwrap();
        assert_eq!(ua.model, Model::Ua {});
        let dy: ModelDescriptor =
            serde_json::from_str(r#"{"model":"dynamic","params":{"p":0.5,"q0":0.7,"q1":0.6,"T":4},"seed":1}"#).unwrap();
        assert_eq!(dy.model.r(), 5);
        assert_eq!(d.sample(20).unwrap().multiplex, d.sample(20).unwrap().multiplex);
    }

    #[test]
    fn subsample_is_distinct_and_seeded() {
        let a = subsample_indices(100, 10, 3);
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a, subsample_indices(100, 10, 3));
        assert_eq!(subsample_indices(5, 10, 3), vec![0, 1, 2, 3, 4]);
    }
}
