//! Multiplex clustering coefficients counting triangles across two or three layers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplex::{Mode, Multiplex};
use crate::multiplexon::{AnalyticMultiplexon, Multiplexon, StepMultiplexon, QUADRATURE_NODES};
use crate::rng::{self, tag};
use crate::subset::Subset;

/// Default Monte Carlo sample count for analytic limits.
pub const DEFAULT_LIMIT_SAMPLES: u64 = 1 << 14;

const CHUNK: u64 = 1024;

/// Which layer indices of a triangle must differ for the three-layer coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distinctness {
    /// `s₁, s₂, s₃` pairwise distinct.
    #[default]
    Pairwise,
    /// Only consecutive indices differ: `s₁ ≠ s₂` and `s₂ ≠ s₃`.
    Chain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub variant: u8,
    pub distinctness: Distinctness,
    /// `θ(i)` per vertex.
    pub local: Vec<f64>,
    pub numerators: Vec<f64>,
    pub denominators: Vec<f64>,
    pub average: f64,
    /// `Σ numerators / Σ denominators`.
    pub global: f64,
    pub zero_denominators: usize,
}

impl ClusteringReport {
    /// One row per vertex followed by a `summary` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,theta,numerator,denominator\n");
        for (i, ((t, n), d)) in self.local.iter().zip(&self.numerators).zip(&self.denominators).enumerate() {
            out.push_str(&format!("{i},{t},{n},{d}\n"));
        }
        let num: f64 = self.numerators.iter().sum();
        let den: f64 = self.denominators.iter().sum();
        out.push_str(&format!("summary,{},{num},{den}\n", self.average));
        out.push_str(&format!("global,{},{num},{den}\n", self.global));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitClustering {
    pub variant: u8,
    pub distinctness: Distinctness,
    pub average: f64,
    pub global: f64,
    /// Zero for exact block sums.
    pub average_stderr: f64,
    pub global_stderr: f64,
    /// Monte Carlo sample count, 0 when exact.
    pub samples: u64,
}

fn check_variant(variant: u8, r: usize) -> Result<()> {
    let min = match variant {
        1 => 2,
        2 => 3,
        _ => return Err(Error::InvalidParameter(format!("clustering variant {variant} is not 1 or 2"))),
    };
    if r < min {
        return Err(Error::InvalidParameter(format!("variant {variant} needs at least {min} layers, got {r}")));
    }
    Ok(())
}

#[inline]
fn pc(x: u8) -> f64 {
    x.count_ones() as f64
}

/// Layer triples `(s₁, s₂, s₃)` with `s₁ ∈ A`, `s₂ ∈ B`, `s₃ ∈ C` allowed by the variant,
/// counted by inclusion–exclusion on the bitmasks.
#[inline]
fn triple_count(variant: u8, dist: Distinctness, a: u8, b: u8, c: u8) -> f64 {
    match (variant, dist) {
        // s₃ = s₁ ≠ s₂
        (1, _) => pc(a & c) * pc(b) - pc(a & b & c),
        (_, Distinctness::Pairwise) => {
            pc(a) * pc(b) * pc(c) - pc(a & b) * pc(c) - pc(a & c) * pc(b) - pc(b & c) * pc(a) + 2.0 * pc(a & b & c)
        }
        (_, Distinctness::Chain) => pc(a) * pc(b) * pc(c) - pc(a & b) * pc(c) - pc(b & c) * pc(a) + pc(a & b & c),
    }
}

/// Normalizer for a vertex with per-layer degrees `d`. `finite` selects `d(d−1)`
/// over `d²` in the same-layer terms.
fn normalizer(variant: u8, dist: Distinctness, d: &[f64], finite: bool) -> f64 {
    let r = d.len() as f64;
    let same: f64 = d.iter().map(|&x| if finite { x * (x - 1.0) } else { x * x }).sum();
    if variant == 1 {
        return (r - 1.0) * same;
    }
    let total: f64 = d.iter().sum();
    let squares: f64 = d.iter().map(|x| x * x).sum();
    let cross = total * total - squares;
    let base = (r - 2.0) * cross;
    match dist {
        Distinctness::Pairwise => base,
        Distinctness::Chain => base + (r - 1.0) * same,
    }
}

/// `θ⁽¹⁾` or `θ⁽²⁾` with pairwise-distinct layers for the three-layer case.
pub fn clustering(g: &Multiplex, variant: u8) -> Result<ClusteringReport> {
    clustering_with(g, variant, Distinctness::Pairwise)
}

pub fn clustering_with(g: &Multiplex, variant: u8, dist: Distinctness) -> Result<ClusteringReport> {
    let (n, r) = (g.n(), g.r());
    check_variant(variant, r)?;
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nbrs: Vec<(usize, u8)> = (0..n).filter(|&j| j != i).map(|j| (j, g.link(i, j).bits())).filter(|&(_, m)| m != 0).collect();
            let mut num = 0.0;
            for &(j, a) in &nbrs {
                for &(k, c) in &nbrs {
                    if k != j {
                        num += triple_count(variant, dist, a, g.link(j, k).bits(), c);
                    }
                }
            }
            let d: Vec<f64> = (1..=r).map(|s| nbrs.iter().filter(|&&(_, m)| m & (1 << (s - 1)) != 0).count() as f64).collect();
            (num, normalizer(variant, dist, &d, true))
        })
        .collect();
    let local: Vec<f64> = rows.iter().map(|&(a, b)| if b > 0.0 { a / b } else { 0.0 }).collect();
    let zero_denominators = rows.iter().filter(|r| r.1 <= 0.0).count();
    let num: f64 = rows.iter().map(|r| r.0).sum();
    let den: f64 = rows.iter().map(|r| r.1).sum();
    Ok(ClusteringReport {
        variant,
        distinctness: dist,
        average: local.iter().sum::<f64>() / n as f64,
        global: if den > 0.0 { num / den } else { 0.0 },
        numerators: rows.iter().map(|r| r.0).collect(),
        denominators: rows.iter().map(|r| r.1).collect(),
        local,
        zero_denominators,
    })
}

/// Allowed `(s₁, s₂, s₃)` as 0-based layer indices.
fn layer_triples(variant: u8, dist: Distinctness, r: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for s1 in 0..r {
        for s2 in 0..r {
            for s3 in 0..r {
                let ok = match (variant, dist) {
                    (1, _) => s3 == s1 && s1 != s2,
                    (_, Distinctness::Pairwise) => s1 != s2 && s2 != s3 && s1 != s3,
                    (_, Distinctness::Chain) => s1 != s2 && s2 != s3,
                };
                if ok {
                    out.push((s1, s2, s3));
                }
            }
        }
    }
    out
}

/// Exact limits of a cumulative step multiplexon by triple block sums.
pub fn limit_clustering_step(w: &StepMultiplexon, variant: u8, dist: Distinctness) -> Result<LimitClustering> {
    if w.mode() != Mode::Cumulative {
        return Err(Error::ModeMismatch("clustering limits need a cumulative multiplexon".into()));
    }
    let (r, k) = (w.r(), w.k());
    check_variant(variant, r)?;
    let widths = w.widths();
    let layers: Vec<&[f64]> = (1..=r).map(|s| w.layer(Subset::singleton(s))).collect();
    let triples = layer_triples(variant, dist, r);
    let rows: Vec<(f64, f64)> = (0..k)
        .into_par_iter()
        .map(|a| {
            let mut num = 0.0;
            // inner[s2][s3][b] = Σ_c W_{s2}(b,c) w_c W_{s3}(a,c)
            let mut inner = vec![vec![None::<Vec<f64>>; r]; r];
            for &(s1, s2, s3) in &triples {
                let v = inner[s2][s3].get_or_insert_with(|| {
                    (0..k)
                        .map(|b| (0..k).map(|c| layers[s2][b * k + c] * widths[c] * layers[s3][a * k + c]).sum())
                        .collect()
                });
                num += (0..k).map(|b| widths[b] * layers[s1][a * k + b] * v[b]).sum::<f64>();
            }
            let d: Vec<f64> = layers.iter().map(|l| (0..k).map(|b| widths[b] * l[a * k + b]).sum()).collect();
            (num, normalizer(variant, dist, &d, false))
        })
        .collect();
    let average = rows.iter().zip(&widths).map(|(&(n, d), w)| if d > 0.0 { w * n / d } else { 0.0 }).sum();
    let num: f64 = rows.iter().zip(&widths).map(|(r, w)| w * r.0).sum();
    let den: f64 = rows.iter().zip(&widths).map(|(r, w)| w * r.1).sum();
    Ok(LimitClustering {
        variant,
        distinctness: dist,
        average,
        global: if den > 0.0 { num / den } else { 0.0 },
        average_stderr: 0.0,
        global_stderr: 0.0,
        samples: 0,
    })
}

#[derive(Clone, Copy, Default)]
struct Sums {
    n: f64,
    f: f64,
    g: f64,
    d: f64,
    gg: f64,
    ff: f64,
    dd: f64,
    fd: f64,
}

impl Sums {
    fn add(self, o: Sums) -> Sums {
        Sums {
            n: self.n + o.n,
            f: self.f + o.f,
            g: self.g + o.g,
            d: self.d + o.d,
            gg: self.gg + o.gg,
            ff: self.ff + o.ff,
            dd: self.dd + o.dd,
            fd: self.fd + o.fd,
        }
    }
}

/// Limits of a multiplexon: exact for piecewise-constant families, otherwise
/// Monte Carlo over `(x, y, z)` with degrees by midpoint quadrature.
pub fn limit_clustering(w: &AnalyticMultiplexon, variant: u8, dist: Distinctness, samples: u64, seed: u64) -> Result<LimitClustering> {
    if let Some(step) = w.as_step() {
        return limit_clustering_step(&step, variant, dist);
    }
    let r = w.r();
    check_variant(variant, r)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let triples = layer_triples(variant, dist, r);
    let h = 1.0 / QUADRATURE_NODES as f64;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, tag::MONTE_CARLO, c);
            let len = (samples - c * CHUNK).min(CHUNK);
            let mut acc = Sums::default();
            for _ in 0..len {
                let (x, y, z) = (rng::uniform(&mut rng), rng::uniform(&mut rng), rng::uniform(&mut rng));
                let f: f64 = triples
                    .iter()
                    .map(|&(s1, s2, s3)| {
                        w.cumulative_at(Subset::singleton(s1 + 1), x, y)
                            * w.cumulative_at(Subset::singleton(s2 + 1), y, z)
                            * w.cumulative_at(Subset::singleton(s3 + 1), x, z)
                    })
                    .sum();
                let d: Vec<f64> = (1..=r)
                    .map(|s| (0..QUADRATURE_NODES).map(|j| w.cumulative_at(Subset::singleton(s), x, (j as f64 + 0.5) * h)).sum::<f64>() * h)
                    .collect();
                let den = normalizer(variant, dist, &d, false);
                let g = if den > 0.0 { f / den } else { 0.0 };
                acc = acc.add(Sums { n: 1.0, f, g, d: den, gg: g * g, ff: f * f, dd: den * den, fd: f * den });
            }
            acc
        })
        .collect();
    let s = parts.into_iter().fold(Sums::default(), Sums::add);
    let n = s.n;
    let mean_g = s.g / n;
    let var_g = ((s.gg / n - mean_g * mean_g) * n / (n - 1.0).max(1.0)).max(0.0);
    let (mf, md) = (s.f / n, s.d / n);
    let global = if md > 0.0 { mf / md } else { 0.0 };
    // delta method for the ratio of means
    let var_resid = (s.ff / n - 2.0 * global * s.fd / n + global * global * s.dd / n - (mf - global * md).powi(2)).max(0.0);
    let global_stderr = if md > 0.0 { (var_resid / n).sqrt() / md } else { 0.0 };
    Ok(LimitClustering {
        variant,
        distinctness: dist,
        average: mean_g,
        global,
        average_stderr: (var_g / n).sqrt(),
        global_stderr,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::er_multiplex;
    use proptest::prelude::*;

    fn complete(n: usize, r: usize) -> Multiplex {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Multiplex::new(n, r, &vec![edges; r]).unwrap()
    }

    /// Literal quadruple/quintuple sums over layer tuples and vertex pairs.
    fn oracle(g: &Multiplex, variant: u8, dist: Distinctness) -> Vec<(f64, f64)> {
        let (n, r) = (g.n(), g.r());
        let a = |s: usize, i: usize, j: usize| if g.has_edge(s, i, j) { 1.0 } else { 0.0 };
        (0..n)
            .map(|i| {
                let mut num = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        if j == k || j == i || k == i {
                            continue;
                        }
                        for s1 in 1..=r {
                            for s2 in 1..=r {
                                if variant == 1 {
                                    if s1 != s2 {
                                        num += a(s1, i, j) * a(s2, j, k) * a(s1, k, i);
                                    }
                                    continue;
                                }
                                for s3 in 1..=r {
                                    let ok = s1 != s2 && s2 != s3 && (dist == Distinctness::Chain || s1 != s3);
                                    if ok {
                                        num += a(s1, i, j) * a(s2, j, k) * a(s3, k, i);
                                    }
                                }
                            }
                        }
                    }
                }
                let deg = |s: usize| (0..n).filter(|&j| g.has_edge(s, i, j)).count() as f64;
                let mut den = 0.0;
                for s1 in 1..=r {
                    if variant == 1 || dist == Distinctness::Chain {
                        den += (r as f64 - 1.0) * deg(s1) * (deg(s1) - 1.0);
                    }
                    if variant == 2 {
                        for s3 in 1..=r {
                            if s3 != s1 {
                                den += (r as f64 - 2.0) * deg(s1) * deg(s3);
                            }
                        }
                    }
                }
                (num, den)
            })
            .collect()
    }

    #[test]
    fn double_complete_k4() {
        let rep = clustering(&complete(4, 2), 1).unwrap();
        assert_eq!(rep.local, vec![1.0; 4]);
        assert_eq!(rep.numerators, vec![12.0; 4]);
        assert_eq!(rep.denominators, vec![12.0; 4]);
        assert_eq!(rep.global, 1.0);
        let rep = clustering(&complete(5, 3), 2).unwrap();
        assert!(rep.local.iter().all(|&t| t <= 1.0 && t > 0.0));
    }

    #[test]
    fn isolated_vertex_is_zero() {
        let g = Multiplex::new(4, 2, &[vec![(0, 1), (1, 2), (0, 2)], vec![(0, 1), (1, 2)]]).unwrap();
        let rep = clustering(&g, 1).unwrap();
        assert_eq!(rep.local[3], 0.0);
        assert_eq!(rep.zero_denominators, 1);
    }

    #[test]
    fn variant_requirements() {
        let g = complete(4, 2);
        assert!(clustering(&g, 2).is_err());
        assert!(clustering(&complete(4, 1), 1).is_err());
        assert!(clustering(&g, 3).is_err());
    }

    #[test]
    fn edge_disjoint_layers_count_cross_triangles() {
        // triangle 0-1-2 with edges split across the two layers
        let g = Multiplex::new(3, 2, &[vec![(0, 1), (0, 2)], vec![(1, 2)]]).unwrap();
        let rep = clustering(&g, 1).unwrap();
        let o = oracle(&g, 1, Distinctness::Pairwise);
        assert_eq!(rep.numerators[0], 2.0);
        assert_eq!(rep.numerators, o.iter().map(|x| x.0).collect::<Vec<_>>());
    }

    #[test]
    fn limits_of_constants() {
        let (p1, p2) = (0.6, 0.3);
        let w = AnalyticMultiplexon::constant(2, &[p1, p2, 0.2]).unwrap();
        let l = limit_clustering(&w, 1, Distinctness::Pairwise, 10, 0).unwrap();
        let expected = (p1 * p1 * p2 + p2 * p2 * p1) / (p1 * p1 + p2 * p2);
        assert!((l.global - expected).abs() < 1e-12);
        assert!((l.average - expected).abs() < 1e-12);
        assert_eq!(l.samples, 0);
        let ones = AnalyticMultiplexon::constant(3, &[1.0; 7]).unwrap();
        for (v, d) in [(1, Distinctness::Pairwise), (2, Distinctness::Pairwise), (2, Distinctness::Chain)] {
            let l = limit_clustering(&ones, v, d, 10, 0).unwrap();
            assert!((l.global - 1.0).abs() < 1e-12 && (l.average - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_matches_step_limit() {
        // the threshold pair has no exact step form; compare against a fine discretization
        let w = AnalyticMultiplexon::threshold(0.9, 0.7).unwrap();
        let mc = limit_clustering(&w, 1, Distinctness::Pairwise, 1 << 13, 5).unwrap();
        let fine = crate::multiplexon::discretize(&w, 96, 8).unwrap();
        let exact = limit_clustering_step(&fine, 1, Distinctness::Pairwise).unwrap();
        assert!((mc.global - exact.global).abs() < 4.0 * mc.global_stderr + 0.02, "{mc:?} {exact:?}");
        assert!((mc.average - exact.average).abs() < 4.0 * mc.average_stderr + 0.02, "{mc:?} {exact:?}");
        let again = limit_clustering(&w, 1, Distinctness::Pairwise, 1 << 13, 5).unwrap();
        assert_eq!(mc, again);
    }

    #[test]
    fn simulated_er_approaches_limit() {
        let probs = [0.5, 0.4, 0.25];
        let g = er_multiplex(300, 2, &probs, Mode::Cumulative, 17).unwrap().multiplex;
        let rep = clustering(&g, 1).unwrap();
        let w = AnalyticMultiplexon::constant(2, &probs).unwrap();
        let l = limit_clustering(&w, 1, Distinctness::Pairwise, 1, 0).unwrap();
        assert!((rep.global - l.global).abs() < 0.02, "{} {}", rep.global, l.global);
    }

    fn arb_multiplex(r: usize) -> impl Strategy<Value = Multiplex> {
        (3usize..8).prop_flat_map(move |n| {
            proptest::collection::vec(0u8..(1u8 << r), n * (n - 1) / 2).prop_map(move |codes| {
                let mut layers = vec![Vec::new(); r];
                let mut it = codes.into_iter();
                for i in 0..n {
                    for j in i + 1..n {
                        let m = it.next().unwrap();
                        for (s, layer) in layers.iter_mut().enumerate() {
                            if m & (1 << s) != 0 {
                                layer.push((i, j));
                            }
                        }
                    }
                }
                Multiplex::new(n, r, &layers).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn matches_oracle_and_bounds(g in arb_multiplex(3)) {
            for (v, d) in [(1, Distinctness::Pairwise), (2, Distinctness::Pairwise), (2, Distinctness::Chain)] {
                let rep = clustering_with(&g, v, d).unwrap();
                let o = oracle(&g, v, d);
                for (i, &(num, den)) in o.iter().enumerate() {
                    prop_assert_eq!(rep.numerators[i], num);
                    prop_assert_eq!(rep.denominators[i], den);
                }
                prop_assert!(rep.local.iter().all(|t| (0.0..=1.0).contains(t)));
                prop_assert!((0.0..=1.0).contains(&rep.global));
                let (num, den): (f64, f64) = (o.iter().map(|x| x.0).sum(), o.iter().map(|x| x.1).sum());
                let recomputed = if den > 0.0 { num / den } else { 0.0 };
                prop_assert!((rep.global - recomputed).abs() < 1e-12);
            }
        }

        #[test]
        fn relabeling_permutes_local_values(g in arb_multiplex(2), seed in any::<u64>()) {
            let n = g.n();
            let mut rng = rng::stream(seed, 0, 0);
            let mut shuffled: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                shuffled.swap(i, (rand::RngCore::next_u64(&mut rng) % (i as u64 + 1)) as usize);
            }
            let h = g.relabel(&shuffled).unwrap();
            let (a, b) = (clustering(&g, 1).unwrap(), clustering(&h, 1).unwrap());
            for i in 0..n {
                prop_assert_eq!(a.local[i], b.local[shuffled[i]]);
            }
            prop_assert!((a.average - b.average).abs() < 1e-12);
            prop_assert_eq!(a.global, b.global);
        }
    }
}
