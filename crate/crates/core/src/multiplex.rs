//! Finite r-multiplexes and their disjoint/cumulative decompositions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_LAYERS};

/// Which of the two subset-indexed decompositions a layered object is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Layer `S` holds the pairs whose multilink is exactly `S`.
    Disjoint,
    /// Layer `S` holds the pairs present in every layer of `S`.
    Cumulative,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disjoint" => Ok(Mode::Disjoint),
            "cumulative" => Ok(Mode::Cumulative),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

/// An r-multiplex: `r` simple undirected graphs on the vertex set `0..n`.
///
/// Stored as a dense symmetric matrix of multilinks, so membership of a pair
/// in any layer is a single byte lookup. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplex {
    n: usize,
    r: usize,
    links: Vec<u8>,
}

pub(crate) fn check_layer_count(r: usize) -> Result<()> {
    if (1..=MAX_LAYERS).contains(&r) {
        Ok(())
    } else {
        Err(Error::LayerCount(r))
    }
}

impl Multiplex {
    /// Builds a multiplex from per-layer edge lists (layer `s` at index `s - 1`).
    ///
    /// Pair orientation and duplicates are irrelevant.
    pub fn new(n: usize, r: usize, layer_edges: &[Vec<(usize, usize)>]) -> Result<Self> {
        check_layer_count(r)?;
        if layer_edges.len() != r {
            return Err(Error::LayerMismatch { expected: r, got: layer_edges.len() });
        }
        let mut g = Multiplex::empty(n, r)?;
        for (l, edges) in layer_edges.iter().enumerate() {
            for &(i, j) in edges {
                for v in [i, j] {
                    if v >= n {
                        return Err(Error::VertexOutOfRange { layer: l + 1, vertex: v, n });
                    }
                }
                if i == j {
                    return Err(Error::SelfLoop { layer: l + 1, vertex: i });
                }
                g.links[i * n + j] |= 1 << l;
                g.links[j * n + i] |= 1 << l;
            }
        }
        Ok(g)
    }

    pub fn empty(n: usize, r: usize) -> Result<Self> {
        check_layer_count(r)?;
        if n == 0 {
            return Err(Error::EmptyVertexSet);
        }
        Ok(Multiplex { n, r, links: vec![0; n * n] })
    }

    /// Builds from the multilink of every pair `i < j`, given row by row.
    ///
    /// `rows[i]` lists the multilinks of `(i, i+1), ..., (i, n-1)`.
    pub(crate) fn from_upper_rows(n: usize, r: usize, rows: Vec<Vec<u8>>) -> Result<Self> {
        let mut g = Multiplex::empty(n, r)?;
        let mask = Subset::full(r).bits();
        for (i, row) in rows.into_iter().enumerate() {
            debug_assert_eq!(row.len(), n - i - 1);
            for (off, m) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                let m = m & mask;
                g.links[i * n + j] = m;
                g.links[j * n + i] = m;
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    /// Multilink of a pair without validation; `(i, i)` is always empty.
    #[inline]
    pub fn link(&self, i: usize, j: usize) -> Subset {
        Subset(self.links[i * self.n + j])
    }

    /// The set of layers containing the pair `{i, j}`.
    pub fn multilink(&self, i: usize, j: usize) -> Result<Subset> {
        for v in [i, j] {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { layer: 0, vertex: v, n: self.n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop { layer: 0, vertex: i });
        }
        Ok(self.link(i, j))
    }

    /// Whether `{i, j}` is an edge of layer `s` (1-indexed).
    #[inline]
    pub fn has_edge(&self, s: usize, i: usize, j: usize) -> bool {
        self.link(i, j).contains(s)
    }

    /// Canonical (`i < j`, sorted) edge list of layer `s` (1-indexed).
    pub fn layer_edges(&self, s: usize) -> Vec<(usize, usize)> {
        self.pairs_where(|m| m.contains(s))
    }

    pub fn edge_count(&self, s: usize) -> usize {
        self.layer_edges(s).len()
    }

    fn pairs_where(&self, pred: impl Fn(Subset) -> bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if pred(self.link(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Per-layer canonical edge lists, layer 1 first.
    pub fn all_layer_edges(&self) -> Vec<Vec<(usize, usize)>> {
        (1..=self.r).map(|s| self.layer_edges(s)).collect()
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter("permutation length differs from n".into()));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        let mut g = Multiplex::empty(self.n, self.r)?;
        for i in 0..self.n {
            for j in 0..self.n {
                g.links[perm[i] * self.n + perm[j]] = self.links[i * self.n + j];
            }
        }
        Ok(g)
    }

    pub fn decompose(&self, mode: Mode) -> DecomposedMultiplex {
        let mut layers: BTreeMap<Subset, Vec<(usize, usize)>> =
            Subset::nonempty(self.r).map(|s| (s, Vec::new())).collect();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let m = self.link(i, j);
                match mode {
                    Mode::Disjoint => {
                        if !m.is_empty() {
                            layers.get_mut(&m).unwrap().push((i, j));
                        }
                    }
                    Mode::Cumulative => {
                        for s in m.nonempty_subsets() {
                            layers.get_mut(&s).unwrap().push((i, j));
                        }
                    }
                }
            }
        }
        DecomposedMultiplex { n: self.n, r: self.r, mode, layers }
    }
}

/// A multiplex rewritten as `2^r - 1` graphs keyed by nonempty layer subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposedMultiplex {
    pub n: usize,
    pub r: usize,
    pub mode: Mode,
    pub layers: BTreeMap<Subset, Vec<(usize, usize)>>,
}

impl DecomposedMultiplex {
    pub fn layer(&self, s: Subset) -> Result<&[(usize, usize)]> {
        self.layers
            .get(&s)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownSubset { subset: s })
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::triangle_and_star;
    use super::*;
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    fn set(v: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        v.iter().copied().collect()
    }

    #[test]
    fn builds_canonical_layers() {
        let h = triangle_and_star();
        assert_eq!(h.layer_edges(1), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(h.layer_edges(2), vec![(0, 2), (1, 2)]);
        let same = Multiplex::new(3, 2, &[vec![(2, 0), (1, 0), (2, 1), (0, 1)], vec![(2, 1), (0, 2)]]).unwrap();
        assert_eq!(h, same);
    }

    #[test]
    fn single_vertex_no_edges() {
        let g = Multiplex::new(1, 1, &[vec![]]).unwrap();
        assert_eq!(g.n(), 1);
        assert!(g.layer_edges(1).is_empty());
    }

    #[test]
    fn validation_errors_are_distinct() {
        assert!(matches!(
            Multiplex::new(3, 2, &[vec![(0, 0)], vec![]]),
            Err(Error::SelfLoop { layer: 1, vertex: 0 })
        ));
        assert!(matches!(
            Multiplex::new(3, 2, &[vec![(0, 3)], vec![]]),
            Err(Error::VertexOutOfRange { vertex: 3, .. })
        ));
        assert!(matches!(Multiplex::new(3, 0, &[]), Err(Error::LayerCount(0))));
        assert!(matches!(Multiplex::new(3, 9, &vec![vec![]; 9]), Err(Error::LayerCount(9))));
        assert!(matches!(Multiplex::new(0, 1, &[vec![]]), Err(Error::EmptyVertexSet)));
        assert!(matches!(Multiplex::new(3, 2, &[vec![]]), Err(Error::LayerMismatch { .. })));
    }

    #[test]
    fn disjoint_decomposition_of_triangle_and_star() {
        let d = triangle_and_star().decompose(Mode::Disjoint);
        assert_eq!(d.layer(Subset::from_layers(&[1])).unwrap(), &[(0, 1)]);
        assert!(d.layer(Subset::from_layers(&[2])).unwrap().is_empty());
        assert_eq!(d.layer(Subset::from_layers(&[1, 2])).unwrap(), &[(0, 2), (1, 2)]);
    }

    #[test]
    fn cumulative_decomposition_of_triangle_and_star() {
        let d = triangle_and_star().decompose(Mode::Cumulative);
        assert_eq!(d.layer(Subset::from_layers(&[1])).unwrap(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(d.layer(Subset::from_layers(&[2])).unwrap(), &[(0, 2), (1, 2)]);
        assert_eq!(d.layer(Subset::from_layers(&[1, 2])).unwrap(), &[(0, 2), (1, 2)]);
    }

    #[test]
    fn empty_layers_decompose_to_empty() {
        let g = Multiplex::empty(5, 3).unwrap();
        for mode in [Mode::Disjoint, Mode::Cumulative] {
            assert!(g.decompose(mode).layers.values().all(Vec::is_empty));
        }
    }

    #[test]
    fn multilinks() {
        let h = triangle_and_star();
        assert_eq!(h.multilink(0, 1).unwrap(), Subset::from_layers(&[1]));
        assert_eq!(h.multilink(1, 2).unwrap(), Subset::from_layers(&[1, 2]));
        assert_eq!(Multiplex::empty(4, 2).unwrap().multilink(0, 3).unwrap(), Subset::EMPTY);
        assert!(h.multilink(1, 1).is_err());
        assert!(h.multilink(0, 7).is_err());
    }

    fn arb_multiplex() -> impl Strategy<Value = Multiplex> {
        (1usize..8, 1usize..4).prop_flat_map(|(n, r)| {
            let pairs = n * (n - 1) / 2;
            proptest::collection::vec(0u8..(1u8 << r), pairs).prop_map(move |masks| {
                let mut rows = Vec::new();
                let mut it = masks.into_iter();
                for i in 0..n {
                    rows.push((i + 1..n).map(|_| it.next().unwrap()).collect());
                }
                Multiplex::from_upper_rows(n, r, rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn disjoint_layers_partition_the_support(g in arb_multiplex()) {
            let d = g.decompose(Mode::Disjoint);
            let mut union = BTreeSet::new();
            let mut total = 0;
            for (s, edges) in &d.layers {
                for &(i, j) in edges {
                    prop_assert_eq!(g.link(i, j), *s);
                }
                total += edges.len();
                union.extend(edges.iter().copied());
            }
            prop_assert_eq!(total, union.len());
            let support: BTreeSet<_> = (0..g.n())
                .flat_map(|i| (i + 1..g.n()).map(move |j| (i, j)))
                .filter(|&(i, j)| !g.link(i, j).is_empty())
                .collect();
            prop_assert_eq!(union, support);
        }

        #[test]
        fn cumulative_is_union_of_disjoint_supersets(g in arb_multiplex()) {
            let d = g.decompose(Mode::Disjoint);
            let c = g.decompose(Mode::Cumulative);
            for s in Subset::nonempty(g.r()) {
                let mut expected = BTreeSet::new();
                for (t, edges) in &d.layers {
                    if s.is_subset_of(*t) {
                        expected.extend(edges.iter().copied());
                    }
                }
                prop_assert_eq!(set(c.layer(s).unwrap()), expected);
            }
            // Larger subsets carry fewer edges.
            for s in Subset::nonempty(g.r()) {
                for t in Subset::nonempty(g.r()) {
                    if s.is_subset_of(t) {
                        prop_assert!(set(c.layer(t).unwrap()).is_subset(&set(c.layer(s).unwrap())));
                    }
                }
            }
        }

        #[test]
        fn single_layer_decomposition_is_identity(g in arb_multiplex()) {
            if g.r() == 1 {
                for mode in [Mode::Disjoint, Mode::Cumulative] {
                    let d = g.decompose(mode);
                    let edges = g.layer_edges(1);
                    prop_assert_eq!(d.layer(Subset(1)).unwrap(), edges.as_slice());
                }
            }
        }
    }
}
