//! Bitmask encoding of layer subsets.
//!
//! Bit `s - 1` is set iff layer `s` (1-indexed) belongs to the subset, so the
//! multilink vector of a vertex pair and the key of its disjoint-decomposition
//! layer are the same integer.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported layer count; keeps every family of `2^r` subsets enumerable.
pub const MAX_LAYERS: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(pub u8);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// Subset made of the given 1-indexed layers.
    pub fn from_layers(layers: &[usize]) -> Subset {
        let mut bits = 0u8;
        for &s in layers {
            debug_assert!((1..=MAX_LAYERS).contains(&s));
            bits |= 1 << (s - 1);
        }
        Subset(bits)
    }

    /// `{1, ..., r}`.
    pub fn full(r: usize) -> Subset {
        debug_assert!(r <= MAX_LAYERS);
        Subset(((1u16 << r) - 1) as u8)
    }

    pub fn singleton(layer: usize) -> Subset {
        Subset(1 << (layer - 1))
    }

    #[inline]
    pub fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Membership of the 1-indexed layer `s`.
    #[inline]
    pub fn contains(self, s: usize) -> bool {
        self.0 >> (s - 1) & 1 == 1
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_valid_for(self, r: usize) -> bool {
        (self.0 as u16) < (1u16 << r)
    }

    /// 1-indexed layers in increasing order.
    pub fn layers(self) -> impl Iterator<Item = usize> {
        (1..=MAX_LAYERS).filter(move |&s| self.contains(s))
    }

    /// All subsets of `[r]` including the empty set, in increasing bitmask order.
    pub fn all(r: usize) -> impl Iterator<Item = Subset> {
        (0..(1u16 << r)).map(|b| Subset(b as u8))
    }

    /// All nonempty subsets of `[r]`, in increasing bitmask order.
    pub fn nonempty(r: usize) -> impl Iterator<Item = Subset> {
        (1..(1u16 << r)).map(|b| Subset(b as u8))
    }

    /// Nonempty subsets of `self` (including `self`), in decreasing bitmask order.
    pub fn nonempty_subsets(self) -> impl Iterator<Item = Subset> {
        let full = self.0;
        let mut cur = Some(full);
        std::iter::from_fn(move || {
            let c = cur?;
            if c == 0 {
                return None;
            }
            cur = Some((c - 1) & full);
            Some(Subset(c))
        })
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.layers().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}
