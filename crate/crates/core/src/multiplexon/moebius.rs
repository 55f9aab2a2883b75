//! Inclusion–exclusion over the subset lattice of `[r]`.
//!
//! Both transforms act in place on a slice of length `2^r` indexed by subset
//! bitmask. With the cumulative layer of the empty set pinned to 1, the two
//! are exact inverses and the empty-set disjoint layer comes out as
//! `1 - sum of the others`.

/// `out[S] = sum over S' ⊇ S of v[S']` (disjoint → cumulative).
pub fn superset_sums(v: &mut [f64], r: usize) {
    debug_assert_eq!(v.len(), 1 << r);
    for b in 0..r {
        let bit = 1usize << b;
        for mask in 0..v.len() {
            if mask & bit == 0 {
                v[mask] += v[mask | bit];
            }
        }
    }
}

/// `out[S] = sum over S' ⊇ S of (-1)^{|S' \ S|} v[S']` (cumulative → disjoint).
pub fn superset_differences(v: &mut [f64], r: usize) {
    debug_assert_eq!(v.len(), 1 << r);
    for b in 0..r {
        let bit = 1usize << b;
        for mask in 0..v.len() {
            if mask & bit == 0 {
                v[mask] -= v[mask | bit];
            }
        }
    }
}
