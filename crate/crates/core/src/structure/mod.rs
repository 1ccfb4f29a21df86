//! Languages, labeled structures on `[n]`, and the operations every other
//! module is built on.

mod enumerate;
mod iso;
mod language;
mod model;
mod tuples;

pub use enumerate::{enumerate_structures, structure_count, StructureIter};
pub use iso::{
    automorphism_count, canonical_form, canonical_form_with_automorphisms, canonical_labeling,
    find_isomorphism, is_isomorphic,
};
pub use language::Language;
pub use model::Structure;
pub use tuples::TupleSet;

/// Calls `f` on every tuple of `[n]^len` in rank order (first coordinate
/// varies fastest).
pub fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    if len == 0 {
        f(&[]);
        return;
    }
    if n == 0 {
        return;
    }
    let mut t = vec![0usize; len];
    loop {
        f(&t);
        let mut i = 0;
        loop {
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
            i += 1;
            if i == len {
                return;
            }
        }
    }
}

/// Rank of `t` in `[n]^len`: `Σ t_i · n^i`.
#[inline]
pub fn tuple_rank(n: usize, t: &[usize]) -> usize {
    let mut r = 0;
    for &x in t.iter().rev() {
        r = r * n + x;
    }
    r
}

/// Inverse of [`tuple_rank`].
pub fn tuple_unrank(n: usize, len: usize, mut rank: usize, out: &mut Vec<usize>) {
    out.clear();
    for _ in 0..len {
        out.push(rank % n);
        rank /= n;
    }
}

/// `n^k`, or `None` on overflow.
pub fn checked_pow(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..k {
        acc = acc.checked_mul(n)?;
    }
    Some(acc)
}
