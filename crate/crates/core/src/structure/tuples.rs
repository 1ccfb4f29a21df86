use std::collections::BTreeSet;

use crate::error::{invalid, Result};

/// A finite set of `t`-tuples over some element domain, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleSet {
    t: usize,
    tuples: Vec<Vec<usize>>,
}

impl TupleSet {
    pub fn new(t: usize, tuples: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let set: BTreeSet<Vec<usize>> = tuples.into_iter().collect();
        if let Some(bad) = set.iter().find(|x| x.len() != t) {
            return invalid(format!("tuple {bad:?} does not have length {t}"));
        }
        Ok(TupleSet {
            t,
            tuples: set.into_iter().collect(),
        })
    }

    pub fn tuple_len(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.tuples.binary_search_by(|x| x.as_slice().cmp(t)).is_ok()
    }

    /// The set of elements occurring in some tuple, ascending.
    pub fn underlying(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self.tuples.iter().flatten().copied().collect();
        s.into_iter().collect()
    }

    /// `|B| ≤ t·|𝔹|` and `|𝔹| ≤ |B|^t`, the latter being the integer form of
    /// `|𝔹|^{1/t} ≤ |B|`.
    pub fn satisfies_size_bounds(&self) -> bool {
        let b = self.underlying().len() as u128;
        let k = self.tuples.len() as u128;
        let t = self.t as u32;
        let pow = b.checked_pow(t).unwrap_or(u128::MAX);
        b <= self.t as u128 * k && k <= pow
    }
}
