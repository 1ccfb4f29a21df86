use std::sync::Arc;

use super::{Language, Structure};
use crate::error::{too_big, Result};
use crate::limits::Limits;

/// `2^{Σ n^{a_i}}`, the number of labeled structures on `[n]`, as a bit
/// exponent.
pub fn structure_count(lang: &Language, n: usize) -> Option<usize> {
    lang.bit_count(n)
}

/// Iterator over every labeled structure on `[n]`, in increasing code order
/// (global bit `j` of the structure is bit `j` of the code).
pub struct StructureIter {
    lang: Arc<Language>,
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for StructureIter {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        if self.next >= self.end {
            return None;
        }
        let s = Structure::from_code(self.lang.clone(), self.n, self.next).unwrap();
        self.next += 1;
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = (self.end - self.next) as usize;
        (r, Some(r))
    }
}

impl StructureIter {
    /// Restricts the iterator to codes in `[lo, hi)`, for splitting work.
    pub fn range(mut self, lo: u64, hi: u64) -> Self {
        self.next = lo.max(self.next);
        self.end = hi.min(self.end);
        self
    }

    pub fn total(&self) -> u64 {
        self.end
    }
}

/// All `2^{Σ n^{a_i}}` structures on `[n]`; fails before doing any work if
/// that exceeds `limits.max_enumeration`.
pub fn enumerate_structures(lang: Arc<Language>, n: usize, limits: &Limits) -> Result<StructureIter> {
    let bits = match lang.bit_count(n) {
        Some(b) if b < 63 => b,
        _ => return too_big(format!("enumerating all structures on [{n}] needs more than 2^62 steps")),
    };
    let total = 1u64 << bits;
    if total > limits.max_enumeration {
        return too_big(format!(
            "enumerating all structures on [{n}] visits 2^{bits} structures, above the budget of {}",
            limits.max_enumeration
        ));
    }
    Ok(StructureIter {
        lang,
        n,
        next: 0,
        end: total,
    })
}
