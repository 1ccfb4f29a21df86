use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::{checked_pow, for_each_tuple, tuple_rank, tuple_unrank, Language};
use crate::bits::Bits;
use crate::error::{invalid, too_big, Result};

/// A labeled structure with universe `[n]` (stored as `0..n`).
///
/// Interpretations live in one bit vector, relation-major: relation `i`
/// occupies `n^{a_i}` consecutive bits starting after all earlier relations,
/// and a tuple `t` sits at offset `Σ t_j · n^j` inside its block.
#[derive(Clone)]
pub struct Structure {
    lang: Arc<Language>,
    n: usize,
    offsets: Arc<[usize]>,
    bits: Bits,
}

fn offsets_for(lang: &Language, n: usize) -> Result<Vec<usize>> {
    let mut offs = Vec::with_capacity(lang.len() + 1);
    let mut acc: usize = 0;
    offs.push(0);
    for &(_, a) in lang.relations() {
        let block = match checked_pow(n, a) {
            Some(b) if b <= 1 << 40 => b,
            _ => return too_big(format!("structure on [{n}] is too large to store")),
        };
        acc += block;
        offs.push(acc);
    }
    Ok(offs)
}

impl Structure {
    pub fn empty(lang: Arc<Language>, n: usize) -> Result<Self> {
        let offsets = offsets_for(&lang, n)?;
        let total = *offsets.last().unwrap();
        Ok(Structure {
            lang,
            n,
            offsets: offsets.into(),
            bits: Bits::new(total),
        })
    }

    pub fn from_bits(lang: Arc<Language>, n: usize, bits: Bits) -> Result<Self> {
        let mut s = Structure::empty(lang, n)?;
        if bits.len() != s.bits.len() {
            return invalid(format!(
                "expected {} interpretation bits on [{n}], got {}",
                s.bits.len(),
                bits.len()
            ));
        }
        s.bits = bits;
        Ok(s)
    }

    /// Structure whose global bit `j` is bit `j` of `code`.
    pub fn from_code(lang: Arc<Language>, n: usize, code: u64) -> Result<Self> {
        let mut s = Structure::empty(lang, n)?;
        if s.bits.len() > 64 {
            return invalid("code only addresses structures with at most 64 bits");
        }
        s.bits = Bits::from_u64(s.bits.len(), code);
        Ok(s)
    }

    /// Builds a structure from per-relation tuple lists (0-based entries).
    pub fn from_tuples(lang: Arc<Language>, n: usize, facts: &[(usize, Vec<Vec<usize>>)]) -> Result<Self> {
        let mut s = Structure::empty(lang, n)?;
        for (rel, tuples) in facts {
            if *rel >= s.lang.len() {
                return invalid(format!("relation index {rel} out of range"));
            }
            for t in tuples {
                s.check_tuple(*rel, t)?;
                s.set(*rel, t, true);
            }
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn language(&self) -> &Language {
        &self.lang
    }

    pub fn language_arc(&self) -> &Arc<Language> {
        &self.lang
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn into_bits(self) -> Bits {
        self.bits
    }

    /// Start of relation `rel`'s block in the global bit vector.
    #[inline]
    pub fn offset(&self, rel: usize) -> usize {
        self.offsets[rel]
    }

    #[inline]
    pub fn bit_index(&self, rel: usize, t: &[usize]) -> usize {
        debug_assert_eq!(t.len(), self.lang.arity(rel));
        self.offsets[rel] + tuple_rank(self.n, t)
    }

    /// The relation and tuple stored at global bit `j`.
    pub fn decode_bit(&self, j: usize, out: &mut Vec<usize>) -> usize {
        let rel = self.offsets.partition_point(|&o| o <= j) - 1;
        tuple_unrank(self.n, self.lang.arity(rel), j - self.offsets[rel], out);
        rel
    }

    fn check_tuple(&self, rel: usize, t: &[usize]) -> Result<()> {
        let a = self.lang.arity(rel);
        if t.len() != a {
            return invalid(format!(
                "relation {} has arity {a}, got a tuple of length {}",
                self.lang.name(rel),
                t.len()
            ));
        }
        if let Some(&x) = t.iter().find(|&&x| x >= self.n) {
            return invalid(format!("element {} is outside [{}]", x + 1, self.n));
        }
        Ok(())
    }

    #[inline]
    pub fn holds(&self, rel: usize, t: &[usize]) -> bool {
        self.bits.get(self.bit_index(rel, t))
    }

    pub fn holds_checked(&self, rel: usize, t: &[usize]) -> Result<bool> {
        if rel >= self.lang.len() {
            return invalid(format!("relation index {rel} out of range"));
        }
        self.check_tuple(rel, t)?;
        Ok(self.holds(rel, t))
    }

    #[inline]
    pub fn set(&mut self, rel: usize, t: &[usize], value: bool) {
        let i = self.bit_index(rel, t);
        self.bits.set(i, value);
    }

    #[inline]
    pub fn set_bit(&mut self, j: usize, value: bool) {
        self.bits.set(j, value);
    }

    /// All tuples of relation `rel`, in rank order.
    pub fn tuples(&self, rel: usize) -> Vec<Vec<usize>> {
        let lo = self.offsets[rel];
        let hi = self.offsets[rel + 1];
        let a = self.lang.arity(rel);
        let mut out = Vec::new();
        let mut t = Vec::new();
        for j in self.bits.ones() {
            if j >= hi {
                break;
            }
            if j >= lo {
                tuple_unrank(self.n, a, j - lo, &mut t);
                out.push(t.clone());
            }
        }
        out
    }

    pub fn fact_count(&self) -> usize {
        self.bits.count_ones()
    }

    /// `M[A]` relabeled onto `[|A|]` by the order-preserving bijection.
    pub fn induced_substructure(&self, subset: &[usize]) -> Result<Structure> {
        if subset.is_empty() {
            return invalid("induced substructure on an empty set");
        }
        if let Some(&x) = subset.iter().find(|&&x| x >= self.n) {
            return invalid(format!("element {} is outside [{}]", x + 1, self.n));
        }
        let mut elems = subset.to_vec();
        elems.sort_unstable();
        elems.dedup();
        Ok(self.induced_ordered(&elems))
    }

    /// Substructure in which new element `i` is old element `elems[i]`.
    /// Entries must be distinct and in range; no checks.
    pub fn induced_ordered(&self, elems: &[usize]) -> Structure {
        let k = elems.len();
        let mut out = Structure::empty(self.lang.clone(), k).expect("smaller than self");
        let mut src = Vec::new();
        for rel in 0..self.lang.len() {
            let a = self.lang.arity(rel);
            for_each_tuple(k, a, |t| {
                src.clear();
                src.extend(t.iter().map(|&i| elems[i]));
                if self.holds(rel, &src) {
                    out.set(rel, t, true);
                }
            });
        }
        out
    }

    /// The structure `M'` with `M'(π(t)) = M(t)`; `perm` must be a permutation of `0..n`.
    pub fn relabel(&self, perm: &[usize]) -> Structure {
        debug_assert_eq!(perm.len(), self.n);
        let mut out = Structure {
            lang: self.lang.clone(),
            n: self.n,
            offsets: self.offsets.clone(),
            bits: Bits::new(self.bits.len()),
        };
        let mut t = Vec::new();
        for j in self.bits.ones() {
            let rel = self.decode_bit(j, &mut t);
            for x in t.iter_mut() {
                *x = perm[*x];
            }
            let i = out.bit_index(rel, &t);
            out.bits.insert(i);
        }
        out
    }

    /// Same facts on the larger universe `[n_new]` (new elements isolated).
    pub fn extend_universe(&self, n_new: usize) -> Result<Structure> {
        if n_new < self.n {
            return invalid("cannot shrink a universe by extension");
        }
        let mut out = Structure::empty(self.lang.clone(), n_new)?;
        let mut t = Vec::new();
        for j in self.bits.ones() {
            let rel = self.decode_bit(j, &mut t);
            out.set(rel, &t, true);
        }
        Ok(out)
    }

    pub fn same_language(&self, other: &Structure) -> bool {
        Arc::ptr_eq(&self.lang, &other.lang) || *self.lang == *other.lang
    }
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.bits == other.bits && self.same_language(other)
    }
}

impl Eq for Structure {}

impl Hash for Structure {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.bits.hash(state);
    }
}

impl PartialOrd for Structure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Structure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.bits.cmp(&other.bits))
            .then_with(|| self.lang.relations().cmp(other.lang.relations()))
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure(n={}", self.n)?;
        for rel in 0..self.lang.len() {
            write!(f, ", {}=[", self.lang.name(rel))?;
            for (i, t) in self.tuples(rel).iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                let s: Vec<String> = t.iter().map(|x| (x + 1).to_string()).collect();
                write!(f, "({})", s.join(","))?;
            }
            f.write_str("]")?;
        }
        f.write_str(")")
    }
}
