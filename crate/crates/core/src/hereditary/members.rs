use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::property::{for_each_subset, HereditaryProperty};
use crate::error::{too_big, Result};
use crate::limits::Limits;
use crate::structure::{for_each_tuple, Language, Structure};

/// How a relation's bits may be populated in members of a property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// Every tuple is an independent bit.
    Free,
    /// Facts come in full orbits under argument permutation and never repeat
    /// an entry (graph and uniform-hypergraph encodings).
    Uniform,
}

/// A group of bits that members switch on and off together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub bits: Vec<usize>,
}

fn push_units(lang: &Language, shapes: &[Shape], n: usize, touching_last: bool, out: &mut Vec<Unit>) {
    let probe = Structure::empty(Arc::new(lang.clone()), n).unwrap();
    for (rel, &shape) in shapes.iter().enumerate().take(lang.len()) {
        let a = lang.arity(rel);
        match shape {
            Shape::Free => for_each_tuple(n, a, |t| {
                if !touching_last || t.contains(&(n - 1)) {
                    out.push(Unit {
                        bits: vec![probe.bit_index(rel, t)],
                    });
                }
            }),
            Shape::Uniform => for_each_subset(n, a, touching_last, |s| {
                let mut bits = Vec::new();
                for_each_tuple(a, a, |p| {
                    let distinct = (0..a).all(|i| (i + 1..a).all(|j| p[i] != p[j]));
                    if distinct {
                        let t: Vec<usize> = p.iter().map(|&i| s[i]).collect();
                        bits.push(probe.bit_index(rel, &t));
                    }
                });
                bits.sort_unstable();
                out.push(Unit { bits });
            }),
        }
    }
}

/// The units spanning every candidate member on `[n]`.
pub fn units(lang: &Language, shapes: &[Shape], n: usize) -> Vec<Unit> {
    let mut out = Vec::new();
    push_units(lang, shapes, n, false, &mut out);
    out
}

/// The units on `[n]` that mention element `n - 1`.
pub fn units_touching(lang: &Language, shapes: &[Shape], n: usize) -> Vec<Unit> {
    let mut out = Vec::new();
    if n > 0 {
        push_units(lang, shapes, n, true, &mut out);
    }
    out
}

pub(crate) fn toggle_unit(m: &mut Structure, u: &Unit) {
    for &b in &u.bits {
        let v = m.bits().get(b);
        m.set_bit(b, !v);
    }
}

/// Calls `f` on `base` with every subset of `units` switched on, in Gray
/// code order. `units` must be off in `base`.
pub(crate) fn for_each_unit_subset(base: &Structure, units: &[Unit], mut f: impl FnMut(&Structure)) {
    let mut m = base.clone();
    f(&m);
    let k = units.len();
    for i in 1u64..(1u64 << k) {
        toggle_unit(&mut m, &units[i.trailing_zeros() as usize]);
        f(&m);
    }
}

/// Caches the members of `H_n` for each `n`, computing them on demand.
pub struct MemberStore {
    prop: Arc<HereditaryProperty>,
    limits: Limits,
    cache: Mutex<BTreeMap<usize, Arc<Vec<Structure>>>>,
}

/// Counts members found across threads so a run that would blow the
/// in-memory budget stops keeping them early.
struct Tally {
    found: AtomicUsize,
    cap: usize,
}

impl Tally {
    fn new(cap: usize) -> Self {
        Tally {
            found: AtomicUsize::new(0),
            cap,
        }
    }

    fn admit(&self) -> bool {
        self.found.fetch_add(1, Ordering::Relaxed) < self.cap
    }

    fn check(&self, n: usize, list: Vec<Structure>) -> Result<Vec<Structure>> {
        let found = self.found.load(Ordering::Relaxed);
        if found > self.cap {
            return too_big(format!(
                "H_{n} has at least {found} members, above the in-memory budget of {}",
                self.cap
            ));
        }
        Ok(list)
    }
}

/// Shape spaces this small are enumerated outright instead of by extension.
const DIRECT_UNITS: usize = 16;

impl MemberStore {
    pub fn new(prop: Arc<HereditaryProperty>, limits: Limits) -> Self {
        MemberStore {
            prop,
            limits,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn property(&self) -> &Arc<HereditaryProperty> {
        &self.prop
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// The members of `H_n`, sorted.
    pub fn members(&self, n: usize) -> Result<Arc<Vec<Structure>>> {
        if let Some(v) = self.cache.lock().unwrap().get(&n) {
            return Ok(v.clone());
        }
        let lang = self.prop.language();
        let unit_count = units(lang, self.prop.shapes(), n).len();
        let mut list = if n == 0 || unit_count <= DIRECT_UNITS || !self.prop.is_closed_by_construction() {
            self.members_from_shape_space(n)?
        } else {
            let prev = self.members(n - 1)?;
            self.members_by_extension(n, &prev)?
        };
        list.sort();
        if list.len() > self.limits.max_members {
            return too_big(format!(
                "H_{n} has {} members, above the in-memory budget of {}",
                list.len(),
                self.limits.max_members
            ));
        }
        let list = Arc::new(list);
        self.cache.lock().unwrap().insert(n, list.clone());
        Ok(list)
    }

    fn members_from_shape_space(&self, n: usize) -> Result<Vec<Structure>> {
        let lang = self.prop.language();
        let us = units(lang, self.prop.shapes(), n);
        if us.len() >= 63 || (1u64 << us.len()) > self.limits.max_enumeration {
            return too_big(format!(
                "the candidate space on [{n}] has 2^{} structures, above the budget of {}",
                us.len(),
                self.limits.max_enumeration
            ));
        }
        let base = Structure::empty(lang.clone(), n)?;
        let prop = &self.prop;
        let tally = Tally::new(self.limits.max_members);
        // Split on the top few units for parallelism.
        let split = us.len().min(8);
        let (hi, lo) = us.split_at(us.len() - split);
        let chunks: Vec<Vec<Structure>> = (0u64..(1u64 << split))
            .into_par_iter()
            .map(|mask| {
                let mut start = base.clone();
                for (i, u) in lo.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        toggle_unit(&mut start, u);
                    }
                }
                let mut found = Vec::new();
                for_each_unit_subset(&start, hi, |m| {
                    if prop.contains_unchecked(m) && tally.admit() {
                        found.push(m.clone());
                    }
                });
                found
            })
            .collect();
        tally.check(n, chunks.into_iter().flatten().collect())
    }

    fn members_by_extension(&self, n: usize, prev: &[Structure]) -> Result<Vec<Structure>> {
        let lang = self.prop.language();
        let fresh = units_touching(lang, self.prop.shapes(), n);
        let work = (prev.len() as u128) << fresh.len().min(100);
        if fresh.len() >= 63 || work > self.limits.max_enumeration as u128 {
            return too_big(format!(
                "extending {} members of H_{} by {} new units exceeds the budget of {}",
                prev.len(),
                n - 1,
                fresh.len(),
                self.limits.max_enumeration
            ));
        }
        let prop = &self.prop;
        let tally = Tally::new(self.limits.max_members);
        let chunks: Vec<Vec<Structure>> = prev
            .par_iter()
            .map(|p| {
                let base = p.extend_universe(n).unwrap();
                let mut found = Vec::new();
                for_each_unit_subset(&base, &fresh, |m| {
                    if prop.contains_extension(m) && tally.admit() {
                        found.push(m.clone());
                    }
                });
                found
            })
            .collect();
        tally.check(n, chunks.into_iter().flatten().collect())
    }
}
