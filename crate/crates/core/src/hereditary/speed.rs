use std::collections::HashSet;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::members::{for_each_unit_subset, toggle_unit, units, units_touching, MemberStore};
use super::property::HereditaryProperty;
use crate::error::{too_big, Error, Result};
use crate::limits::Limits;
use crate::structure::{canonical_form, canonical_form_with_automorphisms, enumerate_structures, Structure};

/// How `|H_n|` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedMethod {
    /// Extension for properties closed by construction, candidates otherwise.
    Auto,
    /// Every labeled structure on `[n]`, filtered by membership.
    Direct,
    /// Every structure in the property's shape space, filtered by membership.
    Candidates,
    /// Members of `H_{n-1}` extended by the units touching the new element.
    Extension,
    /// Isomorphism classes with orbit sizes `n!/|Aut|`.
    Orbits,
}

impl SpeedMethod {
    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => SpeedMethod::Auto,
            "direct" => SpeedMethod::Direct,
            "candidates" => SpeedMethod::Candidates,
            "extension" => SpeedMethod::Extension,
            "orbits" => SpeedMethod::Orbits,
            _ => return Err(Error::InvalidArgument(format!("unknown speed method {s:?}"))),
        })
    }
}

/// `|H_n|` with the default method.
pub fn speed(prop: &HereditaryProperty, n: usize, limits: &Limits) -> Result<BigUint> {
    let store = MemberStore::new(std::sync::Arc::new(prop.clone()), *limits);
    speed_with(&store, n, SpeedMethod::Auto)
}

pub fn speed_with(store: &MemberStore, n: usize, method: SpeedMethod) -> Result<BigUint> {
    let prop = store.property();
    let method = match method {
        SpeedMethod::Auto if prop.is_closed_by_construction() => SpeedMethod::Extension,
        SpeedMethod::Auto => SpeedMethod::Candidates,
        m => m,
    };
    match method {
        SpeedMethod::Direct => direct(prop, n, store.limits()),
        SpeedMethod::Candidates => candidates(prop, n, store.limits()),
        SpeedMethod::Extension => extension(store, n),
        SpeedMethod::Orbits => orbits(store, n),
        SpeedMethod::Auto => unreachable!(),
    }
}

fn direct(prop: &HereditaryProperty, n: usize, limits: &Limits) -> Result<BigUint> {
    let it = enumerate_structures(prop.language().clone(), n, limits)?;
    let total = it.total();
    let chunk = (total / 256).max(1);
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let lang = prop.language().clone();
    let count: u64 = starts
        .into_par_iter()
        .map(|lo| {
            enumerate_structures(lang.clone(), n, limits)
                .unwrap()
                .range(lo, lo + chunk)
                .filter(|m| prop.contains_unchecked(m))
                .count() as u64
        })
        .sum();
    Ok(BigUint::from(count))
}

fn candidates(prop: &HereditaryProperty, n: usize, limits: &Limits) -> Result<BigUint> {
    let us = units(prop.language(), prop.shapes(), n);
    if us.len() >= 63 || (1u64 << us.len()) > limits.max_enumeration {
        return too_big(format!(
            "the candidate space on [{n}] has 2^{} structures, above the budget of {}",
            us.len(),
            limits.max_enumeration
        ));
    }
    let split = us.len().min(8);
    let (hi, lo) = us.split_at(us.len() - split);
    let base = Structure::empty(prop.language().clone(), n)?;
    let count: u64 = (0u64..(1u64 << split))
        .into_par_iter()
        .map(|mask| {
            let mut start = base.clone();
            for (i, u) in lo.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    toggle_unit(&mut start, u);
                }
            }
            let mut c = 0u64;
            for_each_unit_subset(&start, hi, |m| {
                if prop.contains_unchecked(m) {
                    c += 1;
                }
            });
            c
        })
        .sum();
    Ok(BigUint::from(count))
}

fn extension(store: &MemberStore, n: usize) -> Result<BigUint> {
    let prop = store.property();
    if n == 0 {
        return Ok(BigUint::from(store.members(0)?.len()));
    }
    let prev = store.members(n - 1)?;
    let fresh = units_touching(prop.language(), prop.shapes(), n);
    let work = (prev.len() as u128) << fresh.len().min(100);
    if fresh.len() >= 63 || work > store.limits().max_enumeration as u128 {
        return too_big(format!(
            "extending {} members of H_{} by {} new units exceeds the budget of {}",
            prev.len(),
            n - 1,
            fresh.len(),
            store.limits().max_enumeration
        ));
    }
    let count: u64 = prev
        .par_iter()
        .map(|p| {
            let base = p.extend_universe(n).unwrap();
            let mut c = 0u64;
            for_each_unit_subset(&base, &fresh, |m| {
                if prop.contains_extension(m) {
                    c += 1;
                }
            });
            c
        })
        .sum();
    Ok(BigUint::from(count))
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Canonical representatives of the isomorphism classes of `H_n`.
fn classes(store: &MemberStore, n: usize) -> Result<Vec<Structure>> {
    let prop = store.property();
    if n == 0 || !prop.is_closed_by_construction() {
        let members = store.members(n)?;
        let set: HashSet<Structure> = members.par_iter().map(canonical_form).collect();
        let mut v: Vec<Structure> = set.into_iter().collect();
        v.sort();
        return Ok(v);
    }
    let prev = classes(store, n - 1)?;
    let fresh = units_touching(prop.language(), prop.shapes(), n);
    let work = (prev.len() as u128) << fresh.len().min(100);
    if fresh.len() >= 63 || work > store.limits().max_enumeration as u128 {
        return too_big(format!(
            "extending {} classes of H_{} by {} new units exceeds the budget of {}",
            prev.len(),
            n - 1,
            fresh.len(),
            store.limits().max_enumeration
        ));
    }
    let found: Vec<HashSet<Structure>> = prev
        .par_iter()
        .map(|p| {
            let base = p.extend_universe(n).unwrap();
            let mut s = HashSet::new();
            for_each_unit_subset(&base, &fresh, |m| {
                if prop.contains_extension(m) {
                    s.insert(canonical_form(m));
                }
            });
            s
        })
        .collect();
    let mut all: HashSet<Structure> = HashSet::new();
    for s in found {
        all.extend(s);
    }
    let mut v: Vec<Structure> = all.into_iter().collect();
    v.sort();
    Ok(v)
}

fn orbits(store: &MemberStore, n: usize) -> Result<BigUint> {
    let reps = classes(store, n)?;
    let nf = factorial(n);
    let sizes: Vec<BigUint> = reps
        .par_iter()
        .map(|r| {
            let (_, auts) = canonical_form_with_automorphisms(r);
            &nf / BigUint::from(auts)
        })
        .collect();
    Ok(sizes.into_iter().fold(BigUint::zero(), |a, b| a + b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEntry {
    pub n: usize,
    #[serde(with = "crate::serial::biguint_string")]
    pub count: BigUint,
    /// Wall time spent computing this entry, in seconds. Not serialized,
    /// so reports are reproducible; the speed cache stores it separately.
    #[serde(skip)]
    pub wall_secs: f64,
}

/// The sequence `n ↦ |H_n|` for an initial range of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedTable {
    pub property: String,
    pub entries: Vec<SpeedEntry>,
}

impl SpeedTable {
    pub fn new(property: impl Into<String>) -> Self {
        SpeedTable {
            property: property.into(),
            entries: Vec::new(),
        }
    }

    pub fn get(&self, n: usize) -> Option<&BigUint> {
        self.entries.iter().find(|e| e.n == n).map(|e| &e.count)
    }

    /// Largest `n` such that every entry `0..=n` is present.
    pub fn max_n(&self) -> Option<usize> {
        let mut n = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.n != i {
                break;
            }
            n = Some(i);
        }
        n
    }

    pub fn counts(&self) -> Vec<BigUint> {
        self.entries.iter().map(|e| e.count.clone()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,count\n");
        for e in &self.entries {
            s.push_str(&format!("{},{}\n", e.n, e.count));
        }
        s
    }
}

/// `speed_table` with resumption and a callback after each new entry.
///
/// Entries already in `prior` are kept and not recomputed. On failure the
/// table built so far is returned next to the error.
pub fn speed_table_with(
    store: &MemberStore,
    n_max: usize,
    method: SpeedMethod,
    prior: Option<SpeedTable>,
    mut on_entry: impl FnMut(&SpeedEntry),
) -> (SpeedTable, Option<Error>) {
    let mut table = prior.unwrap_or_else(|| SpeedTable::new(store.property().name()));
    table.entries.retain(|e| e.n <= n_max);
    let start = table.max_n().map_or(0, |m| m + 1);
    table.entries.truncate(start);
    for n in start..=n_max {
        let t0 = Instant::now();
        match speed_with(store, n, method) {
            Ok(count) => {
                let e = SpeedEntry {
                    n,
                    count,
                    wall_secs: t0.elapsed().as_secs_f64(),
                };
                on_entry(&e);
                table.entries.push(e);
            }
            Err(err) => return (table, Some(err)),
        }
    }
    (table, None)
}

/// `|H_n|` for `n = 0..=n_max`.
pub fn speed_table(prop: &HereditaryProperty, n_max: usize, limits: &Limits) -> Result<SpeedTable> {
    let store = MemberStore::new(std::sync::Arc::new(prop.clone()), *limits);
    match speed_table_with(&store, n_max, SpeedMethod::Auto, None, |_| {}) {
        (t, None) => Ok(t),
        (_, Some(e)) => Err(e),
    }
}
