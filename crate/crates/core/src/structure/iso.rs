//! Isomorphism testing and canonical forms.
//!
//! `canonical_form` runs individualization/refinement down to discrete
//! ordered partitions and keeps the smallest relabeled bit vector. The
//! search is exhaustive over refined leaves (no automorphism pruning), which
//! is exact and fast enough for the universe sizes this crate targets (about
//! `n ≤ 9` for highly symmetric structures). `is_isomorphic` is an
//! independent backtracking matcher that does not share code with it.

use std::collections::{BTreeMap, HashSet};

use super::{for_each_tuple, Structure};
use crate::bits::Bits;
use crate::error::{invalid, Result};

struct Facts {
    /// (relation, tuple) for every fact.
    facts: Vec<(usize, Vec<usize>)>,
    /// For each element, indices into `facts` of the facts mentioning it.
    touching: Vec<Vec<usize>>,
}

fn collect_facts(m: &Structure) -> Facts {
    let mut facts = Vec::new();
    let mut touching = vec![Vec::new(); m.n()];
    let mut t = Vec::new();
    for j in m.bits().ones() {
        let rel = m.decode_bit(j, &mut t);
        let idx = facts.len();
        let mut seen: Vec<usize> = t.clone();
        seen.sort_unstable();
        seen.dedup();
        for v in seen {
            touching[v].push(idx);
        }
        facts.push((rel, t.clone()));
    }
    Facts { facts, touching }
}

/// A vertex's color plus, per incident fact, its relation, the positions the
/// vertex occupies and the colors along the tuple.
type Signature = (usize, Vec<(usize, u64, Vec<usize>)>);

/// Refines `colors` (cell ranks) to the coarsest equitable refinement,
/// returning ranks that respect the old order.
fn refine(f: &Facts, mut colors: Vec<usize>) -> Vec<usize> {
    let n = colors.len();
    let mut count = distinct(&colors);
    loop {
        let mut sigs: Vec<Signature> = Vec::with_capacity(n);
        for v in 0..n {
            let mut items: Vec<(usize, u64, Vec<usize>)> = f.touching[v]
                .iter()
                .map(|&i| {
                    let (rel, t) = &f.facts[i];
                    let mut mask = 0u64;
                    for (p, &x) in t.iter().enumerate() {
                        if x == v {
                            mask |= 1 << p;
                        }
                    }
                    (*rel, mask, t.iter().map(|&x| colors[x]).collect())
                })
                .collect();
            items.sort_unstable();
            sigs.push((colors[v], items));
        }
        let mut sorted: Vec<&Signature> = sigs.iter().collect();
        sorted.sort();
        sorted.dedup();
        let new: Vec<usize> = sigs
            .iter()
            .map(|s| sorted.binary_search(&s).unwrap())
            .collect();
        let c = sorted.len();
        colors = new;
        if c == count {
            return colors;
        }
        count = c;
    }
}

fn distinct(colors: &[usize]) -> usize {
    let s: HashSet<usize> = colors.iter().copied().collect();
    s.len()
}

struct Search<'a> {
    m: &'a Structure,
    facts: Facts,
    best: Option<Bits>,
    best_perms: HashSet<Vec<usize>>,
}

impl Search<'_> {
    fn visit(&mut self, colors: Vec<usize>) {
        let colors = refine(&self.facts, colors);
        let n = colors.len();
        if distinct(&colors) == n {
            let perm = colors;
            let enc = self.m.relabel(&perm).into_bits();
            match &self.best {
                Some(b) if enc > *b => {}
                Some(b) if enc == *b => {
                    self.best_perms.insert(perm);
                }
                _ => {
                    self.best = Some(enc);
                    self.best_perms.clear();
                    self.best_perms.insert(perm);
                }
            }
            return;
        }
        // First non-singleton cell in order.
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &colors {
            *sizes.entry(c).or_default() += 1;
        }
        let target = *sizes.iter().find(|(_, &s)| s > 1).unwrap().0;
        for v in 0..n {
            if colors[v] != target {
                continue;
            }
            let next: Vec<usize> = (0..n)
                .map(|x| 2 * colors[x] + usize::from(colors[x] == target && x != v))
                .collect();
            self.visit(next);
        }
    }
}

fn run(m: &Structure) -> Search<'_> {
    let mut s = Search {
        m,
        facts: collect_facts(m),
        best: None,
        best_perms: HashSet::new(),
    };
    if m.n() == 0 {
        s.best = Some(m.bits().clone());
        s.best_perms.insert(Vec::new());
    } else {
        s.visit(vec![0; m.n()]);
    }
    s
}

/// A relabeling `π` (as `π[old] = new`) such that `m.relabel(π)` is the
/// canonical form of `m`.
pub fn canonical_labeling(m: &Structure) -> Vec<usize> {
    let s = run(m);
    s.best_perms.into_iter().min().unwrap()
}

/// The canonical representative of `m`'s isomorphism class.
pub fn canonical_form(m: &Structure) -> Structure {
    let s = run(m);
    Structure::from_bits(m.language_arc().clone(), m.n(), s.best.unwrap()).unwrap()
}

/// `|Aut(m)|`, counted from the canonical search.
pub fn automorphism_count(m: &Structure) -> u64 {
    run(m).best_perms.len() as u64
}

/// Canonical form together with the automorphism count.
pub fn canonical_form_with_automorphisms(m: &Structure) -> (Structure, u64) {
    let s = run(m);
    let auts = s.best_perms.len() as u64;
    (
        Structure::from_bits(m.language_arc().clone(), m.n(), s.best.unwrap()).unwrap(),
        auts,
    )
}

/// Per-element invariant used to prune the matcher: how many facts of each
/// relation mention the element at each position.
fn element_profile(m: &Structure) -> Vec<Vec<usize>> {
    let lang = m.language();
    let width: usize = lang.relations().iter().map(|r| r.1).sum();
    let mut prof = vec![vec![0usize; width]; m.n()];
    let mut t = Vec::new();
    for j in m.bits().ones() {
        let rel = m.decode_bit(j, &mut t);
        let base: usize = lang.relations()[..rel].iter().map(|r| r.1).sum();
        for (p, &x) in t.iter().enumerate() {
            prof[x][base + p] += 1;
        }
    }
    prof
}

/// A bijection `f` (as `f[v1] = v2`) with `f(m1) = m2`, if one exists.
pub fn find_isomorphism(m1: &Structure, m2: &Structure) -> Result<Option<Vec<usize>>> {
    if !m1.same_language(m2) {
        return invalid("isomorphism test between structures of different languages");
    }
    let n = m1.n();
    if n != m2.n() || m1.fact_count() != m2.fact_count() {
        return Ok(None);
    }
    let lang = m1.language();
    for rel in 0..lang.len() {
        if m1.tuples(rel).len() != m2.tuples(rel).len() {
            return Ok(None);
        }
    }
    let p1 = element_profile(m1);
    let p2 = element_profile(m2);
    let mut s1 = p1.clone();
    let mut s2 = p2.clone();
    s1.sort();
    s2.sort();
    if s1 != s2 {
        return Ok(None);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if backtrack(m1, m2, &p1, &p2, 0, &mut map, &mut used) {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

fn backtrack(
    m1: &Structure,
    m2: &Structure,
    p1: &[Vec<usize>],
    p2: &[Vec<usize>],
    k: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let n = m1.n();
    if k == n {
        return true;
    }
    for w in 0..n {
        if used[w] || p1[k] != p2[w] {
            continue;
        }
        map[k] = w;
        used[w] = true;
        if consistent(m1, m2, k, map) && backtrack(m1, m2, p1, p2, k + 1, map, used) {
            return true;
        }
        used[w] = false;
        map[k] = usize::MAX;
    }
    false
}

/// Checks every tuple over `0..=k` that mentions `k`.
fn consistent(m1: &Structure, m2: &Structure, k: usize, map: &[usize]) -> bool {
    let lang = m1.language();
    let mut img = Vec::new();
    let mut ok = true;
    for rel in 0..lang.len() {
        for_each_tuple(k + 1, lang.arity(rel), |t| {
            if !ok || !t.contains(&k) {
                return;
            }
            img.clear();
            img.extend(t.iter().map(|&x| map[x]));
            if m1.holds(rel, t) != m2.holds(rel, &img) {
                ok = false;
            }
        });
        if !ok {
            return false;
        }
    }
    true
}

pub fn is_isomorphic(m1: &Structure, m2: &Structure) -> Result<bool> {
    Ok(find_isomorphism(m1, m2)?.is_some())
}
