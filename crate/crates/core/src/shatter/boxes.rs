//! Boxes of parameter tuples, φ-types over them, and realized type sets.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{invalid, too_big, Result};
use crate::formula::QfFormula;
use crate::hereditary::MemberStore;
use crate::limits::Limits;
use crate::serial::{one_based, zero_based};
use crate::structure::{for_each_tuple, Structure, TupleSet};

use super::setsystem::compositions;

/// An `(ℓ, r')`-box: the product `A_1⋯A_ℓ` of tuple sets whose arities sum
/// to `r'`. With `ℓ = 0` the box is a single tuple of length `r'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamBox {
    components: Vec<TupleSet>,
    point: Vec<usize>,
}

impl ParamBox {
    pub fn new(components: Vec<TupleSet>) -> Result<Self> {
        if components.is_empty() {
            return invalid("a box needs a component; use ParamBox::point for ℓ = 0");
        }
        if components.iter().any(|c| c.is_empty() || c.tuple_len() == 0) {
            return invalid("box components must be nonempty sets of nonempty tuples");
        }
        Ok(ParamBox {
            components,
            point: Vec::new(),
        })
    }

    /// From raw component tuple lists.
    pub fn from_tuples(components: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let mut cs = Vec::new();
        for c in components {
            let k = c.first().map_or(0, Vec::len);
            cs.push(TupleSet::new(k, c)?);
        }
        ParamBox::new(cs)
    }

    /// The `(0, r')`-box `{point}`.
    pub fn point(point: Vec<usize>) -> Self {
        ParamBox {
            components: Vec::new(),
            point,
        }
    }

    pub fn ell(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[TupleSet] {
        &self.components
    }

    /// Total arity `r'` of the product tuples.
    pub fn arity(&self) -> usize {
        if self.components.is_empty() {
            self.point.len()
        } else {
            self.components.iter().map(TupleSet::tuple_len).sum()
        }
    }

    pub fn composition(&self) -> Vec<usize> {
        self.components.iter().map(TupleSet::tuple_len).collect()
    }

    /// Largest component size (1 for a point box).
    pub fn height(&self) -> usize {
        self.components.iter().map(TupleSet::len).max().unwrap_or(1)
    }

    /// Whether every component has exactly `m` tuples.
    pub fn has_height(&self, m: usize) -> bool {
        self.components.iter().all(|c| c.len() == m)
    }

    /// Number of product tuples.
    pub fn size(&self) -> usize {
        self.components.iter().map(TupleSet::len).product()
    }

    /// Product tuples, the first component varying fastest. Type bit `i`
    /// refers to the `i`-th tuple of this list.
    pub fn product_tuples(&self) -> Vec<Vec<usize>> {
        if self.components.is_empty() {
            return vec![self.point.clone()];
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for c in &self.components {
            let mut next = Vec::with_capacity(out.len() * c.len());
            for b in c.tuples() {
                for a in &out {
                    let mut t = a.clone();
                    t.extend_from_slice(b);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    /// Elements occurring in the box, ascending.
    pub fn underlying(&self) -> Vec<usize> {
        let s: BTreeSet<usize> = self
            .components
            .iter()
            .flat_map(|c| c.tuples().iter().flatten().copied())
            .chain(self.point.iter().copied())
            .collect();
        s.into_iter().collect()
    }

    /// One more than the largest element (0 for an empty box).
    pub fn span(&self) -> usize {
        self.underlying().last().map_or(0, |x| x + 1)
    }

    /// The sub-box keeping the listed tuple indices of each component.
    pub fn sub_box(&self, picks: &[Vec<usize>]) -> Result<ParamBox> {
        if self.components.is_empty() {
            return Ok(self.clone());
        }
        if picks.len() != self.components.len() {
            return invalid("one index list per component is required");
        }
        let mut cs = Vec::new();
        for (c, p) in self.components.iter().zip(picks) {
            if p.iter().any(|&i| i >= c.len()) {
                return invalid("sub-box index out of range");
            }
            cs.push(TupleSet::new(c.tuple_len(), p.iter().map(|&i| c.tuples()[i].clone()))?);
        }
        ParamBox::new(cs)
    }

    /// Every sub-box of height `m`.
    pub fn sub_boxes(&self, m: usize) -> Vec<ParamBox> {
        if self.components.is_empty() {
            return vec![self.clone()];
        }
        let choices: Vec<Vec<Vec<usize>>> = self.components.iter().map(|c| combinations(c.len(), m)).collect();
        let mut picks: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for ch in &choices {
            let mut next = Vec::new();
            for p in &picks {
                for c in ch {
                    let mut q = p.clone();
                    q.push(c.clone());
                    next.push(q);
                }
            }
            picks = next;
        }
        picks.iter().map(|p| self.sub_box(p).unwrap()).collect()
    }

    /// The box with every element `x` replaced by `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> ParamBox {
        let map = |t: &Vec<usize>| t.iter().map(|&x| perm[x]).collect::<Vec<_>>();
        if self.components.is_empty() {
            return ParamBox::point(map(&self.point));
        }
        ParamBox {
            components: self
                .components
                .iter()
                .map(|c| TupleSet::new(c.tuple_len(), c.tuples().iter().map(map)).unwrap())
                .collect(),
            point: Vec::new(),
        }
    }
}

/// The 1-based JSON form of a box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxJson {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<usize>>,
}

impl BoxJson {
    pub fn from_box(b: &ParamBox) -> Self {
        if b.ell() == 0 {
            BoxJson {
                components: Vec::new(),
                point: Some(b.point.iter().map(|x| x + 1).collect()),
            }
        } else {
            BoxJson {
                components: b.components.iter().map(|c| one_based(c.tuples())).collect(),
                point: None,
            }
        }
    }

    pub fn to_box(&self) -> Result<ParamBox> {
        match (&self.point, self.components.is_empty()) {
            (Some(p), true) => {
                let z = zero_based(std::slice::from_ref(p))?;
                Ok(ParamBox::point(z.into_iter().next().unwrap()))
            }
            (None, false) => {
                let mut cs = Vec::new();
                for c in &self.components {
                    cs.push(zero_based(c)?);
                }
                ParamBox::from_tuples(cs)
            }
            _ => invalid("a box has either components or a point"),
        }
    }
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// A φ-type over a box: bit `i` says whether `φ(x̄; b_i)` holds, `b_i`
/// being the `i`-th product tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhiType(pub Bits);

impl PhiType {
    pub fn bits(&self) -> &Bits {
        &self.0
    }
}

fn check_box_for(phi: &QfFormula, b: &ParamBox) -> Result<()> {
    if b.arity() != phi.y_arity() {
        return invalid(format!(
            "box tuples have length {} but the formula has {} parameter variables",
            b.arity(),
            phi.y_arity()
        ));
    }
    Ok(())
}

/// The φ-type of `a` over `b` in `m`.
pub fn phi_type_of(phi: &QfFormula, m: &Structure, a: &[usize], b: &ParamBox) -> Result<PhiType> {
    check_box_for(phi, b)?;
    if a.len() != phi.x_arity() {
        return invalid(format!("expected {} object entries, got {}", phi.x_arity(), a.len()));
    }
    if a.iter().chain(b.underlying().iter()).any(|&x| x >= m.n()) {
        return invalid(format!("tuple or box element outside [{}]", m.n()));
    }
    Ok(type_with(phi, m, a, &b.product_tuples()))
}

pub(crate) fn type_with(phi: &QfFormula, m: &Structure, a: &[usize], tuples: &[Vec<usize>]) -> PhiType {
    let s = a.len();
    let mut vals = a.to_vec();
    PhiType(Bits::from_bools(tuples.iter().map(|t| {
        vals.truncate(s);
        vals.extend_from_slice(t);
        phi.body().eval(m, &vals)
    })))
}

/// `2^{size}` if it fits in a `u64`.
pub(crate) fn full_count(size: usize) -> Option<u64> {
    (size < 64).then(|| 1u64 << size)
}

/// Types over `b` realized by some tuple in some member of the property
/// whose universe `[n']` contains the box, with `n' ≤ budget_n`.
///
/// A realization only needs the box elements plus the tuple's own new
/// elements, so `n'` runs up to `span + |x̄|`; at each size only tuples
/// covering every element past the box span are examined.
pub fn realized_types(
    store: &MemberStore,
    phi: &QfFormula,
    b: &ParamBox,
    budget_n: usize,
) -> Result<BTreeSet<PhiType>> {
    check_box_for(phi, b)?;
    if store.property().language() != phi.language() {
        return invalid("formula and property use different languages");
    }
    let span = b.span();
    if span > budget_n {
        return invalid(format!("box elements exceed the budget [{budget_n}]"));
    }
    let tuples = b.product_tuples();
    let full = full_count(tuples.len());
    let s = phi.x_arity();
    let mut found: HashSet<PhiType> = HashSet::new();
    for n in span..=budget_n.min(span + s) {
        let members = store.members(n)?;
        let mut objects = Vec::new();
        for_each_tuple(n, s, |a| {
            if (span..n).all(|x| a.contains(&x)) {
                objects.push(a.to_vec());
            }
        });
        let part: HashSet<PhiType> = members
            .par_iter()
            .fold(HashSet::new, |mut acc, m| {
                for a in &objects {
                    acc.insert(type_with(phi, m, a, &tuples));
                }
                acc
            })
            .reduce(HashSet::new, |mut x, y| {
                x.extend(y);
                x
            });
        found.extend(part);
        if full.is_some_and(|f| found.len() as u64 == f) {
            break;
        }
    }
    Ok(found.into_iter().collect())
}

/// Whether the realized types over `b` exhaust all `2^{|b|}` patterns.
pub fn shatters_box(store: &MemberStore, phi: &QfFormula, b: &ParamBox, budget_n: usize) -> Result<bool> {
    let full = full_count(b.size());
    let got = realized_types(store, phi, b, budget_n)?.len() as u64;
    Ok(full == Some(got))
}

/// Boxes of height `m` for tuples of length `y_arity`, up to relabeling:
/// the underlying set is exactly `[u]` for some `u ≤ min(budget_n, y_arity·m)`
/// and boxes equal under a permutation of `[u]` are listed once (for
/// `u ≤ 7`). Point boxes (`ℓ = 0`) are listed by equality pattern.
pub fn canonical_boxes(y_arity: usize, ell: usize, m: usize, budget_n: usize, limits: &Limits) -> Result<Vec<ParamBox>> {
    if ell > y_arity {
        return invalid(format!("ℓ = {ell} exceeds the parameter arity {y_arity}"));
    }
    if ell == 0 {
        let mut out = Vec::new();
        restricted_growth(y_arity, &mut Vec::new(), 0, budget_n, &mut out);
        return Ok(out.into_iter().map(ParamBox::point).collect());
    }
    if m == 0 {
        return invalid("height must be at least 1");
    }
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<Vec<Vec<usize>>>> = HashSet::new();
    let mut examined = 0u64;
    for u in 1..=budget_n.min(y_arity * m) {
        let perms = if u <= 7 { permutations(u) } else { vec![(0..u).collect()] };
        for comp in compositions(y_arity, ell) {
            let pools: Vec<Vec<Vec<usize>>> = comp
                .iter()
                .map(|&k| {
                    let mut v = Vec::new();
                    for_each_tuple(u, k, |t| v.push(t.to_vec()));
                    v
                })
                .collect();
            let choices: Vec<Vec<Vec<usize>>> = pools.iter().map(|p| combinations(p.len(), m)).collect();
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            let mut pick = vec![0usize; ell];
            'odometer: loop {
                examined += 1;
                if examined > limits.max_boxes {
                    return too_big("too many candidate boxes");
                }
                let comps: Vec<Vec<Vec<usize>>> = (0..ell)
                    .map(|i| choices[i][pick[i]].iter().map(|&j| pools[i][j].clone()).collect())
                    .collect();
                let covered: BTreeSet<usize> = comps.iter().flatten().flatten().copied().collect();
                if covered.len() == u {
                    let key = perms
                        .iter()
                        .map(|p| {
                            comps
                                .iter()
                                .map(|c| {
                                    let mut c: Vec<Vec<usize>> =
                                        c.iter().map(|t| t.iter().map(|&x| p[x]).collect()).collect();
                                    c.sort();
                                    c
                                })
                                .collect::<Vec<_>>()
                        })
                        .min()
                        .unwrap();
                    if seen.insert(key) {
                        out.push(ParamBox::from_tuples(comps)?);
                    }
                }
                let mut i = 0;
                loop {
                    if i == ell {
                        break 'odometer;
                    }
                    pick[i] += 1;
                    if pick[i] < choices[i].len() {
                        break;
                    }
                    pick[i] = 0;
                    i += 1;
                }
            }
        }
    }
    Ok(out)
}

fn restricted_growth(len: usize, cur: &mut Vec<usize>, used: usize, cap: usize, out: &mut Vec<Vec<usize>>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for v in 0..=used {
        if v >= cap {
            break;
        }
        cur.push(v);
        restricted_growth(len, cur, used.max(v + 1), cap, out);
        cur.pop();
    }
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            if k.is_multiple_of(2) {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut p, &mut out);
    out
}
