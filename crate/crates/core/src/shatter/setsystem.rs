//! Explicit set systems over `X^k` with `X = [n]`, their shatter functions
//! and VC-type dimensions.

use std::collections::{HashMap, HashSet};

use crate::bits::Bits;
use crate::error::{invalid, too_big, Result};
use crate::limits::Limits;
use crate::structure::{checked_pow, for_each_tuple, tuple_rank, tuple_unrank};

/// A family of subsets of `[n]^k`. Each set is a bit vector indexed by
/// tuple rank (first coordinate least significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    domain: usize,
    arity: usize,
    sets: Vec<Bits>,
}

impl SetSystem {
    pub fn new(domain: usize, arity: usize, sets: impl IntoIterator<Item = Bits>) -> Result<Self> {
        let points = match checked_pow(domain, arity) {
            Some(p) if p <= 1 << 24 => p,
            _ => return too_big(format!("[{domain}]^{arity} is too large")),
        };
        let mut sets: Vec<Bits> = sets.into_iter().collect();
        if let Some(b) = sets.iter().find(|b| b.len() != points) {
            return invalid(format!("set of width {} over {points} points", b.len()));
        }
        sets.sort();
        sets.dedup();
        Ok(SetSystem { domain, arity, sets })
    }

    /// From explicit tuple lists (0-based).
    pub fn from_tuples(domain: usize, arity: usize, sets: &[Vec<Vec<usize>>]) -> Result<Self> {
        let points = checked_pow(domain, arity).unwrap_or(usize::MAX);
        let mut out = Vec::new();
        for s in sets {
            let mut b = Bits::new(points.min(1 << 24));
            for t in s {
                if t.len() != arity || t.iter().any(|&x| x >= domain) {
                    return invalid(format!("tuple {t:?} is not in [{domain}]^{arity}"));
                }
                b.insert(tuple_rank(domain, t));
            }
            out.push(b);
        }
        SetSystem::new(domain, arity, out)
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn point_count(&self) -> usize {
        checked_pow(self.domain, self.arity).unwrap()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Bits] {
        &self.sets
    }

    /// `|{S ∩ P : S ∈ F}|` for a list of point ranks `P`.
    pub fn trace_count(&self, points: &[usize]) -> usize {
        if points.len() <= 64 {
            let mut keys: Vec<u64> = self
                .sets
                .iter()
                .map(|s| points.iter().enumerate().fold(0u64, |w, (i, &p)| w | (s.get(p) as u64) << i))
                .collect();
            keys.sort_unstable();
            keys.dedup();
            return keys.len();
        }
        let mut seen: HashSet<Bits> = HashSet::new();
        for s in &self.sets {
            seen.insert(Bits::from_bools(points.iter().map(|&p| s.get(p))));
        }
        seen.len()
    }

    /// Whether every subset of `points` is a trace.
    pub fn shatters(&self, points: &[usize]) -> bool {
        points.len() < 63 && self.trace_count(points) as u64 == 1u64 << points.len()
    }
}

/// All compositions of `total` into `parts` positive integers, in
/// lexicographic order.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 1..=left.saturating_sub(parts - 1) {
            cur.push(k);
            go(left - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        go(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// A box `A_1⋯A_ℓ` in `X^{r'}` given by its components' tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetBox {
    pub composition: Vec<usize>,
    pub components: Vec<Vec<Vec<usize>>>,
}

impl SetBox {
    /// Ranks in `[n]^{r'}` of every concatenation `a_1⋯a_ℓ`.
    pub fn points(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(comps: &[Vec<Vec<usize>>], n: usize, cur: &mut Vec<usize>, out: &mut Vec<usize>) {
            match comps.split_first() {
                None => out.push(tuple_rank(n, cur)),
                Some((first, rest)) => {
                    for a in first {
                        let len = cur.len();
                        cur.extend_from_slice(a);
                        go(rest, n, cur, out);
                        cur.truncate(len);
                    }
                }
            }
        }
        go(&self.components, n, &mut cur, &mut out);
        out
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k as u128 {
        r = r * (n as u128 - i) / (i + 1);
    }
    r
}

fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_tuple(n, k, |t| out.push(t.to_vec()));
    out
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn full(m: usize, ell: usize) -> Option<u64> {
    let e = checked_pow(m, ell)?;
    if e >= 63 {
        None
    } else {
        Some(1u64 << e)
    }
}

fn check_params(f: &SetSystem, ell: usize, m: usize) -> Result<()> {
    if ell == 0 || ell > f.arity {
        return invalid(format!("ℓ must lie in 1..={}, got {ell}", f.arity));
    }
    if m == 0 {
        return invalid("height must be at least 1");
    }
    Ok(())
}

/// `π_ℓ(F, m)`: the largest number of traces of `F` on an `(ℓ, r')`-box of
/// height `m`, `r'` being the arity of `F`.
///
/// Components `A_1..A_{ℓ-1}` are enumerated outright; the last component is
/// grown one tuple at a time and abandoned once the trace count times the
/// doubling still available cannot beat the best box found.
pub fn shatter_function(f: &SetSystem, ell: usize, m: usize, limits: &Limits) -> Result<u64> {
    check_params(f, ell, m)?;
    let n = f.domain;
    let cap = full(m, ell).map_or(f.len() as u64, |x| x.min(f.len() as u64));
    let col = checked_pow(m, ell - 1).unwrap_or(usize::MAX);
    if col > 64 {
        return too_big(format!("boxes with {col} points per column are not supported"));
    }
    let mut best = 0u64;
    let mut visited = 0u64;
    for comp in compositions(f.arity, ell) {
        let pools: Vec<Vec<Vec<usize>>> = comp.iter().map(|&k| all_tuples(n, k)).collect();
        if pools.iter().any(|p| p.len() < m) {
            continue;
        }
        // Enumerate the first ℓ-1 components.
        let mut prefix_choices: Vec<Vec<Vec<Vec<usize>>>> = vec![Vec::new()];
        for pool in &pools[..ell - 1] {
            let mut next = Vec::new();
            for pre in &prefix_choices {
                for_each_combination(pool.len(), m, |idx| {
                    let mut p = pre.clone();
                    p.push(idx.iter().map(|&i| pool[i].clone()).collect());
                    next.push(p);
                    true
                });
            }
            prefix_choices = next;
            if prefix_choices.len() as u64 > limits.max_boxes {
                return too_big("too many boxes for the shatter-function search");
            }
        }
        let last = &pools[ell - 1];
        for pre in &prefix_choices {
            // Concatenations of the prefix components, as tuples.
            let mut heads: Vec<Vec<usize>> = vec![Vec::new()];
            for c in pre {
                let mut next = Vec::new();
                for h in &heads {
                    for a in c {
                        let mut x = h.clone();
                        x.extend_from_slice(a);
                        next.push(x);
                    }
                }
                heads = next;
            }
            // For each candidate last tuple, the column of point ranks.
            let columns: Vec<Vec<usize>> = last
                .iter()
                .map(|b| {
                    heads
                        .iter()
                        .map(|h| {
                            let mut t = h.clone();
                            t.extend_from_slice(b);
                            tuple_rank(n, &t)
                        })
                        .collect()
                })
                .collect();
            let patterns: Vec<Vec<u64>> = columns
                .iter()
                .map(|col| {
                    f.sets
                        .iter()
                        .map(|s| {
                            let mut w = 0u64;
                            for (i, &p) in col.iter().enumerate() {
                                if s.get(p) {
                                    w |= 1 << i;
                                }
                            }
                            w
                        })
                        .collect()
                })
                .collect();
            let classes = vec![0u32; f.len()];
            grow(
                &patterns,
                m,
                col,
                0,
                0,
                &classes,
                1,
                cap,
                &mut best,
                &mut visited,
                limits,
            )?;
            if best == cap {
                return Ok(best);
            }
        }
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn grow(
    patterns: &[Vec<u64>],
    m: usize,
    col: usize,
    chosen: usize,
    start: usize,
    classes: &[u32],
    class_count: usize,
    cap: u64,
    best: &mut u64,
    visited: &mut u64,
    limits: &Limits,
) -> Result<()> {
    *visited += 1;
    if *visited > limits.max_boxes {
        return too_big("too many boxes for the shatter-function search");
    }
    if chosen == m {
        *best = (*best).max(class_count as u64);
        return Ok(());
    }
    let remaining = (m - chosen) * col;
    let bound = if remaining >= 63 {
        cap
    } else {
        ((class_count as u64).saturating_mul(1 << remaining)).min(cap)
    };
    if bound <= *best {
        return Ok(());
    }
    for e in start..patterns.len() {
        if patterns.len() - e < m - chosen {
            break;
        }
        let mut ids: HashMap<(u32, u64), u32> = HashMap::new();
        let next: Vec<u32> = classes
            .iter()
            .zip(&patterns[e])
            .map(|(&c, &p)| {
                let k = ids.len() as u32;
                *ids.entry((c, p)).or_insert(k)
            })
            .collect();
        grow(patterns, m, col, chosen + 1, e + 1, &next, ids.len(), cap, best, visited, limits)?;
        if *best == cap {
            return Ok(());
        }
    }
    Ok(())
}

/// `π_ℓ` of a family of subsets of an `ℓ`-box `[d_1] × ⋯ × [d_ℓ]`: the
/// largest trace count on a sub-box `X'_1 × ⋯ × X'_ℓ` with every `|X'_i| = m`.
///
/// Point `(c_1, …, c_ℓ)` has rank `Σ c_i · d_1⋯d_{i-1}`.
pub fn product_shatter_function(dims: &[usize], sets: &[Bits], m: usize, limits: &Limits) -> Result<u64> {
    if dims.is_empty() || m == 0 {
        return invalid("need at least one factor and height ≥ 1");
    }
    let total: usize = dims.iter().product();
    if sets.iter().any(|s| s.len() != total) {
        return invalid("set width does not match the box");
    }
    let distinct: HashSet<&Bits> = sets.iter().collect();
    let cap = full(m, dims.len()).map_or(distinct.len() as u64, |x| x.min(distinct.len() as u64));
    let mut count: u128 = 1;
    for &d in dims {
        count = count.saturating_mul(binom(d, m));
    }
    if count == 0 {
        return Ok(0);
    }
    if count > limits.max_boxes as u128 {
        return too_big(format!("{count} sub-boxes exceed the budget of {}", limits.max_boxes));
    }
    let mut strides = vec![1usize; dims.len()];
    for i in 1..dims.len() {
        strides[i] = strides[i - 1] * dims[i - 1];
    }
    let choices: Vec<Vec<Vec<usize>>> = dims
        .iter()
        .map(|&d| {
            let mut v = Vec::new();
            for_each_combination(d, m, |idx| {
                v.push(idx.to_vec());
                true
            });
            v
        })
        .collect();
    let mut best = 0u64;
    let mut pick = vec![0usize; dims.len()];
    loop {
        // Points of the current sub-box.
        let mut points = vec![0usize];
        for (i, c) in pick.iter().enumerate() {
            let sel = &choices[i][*c];
            let stride = strides[i];
            points = points
                .iter()
                .flat_map(|&p| sel.iter().map(move |&x| p + x * stride))
                .collect();
        }
        let traces: HashSet<Vec<bool>> = distinct
            .iter()
            .map(|s| points.iter().map(|&p| s.get(p)).collect())
            .collect();
        best = best.max(traces.len() as u64);
        if best == cap {
            return Ok(best);
        }
        // Odometer over choices.
        let mut i = 0;
        loop {
            if i == dims.len() {
                return Ok(best);
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

/// The composition side of the reduction: the maximum over compositions
/// `k_1 + ⋯ + k_ℓ = r'` of the product-box shatter function of `F` viewed
/// inside `X^{k_1} × ⋯ × X^{k_ℓ}`.
pub fn composition_max(f: &SetSystem, ell: usize, m: usize, limits: &Limits) -> Result<u64> {
    check_params(f, ell, m)?;
    let mut best = 0;
    for comp in compositions(f.arity, ell) {
        let dims: Vec<usize> = comp.iter().map(|&k| checked_pow(f.domain, k).unwrap()).collect();
        best = best.max(product_shatter_function(&dims, &f.sets, m, limits)?);
    }
    Ok(best)
}

/// An `(ℓ, r')`-box of height `m` shattered by `F`, if one exists.
///
/// Boxes are grown height by height (one new tuple per component per
/// step); every intermediate box is a sub-box of the final one, so it must
/// already be shattered.
pub fn find_shattered_box(f: &SetSystem, ell: usize, m: usize, limits: &Limits) -> Result<Option<SetBox>> {
    check_params(f, ell, m)?;
    match full(m, ell) {
        Some(x) if x <= f.len() as u64 => {}
        _ => return Ok(None),
    }
    let n = f.domain;
    let mut visited = 0u64;
    for comp in compositions(f.arity, ell) {
        let pools: Vec<Vec<Vec<usize>>> = comp.iter().map(|&k| all_tuples(n, k)).collect();
        let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); ell];
        if let Some(b) = grow_shattered(f, &comp, &pools, m, &mut chosen, 0, &mut visited, limits)? {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn grow_shattered(
    f: &SetSystem,
    comp: &[usize],
    pools: &[Vec<Vec<usize>>],
    m: usize,
    chosen: &mut Vec<Vec<usize>>,
    comp_idx: usize,
    visited: &mut u64,
    limits: &Limits,
) -> Result<Option<SetBox>> {
    let ell = comp.len();
    let height = chosen[ell - 1].len();
    if comp_idx == 0 && height > 0 {
        *visited += 1;
        if *visited > limits.max_boxes {
            return too_big("too many boxes for the shattered-box search");
        }
        let b = SetBox {
            composition: comp.to_vec(),
            components: chosen
                .iter()
                .zip(pools)
                .map(|(c, p)| c.iter().map(|&i| p[i].clone()).collect())
                .collect(),
        };
        if !f.shatters(&b.points(f.domain)) {
            return Ok(None);
        }
        if height == m {
            return Ok(Some(b));
        }
    }
    let start = chosen[comp_idx].last().map_or(0, |&x| x + 1);
    for e in start..pools[comp_idx].len() {
        chosen[comp_idx].push(e);
        let next = (comp_idx + 1) % ell;
        let r = grow_shattered(f, comp, pools, m, chosen, next, visited, limits)?;
        chosen[comp_idx].pop();
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

/// `VC_ℓ(F)`: the largest height of a shattered `(ℓ, r')`-box (0 if none).
pub fn vc_ell_dimension(f: &SetSystem, ell: usize, limits: &Limits) -> Result<usize> {
    // A (1, r')-box is just a set of points; the level-wise search is faster.
    if ell == 1 {
        return vc_dimension(f, limits);
    }
    let mut m = 0;
    while find_shattered_box(f, ell, m + 1, limits)?.is_some() {
        m += 1;
    }
    Ok(m)
}

/// `VC(F)`: the largest size of a set of points of `[n]^k` shattered by `F`.
///
/// Shattered sets are closed under subsets, so candidates of size `j + 1`
/// are built from shattered sets of size `j` whose every `j`-subset is
/// shattered.
pub fn vc_dimension(f: &SetSystem, limits: &Limits) -> Result<usize> {
    let points = f.point_count();
    if f.len() < 2 {
        return Ok(0);
    }
    let mut level: Vec<Vec<usize>> = (0..points).filter(|&p| f.shatters(&[p])).map(|p| vec![p]).collect();
    let mut d = 0;
    let mut work = 0u64;
    while !level.is_empty() {
        d += 1;
        if (1u64 << (d + 1).min(63)) > f.len() as u64 {
            break;
        }
        let known: HashSet<&Vec<usize>> = level.iter().collect();
        let mut next = Vec::new();
        for s in &level {
            for p in s.last().unwrap() + 1..points {
                work += 1;
                if work > limits.max_boxes {
                    return too_big("too many candidate sets for the VC-dimension search");
                }
                let mut cand = s.clone();
                cand.push(p);
                let all_subsets = (0..cand.len() - 1).all(|skip| {
                    let sub: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &x)| x)
                        .collect();
                    known.contains(&sub)
                });
                if all_subsets && f.shatters(&cand) {
                    next.push(cand);
                }
            }
        }
        level = next;
    }
    Ok(d)
}

/// The point of rank `r` as a tuple.
pub fn point_tuple(f: &SetSystem, r: usize) -> Vec<usize> {
    let mut t = Vec::new();
    tuple_unrank(f.domain, f.arity, r, &mut t);
    t
}
