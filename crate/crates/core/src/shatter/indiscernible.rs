//! Extraction of equality-indiscernible subsets from finite sets of tuples.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Result};
use crate::structure::TupleSet;

/// The equality pattern of a tuple over no parameters, as a restricted
/// growth string: equal entries get equal labels, numbered by first
/// occurrence.
pub fn equality_type_over_empty(t: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    t.iter()
        .map(|v| match seen.iter().position(|x| x == v) {
            Some(i) => i,
            None => {
                seen.push(*v);
                seen.len() - 1
            }
        })
        .collect()
}

fn pair_type(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut ab = a.to_vec();
    ab.extend_from_slice(b);
    equality_type_over_empty(&ab)
}

/// Whether every ordered pair of distinct tuples has the same equality
/// pattern.
pub fn is_equality_indiscernible(set: &TupleSet) -> bool {
    let ts = set.tuples();
    let mut want: Option<Vec<usize>> = None;
    for (i, a) in ts.iter().enumerate() {
        for (j, b) in ts.iter().enumerate() {
            if i == j {
                continue;
            }
            let p = pair_type(a, b);
            match &want {
                None => want = Some(p),
                Some(w) if *w != p => return false,
                _ => {}
            }
        }
    }
    true
}

/// The smallest `k` with `k^{2^t} · 2^{C(t,2)} ≥ size`, i.e.
/// `⌈(size / 2^{C(t,2)})^{1/2^t}⌉` computed exactly.
pub fn indiscernible_size_bound(size: usize, t: usize) -> usize {
    if size == 0 {
        return 0;
    }
    let pairs = (t * t.saturating_sub(1) / 2) as u32;
    let exp = 1u32.checked_shl(t as u32).unwrap_or(u32::MAX);
    let reaches = |k: u128| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..exp {
            acc = acc.saturating_mul(k);
            if acc >= size as u128 {
                return true;
            }
        }
        acc.saturating_mul(1u128.checked_shl(pairs).unwrap_or(u128::MAX)) >= size as u128
    };
    let mut k = 1usize;
    while !reaches(k as u128) {
        k += 1;
    }
    k
}

/// How the final answer was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionPath {
    /// The staged selection was already indiscernible.
    Staged,
    /// Tuples with clashing coordinates were removed afterwards.
    Repaired,
    /// An exhaustive search over the input found a larger answer.
    Search,
}

/// The staged selections `Y_0 ⊇ Y_1 ⊇ ⋯ ⊇ Y_t` and the returned set.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub stages: Vec<TupleSet>,
    pub result: TupleSet,
    pub path: ExtractionPath,
    pub bound: usize,
}

impl Extraction {
    pub fn meets_bound(&self) -> bool {
        self.result.len() >= self.bound
    }
}

fn staged(b: &TupleSet) -> Vec<Vec<Vec<usize>>> {
    let t = b.tuple_len();
    // Largest class of one equality pattern; ties go to the class whose
    // least tuple is smallest.
    let mut groups: Vec<(Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
    for x in b.tuples() {
        let p = equality_type_over_empty(x);
        match groups.iter_mut().find(|(q, _)| *q == p) {
            Some((_, g)) => g.push(x.clone()),
            None => groups.push((p, vec![x.clone()])),
        }
    }
    let mut best = 0;
    for (i, (_, g)) in groups.iter().enumerate() {
        if g.len() > groups[best].1.len() {
            best = i;
        }
    }
    let mut y = groups.swap_remove(best).1;
    let mut stages = vec![y.clone()];
    for i in 0..t {
        let mut by_value: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for x in &y {
            by_value.entry(x[i]).or_default().push(x.clone());
        }
        let size = y.len() as u128;
        let heavy = by_value.iter().find(|(_, g)| (g.len() as u128).pow(2) >= size);
        y = match heavy {
            Some((_, g)) => g.clone(),
            None => {
                let mut reps: Vec<Vec<usize>> = by_value.values().map(|g| g[0].clone()).collect();
                reps.sort();
                reps
            }
        };
        stages.push(y.clone());
    }
    stages
}

/// Removes tuples so that no coordinate value of one tuple reappears at a
/// different coordinate of another. Coordinates are either constant or
/// injective on a staged selection, so what remains is indiscernible.
fn repair(y: &[Vec<usize>]) -> Vec<Vec<usize>> {
    if y.len() < 2 {
        return y.to_vec();
    }
    let t = y[0].len();
    let injective: Vec<usize> = (0..t)
        .filter(|&i| y.iter().map(|x| x[i]).collect::<BTreeSet<_>>().len() == y.len())
        .collect();
    let clash = |a: &[usize], b: &[usize]| {
        injective
            .iter()
            .any(|&i| injective.iter().any(|&j| i != j && (a[i] == b[j] || b[i] == a[j])))
    };
    let n = y.len();
    let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && clash(&y[i], &y[j])).collect()).collect();
    let keep = if n <= 64 {
        max_independent(&adj)
    } else {
        let mut keep = Vec::new();
        for (i, row) in adj.iter().enumerate() {
            if keep.iter().all(|&k: &usize| !row[k]) {
                keep.push(i);
            }
        }
        keep
    };
    keep.into_iter().map(|i| y[i].clone()).collect()
}

/// Exact maximum independent set on at most 64 vertices (lowest indices
/// preferred among equals).
fn max_independent(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let nbr: Vec<u64> = adj
        .iter()
        .map(|row| row.iter().enumerate().fold(0u64, |m, (j, &e)| if e { m | 1 << j } else { m }))
        .collect();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    fn go(cand: u64, cur: u64, best: &mut u64, nbr: &[u64]) {
        if cand == 0 {
            if cur.count_ones() > best.count_ones() {
                *best = cur;
            }
            return;
        }
        if cur.count_ones() + cand.count_ones() <= best.count_ones() {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let bit = 1u64 << v;
        go(cand & !bit & !nbr[v], cur | bit, best, nbr);
        if nbr[v] & cand != 0 {
            go(cand & !bit, cur, best, nbr);
        }
    }
    let mut best = 0u64;
    go(all, 0, &mut best, &nbr);
    (0..n).filter(|&i| best >> i & 1 == 1).collect()
}

/// Exhaustive search for `k` tuples of `b` pairwise of one equality
/// pattern (in both orders). Skipped for large inputs.
fn search(b: &TupleSet, k: usize) -> Option<Vec<Vec<usize>>> {
    let ts = b.tuples();
    let n = ts.len();
    if n > 1500 || k < 2 {
        return None;
    }
    let mut patterns: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut sym = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i < j {
                let p = pair_type(&ts[i], &ts[j]);
                if p == pair_type(&ts[j], &ts[i]) {
                    patterns.insert(p.clone());
                    sym[i][j] = Some(p.clone());
                    sym[j][i] = Some(p);
                }
            }
        }
    }
    for p in patterns {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| sym[i][j].as_ref() == Some(&p)).collect())
            .collect();
        let mut cur = Vec::new();
        let cand: Vec<usize> = (0..n).filter(|&i| adj[i].len() + 1 >= k).collect();
        if clique(&adj, &cand, k, &mut cur) {
            return Some(cur.into_iter().map(|i| ts[i].clone()).collect());
        }
    }
    None
}

fn clique(adj: &[Vec<usize>], cand: &[usize], k: usize, cur: &mut Vec<usize>) -> bool {
    if cur.len() == k {
        return true;
    }
    for (pos, &v) in cand.iter().enumerate() {
        if cur.len() + cand.len() - pos < k {
            return false;
        }
        let next: Vec<usize> = cand[pos + 1..]
            .iter()
            .copied()
            .filter(|w| adj[v].binary_search(w).is_ok())
            .collect();
        cur.push(v);
        if clique(adj, &next, k, cur) {
            return true;
        }
        cur.pop();
    }
    false
}

/// Runs the staged extraction and, where needed, the repair and search
/// steps, reporting every stage.
pub fn extraction_report(b: &TupleSet) -> Result<Extraction> {
    if b.is_empty() {
        return invalid("cannot extract from an empty set of tuples");
    }
    if b.tuple_len() == 0 {
        return invalid("tuples must have length at least 1");
    }
    let t = b.tuple_len();
    let bound = indiscernible_size_bound(b.len(), t);
    let stages_raw = staged(b);
    let stages: Vec<TupleSet> = stages_raw.iter().map(|s| TupleSet::new(t, s.clone()).unwrap()).collect();
    let last = stages.last().unwrap().clone();
    let (mut result, mut path) = if is_equality_indiscernible(&last) {
        (last, ExtractionPath::Staged)
    } else {
        let fixed = TupleSet::new(t, repair(stages_raw.last().unwrap()))?;
        (fixed, ExtractionPath::Repaired)
    };
    if result.len() < bound {
        if let Some(found) = search(b, bound) {
            result = TupleSet::new(t, found)?;
            path = ExtractionPath::Search;
        }
    }
    Ok(Extraction {
        stages,
        result,
        path,
        bound,
    })
}

/// An equality-indiscernible subset of `b`.
pub fn extract_indiscernible(b: &TupleSet) -> Result<TupleSet> {
    Ok(extraction_report(b)?.result)
}
