//! The `rel(L)` family and definable traces.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Formula, QfFormula};
use crate::error::{invalid, Result};
use crate::structure::{for_each_tuple, Language, Structure};

/// A relation symbol together with a set partition of its argument positions.
///
/// Parts are sorted by their least element, so part `i` is the class of the
/// `i`-th new variable `z_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPair {
    pub rel: usize,
    pub parts: Vec<Vec<usize>>,
}

impl IndexPair {
    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    /// For each argument position, the index of the part containing it.
    pub fn part_of(&self) -> Vec<usize> {
        let t: usize = self.parts.iter().map(|p| p.len()).sum();
        let mut out = vec![0; t];
        for (i, p) in self.parts.iter().enumerate() {
            for &j in p {
                out[j] = i;
            }
        }
        out
    }
}

/// All set partitions of `0..t`, parts ordered by least element.
pub fn set_partitions(t: usize) -> Vec<Vec<Vec<usize>>> {
    // Restricted growth strings: a[0] = 0, a[i] ≤ 1 + max(a[..i]).
    fn go(i: usize, t: usize, a: &mut Vec<usize>, mx: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == t {
            let k = if t == 0 { 0 } else { mx + 1 };
            let mut parts = vec![Vec::new(); k];
            for (pos, &b) in a.iter().enumerate() {
                parts[b].push(pos);
            }
            out.push(parts);
            return;
        }
        let hi = if i == 0 { 0 } else { mx + 1 };
        for b in 0..=hi {
            a.push(b);
            go(i + 1, t, a, if i == 0 { 0 } else { mx.max(b) }, out);
            a.pop();
        }
    }
    let mut out = Vec::new();
    go(0, t, &mut Vec::new(), 0, &mut out);
    out
}

/// One member of `rel(L)`: `R_p(z̄) ∧ ⋀ z_i ≠ z_j`, with the `z`'s placed
/// in the order `order` and split so the first `split` become `x̄`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelFormula {
    pub pair: IndexPair,
    /// `order[p]` is the index of the `z` placed at variable position `p`.
    pub order: Vec<usize>,
    pub split: usize,
    pub formula: QfFormula,
}

impl RelFormula {
    /// Variable position of each `z_i`.
    fn position_of(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &z) in self.order.iter().enumerate() {
            pos[z] = p;
        }
        pos
    }

    /// The fact encoded by a satisfying assignment of this formula.
    pub fn fact_for(&self, vals: &[usize]) -> Vec<usize> {
        let pos = self.position_of();
        self.pair
            .part_of()
            .into_iter()
            .map(|part| vals[pos[part]])
            .collect()
    }
}

fn permutations(s: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; s], &mut out);
    out
}

/// Syntactic normal form used for deduplication: arities, the relational
/// atom, and the sorted list of distinctness constraints.
fn normal_key(f: &QfFormula) -> (usize, usize, Vec<Formula>) {
    let mut parts: Vec<Formula> = match f.body() {
        Formula::And(fs) => fs
            .iter()
            .map(|g| match g {
                Formula::Not(inner) => match **inner {
                    Formula::Eq(a, b) => Formula::neq(a.min(b), a.max(b)),
                    _ => g.clone(),
                },
                _ => g.clone(),
            })
            .collect(),
        other => vec![other.clone()],
    };
    parts.sort();
    (f.x_arity(), f.y_arity(), parts)
}

/// Every formula of `rel(L)` with its provenance, syntactic duplicates removed.
pub fn rel_family(lang: &Arc<Language>) -> Vec<RelFormula> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rel in 0..lang.len() {
        let t = lang.arity(rel);
        for parts in set_partitions(t) {
            let pair = IndexPair { rel, parts };
            let s = pair.part_count();
            let part_of = pair.part_of();
            for order in permutations(s) {
                let mut pos = vec![0; s];
                for (p, &z) in order.iter().enumerate() {
                    pos[z] = p;
                }
                for split in 0..=s {
                    let atom = Formula::Atom {
                        rel,
                        args: part_of.iter().map(|&z| pos[z]).collect(),
                    };
                    let mut conj = vec![atom];
                    for i in 0..s {
                        for j in i + 1..s {
                            let (a, b) = (pos[i].min(pos[j]), pos[i].max(pos[j]));
                            conj.push(Formula::neq(a, b));
                        }
                    }
                    let body = if conj.len() == 1 {
                        conj.pop().unwrap()
                    } else {
                        Formula::And(conj)
                    };
                    let formula = QfFormula::new(lang.clone(), split, s - split, body).unwrap();
                    if seen.insert(normal_key(&formula)) {
                        out.push(RelFormula {
                            pair: pair.clone(),
                            order: order.clone(),
                            split,
                            formula,
                        });
                    }
                }
            }
        }
    }
    out
}

/// The formulas of `rel(L)`.
pub fn rel_formulas(lang: &Arc<Language>) -> Vec<QfFormula> {
    rel_family(lang).into_iter().map(|r| r.formula).collect()
}

/// `φ(M)`: all concatenated tuples `āb̄` over `[n]` satisfying `φ`, in rank
/// order.
pub fn formula_trace(phi: &QfFormula, m: &Structure) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_tuple(m.n(), phi.arity(), |t| {
        if phi.eval_concat(m, t) {
            out.push(t.to_vec());
        }
    });
    out
}

/// Rebuilds a structure on `[n]` from the traces of a subfamily of `rel(L)`.
///
/// Each satisfying tuple of a member names exactly one fact, so the result
/// is the union of those facts. Whether the subfamily determines `M`
/// depends on which partitions it covers.
pub fn reconstruct_from_traces(
    lang: &Arc<Language>,
    n: usize,
    family: &[RelFormula],
    traces: &[Vec<Vec<usize>>],
) -> Result<Structure> {
    if family.len() != traces.len() {
        return invalid("one trace per formula is required");
    }
    let mut m = Structure::empty(lang.clone(), n)?;
    for (rf, tr) in family.iter().zip(traces) {
        for vals in tr {
            if vals.len() != rf.formula.arity() || vals.iter().any(|&v| v >= n) {
                return invalid(format!("trace tuple {vals:?} does not fit formula {}", rf.formula));
            }
            let fact = rf.fact_for(vals);
            m.set(rf.pair.rel, &fact, true);
        }
    }
    Ok(m)
}
