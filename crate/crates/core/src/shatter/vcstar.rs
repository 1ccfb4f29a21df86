//! Witness searches for `VC_ℓ(φ, H) ≥ m` and `VC*_ℓ(φ, H) ≥ m`.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::bits::Bits;
use crate::error::{invalid, too_big, Result};
use crate::formula::QfFormula;
use crate::hereditary::{HereditaryProperty, MemberStore};
use crate::limits::Limits;
use crate::structure::{checked_pow, for_each_tuple, Structure};

use super::boxes::{canonical_boxes, full_count, shatters_box, type_with, ParamBox, PhiType};
use super::eqtype::{equality_types, EqualityType, Slot};

/// One member of the property together with the object tuples it uses and
/// the types those tuples realize over the witness box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub structure: Structure,
    pub tuples: Vec<Vec<usize>>,
    pub types: Vec<PhiType>,
}

/// Evidence that `VC*_ℓ(φ, H) ≥ m`: a box of height `m`, an equality type
/// `ρ` over its elements, and for every `m`-tuple of φ-types a member of
/// `H` realizing it with pairwise distinct tuples that pairwise satisfy `ρ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcStarWitness {
    pub ell: usize,
    pub height: usize,
    pub budget_n: usize,
    pub param_box: ParamBox,
    pub rho: EqualityType,
    pub realizations: Vec<Realization>,
}

/// Places `m` tuples of length `s` so that every ordered pair `(a_i, a_j)`,
/// `i ≠ j`, has equality type `rho`. Elements outside the parameters are
/// numbered from one past the largest parameter. Returns the universe size
/// and the tuples, or `None` if no such placement exists.
pub fn arrangement(rho: &EqualityType, m: usize, s: usize) -> Option<(usize, Vec<Vec<usize>>)> {
    if rho.variable_count() != 2 * s {
        return None;
    }
    let slots = m * s;
    let mut parent: Vec<usize> = (0..slots).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut bound: Vec<Option<usize>> = vec![None; slots];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let slot = |v: usize| if v < s { i * s + v } else { j * s + v - s };
            let mut first: BTreeMap<usize, usize> = BTreeMap::new();
            for (v, sl) in rho.slots.iter().enumerate() {
                match *sl {
                    Slot::Param(p) => match bound[slot(v)] {
                        Some(q) if q != p => return None,
                        _ => bound[slot(v)] = Some(p),
                    },
                    Slot::Fresh(c) => {
                        let x = slot(v);
                        if let Some(&y) = first.get(&c) {
                            let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                            parent[a] = b;
                        } else {
                            first.insert(c, x);
                        }
                    }
                }
            }
        }
    }
    // Resolve each class to a parameter or a fresh element.
    let base = rho.params.last().map_or(0, |x| x + 1);
    let mut class_param: BTreeMap<usize, usize> = BTreeMap::new();
    for (x, b) in bound.iter().enumerate().take(slots) {
        if let Some(p) = *b {
            let r = find(&mut parent, x);
            match class_param.get(&r) {
                Some(&q) if q != p => return None,
                _ => {
                    class_param.insert(r, p);
                }
            }
        }
    }
    let mut fresh: BTreeMap<usize, usize> = BTreeMap::new();
    let mut values = vec![0usize; slots];
    for (x, value) in values.iter_mut().enumerate() {
        let r = find(&mut parent, x);
        *value = match class_param.get(&r) {
            Some(&p) => rho.params[p],
            None => {
                let k = fresh.len();
                base + *fresh.entry(r).or_insert(k)
            }
        };
    }
    let tuples: Vec<Vec<usize>> = values.chunks(s.max(1)).take(m).map(<[usize]>::to_vec).collect();
    let tuples = if s == 0 { vec![Vec::new(); m] } else { tuples };
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            if tuples[i] == tuples[j] {
                return None;
            }
            let mut pair = tuples[i].clone();
            pair.extend_from_slice(&tuples[j]);
            if !rho.holds(&pair) {
                return None;
            }
        }
    }
    Some((base + fresh.len(), tuples))
}

fn check_args(store: &MemberStore, phi: &QfFormula, ell: usize, m: usize) -> Result<()> {
    if store.property().language() != phi.language() {
        return invalid("formula and property use different languages");
    }
    if ell > phi.y_arity() {
        return invalid(format!("ℓ = {ell} exceeds |ȳ| = {}", phi.y_arity()));
    }
    if m == 0 {
        return invalid("height must be at least 1");
    }
    Ok(())
}

/// A box of height `m` over which the realized φ-types exhaust all
/// patterns, i.e. evidence that `VC_ℓ(φ, H) ≥ m` within universes `[N]`.
pub fn vc_ell_at_least(
    store: &MemberStore,
    phi: &QfFormula,
    ell: usize,
    m: usize,
    budget_n: usize,
) -> Result<Option<ParamBox>> {
    check_args(store, phi, ell, m)?;
    for b in canonical_boxes(phi.y_arity(), ell, m, budget_n, store.limits())? {
        if shatters_box(store, phi, &b, budget_n)? {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

/// The first realization of every type over `b`, scanning sizes `n'` and
/// members in order.
fn first_realizations(
    store: &MemberStore,
    phi: &QfFormula,
    b: &ParamBox,
    budget_n: usize,
) -> Result<BTreeMap<PhiType, (Structure, Vec<usize>)>> {
    let span = b.span();
    let tuples = b.product_tuples();
    let full = full_count(tuples.len());
    let s = phi.x_arity();
    let mut out: BTreeMap<PhiType, (Structure, Vec<usize>)> = BTreeMap::new();
    for n in span..=budget_n.min(span + s) {
        let members = store.members(n)?;
        let mut objects = Vec::new();
        for_each_tuple(n, s, |a| {
            if (span..n).all(|x| a.contains(&x)) {
                objects.push(a.to_vec());
            }
        });
        let chunks: Vec<BTreeMap<PhiType, (usize, usize)>> = members
            .par_chunks(1024)
            .enumerate()
            .map(|(c, chunk)| {
                let mut local = BTreeMap::new();
                for (k, mm) in chunk.iter().enumerate() {
                    for (ai, a) in objects.iter().enumerate() {
                        local.entry(type_with(phi, mm, a, &tuples)).or_insert((c * 1024 + k, ai));
                    }
                }
                local
            })
            .collect();
        for local in chunks {
            for (t, (mi, ai)) in local {
                out.entry(t).or_insert_with(|| (members[mi].clone(), objects[ai].clone()));
            }
        }
        if full.is_some_and(|f| out.len() as u64 == f) {
            break;
        }
    }
    Ok(out)
}

/// Realizations of every type over `b` by one fixed object tuple, trying
/// each equality pattern of the tuple over the box elements.
fn common_placement(
    store: &MemberStore,
    phi: &QfFormula,
    b: &ParamBox,
    budget_n: usize,
    type_count: u64,
) -> Result<Option<Vec<Realization>>> {
    let span = b.span();
    let tuples_of_box = b.product_tuples();
    for sigma in equality_types(phi.x_arity(), &b.underlying()) {
        let universe = span + sigma.fresh_count();
        if universe > budget_n {
            continue;
        }
        let a = sigma.realize(span);
        let members = store.members(universe)?;
        let mut seen: BTreeMap<PhiType, usize> = BTreeMap::new();
        for (i, mm) in members.iter().enumerate() {
            seen.entry(type_with(phi, mm, &a, &tuples_of_box)).or_insert(i);
            if seen.len() as u64 == type_count {
                break;
            }
        }
        if seen.len() as u64 == type_count {
            return Ok(Some(
                seen.into_iter()
                    .map(|(t, i)| Realization {
                        structure: members[i].clone(),
                        tuples: vec![a.clone()],
                        types: vec![t],
                    })
                    .collect(),
            ));
        }
    }
    Ok(None)
}

/// Searches boxes of height `m` with elements in `[N]` and equality types
/// `ρ` for a witness that `VC*_ℓ(φ, H) ≥ m`. `None` means no witness exists
/// among members with universe inside `[N]`, which says nothing about
/// larger universes.
pub fn vc_star_at_least(
    store: &MemberStore,
    phi: &QfFormula,
    ell: usize,
    m: usize,
    budget_n: usize,
) -> Result<Option<VcStarWitness>> {
    check_args(store, phi, ell, m)?;
    let limits: &Limits = store.limits();
    let box_size = checked_pow(m, ell).unwrap_or(usize::MAX);
    let joint_bits = box_size.saturating_mul(m);
    if joint_bits > limits.max_joint_bits as usize {
        return too_big(format!(
            "joint types have {joint_bits} bits, above the budget of {}",
            limits.max_joint_bits
        ));
    }
    let type_count = 1u64 << box_size;
    let s = phi.x_arity();
    for b in canonical_boxes(phi.y_arity(), ell, m, budget_n, limits)? {
        let firsts = first_realizations(store, phi, &b, budget_n)?;
        if (firsts.len() as u64) < type_count {
            continue;
        }
        let params = b.underlying();
        if m == 1 {
            // With a single tuple no pair constraint applies. Prefer one
            // placement of the tuple for every type, so that the
            // realizations differ only in their facts.
            let rho = equality_types(2 * s, &params).swap_remove(0);
            if let Some(realizations) = common_placement(store, phi, &b, budget_n, type_count)? {
                return Ok(Some(VcStarWitness {
                    ell,
                    height: m,
                    budget_n,
                    param_box: b,
                    rho,
                    realizations,
                }));
            }
            let realizations = firsts
                .into_iter()
                .map(|(t, (structure, a))| Realization {
                    structure,
                    tuples: vec![a],
                    types: vec![t],
                })
                .collect();
            return Ok(Some(VcStarWitness {
                ell,
                height: m,
                budget_n,
                param_box: b,
                rho,
                realizations,
            }));
        }
        let tuples_of_box = b.product_tuples();
        let target = 1u64 << joint_bits;
        for rho in equality_types(2 * s, &params) {
            let Some((universe, objs)) = arrangement(&rho, m, s) else {
                continue;
            };
            if universe > budget_n {
                continue;
            }
            let members = store.members(universe)?;
            let chunks: Vec<BTreeMap<u64, usize>> = members
                .par_chunks(1024)
                .enumerate()
                .map(|(c, chunk)| {
                    let mut local = BTreeMap::new();
                    for (k, mm) in chunk.iter().enumerate() {
                        let mut key = 0u64;
                        for (i, a) in objs.iter().enumerate() {
                            let t = type_with(phi, mm, a, &tuples_of_box);
                            for j in t.0.ones() {
                                key |= 1 << (i * box_size + j);
                            }
                        }
                        local.entry(key).or_insert(c * 1024 + k);
                    }
                    local
                })
                .collect();
            let mut joint: BTreeMap<u64, usize> = BTreeMap::new();
            for local in chunks {
                for (k, v) in local {
                    joint.entry(k).or_insert(v);
                }
            }
            if joint.len() as u64 == target {
                let realizations = joint
                    .values()
                    .map(|&mi| {
                        let structure = members[mi].clone();
                        let types = objs.iter().map(|a| type_with(phi, &structure, a, &tuples_of_box)).collect();
                        Realization {
                            structure,
                            tuples: objs.clone(),
                            types,
                        }
                    })
                    .collect();
                return Ok(Some(VcStarWitness {
                    ell,
                    height: m,
                    budget_n,
                    param_box: b,
                    rho,
                    realizations,
                }));
            }
        }
    }
    Ok(None)
}

impl VcStarWitness {
    /// Re-checks every claim of the witness against `prop` and `phi`.
    /// Returns a description of the first failure.
    pub fn check(&self, prop: &HereditaryProperty, phi: &QfFormula) -> std::result::Result<(), String> {
        let b = &self.param_box;
        if b.ell() != self.ell || b.arity() != phi.y_arity() {
            return Err("box shape does not match ℓ and the formula".into());
        }
        if self.ell > 0 && !b.has_height(self.height) {
            return Err(format!("box does not have height {}", self.height));
        }
        if b.span() > self.budget_n {
            return Err("box elements exceed the budget".into());
        }
        let params = b.underlying();
        if self.rho.params != params || self.rho.variable_count() != 2 * phi.x_arity() {
            return Err("equality type is not over the box elements".into());
        }
        let box_size = b.size();
        let joint_bits = box_size * self.height;
        if joint_bits >= 63 {
            return Err("witness too large to check".into());
        }
        if self.realizations.len() as u64 != 1u64 << joint_bits {
            return Err(format!(
                "{} realizations listed, {} needed",
                self.realizations.len(),
                1u64 << joint_bits
            ));
        }
        let tuples_of_box = b.product_tuples();
        let mut keys: HashSet<Vec<Bits>> = HashSet::new();
        for (k, r) in self.realizations.iter().enumerate() {
            let m = &r.structure;
            if m.n() > self.budget_n || m.n() < b.span() {
                return Err(format!("realization {k}: universe size {} out of range", m.n()));
            }
            match prop.contains(m) {
                Ok(true) => {}
                Ok(false) => return Err(format!("realization {k}: structure is not in the property")),
                Err(e) => return Err(format!("realization {k}: {e}")),
            }
            if r.tuples.len() != self.height || r.types.len() != self.height {
                return Err(format!("realization {k}: expected {} tuples", self.height));
            }
            for (i, a) in r.tuples.iter().enumerate() {
                if a.len() != phi.x_arity() || a.iter().any(|&x| x >= m.n()) {
                    return Err(format!("realization {k}: tuple {i} is malformed"));
                }
                if type_with(phi, m, a, &tuples_of_box) != r.types[i] {
                    return Err(format!("realization {k}: tuple {i} does not realize its stated type"));
                }
                for (j, c) in r.tuples.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    if a == c {
                        return Err(format!("realization {k}: tuples {i} and {j} coincide"));
                    }
                    let mut pair = a.clone();
                    pair.extend_from_slice(c);
                    if !self.rho.holds(&pair) {
                        return Err(format!("realization {k}: tuples {i}, {j} violate the equality type"));
                    }
                }
            }
            keys.insert(r.types.iter().map(|t| t.0.clone()).collect());
        }
        if keys.len() != self.realizations.len() {
            return Err("some type tuple is listed twice".into());
        }
        Ok(())
    }
}
