//! Lower bounds `|H_n| ≥ count` backed by replayable generators.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;

use crate::bits::Bits;
use crate::error::{invalid, too_big, Result};
use crate::formula::QfFormula;
use crate::hereditary::{for_each_unit_subset, units_touching, HereditaryProperty, MemberStore, PropertySpec};
use crate::limits::Limits;
use crate::shatter::{vc_star_at_least, VcStarWitness};
use crate::structure::Structure;

use super::steiner::{hypergraph_from_blocks, steiner, SteinerTripleSystem};

/// How the certified members are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    /// Every sub-family of the blocks of a Steiner triple system on
    /// `[base]`, as a hypergraph on `[n]` (points past `base` isolated).
    SteinerSubsets { system: SteinerTripleSystem },
    /// The members themselves.
    Explicit { structures: Vec<Structure> },
}

/// `count` distinct members of `H_n`, produced by `generator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBoundCertificate {
    pub property: PropertySpec,
    pub n: usize,
    pub count: BigUint,
    pub generator: Generator,
}

impl LowerBoundCertificate {
    /// Log base 2 of the count when it is a power of two.
    pub fn count_log2(&self) -> Option<u64> {
        let c = &self.count;
        (c.count_ones() == 1).then(|| c.bits() - 1)
    }

    /// The member selected by `index` (its bits choose blocks, or index the
    /// explicit list).
    pub fn member(&self, lang: &Arc<crate::structure::Language>, index: &Bits) -> Result<Structure> {
        match &self.generator {
            Generator::SteinerSubsets { system } => {
                if index.len() != system.blocks.len() {
                    return invalid("selector length differs from the block count");
                }
                hypergraph_from_blocks(lang, self.n, &system.blocks, index)
            }
            Generator::Explicit { structures } => {
                let i = index.ones().next().unwrap_or(0);
                structures.get(i).cloned().ok_or_else(|| crate::Error::InvalidArgument("index out of range".into()))
            }
        }
    }
}

/// The lower bound for linear 3-uniform hypergraphs on `[n]` from a
/// Steiner triple system on `[n - i]`, `i` the least shift making `n - i`
/// an admissible order.
#[derive(Debug, Clone)]
pub struct SteinerBound {
    pub certificate: LowerBoundCertificate,
    pub shift: usize,
    /// `log₂ count`, the number of blocks.
    pub exponent: usize,
    /// `⌈n² / 14⌉`.
    pub target_exponent: usize,
    /// Whether `exponent ≥ target_exponent`.
    pub meets_target: bool,
}

pub fn steiner_lower_bound(n: usize) -> Result<SteinerBound> {
    if n < 3 {
        return invalid("need n ≥ 3");
    }
    let shift = (0..=3).find(|i| matches!((n - i) % 6, 1 | 3)).unwrap();
    if n - shift < 3 {
        return invalid(format!("no admissible order at most {n}"));
    }
    let system = steiner(n - shift)?;
    let exponent = system.blocks.len();
    let target_exponent = (n * n).div_ceil(14);
    let prop = HereditaryProperty::linear_3uniform();
    Ok(SteinerBound {
        certificate: LowerBoundCertificate {
            property: prop.spec().unwrap().clone(),
            n,
            count: BigUint::one() << exponent,
            generator: Generator::SteinerSubsets { system },
        },
        shift,
        exponent,
        target_exponent,
        meets_target: exponent >= target_exponent,
    })
}

/// A member of the property on `[n]` whose restriction to `[m.n()]` is `m`:
/// isolated new points if that works, otherwise a depth-first search over
/// the facts touching each new point.
pub fn extend_member(prop: &HereditaryProperty, m: &Structure, n: usize, limits: &Limits) -> Result<Option<Structure>> {
    if n < m.n() {
        return invalid("target universe is smaller than the structure");
    }
    let padded = m.extend_universe(n)?;
    if prop.contains(&padded)? {
        return Ok(Some(padded));
    }
    let mut work = 0u64;
    extend_dfs(prop, m, n, limits, &mut work)
}

fn extend_dfs(prop: &HereditaryProperty, m: &Structure, n: usize, limits: &Limits, work: &mut u64) -> Result<Option<Structure>> {
    if m.n() == n {
        return Ok(Some(m.clone()));
    }
    let k = m.n() + 1;
    let base = m.extend_universe(k)?;
    let us = units_touching(prop.language(), prop.shapes(), k);
    if us.len() > 24 {
        return too_big(format!("{} candidate facts per new point", us.len()));
    }
    *work += 1u64 << us.len();
    if *work > limits.max_enumeration {
        return too_big("extension search exceeded the enumeration budget");
    }
    let mut next = Vec::new();
    for_each_unit_subset(&base, &us, |c| {
        if prop.contains_unchecked(c) {
            next.push(c.clone());
        }
    });
    for c in next {
        if let Some(done) = extend_dfs(prop, &c, n, limits, work)? {
            return Ok(Some(done));
        }
    }
    Ok(None)
}

/// Members built from a `VC*_{ℓ-1}` witness of height `m`.
#[derive(Debug, Clone)]
pub struct WitnessBound {
    pub certificate: LowerBoundCertificate,
    /// Smallest universe the construction fits in.
    pub min_n: usize,
    /// `3tm` with `t = |x̄| + |ȳ|`: the size at which `m = ⌊n/3t⌋` makes the
    /// general argument apply.
    pub proof_n: usize,
}

/// Turns a witness into `2^{m^ℓ}` distinct members of `H_n`.
///
/// All realizations must place the same object tuples on one universe;
/// they then differ exactly where their joint types differ. Each is
/// extended to `[n]` inside the property.
pub fn lower_bound_from_witness(
    store: &MemberStore,
    phi: &QfFormula,
    witness: &VcStarWitness,
    n: usize,
) -> Result<WitnessBound> {
    let prop = store.property();
    witness.check(prop, phi).map_err(crate::Error::InvalidArgument)?;
    let Some(spec) = prop.spec() else {
        return invalid("certificates need a property with a serializable description");
    };
    let first = &witness.realizations[0];
    let min_n = first.structure.n();
    if witness
        .realizations
        .iter()
        .any(|r| r.structure.n() != min_n || r.tuples != first.tuples)
    {
        return invalid("witness realizations do not share one placement of the object tuples");
    }
    if n < min_n {
        return invalid(format!("n = {n} is too small; the construction needs n ≥ {min_n}"));
    }
    let mut structures = Vec::with_capacity(witness.realizations.len());
    for (i, r) in witness.realizations.iter().enumerate() {
        match extend_member(prop, &r.structure, n, store.limits())? {
            Some(s) => structures.push(s),
            None => return invalid(format!("realization {i} has no extension to [{n}] inside the property")),
        }
    }
    let distinct: HashSet<&Structure> = structures.iter().collect();
    if distinct.len() != structures.len() {
        return invalid("extended realizations are not pairwise distinct");
    }
    let t = phi.x_arity() + phi.y_arity();
    Ok(WitnessBound {
        certificate: LowerBoundCertificate {
            property: spec.clone(),
            n,
            count: BigUint::from(structures.len()),
            generator: Generator::Explicit { structures },
        },
        min_n,
        proof_n: 3 * t * witness.height,
    })
}

/// Searches for a `VC*_{ℓ-1}` witness of height `m` within `[budget_n]`
/// and builds the members of `H_n` from it.
pub fn witness_lower_bound(
    store: &MemberStore,
    phi: &QfFormula,
    ell: usize,
    m: usize,
    budget_n: usize,
    n: usize,
) -> Result<Option<(VcStarWitness, WitnessBound)>> {
    if ell == 0 {
        return invalid("ℓ must be at least 1");
    }
    match vc_star_at_least(store, phi, ell - 1, m, budget_n)? {
        None => Ok(None),
        Some(w) => {
            let b = lower_bound_from_witness(store, phi, &w, n)?;
            Ok(Some((w, b)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Language;

    #[test]
    fn example_orders() {
        let b = steiner_lower_bound(15).unwrap();
        assert_eq!(b.shift, 0);
        assert_eq!(b.exponent, 35);
        assert_eq!(b.target_exponent, 17);
        assert!(b.meets_target);
        assert_eq!(b.certificate.count_log2(), Some(35));
        // n ≡ 0 (mod 6) needs a shift of 3.
        assert_eq!(steiner_lower_bound(12).unwrap().shift, 3);
        assert!(!steiner_lower_bound(6).unwrap().meets_target);
    }

    #[test]
    fn graphs_from_point_witness() {
        let store = MemberStore::new(Arc::new(HereditaryProperty::graphs()), Limits::default());
        let phi = QfFormula::parse(Arc::new(Language::binary()), "E(x1,y1)").unwrap();
        let (w, b) = witness_lower_bound(&store, &phi, 1, 2, 4, 5).unwrap().unwrap();
        assert_eq!(w.realizations.len(), 4);
        assert_eq!(b.certificate.count, BigUint::from(4u32));
        assert_eq!(b.min_n, 3);
        assert_eq!(b.proof_n, 12);
        assert!(lower_bound_from_witness(&store, &phi, &w, 2).is_err());
    }

    #[test]
    fn extension_needs_search_for_complete_graphs() {
        let lang = Arc::new(Language::binary());
        let complete = HereditaryProperty::custom("complete", lang.clone(), |m| {
            (0..m.n()).all(|a| (0..m.n()).all(|b| m.holds(0, &[a, b]) == (a != b)))
        });
        let k2 = Structure::from_tuples(lang, 2, &[(0, vec![vec![0, 1], vec![1, 0]])]).unwrap();
        let k4 = extend_member(&complete, &k2, 4, &Limits::default()).unwrap().unwrap();
        assert_eq!(k4.fact_count(), 12);
    }
}
