//! The family of relations a formula defines across the members of `H_n`.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::bits::Bits;
use crate::error::{invalid, Result};
use crate::formula::QfFormula;
use crate::hereditary::MemberStore;
use crate::structure::{checked_pow, for_each_tuple};

use super::setsystem::{vc_dimension, vc_ell_dimension, SetSystem};

/// `F_φ(n)`: the set of relations `φ(M)` over members `M` of `H_n`, with
/// its VC and `VC_r` dimensions (`r` the maximum arity of the language;
/// `vc_r` is 0 when the formula has fewer than `r` variables).
#[derive(Debug, Clone)]
pub struct TraceFamily {
    pub formula: String,
    pub n: usize,
    pub traces: SetSystem,
    pub vc: usize,
    pub vc_r: usize,
}

pub fn trace_family(store: &MemberStore, phi: &QfFormula, n: usize) -> Result<TraceFamily> {
    if store.property().language() != phi.language() {
        return invalid("formula and property use different languages");
    }
    let k = phi.arity();
    let points = checked_pow(n, k).filter(|&p| p <= 1 << 20);
    let Some(points) = points else {
        return invalid(format!("[{n}]^{k} is too large for an explicit trace family"));
    };
    let members = store.members(n)?;
    let mut tuples = Vec::with_capacity(points);
    for_each_tuple(n, k, |t| tuples.push(t.to_vec()));
    let sets: BTreeSet<Bits> = members
        .par_iter()
        .map(|m| Bits::from_bools(tuples.iter().map(|t| phi.eval_concat(m, t))))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    let traces = SetSystem::new(n, k, sets)?;
    let limits = store.limits();
    let vc = vc_dimension(&traces, limits)?;
    let r = phi.language().max_arity();
    let vc_r = if k >= r && r >= 1 { vc_ell_dimension(&traces, r, limits)? } else { 0 };
    Ok(TraceFamily {
        formula: phi.to_string(),
        n,
        traces,
        vc,
        vc_r,
    })
}
