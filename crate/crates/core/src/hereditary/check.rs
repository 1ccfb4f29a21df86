use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::members::{for_each_unit_subset, toggle_unit, units};
use super::property::HereditaryProperty;
use crate::structure::Structure;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Deleting this element (0-based) left the property.
    Deletion(usize),
    /// This relabeling (`perm[old] = new`) left the property.
    Relabel(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct Violation {
    /// A member of the property.
    pub member: Structure,
    /// The derived structure that is not a member.
    pub derived: Structure,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default)]
pub struct HereditaryReport {
    /// Members whose deletions and a relabeling were tested.
    pub members_checked: usize,
    /// Candidate structures examined to find those members.
    pub candidates_examined: usize,
    pub violations: Vec<Violation>,
}

impl HereditaryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest universe sampled.
const MAX_N: usize = 7;
/// Shape spaces with at most this many units are enumerated exhaustively.
const EXHAUSTIVE_UNITS: usize = 12;
/// Keep at most this many violations.
const MAX_VIOLATIONS: usize = 20;

/// Tests closure under one-point deletion and relabeling on up to
/// `sample_budget` members, drawn exhaustively from tiny universes and at
/// random (with varying density) from larger ones.
pub fn check_hereditary(prop: &HereditaryProperty, sample_budget: usize, seed: u64) -> HereditaryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HereditaryReport::default();
    let lang = prop.language().clone();
    let densities = [0.05, 0.15, 0.3, 0.5, 0.7];

    let inspect = |m: &Structure, report: &mut HereditaryReport, rng: &mut ChaCha8Rng| {
        report.candidates_examined += 1;
        if !prop.contains_unchecked(m) {
            return;
        }
        report.members_checked += 1;
        let n = m.n();
        if n > 0 {
            for del in 0..n {
                let keep: Vec<usize> = (0..n).filter(|&x| x != del).collect();
                let sub = m.induced_ordered(&keep);
                if !prop.contains_unchecked(&sub) && report.violations.len() < MAX_VIOLATIONS {
                    report.violations.push(Violation {
                        member: m.clone(),
                        derived: sub,
                        kind: ViolationKind::Deletion(del),
                    });
                }
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let r = m.relabel(&perm);
        if !prop.contains_unchecked(&r) && report.violations.len() < MAX_VIOLATIONS {
            report.violations.push(Violation {
                member: m.clone(),
                derived: r,
                kind: ViolationKind::Relabel(perm),
            });
        }
    };

    let mut sized: Vec<(usize, Vec<super::Unit>)> = Vec::new();
    for n in 1..=MAX_N {
        let us = units(&lang, prop.shapes(), n);
        if us.len() <= EXHAUSTIVE_UNITS {
            let base = Structure::empty(lang.clone(), n).unwrap();
            let mut all = Vec::new();
            for_each_unit_subset(&base, &us, |m| all.push(m.clone()));
            for m in all {
                if report.members_checked >= sample_budget {
                    return report;
                }
                inspect(&m, &mut report, &mut rng);
            }
        } else {
            sized.push((n, us));
        }
    }
    if sized.is_empty() {
        return report;
    }
    // Random candidates; give up after a generous number of misses.
    let max_tries = sample_budget.saturating_mul(50).max(1000);
    let mut tries = 0;
    while report.members_checked < sample_budget && tries < max_tries {
        tries += 1;
        let (n, us) = &sized[rng.gen_range(0..sized.len())];
        let p = densities[rng.gen_range(0..densities.len())];
        let mut m = Structure::empty(lang.clone(), *n).unwrap();
        for u in us {
            if rng.gen_bool(p) {
                toggle_unit(&mut m, u);
            }
        }
        inspect(&m, &mut report, &mut rng);
    }
    report
}
