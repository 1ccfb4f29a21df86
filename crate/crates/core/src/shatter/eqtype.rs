//! Complete types in the language of equality over a parameter set.

use std::fmt;

use serde::{Deserialize, Serialize};

/// What one variable of an equality type equals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    /// Equal to `params[i]`.
    Param(usize),
    /// Different from every parameter; variables sharing the class are equal.
    /// Classes are numbered by first occurrence.
    Fresh(usize),
}

/// An equality type of `s` variables over a sorted parameter set `B`: which
/// variables are equal to each other, and which equal a given parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EqualityType {
    pub params: Vec<usize>,
    pub slots: Vec<Slot>,
}

impl EqualityType {
    pub fn variable_count(&self) -> usize {
        self.slots.len()
    }

    /// Number of fresh classes.
    pub fn fresh_count(&self) -> usize {
        self.slots
            .iter()
            .filter_map(|s| match s {
                Slot::Fresh(c) => Some(c + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// The equality type of `tuple` over the sorted set `params`.
    pub fn of(tuple: &[usize], params: &[usize]) -> EqualityType {
        let mut fresh: Vec<usize> = Vec::new();
        let slots = tuple
            .iter()
            .map(|v| match params.binary_search(v) {
                Ok(i) => Slot::Param(i),
                Err(_) => match fresh.iter().position(|f| f == v) {
                    Some(c) => Slot::Fresh(c),
                    None => {
                        fresh.push(*v);
                        Slot::Fresh(fresh.len() - 1)
                    }
                },
            })
            .collect();
        EqualityType {
            params: params.to_vec(),
            slots,
        }
    }

    pub fn holds(&self, tuple: &[usize]) -> bool {
        tuple.len() == self.slots.len() && EqualityType::of(tuple, &self.params) == *self
    }

    /// A tuple realizing the type, using `fresh_start, fresh_start+1, ...`
    /// for the fresh classes (which must avoid the parameters).
    pub fn realize(&self, fresh_start: usize) -> Vec<usize> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Param(i) => self.params[i],
                Slot::Fresh(c) => fresh_start + c,
            })
            .collect()
    }

    /// Restriction to a subset of the parameters (used for sub-boxes).
    pub fn restrict(&self, params: &[usize]) -> EqualityType {
        // Parameters dropped from the set become fresh values.
        let tuple = self.realize(usize::MAX / 2);
        EqualityType::of(&tuple, params)
    }
}

impl fmt::Display for EqualityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Param(i) => format!("={}", self.params[i] + 1),
                Slot::Fresh(c) => format!("c{}", c + 1),
            })
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Every equality type of `s` variables over `params` (sorted, distinct).
pub fn equality_types(s: usize, params: &[usize]) -> Vec<EqualityType> {
    let mut params = params.to_vec();
    params.sort_unstable();
    params.dedup();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn go(s: usize, p: usize, fresh: usize, cur: &mut Vec<Slot>, params: &[usize], out: &mut Vec<EqualityType>) {
        if cur.len() == s {
            out.push(EqualityType {
                params: params.to_vec(),
                slots: cur.clone(),
            });
            return;
        }
        for i in 0..p {
            cur.push(Slot::Param(i));
            go(s, p, fresh, cur, params, out);
            cur.pop();
        }
        for c in 0..=fresh {
            cur.push(Slot::Fresh(c));
            go(s, p, fresh.max(c + 1), cur, params, out);
            cur.pop();
        }
    }
    go(s, params.len(), 0, &mut cur, &params, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(equality_types(1, &[1, 2, 3]).len(), 4);
        assert_eq!(equality_types(2, &[]).len(), 2);
        assert_eq!(equality_types(0, &[5]).len(), 1);
    }

    #[test]
    fn of_and_holds() {
        let p = [2, 5];
        let t = EqualityType::of(&[5, 9, 9, 3], &p);
        assert_eq!(t.slots, vec![Slot::Param(1), Slot::Fresh(0), Slot::Fresh(0), Slot::Fresh(1)]);
        assert!(t.holds(&[5, 0, 0, 1]));
        assert!(!t.holds(&[5, 0, 0, 0]));
        assert!(!t.holds(&[5, 2, 2, 1]));
        assert_eq!(t.fresh_count(), 2);
        assert!(t.holds(&t.realize(100)));
    }

    #[test]
    fn restriction_frees_dropped_parameters() {
        let t = EqualityType::of(&[2, 5, 7], &[2, 5]);
        let r = t.restrict(&[5]);
        assert_eq!(r.slots, vec![Slot::Fresh(0), Slot::Param(0), Slot::Fresh(1)]);
    }
}
