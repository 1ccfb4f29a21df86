//! JSON encodings shared by property files and certificates. Every element
//! index in these formats is 1-based.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::structure::{Language, Structure};

/// A structure as `{"n": 3, "relations": {"E": [[1, 2], [2, 1]]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureJson {
    pub n: usize,
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
}

impl StructureJson {
    pub fn from_structure(m: &Structure) -> Self {
        let lang = m.language();
        let mut relations = BTreeMap::new();
        for rel in 0..lang.len() {
            let ts = m
                .tuples(rel)
                .into_iter()
                .map(|t| t.into_iter().map(|x| x + 1).collect())
                .collect();
            relations.insert(lang.name(rel).to_string(), ts);
        }
        StructureJson { n: m.n(), relations }
    }

    pub fn to_structure(&self, lang: &Arc<Language>) -> Result<Structure> {
        let mut facts = Vec::new();
        for (name, ts) in &self.relations {
            let rel = lang
                .index_of(name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown relation symbol {name}")))?;
            let mut zero = Vec::with_capacity(ts.len());
            for t in ts {
                if t.iter().any(|&x| x == 0 || x > self.n) {
                    return invalid(format!("tuple {t:?} is outside [{}]", self.n));
                }
                zero.push(t.iter().map(|&x| x - 1).collect());
            }
            facts.push((rel, zero));
        }
        Structure::from_tuples(lang.clone(), self.n, &facts)
    }
}

/// 0-based tuple list to 1-based.
pub fn one_based(ts: &[Vec<usize>]) -> Vec<Vec<usize>> {
    ts.iter().map(|t| t.iter().map(|x| x + 1).collect()).collect()
}

/// 1-based tuple list to 0-based; rejects zeros.
pub fn zero_based(ts: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    ts.iter()
        .map(|t| {
            t.iter()
                .map(|&x| {
                    if x == 0 {
                        invalid("element indices are 1-based")
                    } else {
                        Ok(x - 1)
                    }
                })
                .collect()
        })
        .collect()
}

/// Serde adapter writing big integers as decimal strings.
pub mod biguint_string {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| serde::de::Error::custom("expected a decimal integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_round_trip() {
        let lang = Arc::new(Language::parse("E:2,U:1").unwrap());
        let m = Structure::from_tuples(lang.clone(), 3, &[(0, vec![vec![0, 2]]), (1, vec![vec![1]])]).unwrap();
        let j = StructureJson::from_structure(&m);
        assert_eq!(j.relations["E"], vec![vec![1, 3]]);
        let text = serde_json::to_string(&j).unwrap();
        let back: StructureJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_structure(&lang).unwrap(), m);
    }

    #[test]
    fn rejects_zero_and_out_of_range() {
        let lang = Arc::new(Language::binary());
        let mut j = StructureJson {
            n: 2,
            relations: BTreeMap::new(),
        };
        j.relations.insert("E".into(), vec![vec![0, 1]]);
        assert!(j.to_structure(&lang).is_err());
        j.relations.insert("E".into(), vec![vec![1, 3]]);
        assert!(j.to_structure(&lang).is_err());
        j.relations.clear();
        j.relations.insert("F".into(), vec![]);
        assert!(j.to_structure(&lang).is_err());
    }
}
