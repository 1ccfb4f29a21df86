use std::collections::HashSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// A finite relational signature: named relation symbols with positive arities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Language {
    relations: Vec<(String, usize)>,
}

impl Language {
    pub fn new<S: Into<String>>(relations: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let relations: Vec<(String, usize)> =
            relations.into_iter().map(|(s, a)| (s.into(), a)).collect();
        if relations.is_empty() {
            return invalid("a language needs at least one relation symbol");
        }
        let mut seen = HashSet::new();
        for (name, arity) in &relations {
            if *arity == 0 {
                return invalid(format!("relation {name} has arity 0"));
            }
            if name.is_empty()
                || !name.chars().next().unwrap().is_ascii_alphabetic()
                || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return invalid(format!("bad relation name {name:?}"));
            }
            if !seen.insert(name.clone()) {
                return invalid(format!("duplicate relation symbol {name}"));
            }
        }
        Ok(Language { relations })
    }

    /// One binary relation named `E`.
    pub fn binary() -> Self {
        Language::new([("E", 2)]).unwrap()
    }

    /// One ternary relation named `E`.
    pub fn ternary() -> Self {
        Language::new([("E", 3)]).unwrap()
    }

    /// Parses `"E:2,U:1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut rels = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let (name, arity) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected NAME:ARITY, got {part:?}")))?;
            let arity: usize = arity
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad arity in {part:?}")))?;
            rels.push((name.trim().to_string(), arity));
        }
        Language::new(rels)
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn arity(&self, rel: usize) -> usize {
        self.relations[rel].1
    }

    pub fn name(&self, rel: usize) -> &str {
        &self.relations[rel].0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    /// The maximum arity `r`.
    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.1).max().unwrap()
    }

    /// Number of interpretation bits on `[n]`, `Σ n^{a_i}`, if it fits.
    pub fn bit_count(&self, n: usize) -> Option<usize> {
        let mut total: usize = 0;
        for &(_, a) in &self.relations {
            total = total.checked_add(super::checked_pow(n, a)?)?;
        }
        Some(total)
    }

    /// Hex sha256 of the canonical text form.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, a)) in self.relations.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}:{a}")?;
        }
        Ok(())
    }
}
