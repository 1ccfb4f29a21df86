#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use shatterlab::bits::Bits;
use shatterlab::structure::{Language, Structure};

pub fn binary() -> Arc<Language> {
    Arc::new(Language::binary())
}

pub fn ternary() -> Arc<Language> {
    Arc::new(Language::ternary())
}

pub fn random_structure(lang: &Arc<Language>, n: usize, density: f64, rng: &mut impl Rng) -> Structure {
    let len = lang.bit_count(n).unwrap();
    Structure::from_bits(lang.clone(), n, Bits::from_bools((0..len).map(|_| rng.gen_bool(density)))).unwrap()
}

/// Undirected graph on `[n]` from 0-based edges.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let ts: Vec<Vec<usize>> = edges.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]).collect();
    Structure::from_tuples(binary(), n, &[(0, ts)]).unwrap()
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}
