//! Steiner triple systems: every pair of points lies in exactly one block.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{invalid, Error, Result};
use crate::structure::{Language, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerTripleSystem {
    pub n: usize,
    /// Sorted triples of 0-based points, in lexicographic order.
    pub blocks: Vec<[usize; 3]>,
}

/// A Steiner triple system on `[n]`; requires `n ≡ 1, 3 (mod 6)`, `n ≥ 3`.
/// Orders `6k + 3` use the Bose construction, orders `6k + 1` Skolem's.
pub fn steiner(n: usize) -> Result<SteinerTripleSystem> {
    if n < 3 || !matches!(n % 6, 1 | 3) {
        return invalid(format!("no Steiner triple system of order {n}: need n ≥ 3 and n ≡ 1 or 3 (mod 6)"));
    }
    let mut blocks = if n % 6 == 3 { bose(n / 6) } else { skolem(n / 6) };
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort_unstable();
    Ok(SteinerTripleSystem { n, blocks })
}

fn bose(k: usize) -> Vec<[usize; 3]> {
    let v = 2 * k + 1;
    let pt = |x: usize, i: usize| x + v * (i % 3);
    let op = |x: usize, y: usize| (x + y) * (k + 1) % v;
    let mut out = Vec::new();
    for x in 0..v {
        out.push([pt(x, 0), pt(x, 1), pt(x, 2)]);
    }
    for x in 0..v {
        for y in x + 1..v {
            for i in 0..3 {
                out.push([pt(x, i), pt(y, i), pt(op(x, y), i + 1)]);
            }
        }
    }
    out
}

fn skolem(k: usize) -> Vec<[usize; 3]> {
    let v = 2 * k;
    let inf = 3 * v;
    let pt = |x: usize, i: usize| x + v * (i % 3);
    // Half-idempotent commutative quasigroup on Z_{2k}.
    let op = |x: usize, y: usize| {
        let z = (x + y) % v;
        z / 2 + k * (z % 2)
    };
    let mut out = Vec::new();
    for x in 0..k {
        out.push([pt(x, 0), pt(x, 1), pt(x, 2)]);
        for i in 0..3 {
            out.push([inf, pt(x + k, i), pt(x, i + 1)]);
        }
    }
    for x in 0..v {
        for y in x + 1..v {
            for i in 0..3 {
                out.push([pt(x, i), pt(y, i), pt(op(x, y), i + 1)]);
            }
        }
    }
    out
}

/// Whether every pair of points of `[n]` lies in exactly one block.
pub fn validate_sts(s: &SteinerTripleSystem) -> bool {
    let n = s.n;
    let mut seen = vec![false; n * n];
    for b in &s.blocks {
        if b.iter().any(|&x| x >= n) || b[0] == b[1] || b[0] == b[2] || b[1] == b[2] {
            return false;
        }
        for (x, y) in [(b[0], b[1]), (b[0], b[2]), (b[1], b[2])] {
            let (x, y) = (x.min(y), x.max(y));
            if seen[x * n + y] {
                return false;
            }
            seen[x * n + y] = true;
        }
    }
    (0..n).all(|x| (x + 1..n).all(|y| seen[x * n + y]))
}

impl SteinerTripleSystem {
    /// One block per line, `a b c` with 1-based sorted points.
    pub fn to_text(&self) -> String {
        self.blocks
            .iter()
            .map(|b| format!("{} {} {}\n", b[0] + 1, b[1] + 1, b[2] + 1))
            .collect()
    }

    pub fn parse_text(n: usize, text: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            if v.len() != 3 || v.iter().any(|&x| x == 0 || x > n) {
                return Err(Error::Parse(format!("line {}: expected three points in 1..={n}", i + 1)));
            }
            let mut b = [v[0] - 1, v[1] - 1, v[2] - 1];
            b.sort_unstable();
            blocks.push(b);
        }
        blocks.sort_unstable();
        Ok(SteinerTripleSystem { n, blocks })
    }
}

/// The 3-uniform hypergraph on `[n]` whose edges are the selected blocks,
/// encoded with all orderings of each edge.
pub fn hypergraph_from_blocks(lang: &Arc<Language>, n: usize, blocks: &[[usize; 3]], chosen: &Bits) -> Result<Structure> {
    let mut m = Structure::empty(lang.clone(), n)?;
    for i in chosen.ones() {
        let [a, b, c] = blocks[i];
        if c >= n {
            return invalid(format!("block point {} outside [{n}]", c + 1));
        }
        for t in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            m.set(0, &t, true);
        }
    }
    Ok(m)
}

/// Blocks are triples of distinct points with no repetition.
pub(crate) fn blocks_distinct(blocks: &[[usize; 3]]) -> bool {
    let set: HashSet<&[usize; 3]> = blocks.iter().collect();
    set.len() == blocks.len()
}
