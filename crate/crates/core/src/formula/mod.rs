//! Quantifier-free formulas `φ(x̄; ȳ)` with partitioned variables.
//!
//! Variables are numbered in the concatenation `x̄ȳ`: index `i < |x̄|` is
//! `x_{i+1}`, index `|x̄| + j` is `y_{j+1}`.

mod parser;
mod rel;

use std::fmt;
use std::sync::Arc;

pub use parser::parse_formula;
pub use rel::{
    formula_trace, reconstruct_from_traces, rel_family, rel_formulas, set_partitions, IndexPair,
    RelFormula,
};

use crate::error::{invalid, Result};
use crate::structure::{Language, Structure};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom { rel: usize, args: Vec<usize> },
    Eq(usize, usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn neq(a: usize, b: usize) -> Formula {
        Formula::Not(Box::new(Formula::Eq(a, b)))
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Formula::True | Formula::False => None,
            Formula::Atom { args, .. } => args.iter().copied().max(),
            Formula::Eq(a, b) => Some(*a.max(b)),
            Formula::Not(f) => f.max_var(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(|f| f.max_var()).max(),
        }
    }

    fn check(&self, lang: &Language) -> Result<()> {
        match self {
            Formula::Atom { rel, args } => {
                if *rel >= lang.len() {
                    return invalid(format!("relation index {rel} out of range"));
                }
                if args.len() != lang.arity(*rel) {
                    return invalid(format!(
                        "{} takes {} arguments, got {}",
                        lang.name(*rel),
                        lang.arity(*rel),
                        args.len()
                    ));
                }
                Ok(())
            }
            Formula::Not(f) => f.check(lang),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|f| f.check(lang)),
            _ => Ok(()),
        }
    }

    /// Evaluates with variable `i` bound to `vals[i]`; no range checks.
    pub fn eval(&self, m: &Structure, vals: &[usize]) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom { rel, args } => {
                let n = m.n();
                let mut rank = 0;
                for &a in args.iter().rev() {
                    rank = rank * n + vals[a];
                }
                m.bits().get(m.offset(*rel) + rank)
            }
            Formula::Eq(a, b) => vals[*a] == vals[*b],
            Formula::Not(f) => !f.eval(m, vals),
            Formula::And(fs) => fs.iter().all(|f| f.eval(m, vals)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(m, vals)),
        }
    }
}

/// A quantifier-free formula over a language, with `|x̄|` and `|ȳ|` fixed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QfFormula {
    lang: Arc<Language>,
    x_arity: usize,
    y_arity: usize,
    body: Formula,
}

impl QfFormula {
    pub fn new(lang: Arc<Language>, x_arity: usize, y_arity: usize, body: Formula) -> Result<Self> {
        body.check(&lang)?;
        if let Some(v) = body.max_var() {
            if v >= x_arity + y_arity {
                return invalid(format!(
                    "variable index {v} exceeds |x̄|+|ȳ| = {}",
                    x_arity + y_arity
                ));
            }
        }
        Ok(QfFormula {
            lang,
            x_arity,
            y_arity,
            body,
        })
    }

    /// Parses the text syntax, inferring arities from the largest indices used.
    pub fn parse(lang: Arc<Language>, text: &str) -> Result<Self> {
        parse_formula(lang, text, None)
    }

    /// Parses with explicit `|x̄|` and `|ȳ|`.
    pub fn parse_with_arity(lang: Arc<Language>, text: &str, x_arity: usize, y_arity: usize) -> Result<Self> {
        parse_formula(lang, text, Some((x_arity, y_arity)))
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.lang
    }

    pub fn x_arity(&self) -> usize {
        self.x_arity
    }

    pub fn y_arity(&self) -> usize {
        self.y_arity
    }

    pub fn arity(&self) -> usize {
        self.x_arity + self.y_arity
    }

    pub fn body(&self) -> &Formula {
        &self.body
    }

    /// `|ȳ| = 0`.
    pub fn is_trivially_partitioned(&self) -> bool {
        self.y_arity == 0
    }

    /// `M ⊨ φ(ā; b̄)`, with full argument checks.
    pub fn eval(&self, m: &Structure, a: &[usize], b: &[usize]) -> Result<bool> {
        if **m.language_arc() != *self.lang {
            return invalid("formula and structure use different languages");
        }
        if a.len() != self.x_arity || b.len() != self.y_arity {
            return invalid(format!(
                "expected tuples of lengths {} and {}, got {} and {}",
                self.x_arity,
                self.y_arity,
                a.len(),
                b.len()
            ));
        }
        if let Some(&v) = a.iter().chain(b).find(|&&v| v >= m.n()) {
            return invalid(format!("element {} is outside [{}]", v + 1, m.n()));
        }
        let vals: Vec<usize> = a.iter().chain(b).copied().collect();
        Ok(self.body.eval(m, &vals))
    }

    /// Evaluation on the concatenated tuple `āb̄`; no checks.
    #[inline]
    pub fn eval_concat(&self, m: &Structure, vals: &[usize]) -> bool {
        self.body.eval(m, vals)
    }

    fn var_name(&self, i: usize) -> String {
        if i < self.x_arity {
            format!("x{}", i + 1)
        } else {
            format!("y{}", i - self.x_arity + 1)
        }
    }

    fn write(&self, f: &Formula, prec: u8, out: &mut String) {
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Atom { rel, args } => {
                out.push_str(self.lang.name(*rel));
                out.push('(');
                let names: Vec<String> = args.iter().map(|&a| self.var_name(a)).collect();
                out.push_str(&names.join(","));
                out.push(')');
            }
            Formula::Eq(a, b) => {
                out.push_str(&format!("{}={}", self.var_name(*a), self.var_name(*b)));
            }
            Formula::Not(inner) => {
                if let Formula::Eq(a, b) = **inner {
                    out.push_str(&format!("{}!={}", self.var_name(a), self.var_name(b)));
                } else {
                    out.push('!');
                    self.write(inner, 3, out);
                }
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let (sep, my) = if matches!(f, Formula::And(_)) {
                    (" & ", 2)
                } else {
                    (" | ", 1)
                };
                if fs.is_empty() {
                    out.push_str(if my == 2 { "true" } else { "false" });
                    return;
                }
                let paren = prec > my;
                if paren {
                    out.push('(');
                }
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    self.write(g, my + 1, out);
                }
                if paren {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for QfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&self.body, 0, &mut s);
        f.write_str(&s)
    }
}
