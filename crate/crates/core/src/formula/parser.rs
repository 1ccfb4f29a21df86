//! Text syntax for quantifier-free formulas.
//!
//! ```text
//! expr    := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '!' unary | primary
//! primary := '(' expr ')' | 'true' | 'false'
//!          | NAME '(' var (',' var)* ')'
//!          | var '=' var | var '!=' var
//! var     := ('x' | 'u') INDEX | ('y' | 'v') INDEX     (INDEX ≥ 1)
//! ```
//!
//! `u`/`v` are accepted as spellings of `x`/`y`.

use std::sync::Arc;

use super::{Formula, QfFormula};
use crate::error::{Error, Result};
use crate::structure::Language;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Not,
    Eq,
    Neq,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            '&' => {
                out.push(Tok::And);
                i += 1
            }
            '|' => {
                out.push(Tok::Or);
                i += 1
            }
            '=' => {
                out.push(Tok::Eq);
                i += 1
            }
            '!' if cs.get(i + 1) == Some(&'=') => {
                out.push(Tok::Neq);
                i += 2
            }
            '!' => {
                out.push(Tok::Not);
                i += 1
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(cs[start..i].iter().collect()));
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

/// A variable as it appears in the text, before arities are known.
#[derive(Debug, Clone, Copy)]
enum Var {
    X(usize),
    Y(usize),
}

#[derive(Debug)]
enum Raw {
    True,
    False,
    Atom(usize, Vec<Var>),
    Eq(Var, Var),
    Not(Box<Raw>),
    And(Vec<Raw>),
    Or(Vec<Raw>),
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    lang: &'a Language,
}

fn parse_var(s: &str) -> Option<Var> {
    let (head, rest) = s.split_at(1);
    let idx: usize = rest.parse().ok()?;
    if idx == 0 || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    match head {
        "x" | "u" => Some(Var::X(idx - 1)),
        "y" | "v" => Some(Var::Y(idx - 1)),
        _ => None,
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.bump() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(Error::Parse(format!("expected {t:?}, found {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Raw> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Raw::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Raw> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Raw::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Raw> {
        if self.peek() == Some(&Tok::Not) {
            self.bump();
            return Ok(Raw::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn var(&mut self) -> Result<Var> {
        match self.bump() {
            Some(Tok::Ident(s)) => {
                parse_var(&s).ok_or_else(|| Error::Parse(format!("{s:?} is not a variable (use x1, y2, ...)")))
            }
            got => Err(Error::Parse(format!("expected a variable, found {got:?}"))),
        }
    }

    fn primary(&mut self) -> Result<Raw> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if self.toks.get(self.pos + 1) == Some(&Tok::LParen) {
                    self.bump();
                    self.bump();
                    let rel = self
                        .lang
                        .index_of(&name)
                        .ok_or_else(|| Error::Parse(format!("unknown relation symbol {name}")))?;
                    let mut args = vec![self.var()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.bump();
                        args.push(self.var()?);
                    }
                    self.expect(Tok::RParen)?;
                    if args.len() != self.lang.arity(rel) {
                        return Err(Error::Parse(format!(
                            "{name} takes {} arguments, got {}",
                            self.lang.arity(rel),
                            args.len()
                        )));
                    }
                    return Ok(Raw::Atom(rel, args));
                }
                match name.as_str() {
                    "true" => {
                        self.bump();
                        return Ok(Raw::True);
                    }
                    "false" => {
                        self.bump();
                        return Ok(Raw::False);
                    }
                    _ => {}
                }
                let a = self.var()?;
                let neg = match self.bump() {
                    Some(Tok::Eq) => false,
                    Some(Tok::Neq) => true,
                    got => return Err(Error::Parse(format!("expected = or != after a variable, found {got:?}"))),
                };
                let b = self.var()?;
                let e = Raw::Eq(a, b);
                Ok(if neg { Raw::Not(Box::new(e)) } else { e })
            }
            got => Err(Error::Parse(format!("unexpected token {got:?}"))),
        }
    }
}

fn max_indices(r: &Raw, mx: &mut (usize, usize)) {
    let mut see = |v: &Var| match *v {
        Var::X(i) => mx.0 = mx.0.max(i + 1),
        Var::Y(i) => mx.1 = mx.1.max(i + 1),
    };
    match r {
        Raw::True | Raw::False => {}
        Raw::Atom(_, args) => args.iter().for_each(see),
        Raw::Eq(a, b) => {
            see(a);
            see(b);
        }
        Raw::Not(f) => max_indices(f, mx),
        Raw::And(fs) | Raw::Or(fs) => fs.iter().for_each(|f| max_indices(f, mx)),
    }
}

fn lower(r: Raw, xa: usize) -> Formula {
    let idx = |v: Var| match v {
        Var::X(i) => i,
        Var::Y(j) => xa + j,
    };
    match r {
        Raw::True => Formula::True,
        Raw::False => Formula::False,
        Raw::Atom(rel, args) => Formula::Atom {
            rel,
            args: args.into_iter().map(idx).collect(),
        },
        Raw::Eq(a, b) => Formula::Eq(idx(a), idx(b)),
        Raw::Not(f) => Formula::Not(Box::new(lower(*f, xa))),
        Raw::And(fs) => Formula::And(fs.into_iter().map(|f| lower(f, xa)).collect()),
        Raw::Or(fs) => Formula::Or(fs.into_iter().map(|f| lower(f, xa)).collect()),
    }
}

/// Parses `text`; arities are inferred unless given.
pub fn parse_formula(lang: Arc<Language>, text: &str, arities: Option<(usize, usize)>) -> Result<QfFormula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        lang: &lang,
    };
    let raw = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input after position {}", p.pos)));
    }
    let mut mx = (0, 0);
    max_indices(&raw, &mut mx);
    let (xa, ya) = match arities {
        Some((xa, ya)) => {
            if mx.0 > xa || mx.1 > ya {
                return Err(Error::Parse(format!(
                    "formula uses x{} / y{} but arities are ({xa}, {ya})",
                    mx.0, mx.1
                )));
            }
            (xa, ya)
        }
        None => mx,
    };
    QfFormula::new(lang, xa, ya, lower(raw, xa))
}
