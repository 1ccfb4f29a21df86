//! Exact, desk-scale computation for hereditary classes of finite relational
//! structures.
//!
//! The crate is organised bottom-up:
//!
//! * [`structure`] — languages, labeled structures on `[n]`, induced
//!   substructures, isomorphism and canonical forms, raw enumeration.
//! * [`formula`] — partitioned quantifier-free formulas `φ(x̄; ȳ)`, a small
//!   text syntax, and the `rel(L)` family built from index pairs.
//! * [`hereditary`] — hereditary properties, membership, closure checks and
//!   exact speeds `n ↦ |H_n|`.
//! * [`shatter`] — boxes, φ-types, equality types, shatter functions,
//!   VC / VCℓ / VC*ℓ searches, trace families and equality-indiscernible
//!   extraction.
//! * [`constructions`] — Steiner triple systems and replayable lower-bound
//!   certificates.
//! * [`dichotomy`] — growth-regime reports built on top of everything else.
//! * [`certificate`] — the JSON certificate format and its replay checker.
//!
//! Elements of a structure on `[n]` are represented 0-based (`0..n`) in
//! memory. Every file format produced by the crate is 1-based.

pub mod bits;
pub mod certificate;
pub mod constructions;
pub mod dichotomy;
pub mod error;
pub mod formula;
pub mod hereditary;
pub mod limits;
pub mod serial;
pub mod shatter;
pub mod structure;

pub use error::{Error, Result};
pub use limits::Limits;
