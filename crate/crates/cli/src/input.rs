//! Reading properties, tuple files and set systems from the command line.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Deserialize;
use shatterlab::hereditary::{Builtin, HereditaryProperty};
use shatterlab::serial::zero_based;
use shatterlab::shatter::SetSystem;
use shatterlab::structure::{Language, TupleSet};
use shatterlab::Error;

/// `builtin:<name>`, a bare builtin name, or a path to a property file.
pub fn property(spec: &str, language: Option<&str>) -> Result<HereditaryProperty> {
    let bname = spec.strip_prefix("builtin:").or_else(|| {
        let p = Path::new(spec);
        (!p.exists() && Builtin::from_name(spec).is_ok()).then_some(spec)
    });
    if let Some(bname) = bname {
        let b = Builtin::from_name(bname)?;
        let lang = match language {
            Some(l) => Language::parse(l)?,
            None => b.default_language(),
        };
        return Ok(HereditaryProperty::builtin(b, Arc::new(lang))?);
    }
    if language.is_some() {
        return Err(Error::InvalidArgument("--language only applies to builtin properties".into()).into());
    }
    let text = read(Path::new(spec))?;
    Ok(HereditaryProperty::from_json(&text)?)
}

/// Reads a user-supplied file; failures are usage errors.
pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
        .with_context(|| format!("reading {}", path.display()))
}

/// One tuple per line, 1-based, whitespace or comma separated; `#` starts a comment.
pub fn tuples(text: &str) -> Result<TupleSet> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
            .map(|w| w.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        rows.push(row);
    }
    let Some(t) = rows.first().map(Vec::len) else {
        return Err(Error::InvalidArgument("no tuples in input".into()).into());
    };
    if rows.iter().any(|r| r.len() != t) {
        return Err(Error::InvalidArgument("tuples have different lengths".into()).into());
    }
    Ok(TupleSet::new(t, zero_based(&rows)?)?)
}

#[derive(Debug, Deserialize)]
struct SetSystemFile {
    domain: usize,
    arity: usize,
    sets: Vec<Vec<Vec<usize>>>,
}

/// `{"domain": n, "arity": k, "sets": [[[1, 2], ...], ...]}` with 1-based tuples.
pub fn set_system(text: &str) -> Result<SetSystem> {
    let f: SetSystemFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("set system: {e}")))?;
    let sets = f.sets.iter().map(|s| zero_based(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(SetSystem::from_tuples(f.domain, f.arity, &sets)?)
}
