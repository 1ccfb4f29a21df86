#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::Rng;
use serde_json::Value;
use shatterlab::certificate::Certificate;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shatterlab"))
}

/// Runs the CLI with `SHATTERLAB_CACHE_DIR` pointed at `cache`.
pub fn run(cache: &Path, args: &[&str]) -> Output {
    bin().env("SHATTERLAB_CACHE_DIR", cache).args(args).output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Every structure object inside a certificate payload.
fn structures_mut(v: &mut Value) -> Vec<&mut Value> {
    let mut out = Vec::new();
    fn walk<'a>(v: &'a mut Value, out: &mut Vec<&'a mut Value>) {
        if v.get("relations").is_some() && v.get("n").is_some() {
            out.push(v);
            return;
        }
        match v {
            Value::Object(map) => {
                for (_, x) in map.iter_mut() {
                    walk(x, out);
                }
            }
            Value::Array(xs) => xs.iter_mut().for_each(|x| walk(x, out)),
            _ => {}
        }
    }
    walk(v, &mut out);
    out
}

fn all_tuples(n: u64, k: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Toggles one fact of one structure: a single bit of its encoding.
fn flip_fact(payload: &mut Value, rng: &mut impl Rng, arity: usize) -> bool {
    let mut ss = structures_mut(payload);
    if ss.is_empty() {
        return false;
    }
    let i = rng.gen_range(0..ss.len());
    let s = &mut ss[i];
    let n = s["n"].as_u64().unwrap();
    if n == 0 {
        return false;
    }
    let rels = s["relations"].as_object_mut().unwrap();
    let name = rels.keys().next().cloned().unwrap_or_else(|| "E".into());
    let list = rels.entry(name).or_insert(Value::Array(Vec::new())).as_array_mut().unwrap();
    let tuples = all_tuples(n, arity);
    let t: Value = tuples[rng.gen_range(0..tuples.len())].clone().into();
    match list.iter().position(|x| *x == t) {
        Some(p) => {
            list.remove(p);
        }
        None => list.push(t),
    }
    true
}

/// Flips one character of one stated type bit string.
fn flip_type(payload: &mut Value, rng: &mut impl Rng) -> bool {
    let reals = match payload.get_mut("realizations") {
        Some(r) => r,
        None => match payload.get_mut("witness").and_then(|w| w.get_mut("realizations")) {
            Some(r) => r,
            None => return false,
        },
    };
    let reals = reals.as_array_mut().unwrap();
    let i = rng.gen_range(0..reals.len());
    let r = &mut reals[i];
    let types = r["types"].as_array_mut().unwrap();
    let j = rng.gen_range(0..types.len());
    let s: String = types[j].as_str().unwrap().to_string();
    let k = rng.gen_range(0..s.len());
    let flipped: String = s
        .chars()
        .enumerate()
        .map(|(i, c)| if i == k { if c == '0' { '1' } else { '0' } } else { c })
        .collect();
    types[j] = Value::String(flipped);
    true
}

/// Moves one block entry to another element of the ground set.
fn shift_block(payload: &mut Value, rng: &mut impl Rng) -> bool {
    let (n, blocks) = if let Some(b) = payload.get("blocks") {
        (payload["n"].as_u64().unwrap(), b.clone())
    } else if let Some(g) = payload.get("generator").filter(|g| g.get("blocks").is_some()) {
        (g["base_n"].as_u64().unwrap(), g["blocks"].clone())
    } else {
        return false;
    };
    let mut blocks: Vec<Vec<u64>> = serde_json::from_value(blocks).unwrap();
    let i = rng.gen_range(0..blocks.len());
    let j = rng.gen_range(0..3);
    let old = blocks[i][j];
    let mut new = old;
    while new == old {
        new = rng.gen_range(1..=n);
    }
    blocks[i][j] = new;
    let target = if payload.get("blocks").is_some() { &mut payload["blocks"] } else { &mut payload["generator"]["blocks"] };
    *target = serde_json::to_value(blocks).unwrap();
    true
}

/// A copy of `cert` with one bit of its content changed and the digest
/// recomputed, so only the semantic replay can reject it.
pub fn mutant(cert: &Certificate, rng: &mut impl Rng) -> Certificate {
    let mut v: Value = serde_json::from_str(&cert.to_json()).unwrap();
    let arity = match v["payload"]["property"]["language"].as_str().or(v["payload"]["witness"]["property"]["language"].as_str()) {
        Some(l) => l.rsplit(':').next().unwrap().parse().unwrap(),
        None => 3,
    };
    loop {
        let payload = &mut v["payload"];
        let done = match rng.gen_range(0..3) {
            0 => flip_fact(payload, rng, arity),
            1 => flip_type(payload, rng),
            _ => shift_block(payload, rng),
        };
        if done {
            break;
        }
    }
    let mut m = Certificate::from_json(&v.to_string()).unwrap();
    m.reseal();
    m
}
