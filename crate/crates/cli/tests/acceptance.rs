//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shatterlab::bits::Bits;
use shatterlab::certificate::Certificate;
use shatterlab::constructions::{
    hypergraph_from_blocks, steiner, steiner_lower_bound, validate_sts, witness_lower_bound, Generator,
};
use shatterlab::dichotomy::estimate_pi;
use shatterlab::formula::QfFormula;
use shatterlab::hereditary::{speed_table, speed_with, HereditaryProperty, MemberStore, SpeedMethod};
use shatterlab::shatter::{
    composition_max, equality_types, extraction_report, find_shattered_box, is_equality_indiscernible,
    realized_types, shatter_function, vc_dimension, vc_ell_dimension, EqualityType, ParamBox, SetSystem,
};
use shatterlab::structure::{checked_pow, Language, TupleSet};
use shatterlab::Limits;

fn binary() -> Arc<Language> {
    Arc::new(Language::binary())
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn random_system(rng: &mut impl Rng, domain: usize, arity: usize, max_sets: usize) -> SetSystem {
    let points = checked_pow(domain, arity).unwrap();
    let density = rng.gen_range(0.1..0.9);
    let count = rng.gen_range(1..=max_sets);
    let sets: Vec<Bits> = (0..count)
        .map(|_| Bits::from_bools((0..points).map(|_| rng.gen_bool(density))))
        .collect();
    SetSystem::new(domain, arity, sets).unwrap()
}

/// Labeled triangle-free graphs on `[n]` by looping over edge subsets.
fn triangle_free_oracle(n: usize) -> u64 {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let bit = |a: usize, b: usize| pairs.iter().position(|&p| p == (a, b)).unwrap();
    (0u64..1 << pairs.len())
        .filter(|mask| {
            let has = |a, b| mask >> bit(a, b) & 1 == 1;
            !(0..n).any(|a| (a + 1..n).any(|b| (b + 1..n).any(|c| has(a, b) && has(b, c) && has(a, c))))
        })
        .count() as u64
}

fn speeds() -> Result<String> {
    let all = MemberStore::new(Arc::new(HereditaryProperty::all(binary())), Limits::default());
    for n in 0..=3 {
        ensure!(speed_with(&all, n, SpeedMethod::Auto)? == big(1) << (n * n), "all binary, n = {n}");
    }
    let graphs = speed_table(&HereditaryProperty::graphs(), 5, &Limits::default())?;
    for (n, c) in graphs.counts().iter().enumerate() {
        ensure!(*c == big(1) << (n * n.saturating_sub(1) / 2), "graphs, n = {n}");
    }
    let tf = MemberStore::new(Arc::new(HereditaryProperty::triangle_free()), Limits::default());
    let direct = speed_with(&tf, 4, SpeedMethod::Direct)?;
    let orbits = speed_with(&tf, 4, SpeedMethod::Orbits)?;
    let oracle = triangle_free_oracle(4);
    ensure!(direct == orbits && direct == big(oracle), "triangle-free n=4: {direct} / {orbits} / {oracle}");
    Ok(format!("triangle-free n=4: direct {direct} = orbits {orbits} = oracle {oracle}"))
}

fn sauer_shelah() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let limits = Limits::default();
    let mut tight = 0;
    for _ in 0..200 {
        let f = random_system(&mut rng, 8, 1, 60);
        let d = vc_dimension(&f, &limits)?;
        for m in 1..=8u64 {
            let pi = shatter_function(&f, 1, m as usize, &limits)?;
            let bound: u64 = (0..=d as u64).map(|i| binom(m, i)).sum();
            ensure!(pi <= bound, "π(F,{m}) = {pi} exceeds {bound} with d = {d}");
            tight += (pi == bound) as usize;
        }
    }
    Ok(format!("200 systems, 1600 (system, m) pairs, {tight} attain the bound"))
}

fn equivalences() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let limits = Limits::default();
    let mut checks = 0;
    for (domain, arity) in [(4, 2), (3, 3)] {
        for _ in 0..100 {
            let f = random_system(&mut rng, domain, arity, 80);
            for ell in 1..=arity {
                let vc = vc_ell_dimension(&f, ell, &limits)?;
                for m in 1..=3 {
                    let pi = shatter_function(&f, ell, m, &limits)?;
                    let full = 1u64 << m.pow(ell as u32);
                    ensure!(pi <= full && (vc >= m) == (pi == full), "ℓ={ell} m={m} vc={vc} π={pi}");
                    ensure!(find_shattered_box(&f, ell, m, &limits)?.is_some() == (vc >= m), "box search ℓ={ell} m={m}");
                    ensure!(composition_max(&f, ell, m, &limits)? == pi, "composition max ℓ={ell} m={m}");
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} (F, ℓ, m) checks over [4]^2 and [3]^3"))
}

/// Equality pattern of `t` over `params`: parameters by value, others by
/// order of first appearance.
fn pattern(t: &[usize], params: &[usize]) -> Vec<(bool, usize)> {
    let mut fresh: Vec<usize> = Vec::new();
    t.iter()
        .map(|v| {
            if params.contains(v) {
                (true, *v)
            } else {
                let i = fresh.iter().position(|x| x == v).unwrap_or_else(|| {
                    fresh.push(*v);
                    fresh.len() - 1
                });
                (false, i)
            }
        })
        .collect()
}

fn all_patterns(s: usize, params: &[usize]) -> HashSet<Vec<(bool, usize)>> {
    let mut out = HashSet::new();
    let mut t = vec![0; s];
    loop {
        out.insert(pattern(&t, params));
        let Some(i) = (0..s).rev().find(|&i| t[i] + 1 < 10) else {
            return out;
        };
        t[i] += 1;
        t[i + 1..].iter_mut().for_each(|x| *x = 0);
    }
}

fn random_tuples(rng: &mut impl Rng) -> TupleSet {
    let t = rng.gen_range(1..=3);
    let cap = 12usize.pow(t as u32).min(64);
    let size = rng.gen_range(1..=cap);
    let mut set = BTreeSet::new();
    while set.len() < size {
        set.insert((0..t).map(|_| rng.gen_range(0..12)).collect::<Vec<usize>>());
    }
    TupleSet::new(t, set).unwrap()
}

fn underlying_ok(b: &TupleSet) -> bool {
    let u: HashSet<usize> = b.tuples().iter().flatten().copied().collect();
    let t = b.tuple_len();
    u.len() <= t * b.len() && (b.len() as f64) <= (u.len() as f64).powi(t as i32)
}

fn equality_types_and_extraction() -> Result<String> {
    for s in 0..=3usize {
        for k in 0..=3usize {
            let params: Vec<usize> = (0..k).collect();
            let types = equality_types(s, &params);
            let expected = if s == 0 { 1 } else { all_patterns(s, &params).len() };
            let bound = (1usize << (s * s.saturating_sub(1) / 2)) * (k + 1).pow(s as u32);
            ensure!(types.len() == expected && types.len() <= bound, "s={s} |B|={k}: {} types", types.len());
            ensure!(s != 1 || types.len() == k + 1, "s=1 |B|={k}");
            for e in &types {
                ensure!(EqualityType::of(&e.realize(10), &params) == *e, "unrealized type");
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut smallest_slack = usize::MAX;
    for _ in 0..1000 {
        let b = random_tuples(&mut rng);
        let r = extraction_report(&b)?;
        ensure!(is_equality_indiscernible(&r.result), "output not indiscernible: {b:?}");
        ensure!(r.result.tuples().iter().all(|x| b.contains(x)), "output not a subset");
        let t = b.tuple_len() as i32;
        let real = (b.len() as f64 / 2f64.powi(t * (t - 1) / 2)).powf(1.0 / 2f64.powi(t));
        ensure!(r.result.len() as f64 >= real - 1e-9, "size {} below {real:.3}", r.result.len());
        ensure!(underlying_ok(&b) && underlying_ok(&r.result), "underlying-set bounds");
        smallest_slack = smallest_slack.min(r.result.len() - r.bound.min(r.result.len()));
    }
    Ok(format!("types exhaustive for s, |B| <= 3; 1000 extractions, min slack over bound {smallest_slack}"))
}

fn sub_boxes() -> Result<String> {
    let st = MemberStore::new(Arc::new(HereditaryProperty::all(binary())), Limits::default());
    let phi = QfFormula::parse(binary(), "E(x1,y1)")?;
    let mut checked = 0;
    // Every 3-element parameter set in [4], leaving room for a realizing element.
    let budget = 4;
    for skip in 0..4 {
        let a = ParamBox::from_tuples(vec![(0..4).filter(|&v| v != skip).map(|v| vec![v]).collect()])?;
        ensure!(realized_types(&st, &phi, &a, budget)?.len() == 8, "{a:?} is not shattered");
        for m in 1..=3 {
            for sub in a.sub_boxes(m) {
                let got = realized_types(&st, &phi, &sub, budget)?.len();
                ensure!(got == 1 << m, "{sub:?}: {got} types");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} sub-boxes of four shattered height-3 boxes"))
}

fn builder(certs: &mut Vec<Certificate>) -> Result<String> {
    let store = MemberStore::new(Arc::new(HereditaryProperty::graphs()), Limits::default());
    let phi = QfFormula::parse(binary(), "E(x1,y1)")?;
    let (w, b) = witness_lower_bound(&store, &phi, 1, 2, 4, 4)?.context("no height-2 witness")?;
    let Generator::Explicit { structures } = &b.certificate.generator else {
        anyhow::bail!("expected explicit members");
    };
    let distinct: HashSet<_> = structures.iter().collect();
    ensure!(structures.len() == 4 && distinct.len() == 4, "{} members, {} distinct", structures.len(), distinct.len());
    for m in structures {
        ensure!(m.n() == 4 && store.property().contains(m)?, "non-member emitted");
    }
    let sp = speed_with(&store, 4, SpeedMethod::Direct)?;
    ensure!(sp >= big(4), "speed {sp}");
    certs.push(Certificate::lower_bound(&b.certificate, Some((&w, &phi, store.property())))?);
    certs.push(Certificate::vc_star(&w, &phi, store.property())?);
    Ok(format!("4 distinct members of graphs on [4]; direct speed {sp}"))
}

fn example(certs: &mut Vec<Certificate>) -> Result<String> {
    for n in [7, 9, 13, 15, 19, 21] {
        let s = steiner(n)?;
        ensure!(validate_sts(&s), "steiner({n}) invalid");
        ensure!(s.blocks.len() == n * (n - 1) / 6, "steiner({n}) has {} blocks", s.blocks.len());
        certs.push(Certificate::steiner(&s));
    }
    let b = steiner_lower_bound(15)?;
    let count = &b.certificate.count;
    ensure!(*count == big(1) << 35usize, "count {count}");
    ensure!((15 * 15usize).div_ceil(14) == 17 && *count >= big(1) << 17usize, "2^35 < 2^17");
    certs.push(Certificate::lower_bound(&b.certificate, None)?);

    let fano = steiner(7)?;
    let lin = HereditaryProperty::linear_3uniform();
    for mask in 0u64..128 {
        let g = hypergraph_from_blocks(lin.language(), 7, &fano.blocks, &Bits::from_u64(7, mask))?;
        ensure!(lin.contains(&g)?, "Fano subset {mask:#b} rejected");
    }
    Ok("6 systems valid, 2^35 >= 2^17, 128 Fano sub-hypergraphs linear".into())
}

fn estimator() -> Result<String> {
    let g = estimate_pi(&speed_table(&HereditaryProperty::graphs(), 6, &Limits::default())?, 2)?;
    let e = estimate_pi(&speed_table(&HereditaryProperty::edgeless(binary()), 6, &Limits::default())?, 2)?;
    ensure!(g.len() == 5 && g.iter().all(|p| p.decimal == "2.000000"), "graphs {:?}", g);
    ensure!(e.len() == 5 && e.iter().all(|p| p.decimal == "1.000000"), "edgeless {:?}", e);
    Ok("graphs 2.000000 and edgeless 1.000000 for 2 <= n <= 6".into())
}

fn cli_verify(dir: &std::path::Path, name: &str, c: &Certificate) -> Result<Option<i32>> {
    let p = dir.join(name);
    std::fs::write(&p, c.to_json())?;
    Ok(common::run(dir, &["verify", p.to_str().unwrap()]).status.code())
}

fn soundness(certs: &[Certificate]) -> Result<String> {
    ensure!(certs.len() == 9, "expected 9 certificates from criteria 6 and 7, got {}", certs.len());
    let dir = tempfile::tempdir()?;
    for (i, c) in certs.iter().enumerate() {
        let back = Certificate::from_json(&c.to_json())?;
        back.verify(0).map_err(|e| anyhow::anyhow!("{} rejected: {e}", c.kind()))?;
        ensure!(cli_verify(dir.path(), &format!("c{i}.json"), c)? == Some(0), "CLI rejected {}", c.kind());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let m = common::mutant(&certs[i % certs.len()], &mut rng);
        ensure!(m.verify(i as u64).is_err(), "mutant {i} of {} accepted", m.kind());
        ensure!(cli_verify(dir.path(), "m.json", &m)? == Some(4), "CLI accepted mutant {i}");
    }
    Ok(format!("{} certificates accepted, 100 resealed mutants rejected", certs.len()))
}

fn run(k: usize, limit: u64, f: impl FnOnce() -> Result<String>) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f));
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(Ok(d)) if took <= Duration::from_secs(limit) => (true, d),
        Ok(Ok(d)) => (false, format!("{d}; over the time limit")),
        Ok(Err(e)) => (false, format!("{e:#}")),
        Err(_) => (false, "panicked".into()),
    };
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("{tag} criterion {k} ({:.2}s of {limit}s): {detail}", took.as_secs_f64());
    ok
}

fn main() -> ExitCode {
    let mut certs = Vec::new();
    let results = [
        run(1, 10, speeds),
        run(2, 30, sauer_shelah),
        run(3, 60, equivalences),
        run(4, 30, equality_types_and_extraction),
        run(5, 60, sub_boxes),
        run(6, 30, || builder(&mut certs)),
        run(7, 10, || example(&mut certs)),
        run(8, 5, estimator),
        run(9, 30, || soundness(&certs)),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
