//! Subcommand implementations and the mapping from errors to exit codes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use shatterlab::bits::Bits;
use shatterlab::certificate::Certificate;
use shatterlab::constructions::{steiner, steiner_lower_bound, validate_sts, witness_lower_bound};
use shatterlab::dichotomy::{classify, ClassifyOptions};
use shatterlab::formula::QfFormula;
use shatterlab::hereditary::{check_hereditary, speed_table_with, HereditaryProperty, MemberStore, SpeedMethod, ViolationKind};
use shatterlab::serial::{one_based, StructureJson};
use shatterlab::shatter::{
    extraction_report, find_shattered_box, shatter_function, trace_family, vc_dimension, vc_ell_at_least,
    vc_ell_dimension, vc_star_at_least, BoxJson, SetSystem,
};
use shatterlab::structure::{enumerate_structures, tuple_unrank, Language};
use shatterlab::{Error, Limits};

use crate::{cache, input, Cli, Command, PropertyArgs, SearchArgs};

/// Raised by `verify` when a certificate fails its replay.
#[derive(Debug)]
pub struct Rejected(pub String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "certificate rejected: {}", self.0)
    }
}

impl std::error::Error for Rejected {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<Rejected>().is_some() {
            return 4;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::InvalidArgument(_) | Error::Parse(_) => 2,
                Error::ResourceLimit(_) => 3,
            };
        }
    }
    1
}

struct Ctx {
    limits: Limits,
    seed: u64,
    cache_dir: Option<PathBuf>,
}

impl Ctx {
    fn store(&self, p: &PropertyArgs) -> Result<MemberStore> {
        let prop = input::property(&p.property, p.language.as_deref())?;
        Ok(MemberStore::new(Arc::new(prop), self.limits))
    }

    /// Where certificates go when no path is given.
    fn certificate_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(std::env::temp_dir)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut limits = Limits::default();
    if let Some(k) = cli.max_enumeration_log2 {
        if k > 62 {
            return Err(Error::InvalidArgument("--max-enumeration-log2 must be at most 62".into()).into());
        }
        limits.max_enumeration = 1 << k;
    }
    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os("SHATTERLAB_CACHE_DIR").map(PathBuf::from));
    let ctx = Ctx {
        limits,
        seed: cli.seed,
        cache_dir,
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let res = dispatch(&ctx, &cli.command, &mut out);
    out.flush()?;
    res
}

fn dispatch(ctx: &Ctx, cmd: &Command, out: &mut impl Write) -> Result<()> {
    match cmd {
        Command::Enumerate {
            language,
            property,
            n,
            limit,
        } => enumerate(ctx, language.as_deref(), property.as_deref(), *n, *limit, out),
        Command::Speed {
            property,
            n_max,
            method,
            csv,
        } => speed(ctx, property, *n_max, method, csv.as_deref(), out),
        Command::Vc { search, max_height } => vc(ctx, search, *max_height, out),
        Command::Vcell {
            search,
            ell,
            height,
            max_height,
        } => vcell(ctx, search, *ell, *height, *max_height, out),
        Command::Vcstar {
            search,
            ell,
            height,
            certificate,
        } => vcstar(ctx, search, *ell, *height, certificate.as_deref(), out),
        Command::LowerBound {
            search,
            ell,
            height,
            n,
            certificate,
        } => lower_bound(ctx, search, *ell, *height, *n, certificate.as_deref(), out),
        Command::Shatterfn { file, ell, height } => shatterfn(ctx, file, *ell, *height, out),
        Command::ExtractIndiscernible { file } => extract(file, out),
        Command::Steiner { n, certificate } => steiner_cmd(*n, certificate.as_deref(), out),
        Command::Example1 { n, certificate } => example1(*n, certificate.as_deref(), out),
        Command::Classify {
            property,
            n_max,
            vc_budget,
            max_height,
            stabilization,
            csv,
        } => {
            let opts = ClassifyOptions {
                n_max: *n_max,
                vc_budget: *vc_budget,
                max_height: *max_height,
                stabilization: *stabilization,
                ..ClassifyOptions::default()
            };
            classify_cmd(ctx, property, &opts, csv.as_deref(), out)
        }
        Command::Verify { certificate } => verify(ctx, certificate, out),
        Command::Traces { property, formula, n } => traces(ctx, property, formula, *n, out),
        Command::CheckHereditary { property, budget } => check(ctx, property, *budget, out),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes `cert` to `path`, or to a digest-named file in the default directory.
fn save_certificate(ctx: &Ctx, cert: &Certificate, path: Option<&Path>) -> Result<PathBuf> {
    let path = match path {
        Some(p) => p.to_path_buf(),
        None => ctx
            .certificate_dir()
            .join(format!("{}-{}.json", cert.kind(), &cert.digest[..16])),
    };
    write_file(&path, &cert.to_json())?;
    Ok(path)
}

fn parse_formula(store: &MemberStore, text: &str) -> Result<QfFormula> {
    Ok(QfFormula::parse(store.property().language().clone(), text)?)
}

fn enumerate(
    ctx: &Ctx,
    language: Option<&str>,
    property: Option<&str>,
    n: usize,
    limit: Option<u64>,
    out: &mut impl Write,
) -> Result<()> {
    let limit = limit.unwrap_or(u64::MAX);
    let mut emit = |m: &shatterlab::structure::Structure| -> Result<()> {
        writeln!(out, "{}", serde_json::to_string(&StructureJson::from_structure(m))?)?;
        Ok(())
    };
    match property {
        Some(p) => {
            let prop = input::property(p, language)?;
            let store = MemberStore::new(Arc::new(prop), ctx.limits);
            for m in store.members(n)?.iter().take(limit.try_into().unwrap_or(usize::MAX)) {
                emit(m)?;
            }
        }
        None => {
            let lang = match language {
                Some(l) => Language::parse(l)?,
                None => Language::binary(),
            };
            for m in enumerate_structures(Arc::new(lang), n, &ctx.limits)?.take(limit.try_into().unwrap_or(usize::MAX)) {
                emit(&m)?;
            }
        }
    }
    Ok(())
}

fn speed(
    ctx: &Ctx,
    p: &PropertyArgs,
    n_max: usize,
    method: &str,
    csv: Option<&Path>,
    out: &mut impl Write,
) -> Result<()> {
    let method = SpeedMethod::from_name(method)?;
    let store = ctx.store(p)?;
    let prop = store.property().clone();
    // Only the default method reads the cache, so the others can be cross-checked.
    let prior = match (&ctx.cache_dir, method) {
        (Some(dir), SpeedMethod::Auto) => cache::load(dir, &prop),
        _ => None,
    };
    let cached = prior.as_ref().map_or(0, |t| t.entries.len());
    let (table, err) = speed_table_with(&store, n_max, method, prior, |_| {});
    if let Some(dir) = &ctx.cache_dir {
        if table.entries.len() > cached {
            cache::store(dir, &prop, &table)?;
        }
    }
    let text = table.to_csv();
    out.write_all(text.as_bytes())?;
    if let Some(path) = csv {
        write_file(path, &text)?;
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn box_line(b: &shatterlab::shatter::ParamBox) -> Result<String> {
    Ok(serde_json::to_string(&BoxJson::from_box(b))?)
}

fn vc(ctx: &Ctx, s: &SearchArgs, max_height: usize, out: &mut impl Write) -> Result<()> {
    let store = ctx.store(&s.property)?;
    let phi = parse_formula(&store, &s.formula)?;
    let mut best = 0;
    for m in 1..=max_height {
        match vc_ell_at_least(&store, &phi, 1, m, s.budget_n)? {
            Some(b) => {
                writeln!(out, "height {m}: shattered by {}", box_line(&b)?)?;
                best = m;
            }
            None => {
                writeln!(out, "height {m}: none within budget-n {}", s.budget_n)?;
                break;
            }
        }
    }
    let bound = if best == max_height { "at least " } else { "" };
    writeln!(out, "vc: {bound}{best}")?;
    Ok(())
}

fn vcell(
    ctx: &Ctx,
    s: &SearchArgs,
    ell: usize,
    height: Option<usize>,
    max_height: usize,
    out: &mut impl Write,
) -> Result<()> {
    let store = ctx.store(&s.property)?;
    let phi = parse_formula(&store, &s.formula)?;
    let heights: Vec<usize> = match height {
        Some(m) => vec![m],
        None => (1..=max_height).collect(),
    };
    let mut best = 0;
    for &m in &heights {
        match vc_ell_at_least(&store, &phi, ell, m, s.budget_n)? {
            Some(b) => {
                writeln!(out, "height {m}: shattered by {}", box_line(&b)?)?;
                best = m;
            }
            None => {
                writeln!(out, "height {m}: none within budget-n {}", s.budget_n)?;
                break;
            }
        }
    }
    if height.is_none() {
        let bound = if best == max_height { "at least " } else { "" };
        writeln!(out, "vc_{ell}: {bound}{best}")?;
    }
    Ok(())
}

fn vcstar(
    ctx: &Ctx,
    s: &SearchArgs,
    ell: usize,
    height: usize,
    cert: Option<&Path>,
    out: &mut impl Write,
) -> Result<()> {
    let store = ctx.store(&s.property)?;
    let phi = parse_formula(&store, &s.formula)?;
    match vc_star_at_least(&store, &phi, ell, height, s.budget_n)? {
        None => writeln!(out, "witnessed: false")?,
        Some(w) => {
            let c = Certificate::vc_star(&w, &phi, store.property())?;
            let path = save_certificate(ctx, &c, cert)?;
            writeln!(out, "witnessed: true")?;
            writeln!(out, "box: {}", box_line(&w.param_box)?)?;
            writeln!(out, "rho: {}", w.rho)?;
            writeln!(out, "realizations: {}", w.realizations.len())?;
            writeln!(out, "certificate: {}", path.display())?;
        }
    }
    Ok(())
}

fn lower_bound(
    ctx: &Ctx,
    s: &SearchArgs,
    ell: usize,
    height: usize,
    n: Option<usize>,
    cert: Option<&Path>,
    out: &mut impl Write,
) -> Result<()> {
    let store = ctx.store(&s.property)?;
    let phi = parse_formula(&store, &s.formula)?;
    let n = match n {
        Some(n) => n,
        // The construction never needs more than the search universe.
        None => match vc_star_at_least(&store, &phi, ell.saturating_sub(1), height, s.budget_n)? {
            Some(w) => w.realizations[0].structure.n(),
            None => s.budget_n,
        },
    };
    match witness_lower_bound(&store, &phi, ell, height, s.budget_n, n)? {
        None => writeln!(out, "witnessed: false")?,
        Some((w, b)) => {
            let c = Certificate::lower_bound(&b.certificate, Some((&w, &phi, store.property())))?;
            let path = save_certificate(ctx, &c, cert)?;
            writeln!(out, "witnessed: true")?;
            writeln!(out, "n: {n}")?;
            writeln!(out, "members: {}", b.certificate.count)?;
            writeln!(out, "min_n: {}", b.min_n)?;
            writeln!(out, "proof_n: {}", b.proof_n)?;
            writeln!(out, "certificate: {}", path.display())?;
        }
    }
    Ok(())
}

fn shatterfn(ctx: &Ctx, file: &Path, ell: usize, height: usize, out: &mut impl Write) -> Result<()> {
    let f = input::set_system(&input::read(file)?)?;
    let pi = shatter_function(&f, ell, height, &ctx.limits)?;
    let full = u32::try_from(height.pow(ell as u32))
        .ok()
        .and_then(|e| 1u128.checked_shl(e))
        .map_or_else(|| "overflow".to_string(), |v| v.to_string());
    writeln!(out, "sets: {}", f.len())?;
    writeln!(out, "shatter_function: {pi}")?;
    writeln!(out, "maximum: {full}")?;
    if let Some(b) = find_shattered_box(&f, ell, height, &ctx.limits)? {
        let comps: Vec<Vec<Vec<usize>>> = b
            .components
            .iter()
            .map(|c| one_based(c))
            .collect();
        writeln!(out, "shattered_box: {}", serde_json::to_string(&comps)?)?;
    }
    writeln!(out, "vc_dimension: {}", vc_dimension(&f, &ctx.limits)?)?;
    writeln!(out, "vc_{ell}_dimension: {}", vc_ell_dimension(&f, ell, &ctx.limits)?)?;
    Ok(())
}

fn extract(file: &Path, out: &mut impl Write) -> Result<()> {
    let b = input::tuples(&input::read(file)?)?;
    let r = extraction_report(&b)?;
    eprintln!(
        "input {} tuples, kept {}, bound {}, path {:?}",
        b.len(),
        r.result.len(),
        r.bound,
        r.path
    );
    for t in one_based(r.result.tuples()) {
        let words: Vec<String> = t.iter().map(usize::to_string).collect();
        writeln!(out, "{}", words.join(" "))?;
    }
    Ok(())
}

fn steiner_cmd(n: usize, cert: Option<&Path>, out: &mut impl Write) -> Result<()> {
    let s = steiner(n)?;
    if !validate_sts(&s) {
        return Err(anyhow!("internal: construction on [{n}] is not a Steiner triple system"));
    }
    out.write_all(s.to_text().as_bytes())?;
    if let Some(path) = cert {
        write_file(path, &Certificate::steiner(&s).to_json())?;
    }
    Ok(())
}

fn example1(n: usize, cert: Option<&Path>, out: &mut impl Write) -> Result<()> {
    let b = steiner_lower_bound(n)?;
    writeln!(out, "n: {n}")?;
    writeln!(out, "base_order: {}", n - b.shift)?;
    writeln!(out, "count: 2^{}", b.exponent)?;
    writeln!(out, "target: 2^{}", b.target_exponent)?;
    writeln!(out, "meets_target: {}", b.meets_target)?;
    if let Some(path) = cert {
        write_file(path, &Certificate::lower_bound(&b.certificate, None)?.to_json())?;
        writeln!(out, "certificate: {}", path.display())?;
    }
    Ok(())
}

fn classify_cmd(
    ctx: &Ctx,
    p: &PropertyArgs,
    opts: &ClassifyOptions,
    csv: Option<&Path>,
    out: &mut impl Write,
) -> Result<()> {
    let prop: Arc<HereditaryProperty> = ctx.store(p)?.property().clone();
    let (report, err) = classify(prop, opts, &ctx.limits);
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    if let Some(path) = csv {
        write_file(path, &report.to_csv())?;
    }
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn verify(ctx: &Ctx, path: &Path, out: &mut impl Write) -> Result<()> {
    let text = input::read(path)?;
    let cert = Certificate::from_json(&text).map_err(|e| Rejected(e.to_string()))?;
    let summary = cert.verify(ctx.seed).map_err(Rejected)?;
    writeln!(out, "valid: {}", summary.kind)?;
    writeln!(out, "members_checked: {}", summary.members_checked)?;
    writeln!(out, "exhaustive: {}", summary.exhaustive)?;
    Ok(())
}

fn traces(ctx: &Ctx, p: &PropertyArgs, formula: &str, n: usize, out: &mut impl Write) -> Result<()> {
    let store = ctx.store(p)?;
    let phi = parse_formula(&store, formula)?;
    let fam = trace_family(&store, &phi, n)?;
    writeln!(out, "formula: {}", fam.formula)?;
    writeln!(out, "n: {n}")?;
    writeln!(out, "traces: {}", fam.traces.len())?;
    writeln!(out, "vc: {}", fam.vc)?;
    writeln!(out, "vc_r: {}", fam.vc_r)?;
    for s in fam.traces.sets() {
        writeln!(out, "{}", trace_line(&fam.traces, s))?;
    }
    Ok(())
}

fn trace_line(f: &SetSystem, s: &Bits) -> String {
    let mut line = String::new();
    let mut t = Vec::new();
    for (i, rank) in s.ones().enumerate() {
        tuple_unrank(f.domain(), f.arity(), rank, &mut t);
        let words: Vec<String> = t.iter().map(|x| (x + 1).to_string()).collect();
        let _ = write!(line, "{}({})", if i > 0 { " " } else { "" }, words.join(","));
    }
    if line.is_empty() {
        line.push_str("{}");
    }
    line
}

fn check(ctx: &Ctx, p: &PropertyArgs, budget: usize, out: &mut impl Write) -> Result<()> {
    let prop = ctx.store(p)?.property().clone();
    let report = check_hereditary(&prop, budget, ctx.seed);
    writeln!(out, "members_checked: {}", report.members_checked)?;
    writeln!(out, "candidates_examined: {}", report.candidates_examined)?;
    writeln!(out, "passed: {}", report.passed())?;
    for v in &report.violations {
        let how = match &v.kind {
            ViolationKind::Deletion(x) => format!("deleting {}", x + 1),
            ViolationKind::Relabel(perm) => format!("relabeling by {:?}", perm.iter().map(|x| x + 1).collect::<Vec<_>>()),
        };
        writeln!(
            out,
            "violation: {} from {}",
            how,
            serde_json::to_string(&StructureJson::from_structure(&v.member))?
        )?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{} is not hereditary", prop.name())).into())
    }
}
