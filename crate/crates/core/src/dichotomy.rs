//! Growth reports: exact `π̂_n = |H_n|^{1/C(n,r)}`, a crude shape fit, and
//! witness sweeps, combined into an evidence-graded verdict.
//!
//! Verdicts are never proofs of asymptotic behaviour. The two positive
//! verdicts are only issued together with a certificate that `verify`
//! accepts; the polynomial verdict is a heuristic label.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::constructions::{lower_bound_from_witness, steiner_lower_bound};
use crate::error::{invalid, Error, Result};
use crate::formula::{rel_formulas, QfFormula};
use crate::hereditary::{speed_table_with, HereditaryProperty, MemberStore, SpeedMethod, SpeedTable};
use crate::limits::Limits;
use crate::shatter::vc_star_at_least;

/// `|H_n|^{1/C(n,r)}` for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiEstimate {
    pub n: usize,
    #[serde(with = "crate::serial::biguint_string")]
    pub count: BigUint,
    /// `C(n, r)`.
    pub root: u64,
    /// Rounded to 6 decimal places from the exact value.
    pub decimal: String,
}

impl PiEstimate {
    pub fn value(&self) -> f64 {
        self.decimal.parse().unwrap()
    }
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `count^{1/root}` rounded to 6 decimals, using only integer roots.
pub fn root_decimal(count: &BigUint, root: u64) -> String {
    let root32 = u32::try_from(root).expect("root too large");
    let scale = BigUint::from(10u32).pow(7 * root32);
    let q7 = (count * scale).nth_root(root32);
    let q6 = (q7 + 5u32) / 10u32;
    let million = BigUint::from(1_000_000u32);
    format!("{}.{:06}", &q6 / &million, (&q6 % &million).to_u64().unwrap())
}

/// Exact `π̂_n` for every entry with `C(n, r) ≥ 1`.
pub fn estimate_pi(table: &SpeedTable, r: usize) -> Result<Vec<PiEstimate>> {
    if r == 0 {
        return invalid("arity must be at least 1");
    }
    let Some(max_n) = table.max_n() else {
        return invalid("speed table is empty or does not start at n = 0");
    };
    if max_n < r {
        return invalid(format!("speed table stops at n = {max_n}, below the arity {r}"));
    }
    let mut out = Vec::new();
    for n in r..=max_n {
        let count = table.get(n).unwrap().clone();
        let root = binom(n as u64, r as u64);
        let decimal = root_decimal(&count, root);
        out.push(PiEstimate {
            n,
            count,
            root,
            decimal,
        });
    }
    Ok(out)
}

/// `log₂ x` for big integers (`-∞` for zero).
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().log2() + shift as f64
}

/// Least-squares slope of `y` against `x`.
fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PolynomialConsistent,
    ExponentialAtLeast,
    FullDimensional,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::PolynomialConsistent => "polynomial-consistent",
            Verdict::ExponentialAtLeast => "exponential-at-least",
            Verdict::FullDimensional => "full-dimensional",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of the witness search for one formula and `ℓ`, sweeping heights
/// upward until the first failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcEvidence {
    pub formula: String,
    pub ell: usize,
    /// Largest height witnessed (0 if none).
    pub height: usize,
    pub budget_n: usize,
    pub witnessed: bool,
    /// Set when the sweep stopped on a budget rather than a negative answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub n_max: usize,
    /// Universe bound `N` for witness searches.
    pub vc_budget: usize,
    /// Largest height tried in witness sweeps.
    pub max_height: usize,
    pub stabilization: f64,
    pub slope_threshold: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            n_max: 5,
            vc_budget: 4,
            max_height: 3,
            stabilization: 1e-3,
            slope_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub format: u32,
    pub property: String,
    pub arity: usize,
    pub speeds: SpeedTable,
    pub pi_hat: Vec<PiEstimate>,
    pub log2_speeds: Vec<f64>,
    /// Slope of `log₂ log₂ |H_n|` against `log₂ n`.
    pub fitted_exponent: Option<f64>,
    /// Whether the last two `π̂` values differ by less than the threshold.
    pub pi_stabilized: bool,
    pub verdict: Verdict,
    pub vc_evidence: Vec<VcEvidence>,
    pub certificates: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl GrowthReport {
    /// `n,count,pi_hat` rows (empty `pi_hat` below the arity).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,count,pi_hat\n");
        for e in &self.speeds.entries {
            let pi = self.pi_hat.iter().find(|p| p.n == e.n).map_or("", |p| p.decimal.as_str());
            s.push_str(&format!("{},{},{}\n", e.n, e.count, pi));
        }
        s
    }
}

/// Height-1 witnesses only say that φ is not constant, so they never
/// support a verdict on their own.
const MIN_VERDICT_HEIGHT: usize = 2;

type Witness = (QfFormula, crate::shatter::VcStarWitness);

fn keep_taller(best: &mut Option<Witness>, found: Option<Witness>) {
    if let Some(f) = found {
        if best.as_ref().is_none_or(|b| f.1.height > b.1.height) {
            *best = Some(f);
        }
    }
}

struct Sweep {
    evidence: VcEvidence,
    best: Option<Witness>,
    /// The height the search definitely failed at, if it got that far.
    refuted_at: Option<usize>,
}

impl Sweep {
    /// Whether the sweep rules out every witness that could support a verdict.
    fn settled_low(&self) -> bool {
        self.refuted_at.is_some_and(|m| m <= MIN_VERDICT_HEIGHT)
    }
}

fn sweep(store: &MemberStore, phi: &QfFormula, ell: usize, opts: &ClassifyOptions) -> Sweep {
    let mut ev = VcEvidence {
        formula: phi.to_string(),
        ell,
        height: 0,
        budget_n: opts.vc_budget,
        witnessed: false,
        error: None,
    };
    let mut best = None;
    let mut refuted_at = None;
    for m in 1..=opts.max_height {
        match vc_star_at_least(store, phi, ell, m, opts.vc_budget) {
            Ok(Some(w)) => {
                ev.height = m;
                ev.witnessed = true;
                best = Some((phi.clone(), w));
            }
            Ok(None) => {
                refuted_at = Some(m);
                break;
            }
            Err(e) => {
                ev.error = Some(e.to_string());
                break;
            }
        }
    }
    Sweep {
        evidence: ev,
        best,
        refuted_at,
    }
}

/// Builds the growth report for `prop`. A budget failure while tabulating
/// speeds is returned next to the partial report.
pub fn classify(prop: Arc<HereditaryProperty>, opts: &ClassifyOptions, limits: &Limits) -> (GrowthReport, Option<Error>) {
    let lang = prop.language().clone();
    let r = lang.max_arity();
    let store = MemberStore::new(prop.clone(), *limits);
    let (speeds, speed_err) = speed_table_with(&store, opts.n_max, SpeedMethod::Auto, None, |_| {});
    let mut notes = Vec::new();
    let pi_hat = match estimate_pi(&speeds, r) {
        Ok(p) => p,
        Err(e) => {
            notes.push(format!("π̂ unavailable: {e}"));
            Vec::new()
        }
    };
    let log2_speeds: Vec<f64> = speeds.entries.iter().map(|e| log2_big(&e.count)).collect();
    let shape: Vec<(f64, f64)> = speeds
        .entries
        .iter()
        .zip(&log2_speeds)
        .filter(|(e, &l)| e.n >= 2 && l > 0.0)
        .map(|(e, &l)| ((e.n as f64).log2(), l.log2()))
        .collect();
    let fitted_exponent = slope(&shape);
    let bounded = speeds.entries.iter().all(|e| e.count <= BigUint::one());
    let pi_stabilized = match pi_hat.as_slice() {
        [.., a, b] => (a.value() - b.value()).abs() < opts.stabilization,
        _ => false,
    };
    let last_pi_above_one = pi_hat.last().is_some_and(|p| p.value() > 1.0);

    let formulas = rel_formulas(&lang);
    let mut vc_evidence = Vec::new();
    let mut certificates = Vec::new();
    let mut verdict = Verdict::Inconclusive;

    // Full dimension: a VC*_{r-1} witness, with π̂ above 1.
    let mut full_witness = None;
    let mut full_settled = true;
    if r >= 1 {
        for phi in formulas.iter().filter(|f| f.y_arity() >= r - 1) {
            let s = sweep(&store, phi, r - 1, opts);
            full_settled &= s.settled_low();
            keep_taller(&mut full_witness, s.best);
            vc_evidence.push(s.evidence);
        }
    }
    if let Some((phi, w)) = full_witness.as_ref().filter(|(_, w)| w.height >= MIN_VERDICT_HEIGHT) {
        match Certificate::vc_star(w, phi, &prop) {
            Ok(c) if last_pi_above_one => {
                certificates.push(c);
                verdict = Verdict::FullDimensional;
            }
            Ok(_) => notes.push("a top-level witness exists but π̂ does not exceed 1 on the sample".into()),
            Err(e) => notes.push(format!("witness not certifiable: {e}")),
        }
    }

    // Exponential: a VC*_0 witness turned into distinct members.
    let mut zero_exhausted = true;
    let mut zero_witness = None;
    if r >= 2 {
        for phi in &formulas {
            let s = sweep(&store, phi, 0, opts);
            zero_exhausted &= s.settled_low();
            keep_taller(&mut zero_witness, s.best);
            vc_evidence.push(s.evidence);
        }
    } else {
        zero_exhausted = full_settled;
        zero_witness = full_witness.clone();
    }
    if verdict == Verdict::Inconclusive {
        if let Some((phi, w)) = zero_witness.as_ref().filter(|(_, w)| w.height >= MIN_VERDICT_HEIGHT) {
            let n = w.realizations[0].structure.n();
            match lower_bound_from_witness(&store, phi, w, n)
                .and_then(|b| Certificate::lower_bound(&b.certificate, Some((w, phi, &prop))))
            {
                Ok(c) => {
                    certificates.push(c);
                    verdict = Verdict::ExponentialAtLeast;
                }
                Err(e) => notes.push(format!("no lower-bound certificate from the witness: {e}")),
            }
        }
    }
    if prop.spec().is_some_and(|s| s.kind == "builtin:linear_3uniform") {
        let n = opts.n_max.max(7);
        if let Ok(b) = steiner_lower_bound(n) {
            notes.push(format!(
                "Steiner construction: |H_{n}| ≥ 2^{} (target exponent ⌈n²/14⌉ = {}, {})",
                b.exponent,
                b.target_exponent,
                if b.meets_target { "met" } else { "not met" }
            ));
            if let Ok(c) = Certificate::lower_bound(&b.certificate, None) {
                certificates.push(c);
                if verdict == Verdict::Inconclusive {
                    verdict = Verdict::ExponentialAtLeast;
                }
            }
        }
    }
    if verdict == Verdict::Inconclusive && zero_exhausted {
        let polynomial_shape = bounded || fitted_exponent.is_some_and(|s| s < opts.slope_threshold);
        if polynomial_shape {
            verdict = Verdict::PolynomialConsistent;
        }
    }
    if let Some(e) = &speed_err {
        notes.push(format!("speed table stopped early: {e}"));
    }
    (
        GrowthReport {
            format: crate::certificate::FORMAT,
            property: prop.name().to_string(),
            arity: r,
            speeds,
            pi_hat,
            log2_speeds,
            fitted_exponent,
            pi_stabilized,
            verdict,
            vc_evidence,
            certificates,
            notes,
        },
        speed_err,
    )
}
