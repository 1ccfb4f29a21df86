//! Versioned JSON certificates and their replay checker.
//!
//! A certificate is `{"format": 1, "kind": ..., "digest": ..., "payload": ...}`
//! where `digest` is the hex sha256 of the compact JSON of the payload.
//! Verification recomputes the digest and then re-checks every claim the
//! payload makes from scratch.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::constructions::{
    blocks_distinct, hypergraph_from_blocks, validate_sts, Generator, LowerBoundCertificate, SteinerTripleSystem,
};
use crate::error::{invalid, Error, Result};
use crate::formula::QfFormula;
use crate::hereditary::{HereditaryProperty, PropertySpec};
use crate::serial::{one_based, zero_based, StructureJson};
use crate::shatter::{BoxJson, EqualityType, PhiType, Realization, Slot, VcStarWitness};
use crate::structure::Structure;

pub const FORMAT: u32 = 1;

/// Steiner-subset generators with at most this many blocks are replayed in
/// full; larger ones are sampled.
pub const FULL_REPLAY_BLOCKS: usize = 20;

/// Members sampled when a generator is too large to replay in full.
pub const SAMPLE_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: u32,
    pub digest: String,
    #[serde(flatten)]
    pub body: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    SteinerSystem(SteinerPayload),
    LowerBound(LowerBoundPayload),
    VcStar(VcStarPayload),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerPayload {
    pub n: usize,
    /// 1-based sorted triples.
    pub blocks: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundPayload {
    pub property: PropertySpec,
    pub n: usize,
    pub count: String,
    pub generator: GeneratorJson,
    /// The search result the members were built from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<VcStarPayload>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeneratorJson {
    SteinerSubsets { base_n: usize, blocks: Vec<[usize; 3]> },
    Explicit { structures: Vec<StructureJson> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcStarPayload {
    pub property: PropertySpec,
    pub formula: String,
    pub x_arity: usize,
    pub y_arity: usize,
    pub ell: usize,
    pub height: usize,
    pub budget_n: usize,
    #[serde(rename = "box")]
    pub param_box: BoxJson,
    /// 1-based parameters and one entry per variable: `"=k"` (equals
    /// parameter element `k`) or `"ck"` (fresh class `k`).
    pub rho: RhoJson,
    pub realizations: Vec<RealizationJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoJson {
    pub params: Vec<usize>,
    pub slots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationJson {
    pub structure: StructureJson,
    /// 1-based object tuples.
    pub tuples: Vec<Vec<usize>>,
    /// One bit string per tuple, indexed by box product tuple.
    pub types: Vec<String>,
}

/// What a successful replay checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifySummary {
    pub kind: &'static str,
    /// Structures whose membership was re-checked.
    pub members_checked: usize,
    /// Whether every claimed member was replayed (as opposed to sampled).
    pub exhaustive: bool,
}

fn rho_json(rho: &EqualityType) -> RhoJson {
    RhoJson {
        params: rho.params.iter().map(|x| x + 1).collect(),
        slots: rho
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Param(i) => format!("={}", rho.params[i] + 1),
                Slot::Fresh(c) => format!("c{}", c + 1),
            })
            .collect(),
    }
}

fn rho_from_json(r: &RhoJson) -> Result<EqualityType> {
    let params = zero_based(std::slice::from_ref(&r.params))?.remove(0);
    let mut sorted = params.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted != params {
        return invalid("equality-type parameters must be sorted and distinct");
    }
    let mut slots = Vec::new();
    for s in &r.slots {
        let bad = || Error::Parse(format!("bad equality-type entry {s:?}"));
        if let Some(v) = s.strip_prefix('=') {
            let v: usize = v.parse().map_err(|_| bad())?;
            let i = params.iter().position(|&p| p + 1 == v).ok_or_else(bad)?;
            slots.push(Slot::Param(i));
        } else if let Some(c) = s.strip_prefix('c') {
            let c: usize = c.parse().map_err(|_| bad())?;
            if c == 0 {
                return Err(bad());
            }
            slots.push(Slot::Fresh(c - 1));
        } else {
            return Err(bad());
        }
    }
    Ok(EqualityType { params, slots })
}

fn property_spec(prop: &HereditaryProperty) -> Result<PropertySpec> {
    prop.spec()
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("custom predicates cannot be written into certificates".into()))
}

fn vc_star_payload(w: &VcStarWitness, phi: &QfFormula, prop: &HereditaryProperty) -> Result<VcStarPayload> {
    Ok(VcStarPayload {
        property: property_spec(prop)?,
        formula: phi.to_string(),
        x_arity: phi.x_arity(),
        y_arity: phi.y_arity(),
        ell: w.ell,
        height: w.height,
        budget_n: w.budget_n,
        param_box: BoxJson::from_box(&w.param_box),
        rho: rho_json(&w.rho),
        realizations: w
            .realizations
            .iter()
            .map(|r| RealizationJson {
                structure: StructureJson::from_structure(&r.structure),
                tuples: one_based(&r.tuples),
                types: r.types.iter().map(|t| t.bits().to_bit_string()).collect(),
            })
            .collect(),
    })
}

fn blocks_json(blocks: &[[usize; 3]]) -> Vec<[usize; 3]> {
    blocks.iter().map(|b| [b[0] + 1, b[1] + 1, b[2] + 1]).collect()
}

fn blocks_from_json(blocks: &[[usize; 3]]) -> Result<Vec<[usize; 3]>> {
    blocks
        .iter()
        .map(|b| {
            if b.contains(&0) {
                invalid("block points are 1-based")
            } else {
                Ok([b[0] - 1, b[1] - 1, b[2] - 1])
            }
        })
        .collect()
}

impl Certificate {
    fn seal(body: Payload) -> Certificate {
        let digest = digest_of(&body);
        Certificate {
            format: FORMAT,
            digest,
            body,
        }
    }

    /// Recomputes the digest after the payload was edited.
    pub fn reseal(&mut self) {
        self.digest = digest_of(&self.body);
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            Payload::SteinerSystem(_) => "steiner_system",
            Payload::LowerBound(_) => "lower_bound",
            Payload::VcStar(_) => "vc_star",
        }
    }

    pub fn steiner(s: &SteinerTripleSystem) -> Certificate {
        Certificate::seal(Payload::SteinerSystem(SteinerPayload {
            n: s.n,
            blocks: blocks_json(&s.blocks),
        }))
    }

    /// A lower-bound certificate, optionally carrying the witness it was
    /// built from.
    pub fn lower_bound(
        lb: &LowerBoundCertificate,
        witness: Option<(&VcStarWitness, &QfFormula, &HereditaryProperty)>,
    ) -> Result<Certificate> {
        let generator = match &lb.generator {
            Generator::SteinerSubsets { system } => GeneratorJson::SteinerSubsets {
                base_n: system.n,
                blocks: blocks_json(&system.blocks),
            },
            Generator::Explicit { structures } => GeneratorJson::Explicit {
                structures: structures.iter().map(StructureJson::from_structure).collect(),
            },
        };
        let witness = witness.map(|(w, phi, prop)| vc_star_payload(w, phi, prop)).transpose()?;
        Ok(Certificate::seal(Payload::LowerBound(LowerBoundPayload {
            property: lb.property.clone(),
            n: lb.n,
            count: lb.count.to_string(),
            generator,
            witness,
        })))
    }

    pub fn vc_star(w: &VcStarWitness, phi: &QfFormula, prop: &HereditaryProperty) -> Result<Certificate> {
        Ok(Certificate::seal(Payload::VcStar(vc_star_payload(w, phi, prop)?)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("certificate: {e}")))
    }

    /// Replays the certificate. `seed` drives the sampling of generators
    /// too large to replay in full. The error names the first failed check.
    pub fn verify(&self, seed: u64) -> std::result::Result<VerifySummary, String> {
        if self.format != FORMAT {
            return Err(format!("unsupported format {}", self.format));
        }
        if digest_of(&self.body) != self.digest {
            return Err("digest does not match the payload".into());
        }
        match &self.body {
            Payload::SteinerSystem(p) => {
                let blocks = blocks_from_json(&p.blocks).map_err(|e| e.to_string())?;
                let s = SteinerTripleSystem { n: p.n, blocks };
                if !validate_sts(&s) {
                    return Err("blocks do not cover every pair exactly once".into());
                }
                Ok(VerifySummary {
                    kind: "steiner_system",
                    members_checked: 0,
                    exhaustive: true,
                })
            }
            Payload::VcStar(p) => {
                replay_vc_star(p)?;
                Ok(VerifySummary {
                    kind: "vc_star",
                    members_checked: p.realizations.len(),
                    exhaustive: true,
                })
            }
            Payload::LowerBound(p) => replay_lower_bound(p, seed),
        }
    }
}

fn digest_of(body: &Payload) -> String {
    let text = serde_json::to_string(body).unwrap();
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn load_property(spec: &PropertySpec) -> std::result::Result<HereditaryProperty, String> {
    HereditaryProperty::from_spec(spec).map_err(|e| format!("property: {e}"))
}

fn replay_vc_star(p: &VcStarPayload) -> std::result::Result<(HereditaryProperty, VcStarWitness), String> {
    let prop = load_property(&p.property)?;
    let lang = prop.language().clone();
    let phi = QfFormula::parse_with_arity(lang.clone(), &p.formula, p.x_arity, p.y_arity)
        .map_err(|e| format!("formula: {e}"))?;
    let param_box = p.param_box.to_box().map_err(|e| format!("box: {e}"))?;
    let rho = rho_from_json(&p.rho).map_err(|e| format!("equality type: {e}"))?;
    let mut realizations = Vec::new();
    for (i, r) in p.realizations.iter().enumerate() {
        let structure = r.structure.to_structure(&lang).map_err(|e| format!("realization {i}: {e}"))?;
        let tuples = zero_based(&r.tuples).map_err(|e| format!("realization {i}: {e}"))?;
        let types = r
            .types
            .iter()
            .map(|t| Bits::parse_bit_string(t).map(PhiType))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| format!("realization {i}: bad type string"))?;
        realizations.push(Realization {
            structure,
            tuples,
            types,
        });
    }
    let w = VcStarWitness {
        ell: p.ell,
        height: p.height,
        budget_n: p.budget_n,
        param_box,
        rho,
        realizations,
    };
    w.check(&prop, &phi)?;
    Ok((prop, w))
}

fn replay_lower_bound(p: &LowerBoundPayload, seed: u64) -> std::result::Result<VerifySummary, String> {
    let prop = load_property(&p.property)?;
    let lang = prop.language().clone();
    let count: BigUint = p.count.parse().map_err(|_| "count is not a decimal integer".to_string())?;
    let member_ok = |m: &Structure| -> std::result::Result<(), String> {
        if m.n() != p.n {
            return Err(format!("member on [{}] instead of [{}]", m.n(), p.n));
        }
        match prop.contains(m) {
            Ok(true) => Ok(()),
            Ok(false) => Err("a generated structure is not in the property".into()),
            Err(e) => Err(e.to_string()),
        }
    };
    match &p.generator {
        GeneratorJson::SteinerSubsets { base_n, blocks } => {
            let blocks = blocks_from_json(blocks).map_err(|e| e.to_string())?;
            if *base_n > p.n {
                return Err("Steiner system is larger than the universe".into());
            }
            let system = SteinerTripleSystem { n: *base_n, blocks };
            if !validate_sts(&system) || !blocks_distinct(&system.blocks) {
                return Err("generator blocks are not a Steiner triple system".into());
            }
            let k = system.blocks.len();
            if count != BigUint::one() << k {
                return Err(format!("count {count} is not 2^{k}"));
            }
            let build = |mask: &Bits| hypergraph_from_blocks(&lang, p.n, &system.blocks, mask).map_err(|e| e.to_string());
            if k <= FULL_REPLAY_BLOCKS {
                let mut seen = HashSet::new();
                for code in 0..1u64 << k {
                    let m = build(&Bits::from_u64(k, code))?;
                    member_ok(&m)?;
                    if !seen.insert(m) {
                        return Err("two block selections give the same structure".into());
                    }
                }
                Ok(VerifySummary {
                    kind: "lower_bound",
                    members_checked: 1 << k,
                    exhaustive: true,
                })
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut masks = vec![Bits::new(k), {
                    let mut all = Bits::new(k);
                    (0..k).for_each(|i| all.insert(i));
                    all
                }];
                while masks.len() < SAMPLE_SIZE {
                    masks.push(Bits::from_bools((0..k).map(|_| rng.gen_bool(0.5))));
                }
                for mask in &masks {
                    member_ok(&build(mask)?)?;
                }
                Ok(VerifySummary {
                    kind: "lower_bound",
                    members_checked: masks.len(),
                    exhaustive: false,
                })
            }
        }
        GeneratorJson::Explicit { structures } => {
            if count != BigUint::from(structures.len()) {
                return Err(format!("count {count} but {} structures listed", structures.len()));
            }
            let mut parsed = Vec::with_capacity(structures.len());
            for (i, s) in structures.iter().enumerate() {
                let m = s.to_structure(&lang).map_err(|e| format!("structure {i}: {e}"))?;
                member_ok(&m).map_err(|e| format!("structure {i}: {e}"))?;
                parsed.push(m);
            }
            let distinct: HashSet<&Structure> = parsed.iter().collect();
            if distinct.len() != parsed.len() {
                return Err("listed structures are not pairwise distinct".into());
            }
            if let Some(wp) = &p.witness {
                if wp.property != p.property {
                    return Err("witness is for a different property".into());
                }
                let (_, w) = replay_vc_star(wp).map_err(|e| format!("witness: {e}"))?;
                if w.realizations.len() != parsed.len() {
                    return Err("witness and member list differ in length".into());
                }
                for (i, (r, m)) in w.realizations.iter().zip(&parsed).enumerate() {
                    let k = r.structure.n();
                    if k > m.n() || m.induced_ordered(&(0..k).collect::<Vec<_>>()) != r.structure {
                        return Err(format!("structure {i} does not extend realization {i}"));
                    }
                }
            }
            Ok(VerifySummary {
                kind: "lower_bound",
                members_checked: parsed.len(),
                exhaustive: true,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::constructions::{steiner, steiner_lower_bound, witness_lower_bound};
    use crate::hereditary::MemberStore;
    use crate::limits::Limits;
    use crate::structure::Language;

    #[test]
    fn steiner_round_trip() {
        let c = Certificate::steiner(&steiner(7).unwrap());
        let text = c.to_json();
        assert!(text.contains("\"format\": 1"));
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert!(back.verify(0).is_ok());
        let mut bad = back.clone();
        if let Payload::SteinerSystem(p) = &mut bad.body {
            p.blocks[0][0] = p.blocks[0][1];
        }
        assert!(bad.verify(0).is_err());
        bad.reseal();
        assert!(bad.verify(0).is_err());
    }

    #[test]
    fn steiner_lower_bounds_replay() {
        let small = steiner_lower_bound(7).unwrap();
        let c = Certificate::lower_bound(&small.certificate, None).unwrap();
        let s = c.verify(0).unwrap();
        assert!(s.exhaustive);
        assert_eq!(s.members_checked, 128);
        let big = steiner_lower_bound(15).unwrap();
        let c = Certificate::lower_bound(&big.certificate, None).unwrap();
        let s = c.verify(3).unwrap();
        assert!(!s.exhaustive);
    }

    #[test]
    fn witness_bound_replays_and_detects_edits() {
        let prop = Arc::new(HereditaryProperty::graphs());
        let store = MemberStore::new(prop.clone(), Limits::default());
        let phi = QfFormula::parse(Arc::new(Language::binary()), "E(x1,y1)").unwrap();
        let (w, b) = witness_lower_bound(&store, &phi, 1, 2, 4, 4).unwrap().unwrap();
        let c = Certificate::lower_bound(&b.certificate, Some((&w, &phi, &prop))).unwrap();
        assert!(Certificate::from_json(&c.to_json()).unwrap().verify(0).is_ok());
        let v = Certificate::vc_star(&w, &phi, &prop).unwrap();
        assert!(v.verify(0).is_ok());
        let mut bad = v.clone();
        if let Payload::VcStar(p) = &mut bad.body {
            p.realizations[1].structure.relations.get_mut("E").unwrap().push(vec![1, 1]);
        }
        bad.reseal();
        assert!(bad.verify(0).is_err());
    }
}
