use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::members::Shape;
use crate::error::{invalid, Error, Result};
use crate::serial::StructureJson;
use crate::structure::{canonical_form, for_each_tuple, Language, Structure};

/// Built-in properties. Graph and hypergraph encodings are membership
/// constraints on unrestricted structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// Every structure.
    All,
    /// Structures with no facts at all.
    Edgeless,
    /// One binary relation, symmetric and irreflexive.
    Graphs,
    /// Graphs with no triangle.
    TriangleFree,
    /// One ternary relation, invariant under permuting arguments, with
    /// distinct entries.
    Hypergraphs3,
    /// 3-uniform hypergraphs in which every pair lies in at most one edge.
    #[serde(rename = "linear_3uniform")]
    Linear3Uniform,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::All,
        Builtin::Edgeless,
        Builtin::Graphs,
        Builtin::TriangleFree,
        Builtin::Hypergraphs3,
        Builtin::Linear3Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::All => "all",
            Builtin::Edgeless => "edgeless",
            Builtin::Graphs => "graphs",
            Builtin::TriangleFree => "triangle_free",
            Builtin::Hypergraphs3 => "hypergraphs3",
            Builtin::Linear3Uniform => "linear_3uniform",
        }
    }

    pub fn from_name(s: &str) -> Result<Builtin> {
        Builtin::ALL
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Builtin::ALL.iter().map(|b| b.name()).collect();
                Error::InvalidArgument(format!("unknown builtin {s:?} (known: {})", names.join(", ")))
            })
    }

    pub fn default_language(self) -> Language {
        match self {
            Builtin::Hypergraphs3 | Builtin::Linear3Uniform => Language::ternary(),
            _ => Language::binary(),
        }
    }

    fn required_arity(self) -> Option<usize> {
        match self {
            Builtin::Graphs | Builtin::TriangleFree => Some(2),
            Builtin::Hypergraphs3 | Builtin::Linear3Uniform => Some(3),
            _ => None,
        }
    }

    fn check_language(self, lang: &Language) -> Result<()> {
        if let Some(a) = self.required_arity() {
            if lang.len() != 1 || lang.arity(0) != a {
                return invalid(format!(
                    "builtin {} needs a language with exactly one relation of arity {a}, got {lang}",
                    self.name()
                ));
            }
        }
        Ok(())
    }

    fn shapes(self, lang: &Language) -> Vec<Shape> {
        match self {
            Builtin::All | Builtin::Edgeless => vec![Shape::Free; lang.len()],
            _ => vec![Shape::Uniform],
        }
    }
}

/// Symmetric under all argument permutations and no repeated entries.
fn is_uniform(m: &Structure, rel: usize) -> bool {
    let a = m.language().arity(rel);
    let mut ok = true;
    let mut buf = Vec::with_capacity(a);
    for_each_tuple(m.n(), a, |t| {
        if !ok {
            return;
        }
        let h = m.holds(rel, t);
        let distinct = (0..a).all(|i| (i + 1..a).all(|j| t[i] != t[j]));
        if !distinct {
            if h {
                ok = false;
            }
            return;
        }
        // Compare with the sorted representative.
        buf.clear();
        buf.extend_from_slice(t);
        buf.sort_unstable();
        if m.holds(rel, &buf) != h {
            ok = false;
        }
    });
    ok
}

fn pair_degrees_at_most_one(m: &Structure) -> bool {
    let n = m.n();
    let mut deg = vec![0u8; n * n];
    for t in m.tuples(0) {
        if t[0] < t[1] && t[1] < t[2] {
            for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                deg[a * n + b] += 1;
                if deg[a * n + b] > 1 {
                    return false;
                }
            }
        }
    }
    true
}

fn builtin_contains(b: Builtin, m: &Structure) -> bool {
    match b {
        Builtin::All => true,
        Builtin::Edgeless => m.bits().is_zero(),
        Builtin::Graphs | Builtin::Hypergraphs3 => is_uniform(m, 0),
        Builtin::TriangleFree => {
            if !is_uniform(m, 0) {
                return false;
            }
            let n = m.n();
            for a in 0..n {
                for b in a + 1..n {
                    if !m.holds(0, &[a, b]) {
                        continue;
                    }
                    for c in b + 1..n {
                        if m.holds(0, &[a, c]) && m.holds(0, &[b, c]) {
                            return false;
                        }
                    }
                }
            }
            true
        }
        Builtin::Linear3Uniform => is_uniform(m, 0) && pair_degrees_at_most_one(m),
    }
}

pub type Predicate = Arc<dyn Fn(&Structure) -> bool + Send + Sync>;

#[derive(Clone)]
enum Definition {
    Builtin(Builtin),
    Forbidden {
        within: Option<Builtin>,
        /// Canonical forbidden members grouped by universe size.
        by_size: BTreeMap<usize, HashSet<Structure>>,
    },
    Custom(Predicate),
}

/// The serializable description of a property (the property-file format).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySpec {
    /// `"forbidden"` or `"builtin:<name>"`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Language in `NAME:ARITY,...` form. Builtins have a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    /// For `forbidden`: an optional builtin the members must also satisfy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<StructureJson>,
}

/// A class of finite structures closed under isomorphism and induced
/// substructures.
#[derive(Clone)]
pub struct HereditaryProperty {
    name: String,
    lang: Arc<Language>,
    shapes: Vec<Shape>,
    def: Definition,
    spec: Option<PropertySpec>,
}

impl fmt::Debug for HereditaryProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HereditaryProperty({} over {})", self.name, self.lang)
    }
}

impl HereditaryProperty {
    pub fn builtin(b: Builtin, lang: Arc<Language>) -> Result<Self> {
        b.check_language(&lang)?;
        let spec = PropertySpec {
            kind: format!("builtin:{}", b.name()),
            name: None,
            language: Some(lang.to_string()),
            within: None,
            forbidden: Vec::new(),
        };
        Ok(HereditaryProperty {
            name: b.name().to_string(),
            shapes: b.shapes(&lang),
            lang,
            def: Definition::Builtin(b),
            spec: Some(spec),
        })
    }

    /// A builtin over its default language.
    pub fn builtin_default(b: Builtin) -> Self {
        Self::builtin(b, Arc::new(b.default_language())).unwrap()
    }

    pub fn all(lang: Arc<Language>) -> Self {
        Self::builtin(Builtin::All, lang).unwrap()
    }

    pub fn edgeless(lang: Arc<Language>) -> Self {
        Self::builtin(Builtin::Edgeless, lang).unwrap()
    }

    pub fn graphs() -> Self {
        Self::builtin_default(Builtin::Graphs)
    }

    pub fn triangle_free() -> Self {
        Self::builtin_default(Builtin::TriangleFree)
    }

    pub fn hypergraphs3() -> Self {
        Self::builtin_default(Builtin::Hypergraphs3)
    }

    pub fn linear_3uniform() -> Self {
        Self::builtin_default(Builtin::Linear3Uniform)
    }

    /// `Forb(family)`, optionally intersected with a builtin.
    pub fn forbidden(
        name: impl Into<String>,
        lang: Arc<Language>,
        within: Option<Builtin>,
        family: Vec<Structure>,
    ) -> Result<Self> {
        if let Some(b) = within {
            b.check_language(&lang)?;
        }
        let mut by_size: BTreeMap<usize, HashSet<Structure>> = BTreeMap::new();
        for f in &family {
            if **f.language_arc() != *lang {
                return invalid("forbidden structure over a different language");
            }
            if f.n() == 0 {
                return invalid("forbidding the empty structure leaves no members");
            }
            by_size.entry(f.n()).or_default().insert(canonical_form(f));
        }
        let name = name.into();
        let spec = PropertySpec {
            kind: "forbidden".into(),
            name: Some(name.clone()),
            language: Some(lang.to_string()),
            within: within.map(|b| b.name().to_string()),
            forbidden: family.iter().map(StructureJson::from_structure).collect(),
        };
        Ok(HereditaryProperty {
            name,
            shapes: within.map_or(vec![Shape::Free; lang.len()], |b| b.shapes(&lang)),
            lang,
            def: Definition::Forbidden { within, by_size },
            spec: Some(spec),
        })
    }

    /// A property given by an arbitrary membership predicate. Closure is the
    /// caller's claim; [`check_hereditary`](super::check_hereditary) tests it.
    pub fn custom(
        name: impl Into<String>,
        lang: Arc<Language>,
        pred: impl Fn(&Structure) -> bool + Send + Sync + 'static,
    ) -> Self {
        let shapes = vec![Shape::Free; lang.len()];
        HereditaryProperty {
            name: name.into(),
            lang,
            shapes,
            def: Definition::Custom(Arc::new(pred)),
            spec: None,
        }
    }

    /// Restricts candidate enumeration to the given shapes. The predicate
    /// must reject every structure outside them.
    pub fn with_shapes(mut self, shapes: Vec<Shape>) -> Result<Self> {
        if shapes.len() != self.lang.len() {
            return invalid("one shape per relation is required");
        }
        self.shapes = shapes;
        Ok(self)
    }

    pub fn from_spec(spec: &PropertySpec) -> Result<Self> {
        let parse_lang = |default: Option<Language>| -> Result<Arc<Language>> {
            match (&spec.language, default) {
                (Some(s), _) => Ok(Arc::new(Language::parse(s)?)),
                (None, Some(l)) => Ok(Arc::new(l)),
                (None, None) => invalid("property file needs a language"),
            }
        };
        if let Some(bname) = spec.kind.strip_prefix("builtin:") {
            let b = Builtin::from_name(bname)?;
            let mut p = Self::builtin(b, parse_lang(Some(b.default_language()))?)?;
            if let Some(n) = &spec.name {
                p.name = n.clone();
                p.spec.as_mut().unwrap().name = Some(n.clone());
            }
            return Ok(p);
        }
        if spec.kind != "forbidden" {
            return invalid(format!("unknown property kind {:?}", spec.kind));
        }
        let lang = parse_lang(None)?;
        let within = spec.within.as_deref().map(Builtin::from_name).transpose()?;
        let family = spec
            .forbidden
            .iter()
            .map(|s| s.to_structure(&lang))
            .collect::<Result<Vec<_>>>()?;
        Self::forbidden(spec.name.clone().unwrap_or_else(|| "forbidden".into()), lang, within, family)
    }

    /// Parses either `builtin:<name>` or the JSON text of a property file.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PropertySpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("property file: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.lang
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    /// The serializable description, or `None` for custom predicates.
    pub fn spec(&self) -> Option<&PropertySpec> {
        self.spec.as_ref()
    }

    /// Builtins and forbidden families are hereditary by construction.
    pub fn is_closed_by_construction(&self) -> bool {
        !matches!(self.def, Definition::Custom(_))
    }

    /// Hex sha256 of the property description.
    pub fn fingerprint(&self) -> String {
        let text = match &self.spec {
            Some(s) => serde_json::to_string(s).unwrap(),
            None => format!("custom:{}:{}", self.name, self.lang),
        };
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn contains(&self, m: &Structure) -> Result<bool> {
        if **m.language_arc() != *self.lang {
            return invalid(format!(
                "structure over {} tested against a property over {}",
                m.language(),
                self.lang
            ));
        }
        Ok(self.contains_unchecked(m))
    }

    /// Membership without the language check.
    pub fn contains_unchecked(&self, m: &Structure) -> bool {
        match &self.def {
            Definition::Builtin(b) => builtin_contains(*b, m),
            Definition::Custom(p) => p(m),
            Definition::Forbidden { within, by_size } => {
                within.is_none_or(|b| builtin_contains(b, m)) && !has_forbidden(m, by_size, false)
            }
        }
    }

    /// Membership of `m` on `[n]` given that `m` restricted to `[n-1]` is
    /// already known to be a member. Only valid for properties closed by
    /// construction; custom predicates are evaluated in full.
    pub fn contains_extension(&self, m: &Structure) -> bool {
        match &self.def {
            Definition::Forbidden { within, by_size } => {
                within.is_none_or(|b| builtin_contains(b, m)) && !has_forbidden(m, by_size, true)
            }
            _ => self.contains_unchecked(m),
        }
    }
}

/// Whether some induced substructure of `m` is isomorphic to a forbidden
/// member. With `only_last`, only subsets containing the last element are
/// inspected.
fn has_forbidden(m: &Structure, by_size: &BTreeMap<usize, HashSet<Structure>>, only_last: bool) -> bool {
    let n = m.n();
    for (&k, family) in by_size {
        if k > n {
            break;
        }
        let mut found = false;
        for_each_subset(n, k, only_last, |s| {
            if !found {
                let sub = m.induced_ordered(s);
                if family.contains(&canonical_form(&sub)) {
                    found = true;
                }
            }
        });
        if found {
            return true;
        }
    }
    false
}

/// Every `k`-subset of `0..n` as an ascending slice; with `with_last`, only
/// those containing `n - 1`.
pub(crate) fn for_each_subset(n: usize, k: usize, with_last: bool, mut f: impl FnMut(&[usize])) {
    if k > n || (with_last && k == 0) {
        return;
    }
    let (pool, take) = if with_last { (n - 1, k - 1) } else { (n, k) };
    let mut idx: Vec<usize> = (0..take).collect();
    let mut buf = Vec::with_capacity(k);
    loop {
        buf.clear();
        buf.extend_from_slice(&idx);
        if with_last {
            buf.push(n - 1);
        }
        f(&buf);
        // Advance to the next combination of `take` out of `pool`.
        let mut i = take;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + pool - take {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..take {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut t = Vec::new();
        for &(a, b) in edges {
            t.push(vec![a, b]);
            t.push(vec![b, a]);
        }
        Structure::from_tuples(Arc::new(Language::binary()), n, &[(0, t)]).unwrap()
    }

    fn hyper(n: usize, edges: &[[usize; 3]]) -> Structure {
        let mut t = Vec::new();
        for e in edges {
            for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                t.push(vec![e[p[0]], e[p[1]], e[p[2]]]);
            }
        }
        Structure::from_tuples(Arc::new(Language::ternary()), n, &[(0, t)]).unwrap()
    }

    #[test]
    fn four_cycle_is_triangle_free() {
        let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(HereditaryProperty::triangle_free().contains(&c4).unwrap());
        let k3 = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(!HereditaryProperty::triangle_free().contains(&k3).unwrap());
    }

    #[test]
    fn pair_degree_two_is_not_linear() {
        let h = hyper(4, &[[0, 1, 2], [0, 1, 3]]);
        let lin = HereditaryProperty::linear_3uniform();
        assert!(!lin.contains(&h).unwrap());
        assert!(lin.contains(&hyper(5, &[[0, 1, 2], [2, 3, 4]])).unwrap());
        assert!(HereditaryProperty::hypergraphs3().contains(&h).unwrap());
    }

    #[test]
    fn graph_encoding_is_enforced() {
        let g = HereditaryProperty::graphs();
        let directed = Structure::from_tuples(Arc::new(Language::binary()), 2, &[(0, vec![vec![0, 1]])]).unwrap();
        assert!(!g.contains(&directed).unwrap());
        let lp = Structure::from_tuples(Arc::new(Language::binary()), 1, &[(0, vec![vec![0, 0]])]).unwrap();
        assert!(!g.contains(&lp).unwrap());
        assert!(g.contains(&graph(3, &[(0, 2)])).unwrap());
    }

    #[test]
    fn language_mismatch_is_an_error() {
        let m = Structure::empty(Arc::new(Language::ternary()), 2).unwrap();
        assert!(HereditaryProperty::graphs().contains(&m).is_err());
        assert!(HereditaryProperty::builtin(Builtin::Graphs, Arc::new(Language::ternary())).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let k3 = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let p = HereditaryProperty::forbidden("no K3", Arc::new(Language::binary()), Some(Builtin::Graphs), vec![k3]).unwrap();
        let text = serde_json::to_string(p.spec().unwrap()).unwrap();
        let q = HereditaryProperty::from_json(&text).unwrap();
        assert_eq!(q.name(), "no K3");
        assert_eq!(q.fingerprint(), p.fingerprint());
        let b = HereditaryProperty::from_json(r#"{"kind":"builtin:linear_3uniform"}"#).unwrap();
        assert_eq!(b.language().to_string(), "E:3");
        assert!(HereditaryProperty::from_json(r#"{"kind":"builtin:nope"}"#).is_err());
        assert!(HereditaryProperty::from_json(r#"{"kind":"forbidden"}"#).is_err());
    }

    #[test]
    fn subsets_with_last() {
        let mut all = Vec::new();
        for_each_subset(4, 2, false, |s| all.push(s.to_vec()));
        assert_eq!(all.len(), 6);
        let mut last = Vec::new();
        for_each_subset(4, 2, true, |s| last.push(s.to_vec()));
        assert_eq!(last, vec![vec![0, 3], vec![1, 3], vec![2, 3]]);
        let mut one = Vec::new();
        for_each_subset(3, 1, true, |s| one.push(s.to_vec()));
        assert_eq!(one, vec![vec![2]]);
        let mut zero = 0;
        for_each_subset(3, 0, false, |_| zero += 1);
        assert_eq!(zero, 1);
    }
}
