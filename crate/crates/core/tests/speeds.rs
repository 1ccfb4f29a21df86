mod common;

use std::collections::HashSet;
use std::sync::Arc;

use common::{binary, factorial, graph, permutations, random_structure, ternary};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shatterlab::hereditary::{
    check_hereditary, speed, speed_table, speed_with, Builtin, HereditaryProperty, MemberStore, SpeedMethod,
};
use shatterlab::structure::{canonical_form_with_automorphisms, enumerate_structures, Language, Structure};
use shatterlab::Limits;

const METHODS: [SpeedMethod; 5] = [
    SpeedMethod::Auto,
    SpeedMethod::Direct,
    SpeedMethod::Candidates,
    SpeedMethod::Extension,
    SpeedMethod::Orbits,
];

/// Labeled triangle-free graphs on `[n]`, counted over edge subsets with
/// plain loops.
fn triangle_free_oracle(n: usize) -> u64 {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let idx = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
    let mut count = 0;
    for mask in 0u64..1 << pairs.len() {
        let has = |a, b| mask >> idx(a, b) & 1 == 1;
        let mut ok = true;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if has(a, b) && has(b, c) && has(a, c) {
                        ok = false;
                    }
                }
            }
        }
        count += ok as u64;
    }
    count
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

#[test]
fn all_binary_structures() {
    let all = HereditaryProperty::all(binary());
    let t = speed_table(&all, 3, &Limits::default()).unwrap();
    assert_eq!(t.counts(), vec![big(1), big(2), big(16), big(512)]);
    let mixed = HereditaryProperty::all(Arc::new(Language::parse("E:3,P:1").unwrap()));
    assert_eq!(speed(&mixed, 2, &Limits::default()).unwrap(), big(1024));
}

#[test]
fn graphs_and_edgeless() {
    let t = speed_table(&HereditaryProperty::graphs(), 5, &Limits::default()).unwrap();
    assert_eq!(t.counts(), [1u64, 1, 2, 8, 64, 1024].map(big).to_vec());
    let e = speed_table(&HereditaryProperty::edgeless(binary()), 6, &Limits::default()).unwrap();
    assert!(e.counts().iter().all(|c| *c == big(1)));
}

#[test]
fn triangle_free_against_oracle() {
    // Also the published sequence 1, 1, 2, 7, 41, 388.
    let published = [1u64, 1, 2, 7, 41, 388];
    let prop = HereditaryProperty::triangle_free();
    for (n, &p) in published.iter().enumerate() {
        assert_eq!(triangle_free_oracle(n), p);
        assert_eq!(speed(&prop, n, &Limits::default()).unwrap(), big(p));
    }
    let store = MemberStore::new(Arc::new(prop), Limits::default());
    for m in METHODS {
        assert_eq!(speed_with(&store, 4, m).unwrap(), big(41), "{m:?}");
    }
}

fn forbidden_examples() -> Vec<HereditaryProperty> {
    let lang = binary();
    let path3 = graph(3, &[(0, 1), (1, 2)]);
    let loop1 = Structure::from_tuples(lang.clone(), 1, &[(0, vec![vec![0, 0]])]).unwrap();
    let one_way = Structure::from_tuples(lang.clone(), 2, &[(0, vec![vec![0, 1]])]).unwrap();
    vec![
        HereditaryProperty::forbidden("no_path3", lang.clone(), Some(Builtin::Graphs), vec![path3]).unwrap(),
        HereditaryProperty::forbidden("loopless_symmetric", lang.clone(), None, vec![loop1, one_way]).unwrap(),
    ]
}

#[test]
fn methods_agree() {
    let mut props = vec![
        HereditaryProperty::graphs(),
        HereditaryProperty::triangle_free(),
        HereditaryProperty::all(binary()),
        HereditaryProperty::linear_3uniform(),
        HereditaryProperty::hypergraphs3(),
    ];
    props.extend(forbidden_examples());
    for p in props {
        let ternary = p.language().max_arity() == 3;
        let store = MemberStore::new(Arc::new(p), Limits::default());
        for n in 0..=4 {
            let mut counts = Vec::new();
            for m in METHODS {
                // Direct enumeration of ternary structures is 2^{n³}.
                if m == SpeedMethod::Direct && (ternary && n > 2 || n > 4) {
                    continue;
                }
                if store.property().name() == "all" && n > 3 {
                    continue;
                }
                counts.push((m, speed_with(&store, n, m).unwrap()));
            }
            for (m, c) in &counts {
                assert_eq!(c, &counts[0].1, "{} n={n} {m:?}", store.property().name());
            }
        }
    }
}

#[test]
fn direct_count_equals_orbit_sum() {
    // Σ over canonical forms of n!/|Aut|, computed here from the raw
    // enumeration rather than by the orbits method.
    for p in forbidden_examples().into_iter().chain([HereditaryProperty::triangle_free()]) {
        for n in 0..=4 {
            let mut forms = HashSet::new();
            let mut labeled = 0u64;
            let mut orbit_sum = 0u64;
            for m in enumerate_structures(p.language().clone(), n, &Limits::default()).unwrap() {
                if !p.contains(&m).unwrap() {
                    continue;
                }
                labeled += 1;
                let (f, aut) = canonical_form_with_automorphisms(&m);
                if forms.insert(f) {
                    orbit_sum += factorial(n as u64) / aut;
                }
            }
            assert_eq!(labeled, orbit_sum);
            assert_eq!(speed(&p, n, &Limits::default()).unwrap(), big(labeled));
        }
    }
}

#[test]
fn forbidden_families_are_closed_under_deletion() {
    for p in forbidden_examples() {
        for n in 1..=4 {
            for m in enumerate_structures(p.language().clone(), n, &Limits::default()).unwrap() {
                if !p.contains(&m).unwrap() {
                    continue;
                }
                for skip in 0..n {
                    let rest: Vec<usize> = (0..n).filter(|&x| x != skip).collect();
                    if rest.is_empty() {
                        continue;
                    }
                    assert!(p.contains(&m.induced_substructure(&rest).unwrap()).unwrap());
                }
            }
        }
    }
}

#[test]
fn membership_is_isomorphism_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let perms = permutations(5);
    let props = [
        HereditaryProperty::graphs(),
        HereditaryProperty::triangle_free(),
        HereditaryProperty::linear_3uniform(),
    ];
    for p in &props {
        let lang = p.language().clone();
        for i in 0..300 {
            let m = random_structure(&lang, 5, 0.3, &mut rng);
            let r = m.relabel(&perms[(i * 37) % perms.len()]);
            assert_eq!(p.contains(&m).unwrap(), p.contains(&r).unwrap());
        }
    }
}

#[test]
fn membership_examples() {
    let c4 = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    assert!(HereditaryProperty::triangle_free().contains(&c4).unwrap());
    let lin = HereditaryProperty::linear_3uniform();
    let lang = ternary();
    let edge = |e: [usize; 3]| -> Vec<Vec<usize>> {
        permutations(3).into_iter().map(|p| p.iter().map(|&i| e[i]).collect()).collect()
    };
    let mut facts = edge([0, 1, 2]);
    facts.extend(edge([0, 1, 3]));
    let two = Structure::from_tuples(lang.clone(), 4, &[(0, facts)]).unwrap();
    assert!(!lin.contains(&two).unwrap());
    assert!(HereditaryProperty::hypergraphs3().contains(&two).unwrap());
    assert!(lin.contains(&graph(3, &[])).is_err());
}

#[test]
fn closure_checks_on_custom_predicates() {
    let even = HereditaryProperty::custom("even_edges", binary(), |m| m.fact_count() % 4 == 0);
    let r = check_hereditary(&even, 10_000, 0);
    assert!(!r.passed());

    // Pair degree at most one, written out over raw ternary facts.
    let pair_degree = HereditaryProperty::custom("pair_degree", ternary(), |m| {
        let g = HereditaryProperty::hypergraphs3();
        if !g.contains_unchecked(m) {
            return false;
        }
        let n = m.n();
        for a in 0..n {
            for b in a + 1..n {
                if (0..n).filter(|&c| m.holds(0, &[a, b, c])).count() > 1 {
                    return false;
                }
            }
        }
        true
    });
    let r = check_hereditary(&pair_degree, 10_000, 0);
    assert!(r.passed());
    assert!(r.members_checked > 0);
    for p in forbidden_examples() {
        assert!(check_hereditary(&p, 2_000, 1).passed());
    }
}
