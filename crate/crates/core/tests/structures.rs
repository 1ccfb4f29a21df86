mod common;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use common::{binary, factorial, graph, permutations, random_structure};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shatterlab::bits::Bits;
use shatterlab::structure::{
    automorphism_count, canonical_form, enumerate_structures, find_isomorphism, is_isomorphic, structure_count,
    Language, Structure, TupleSet,
};
use shatterlab::Limits;

/// Smallest bit string over all relabelings: an orbit key that shares no
/// code with the refinement search.
fn brute_orbit_key(m: &Structure) -> Bits {
    permutations(m.n()).iter().map(|p| m.relabel(p).into_bits()).min().unwrap()
}

#[test]
fn canonical_form_matches_brute_force_orbits() {
    let lang = binary();
    for n in 0..=3 {
        let all: Vec<Structure> = enumerate_structures(lang.clone(), n, &Limits::default()).unwrap().collect();
        let mut pairs = HashSet::new();
        for m in &all {
            pairs.insert((canonical_form(m), brute_orbit_key(m)));
        }
        let forms: HashSet<_> = pairs.iter().map(|p| &p.0).collect();
        let keys: HashSet<_> = pairs.iter().map(|p| &p.1).collect();
        // A bijection between canonical forms and orbits.
        assert_eq!(forms.len(), pairs.len());
        assert_eq!(keys.len(), pairs.len());
    }
}

#[test]
fn unlabeled_graph_counts() {
    // Isomorphism classes of simple graphs on n vertices.
    let expected = [1, 1, 2, 4, 11, 34];
    for (n, &want) in expected.iter().enumerate() {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let mut forms = HashSet::new();
        let mut labeled = 0u64;
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let g = graph(n, &edges);
            if forms.insert(canonical_form(&g)) {
                labeled += factorial(n as u64) / automorphism_count(&g);
            }
        }
        assert_eq!(forms.len(), want, "n = {n}");
        // Orbit-stabilizer over the classes recovers every labeled graph.
        assert_eq!(labeled, 1 << pairs.len());
    }
}

#[test]
fn structure_counts_closed_form() {
    let l = Language::parse("E:3,P:1").unwrap();
    assert_eq!(structure_count(&l, 2), Some(10));
    let b = Language::binary();
    assert_eq!(structure_count(&b, 2), Some(4));
    assert_eq!(structure_count(&b, 3), Some(9));
    for n in 0..=3 {
        let it = enumerate_structures(Arc::new(Language::parse("E:2,P:1").unwrap()), n, &Limits::default()).unwrap();
        assert_eq!(it.count() as u64, 1 << (n * n + n));
    }
}

#[test]
fn isomorphism_is_an_equivalence_on_samples() {
    let lang = binary();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sample: Vec<Structure> = (0..40).map(|_| random_structure(&lang, 4, 0.2, &mut rng)).collect();
    let mut with_copies = sample.clone();
    for (i, m) in sample.iter().enumerate() {
        let perms = permutations(4);
        with_copies.push(m.relabel(&perms[i % perms.len()]));
    }
    let iso = |a: &Structure, b: &Structure| is_isomorphic(a, b).unwrap();
    for a in &with_copies {
        assert!(iso(a, a));
        for b in &with_copies {
            assert_eq!(iso(a, b), iso(b, a));
            assert_eq!(iso(a, b), canonical_form(a) == canonical_form(b));
        }
    }
}

#[test]
fn spec_substructure_examples() {
    let path = graph(3, &[(0, 1), (1, 2)]);
    let sub = path.induced_substructure(&[0, 2]).unwrap();
    assert_eq!(sub, graph(2, &[]));
    assert_eq!(path.induced_substructure(&[0, 1, 2]).unwrap(), path);

    let lang = Arc::new(Language::ternary());
    let perms = |e: [usize; 3]| -> Vec<Vec<usize>> {
        permutations(3).into_iter().map(|p| p.iter().map(|&i| e[i]).collect()).collect()
    };
    let mut facts = perms([0, 1, 2]);
    facts.extend(perms([0, 1, 3]));
    let h = Structure::from_tuples(lang.clone(), 4, &[(0, facts)]).unwrap();
    let want = Structure::from_tuples(lang, 3, &[(0, perms([0, 1, 2]))]).unwrap();
    assert_eq!(h.induced_substructure(&[0, 1, 2]).unwrap(), want);
}

fn structure_strategy(n: usize) -> impl Strategy<Value = Structure> {
    proptest::collection::vec(any::<bool>(), n * n)
        .prop_map(move |bits| Structure::from_bits(binary(), n, Bits::from_bools(bits)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn induced_substructure_is_transitive(m in structure_strategy(5), b_mask in 1u32..32, a_pick in any::<u32>()) {
        let b: Vec<usize> = (0..5).filter(|i| b_mask >> i & 1 == 1).collect();
        let positions: Vec<usize> = (0..b.len()).filter(|i| a_pick >> i & 1 == 1).collect();
        prop_assume!(!positions.is_empty());
        let a: Vec<usize> = positions.iter().map(|&i| b[i]).collect();
        let mb = m.induced_substructure(&b).unwrap();
        prop_assert_eq!(mb.induced_substructure(&positions).unwrap(), m.induced_substructure(&a).unwrap());
    }

    #[test]
    fn canonical_form_respects_relabeling(m in structure_strategy(5), k in 0usize..120) {
        let p = &permutations(5)[k];
        let r = m.relabel(p);
        prop_assert_eq!(canonical_form(&m), canonical_form(&r));
        let f = find_isomorphism(&m, &r).unwrap().unwrap();
        prop_assert_eq!(m.relabel(&f), r);
    }

    #[test]
    fn tuple_set_size_bounds(t in 1usize..=3, raw in proptest::collection::vec(proptest::collection::vec(0usize..6, 3), 1..40)) {
        let ts = TupleSet::new(t, raw.into_iter().map(|v| v[..t].to_vec())).unwrap();
        let under = ts.underlying().len();
        prop_assert!(under <= t * ts.len());
        prop_assert!(ts.len() <= under.pow(t as u32));
        prop_assert!(ts.satisfies_size_bounds());
        let set: BTreeSet<&Vec<usize>> = ts.tuples().iter().collect();
        prop_assert_eq!(set.len(), ts.len());
    }
}
