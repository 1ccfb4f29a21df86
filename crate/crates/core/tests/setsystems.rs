use std::collections::HashSet;

use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shatterlab::bits::Bits;
use shatterlab::shatter::{
    composition_max, compositions, find_shattered_box, shatter_function, vc_dimension, vc_ell_dimension, SetSystem,
};
use shatterlab::structure::{checked_pow, for_each_tuple, tuple_rank};
use shatterlab::Limits;

fn random_system(rng: &mut impl Rng, domain: usize, arity: usize, max_sets: usize) -> SetSystem {
    let points = checked_pow(domain, arity).unwrap();
    let density = rng.gen_range(0.1..0.9);
    let count = rng.gen_range(1..=max_sets);
    let sets: Vec<Bits> = (0..count)
        .map(|_| Bits::from_bools((0..points).map(|_| rng.gen_bool(density))))
        .collect();
    SetSystem::new(domain, arity, sets).unwrap()
}

fn traces_on(f: &SetSystem, points: &[usize]) -> usize {
    f.sets()
        .iter()
        .map(|s| points.iter().map(|&p| s.get(p)).collect::<Vec<bool>>())
        .collect::<HashSet<_>>()
        .len()
}

/// Largest shattered point set, by trying every subset.
fn naive_vc(f: &SetSystem) -> usize {
    let p = f.point_count();
    (0..=p)
        .rev()
        .find(|&k| (0..p).combinations(k).any(|s| traces_on(f, &s) == 1 << k))
        .unwrap()
}

/// `π_ℓ(F, m)` by listing every box.
fn naive_shatter(f: &SetSystem, ell: usize, m: usize) -> usize {
    let n = f.domain();
    let mut best = 0;
    for comp in compositions(f.arity(), ell) {
        let pools: Vec<Vec<Vec<usize>>> = comp
            .iter()
            .map(|&k| {
                let mut v = Vec::new();
                for_each_tuple(n, k, |t| v.push(t.to_vec()));
                v
            })
            .collect();
        let choices: Vec<Vec<Vec<Vec<usize>>>> = pools
            .iter()
            .map(|p| p.iter().cloned().combinations(m).collect())
            .collect();
        for pick in choices.iter().multi_cartesian_product() {
            let points: Vec<usize> = pick
                .iter()
                .map(|c| c.iter())
                .multi_cartesian_product()
                .map(|parts| tuple_rank(n, &parts.into_iter().flatten().copied().collect::<Vec<_>>()))
                .collect();
            best = best.max(traces_on(f, &points));
        }
    }
    best
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn sauer_shelah_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let limits = Limits::default();
    for _ in 0..200 {
        let f = random_system(&mut rng, 8, 1, 60);
        let d = vc_dimension(&f, &limits).unwrap();
        assert_eq!(d, naive_vc(&f));
        for m in 1..=8u64 {
            let pi = shatter_function(&f, 1, m as usize, &limits).unwrap();
            let bound: u64 = (0..=d as u64).map(|i| binom(m, i)).sum();
            assert!(pi <= bound, "π(F,{m}) = {pi} > {bound}, d = {d}");
        }
    }
}

#[test]
fn shatter_function_matches_naive_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let limits = Limits::default();
    for (domain, arity) in [(4, 2), (3, 3), (3, 2)] {
        for _ in 0..15 {
            let f = random_system(&mut rng, domain, arity, 40);
            for ell in 1..=arity {
                for m in 1..=2 {
                    let fast = shatter_function(&f, ell, m, &limits).unwrap();
                    assert_eq!(fast as usize, naive_shatter(&f, ell, m), "ℓ={ell} m={m}");
                }
            }
        }
    }
}

#[test]
fn definitional_equivalences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let limits = Limits::default();
    for (domain, arity) in [(4, 2), (3, 3)] {
        for _ in 0..100 {
            let f = random_system(&mut rng, domain, arity, 80);
            for ell in 1..=arity {
                let vc = vc_ell_dimension(&f, ell, &limits).unwrap();
                for m in 1..=3 {
                    let pi = shatter_function(&f, ell, m, &limits).unwrap();
                    let full = 1u64 << m.pow(ell as u32);
                    assert!(pi <= full);
                    assert_eq!(vc >= m, pi == full, "ℓ={ell} m={m} vc={vc} π={pi}");
                    assert_eq!(find_shattered_box(&f, ell, m, &limits).unwrap().is_some(), vc >= m);
                    assert_eq!(composition_max(&f, ell, m, &limits).unwrap(), pi);
                }
            }
        }
    }
}

#[test]
fn spec_examples() {
    let limits = Limits::default();
    let full_power = |n: usize, k: usize| {
        let p = checked_pow(n, k).unwrap();
        SetSystem::new(n, k, (0..1u64 << p).map(|c| Bits::from_u64(p, c))).unwrap()
    };
    assert_eq!(shatter_function(&full_power(3, 2), 2, 2, &limits).unwrap(), 16);
    let empty_only = SetSystem::new(3, 2, [Bits::new(9)]).unwrap();
    for ell in 1..=2 {
        for m in 1..=2 {
            assert_eq!(shatter_function(&empty_only, ell, m, &limits).unwrap(), 1);
        }
    }
    assert_eq!(vc_dimension(&full_power(3, 1), &limits).unwrap(), 3);
    let singletons = SetSystem::new(5, 1, std::iter::once(Bits::new(5)).chain((0..5).map(|i| Bits::from_u64(5, 1 << i))))
        .unwrap();
    assert_eq!(vc_dimension(&singletons, &limits).unwrap(), 1);
    assert_eq!(naive_vc(&singletons), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vc_one_is_vc(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_system(&mut rng, 3, 2, 30);
        let limits = Limits::default();
        let mut by_boxes = 0;
        while find_shattered_box(&f, 1, by_boxes + 1, &limits).unwrap().is_some() {
            by_boxes += 1;
        }
        prop_assert_eq!(by_boxes, vc_dimension(&f, &limits).unwrap());
        prop_assert_eq!(vc_ell_dimension(&f, 1, &limits).unwrap(), by_boxes);
    }

    #[test]
    fn shatter_function_is_monotone_in_the_family(seed in any::<u64>(), extra in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_system(&mut rng, 4, 2, 20);
        let mut sets = f.sets().to_vec();
        for _ in 0..extra {
            sets.push(Bits::from_bools((0..16).map(|_| rng.gen_bool(0.5))));
        }
        let g = SetSystem::new(4, 2, sets).unwrap();
        let limits = Limits::default();
        for ell in 1..=2 {
            prop_assert!(shatter_function(&f, ell, 2, &limits).unwrap() <= shatter_function(&g, ell, 2, &limits).unwrap());
        }
    }
}
