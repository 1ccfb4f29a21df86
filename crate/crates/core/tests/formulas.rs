mod common;

use common::{binary, permutations, random_structure, ternary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shatterlab::formula::{formula_trace, reconstruct_from_traces, rel_family, rel_formulas, QfFormula};
use shatterlab::structure::{enumerate_structures, find_isomorphism, for_each_tuple, Language, Structure};
use shatterlab::Limits;
use std::sync::Arc;

#[test]
fn family_sizes() {
    assert_eq!(rel_formulas(&binary()).len(), 8);
    assert_eq!(rel_formulas(&ternary()).len(), 44);
    let two = Arc::new(Language::parse("E:2,F:2").unwrap());
    assert_eq!(rel_formulas(&two).len(), 16);
}

#[test]
fn rel_formulas_shape() {
    for lang in [binary(), ternary(), Arc::new(Language::parse("P:1,E:2").unwrap())] {
        let r = lang.max_arity();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ms: Vec<Structure> = (0..20).map(|_| random_structure(&lang, 4, 0.6, &mut rng)).collect();
        for phi in rel_formulas(&lang) {
            assert!(phi.arity() <= r);
            for m in &ms {
                for_each_tuple(4, phi.arity(), |t| {
                    let repeated = (0..t.len()).any(|i| t[..i].contains(&t[i]));
                    if repeated {
                        assert!(!phi.eval_concat(m, t), "{phi} on {t:?}");
                    }
                });
            }
        }
    }
}

#[test]
fn traces_determine_the_structure() {
    let lang = binary();
    let family = rel_family(&lang);
    let trivial: Vec<_> = family.iter().filter(|f| f.formula.y_arity() == 0).cloned().collect();
    let unary_x: Vec<_> = family.iter().filter(|f| f.formula.x_arity() == 1).cloned().collect();
    for m in enumerate_structures(lang.clone(), 3, &Limits::default()).unwrap() {
        for sub in [&trivial, &unary_x] {
            let traces: Vec<_> = sub.iter().map(|f| formula_trace(&f.formula, &m)).collect();
            assert_eq!(reconstruct_from_traces(&lang, 3, sub, &traces).unwrap(), m);
        }
    }
}

#[test]
fn eval_is_isomorphism_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let perms = permutations(5);
    for (lang, text) in [
        (binary(), "E(x1,y1) & !E(y1,x1) & x1!=y1"),
        (binary(), "E(x1,x2) | (E(y1,x1) & !x2=y1)"),
        (ternary(), "E(x1,y1,y2) & !E(y2,y1,x1)"),
    ] {
        let phi = QfFormula::parse(lang.clone(), text).unwrap();
        for _ in 0..100 {
            let m = random_structure(&lang, 5, 0.4, &mut rng);
            let p = &perms[rng.gen_range(0..perms.len())];
            let r = m.relabel(p);
            let f = find_isomorphism(&m, &r).unwrap().unwrap();
            let a: Vec<usize> = (0..phi.x_arity()).map(|_| rng.gen_range(0..5)).collect();
            let b: Vec<usize> = (0..phi.y_arity()).map(|_| rng.gen_range(0..5)).collect();
            let fa: Vec<usize> = a.iter().map(|&x| f[x]).collect();
            let fb: Vec<usize> = b.iter().map(|&x| f[x]).collect();
            assert_eq!(phi.eval(&m, &a, &b).unwrap(), phi.eval(&r, &fa, &fb).unwrap());
        }
    }
}

#[test]
fn spec_formula_examples() {
    let lang = binary();
    let edge = Structure::from_tuples(lang.clone(), 3, &[(0, vec![vec![0, 1]])]).unwrap();
    let phi = QfFormula::parse(lang.clone(), "E(x1,y1)").unwrap();
    assert!(phi.eval(&edge, &[0], &[1]).unwrap());
    assert!(phi.eval(&edge, &[0, 1], &[1]).is_err());
    let eq = QfFormula::parse(lang.clone(), "x1=y1").unwrap();
    assert!(eq.eval(&edge, &[2], &[2]).unwrap());
    let u = QfFormula::parse(lang.clone(), "E(u1,v1) & u1!=v1").unwrap();
    assert_eq!(formula_trace(&u, &edge), vec![vec![0, 1]]);
    let triv = QfFormula::parse(lang.clone(), "E(x1,x2) & x1!=x2").unwrap();
    assert!(triv.is_trivially_partitioned());
    assert!(formula_trace(&triv, &Structure::empty(lang, 4).unwrap()).is_empty());
}

#[test]
fn display_parses_back() {
    for lang in [binary(), ternary()] {
        for phi in rel_formulas(&lang) {
            let again = QfFormula::parse_with_arity(lang.clone(), &phi.to_string(), phi.x_arity(), phi.y_arity()).unwrap();
            assert_eq!(again, phi);
        }
    }
}
