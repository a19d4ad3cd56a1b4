mod common;

use proptest::prelude::*;

use common::program;
use mrv_core::corpus::entries;
use mrv_core::ffl::ops::{is_closed, positions, subterm_at};
use mrv_core::ffl::{alpha_equal, eval_applied, typecheck_term, FflType, Term};
use mrv_core::gen::{gen_args, infer_profile, Bounds};
use mrv_core::il::load;
use mrv_core::rewrite::{find_rule, match_at, MatchResult, RuleKind};
use mrv_core::translate::{translate, translation_oracle_check, OracleVerdict};
use mrv_core::{Outcome, Value};

fn ints(xs: &[i64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::int(x)).collect())
}

#[test]
fn sumarrays_translation_runs() {
    let t = translate(&program("sumarrays/plain"));
    assert_eq!(eval_applied(&t, &[ints(&[1, 2]), ints(&[10, 20])], 10_000).value(), Some(&ints(&[11, 22])));
}

#[test]
fn indexed_for_becomes_fold_over_range() {
    let p = load(
        "fn f(xs: [Int]) -> [Int] { var ys := replicate(length(xs), 0); \
         for (i : range(0, length(xs))) { ys[i] := xs[i] * 2; } return ys; }",
    )
    .unwrap();
    let t = translate(&p);
    let RuleKind::Structural { lhs, .. } = find_rule("map-introduce").unwrap().kind else {
        unreachable!()
    };
    let hit = positions(&t).into_iter().any(|(path, _)| {
        let (sub, _) = subterm_at(&t, &path).unwrap();
        matches!(match_at(&lhs, sub), MatchResult::Matched(_))
    });
    assert!(hit, "no fold(λacc.λi. acc[i := f(xs[i])], ys, range(0, n)) in the translation");
}

#[test]
fn while_becomes_iter() {
    let t = translate(&program("pagerank/listing-1"));
    let found = positions(&t).into_iter().any(|(path, _)| {
        let (sub, _) = subterm_at(&t, &path).unwrap();
        let Term::Iter(f) = &**sub else { return false };
        let Term::Lam(_, _, body) = &**f else { return false };
        let Term::If(_, then, other) = &**body else { return false };
        matches!(&**then, Term::Inr(..)) && matches!(&**other, Term::Inl(..))
    });
    assert!(found);
}

#[test]
fn oracle_examples() {
    let links = Value::Array(vec![ints(&[1]), ints(&[0])]);
    match translation_oracle_check(&program("pagerank/listing-1"), &[links, Value::rat(1, 2), Value::int(1)], 100_000) {
        OracleVerdict::Agree(Outcome::Val(v)) => assert_eq!(v, Value::Array(vec![Value::rat(1, 2); 2])),
        v => panic!("{v:?}"),
    }
    match translation_oracle_check(&program("sumarrays/plain"), &[ints(&[]), ints(&[])], 1000) {
        OracleVerdict::Agree(Outcome::Val(v)) => assert_eq!(v, ints(&[])),
        v => panic!("{v:?}"),
    }
    let spin = load("fn f(n: Int) -> Int { var x := n; while (true) { x := x; } return x; }").unwrap();
    assert!(matches!(
        translation_oracle_check(&spin, &[Value::int(1)], 5000),
        OracleVerdict::Agree(Outcome::Diverged(_))
    ));
}

#[test]
fn translations_are_closed_and_typed() {
    for e in entries() {
        let p = load(e.source).unwrap();
        let t = translate(&p);
        assert!(is_closed(&t), "{}", e.id);
        let expect = p
            .param_types()
            .iter()
            .rev()
            .fold(FflType::from(&p.ret), |acc, ty| FflType::arrow(ty.into(), acc));
        assert_eq!(typecheck_term(&t).unwrap(), expect, "{}", e.id);
    }
}

#[test]
fn unused_statements_translate_to_nothing() {
    for e in entries() {
        let src = e.source;
        let at = src.rfind("return").unwrap();
        let padded = format!("{}var unusedLocal := 0;\n  {}", &src[..at], &src[at..]);
        let (a, b) = (translate(&load(src).unwrap()), translate(&load(&padded).unwrap()));
        assert!(alpha_equal(&a, &b), "{}", e.id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_agrees_on_corpus(seed in any::<u64>(), which in 0usize..11) {
        let e = &entries()[which];
        let p = load(e.source).unwrap();
        let sig = p.param_types();
        for trial in 0..8 {
            let args = gen_args(&sig, infer_profile(&sig), seed, trial, &Bounds::default()).unwrap();
            let v = translation_oracle_check(&p, &args, 1_000_000);
            prop_assert!(v.agrees(), "{} on {:?}: {:?}", e.id, args, v);
        }
    }
}
