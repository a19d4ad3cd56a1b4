mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{program, rule_instance};
use mrv_core::ffl::build::*;
use mrv_core::ffl::ops::{positions, subterm_at};
use mrv_core::ffl::{alpha_equal, FflType, Term, T};
use mrv_core::gen::Profile;
use mrv_core::il::ast::BinOp;
use mrv_core::rewrite::{
    catalog, check_obligation, discharge_in_context, justify_step, list_rules, replay, MismatchReason, ObligationConfig,
    ObligationVerdict, RuleKind,
};
use mrv_core::translate::translate;
use mrv_core::Value;

fn listing(n: u32) -> T {
    translate(&program(&format!("pagerank/listing-{n}")))
}

#[test]
fn catalog_names() {
    let names: Vec<_> = list_rules().iter().map(|r| r.name).collect();
    assert_eq!(
        names,
        ["map-introduce", "range-remove", "concat-intro", "group-intro", "flatmap-fuse", "reducebykey-fold"]
    );
    let definitional: Vec<_> = list_rules().iter().filter(|r| r.definitional).map(|r| r.name).collect();
    assert_eq!(definitional, ["flatmap-fuse", "reducebykey-fold"]);
    assert!(list_rules().iter().all(|r| !r.doc.is_empty()));
}

#[test]
fn map_introduce_on_listing_1() {
    let (src, tgt) = (listing(1), listing(2));
    let j = justify_step("map-introduce", &src, &tgt).unwrap();
    let bindings = j.rendered_bindings();
    let f = bindings.iter().find(|(k, _)| k.starts_with('f')).expect("f bound");
    assert!(f.1.contains("dampening"), "{f:?}");
    assert!(j.obligations.iter().any(|o| o.description == "length(ys) = length(xs)"));
    let cfg = ObligationConfig::default();
    for ob in &j.obligations {
        let v = discharge_in_context(&src, &j.path, &ob.term, Profile::Pagerank, &cfg);
        assert!(matches!(v, ObligationVerdict::TestedPass { probes, .. } if probes > 0), "{}: {v}", ob.description);
    }
    assert!(alpha_equal(&replay(&src, &j).unwrap(), &tgt));
}

#[test]
fn concat_intro_on_listing_5() {
    let (src, tgt) = (listing(5), listing(6));
    let j = justify_step("concat-intro", &src, &tgt).unwrap();
    let (sub, _) = subterm_at(&src, &j.path).unwrap();
    assert!(matches!(&**sub, Term::Fold(_, _, inner) if !matches!(&**inner, Term::Range(..))));
    assert!(alpha_equal(&replay(&src, &j).unwrap(), &tgt));
}

#[test]
fn map_introduce_cannot_reach_listing_3() {
    let (src, tgt) = (listing(1), listing(3));
    let m = justify_step("map-introduce", &src, &tgt).unwrap_err();
    assert_ne!(m.reason, MismatchReason::NoMatch);
    assert_eq!(m.positions_searched, positions(&src).len());
}

#[test]
fn range_remove_on_listing_3() {
    let (src, tgt) = (listing(3), listing(4));
    let j = justify_step("range-remove", &src, &tgt).unwrap();
    assert!(alpha_equal(&replay(&src, &j).unwrap(), &tgt));
}

#[test]
fn group_intro_on_listing_7() {
    let (src, tgt) = (listing(7), listing(8));
    let j = justify_step("group-intro", &src, &tgt).unwrap();
    assert_eq!(j.variant, 1, "the replicate variant applies");
    assert!(alpha_equal(&replay(&src, &j).unwrap(), &tgt));
}

#[test]
fn definitional_steps() {
    assert!(justify_step("flatmap-fuse", &listing(6), &listing(7)).is_ok());
    assert!(justify_step("reducebykey-fold", &listing(8), &listing(9)).is_ok());
    assert!(justify_step("flatmap-fuse", &listing(5), &listing(6)).is_err());
    assert!(justify_step("reducebykey-fold", &listing(6), &listing(7)).is_err());
}

#[test]
fn unknown_rule() {
    let m = justify_step("fold-fuse", &int(1), &int(1)).unwrap_err();
    assert!(matches!(m.reason, MismatchReason::UnknownRule(_)));
}

#[test]
fn index_use_violates_map_introduce() {
    let xs = common::arr(FflType::Int, vec![int(1), int(2)]);
    let ys = common::arr(FflType::Int, vec![int(0), int(0)]);
    let arr_ty = FflType::array(FflType::Int);
    let body = |v: T| lam("acc", arr_ty.clone(), lam("i", FflType::Int, update(var(1, "acc"), var(0, "i"), v)));
    let src = fold(
        body(bin(BinOp::Add, index(xs.clone(), var(0, "i")), var(0, "i"))),
        ys,
        range(int(0), int(2)),
    );
    let tgt = map(lam("x", FflType::Int, bin(BinOp::Add, var(0, "x"), var(0, "x"))), xs);
    let m = justify_step("map-introduce", &src, &tgt).unwrap_err();
    assert!(matches!(m.reason, MismatchReason::SideConditionFailed { .. }), "{m}");
}

#[test]
fn obligation_examples() {
    let cfg = ObligationConfig::default();
    assert!(check_obligation(&boolean(true), &cfg).passed());

    let arr_ty = FflType::array(FflType::Int);
    let indep = lam(
        "xs",
        arr_ty.clone(),
        lam("ys", arr_ty.clone(), bin(BinOp::Eq, length(var(1, "xs")), length(var(0, "ys")))),
    );
    match check_obligation(&indep, &cfg) {
        ObligationVerdict::Counterexample { inputs, .. } => {
            let len = |v: &Value| v.as_array().unwrap().len();
            assert_ne!(len(&inputs[0]), len(&inputs[1]));
        }
        v => panic!("{v}"),
    }

    let replicated = lam(
        "links",
        FflType::array(arr_ty.clone()),
        bin(
            BinOp::Eq,
            length(replicate(length(var(0, "links")), int(0))),
            length(replicate(length(var(0, "links")), int(1))),
        ),
    );
    assert!(matches!(check_obligation(&replicated, &cfg), ObligationVerdict::TestedPass { trials, .. } if trials == cfg.trials));
}

fn structural_names() -> Vec<&'static str> {
    catalog()
        .into_iter()
        .filter(|r| !r.is_definitional())
        .map(|r| r.name)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Generated instances are recognized, and replaying the justification
    /// reproduces the target, also under a surrounding context.
    #[test]
    fn justification_replays(seed in any::<u64>(), which in 0usize..4, ctx in 0usize..3) {
        let name = structural_names()[which];
        let rule = catalog().into_iter().find(|r| r.name == name).unwrap();
        let RuleKind::Structural { lhs, variants } = &rule.kind else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (inst, vi) = rule_instance(name, &mut rng);
        let l = inst.build(lhs, &[]).unwrap();
        let r = inst.build(&variants[vi].rhs, &[]).unwrap();
        let wrap = |t: T| match ctx {
            0 => t.clone(),
            1 => pair(int(7), t),
            _ => let_in("unused", FflType::Int, int(3), mrv_core::ffl::shift(&t, 1)),
        };
        let (src, tgt) = (wrap(l), wrap(r));
        let j = justify_step(name, &src, &tgt).map_err(|m| TestCaseError::fail(m.to_string()))?;
        prop_assert!(alpha_equal(&replay(&src, &j).unwrap(), &tgt));
        prop_assert!(j.positions_searched <= positions(&src).len());
    }

    /// A Mismatch is only reported after every position was tried.
    #[test]
    fn mismatch_search_is_exhaustive(seed in any::<u64>(), which in 0usize..4) {
        let name = structural_names()[which];
        let rule = catalog().into_iter().find(|r| r.name == name).unwrap();
        let RuleKind::Structural { lhs, .. } = &rule.kind else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (inst, _) = rule_instance(name, &mut rng);
        let l = inst.build(lhs, &[]).unwrap();
        // Rewriting to itself never matches the right-hand side.
        if let Err(m) = justify_step(name, &l, &l) {
            prop_assert_eq!(m.positions_searched, positions(&l).len());
        }
    }
}
