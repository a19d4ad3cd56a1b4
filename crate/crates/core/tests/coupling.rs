mod common;

use proptest::prelude::*;

use common::program;
use mrv_core::coupling::{
    build_product, check_coupling, evaluate_predicate, parse_predicate, replay, scope_at, AnnotationPoint, CouplingConfig,
    CouplingError, FailKind, LoopKind, Verdict,
};
use mrv_core::gen::{gen_args, Bounds, Profile};
use mrv_core::il::load;
use mrv_core::Value;

const SUM: &str = "sum_1 = sum_2 && zipped_2 = zip(xs_1, ys_1)";

fn sumarrays_variant(body: &str, ret: &str) -> mrv_core::il::typeck::TypedProgram {
    load(&format!(
        "fn V(xs: [Int], ys: [Int]) {{ var sum := replicate(length(xs), 0); var zipped := zip(xs, ys); \
         {body} return {ret}; }}"
    ))
    .unwrap()
}

fn cfg(trials: u64) -> CouplingConfig {
    CouplingConfig {
        trials,
        profile: Some(Profile::EqualLength),
        ..CouplingConfig::default()
    }
}

fn fail_kind(p1: &str, p2: &mrv_core::il::typeck::TypedProgram, inv: &str, at: &str) -> FailKind {
    let r = check_coupling(&program(p1), p2, &parse_predicate(inv).unwrap(), at.parse().unwrap(), &cfg(100)).unwrap();
    match r.verdict {
        Verdict::Fail(f) => f.kind,
        v => panic!("expected a failure, got {v:?}"),
    }
}

#[test]
fn product_shapes() {
    let s = build_product(&program("pagerank/listing-2"), &program("pagerank/listing-3")).unwrap();
    assert!(s.sides.iter().all(|x| x.kind == LoopKind::While));
    let s = build_product(&program("sumarrays/plain"), &program("sumarrays/zipped")).unwrap();
    assert!(s.sides.iter().all(|x| x.kind == LoopKind::For));
    assert_eq!(s.sides[0].loop_index, 1);
    assert_eq!(s.sides[1].loop_index, 2);

    let straight = load("fn f(xs: [Int], ys: [Int]) { return xs; }").unwrap();
    assert_eq!(build_product(&straight, &program("sumarrays/plain")).unwrap_err().side, 1);
    let two = load(
        "fn f(xs: [Int], ys: [Int]) { var a := 0; while (a < 1) { a := a + 1; } \
         while (a < 2) { a := a + 1; } return xs; }",
    )
    .unwrap();
    assert_eq!(build_product(&program("sumarrays/plain"), &two).unwrap_err().side, 2);
}

#[test]
fn pagerank_couplings_hold() {
    let steps = [
        (2, 3, "newRanks_1 = newRanks_2 && outRanks_2 = zip(links_1, ranks_1)", "body:2:3"),
        (
            4,
            5,
            "newRanks_1 = newRanks_2 && (forall i in outRanks_1, j in fst outRanks_1[i]: \
             fst linksAndContrib_2[i][j] = (fst outRanks_1[i])[j] && \
             snd linksAndContrib_2[i][j] = snd outRanks_1[i] / length(fst outRanks_1[i]))",
            "body:3:4",
        ),
    ];
    for (a, b, inv, at) in steps {
        let r = check_coupling(
            &program(&format!("pagerank/listing-{a}")),
            &program(&format!("pagerank/listing-{b}")),
            &parse_predicate(inv).unwrap(),
            at.parse().unwrap(),
            &CouplingConfig::default(),
        )
        .unwrap();
        assert_eq!(r.profile, Profile::Pagerank);
        assert!(r.passed(), "{a}->{b}: {:?}", r.verdict);
    }
}

#[test]
fn sumarrays_lockstep_counts() {
    let c = cfg(60);
    let r = check_coupling(
        &program("sumarrays/plain"),
        &program("sumarrays/zipped"),
        &parse_predicate(SUM).unwrap(),
        AnnotationPoint::LoopEnd,
        &c,
    )
    .unwrap();
    let Verdict::Pass { trials, iterations, per_trial } = r.verdict else { panic!("{:?}", r.verdict) };
    assert_eq!(trials, 60);
    assert_eq!(per_trial.len(), 60);
    assert_eq!(iterations, per_trial.iter().sum::<u64>());
    let sig = program("sumarrays/plain").param_types();
    for (t, n) in per_trial.iter().enumerate() {
        let args = gen_args(&sig, Profile::EqualLength, c.seed, t as u64, &Bounds::default()).unwrap();
        assert_eq!(*n as usize, args[0].as_array().unwrap().len());
    }
}

#[test]
fn failure_kinds() {
    let p = "sumarrays/plain";
    let zipped = program("sumarrays/zipped");
    assert_eq!(fail_kind(p, &zipped, "length(sum_1) = 0", "loop-head"), FailKind::InvariantBrokenAtEntry);
    assert_eq!(
        fail_kind(p, &zipped, "sum_1 = sum_2 && zipped_2 = zip(ys_1, xs_1)", "loop-end"),
        FailKind::InvariantBrokenAfterIteration
    );
    let short = sumarrays_variant("for (i : range(1, length(xs))) { sum[i] := xs[i] + ys[i]; }", "sum");
    assert_eq!(fail_kind(p, &short, "true", "loop-end"), FailKind::GuardDisagreement);
    let plus1 = sumarrays_variant("for (i : range(0, length(xs))) { sum[i] := xs[i] + ys[i] + 1; }", "sum");
    assert_eq!(fail_kind(p, &plus1, "true", "loop-end"), FailKind::OutputMismatch);
    let oob = sumarrays_variant("for (i : range(0, length(xs))) { sum[i] := xs[i + 1]; }", "sum");
    assert_eq!(fail_kind(p, &oob, "true", "loop-end"), FailKind::SideError);
    assert_eq!(fail_kind(p, &zipped, "xs_1[5] = 0", "loop-end"), FailKind::PredicateError);
}

#[test]
fn setup_errors() {
    let inv = parse_predicate("true").unwrap();
    let at = AnnotationPoint::default();
    let c = CouplingConfig::default();
    assert!(matches!(
        check_coupling(&program("sumarrays/plain"), &program("pagerank/listing-2"), &inv, at, &c),
        Err(CouplingError::Signature(_))
    ));
    let bad = parse_predicate("nosuch_1 = 0").unwrap();
    assert!(matches!(
        check_coupling(&program("sumarrays/plain"), &program("sumarrays/zipped"), &bad, at, &c),
        Err(CouplingError::Predicate(_))
    ));
    assert!(parse_predicate("sum_1 = ").is_err());
}

#[test]
fn predicate_evaluation() {
    let (p1, p2) = (program("sumarrays/plain"), program("sumarrays/zipped"));
    let shape = build_product(&p1, &p2).unwrap();
    let at = AnnotationPoint::LoopEnd;
    let s1 = scope_at(&p1, &shape.sides[0], at, 1).unwrap();
    let s2 = scope_at(&p2, &shape.sides[1], at, 2).unwrap();
    let inv = parse_predicate(SUM).unwrap().resolve(&s1, &s2).unwrap();

    let ints = |xs: &[i64]| Value::Array(xs.iter().map(|&x| Value::int(x)).collect());
    let (xs, ys) = (ints(&[1, 2]), ints(&[3, 4]));
    let zipped = Value::Array(vec![
        Value::Pair(Box::new(Value::int(1)), Box::new(Value::int(3))),
        Value::Pair(Box::new(Value::int(2)), Box::new(Value::int(4))),
    ]);
    let state = |sum: Value, with_zip: bool| {
        let mut s = vec![
            ("xs".to_string(), xs.clone()),
            ("ys".to_string(), ys.clone()),
            ("sum".to_string(), sum),
            ("i".to_string(), Value::int(0)),
        ];
        if with_zip {
            s.push(("zipped".to_string(), zipped.clone()));
        }
        s
    };
    let s1 = state(ints(&[4, 0]), false);
    assert_eq!(evaluate_predicate(&inv, &s1, &state(ints(&[4, 0]), true)), Ok(true));
    assert_eq!(evaluate_predicate(&inv, &s1, &state(ints(&[4, 6]), true)), Ok(false));
    assert!(evaluate_predicate(&inv, &s1, &state(ints(&[4, 0]), false)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every trial, passing or failing, is reproduced by replay.
    #[test]
    fn trials_replay(seed in any::<u64>(), flipped in any::<bool>()) {
        let (p1, p2) = (program("sumarrays/plain"), program("sumarrays/zipped"));
        let text = if flipped { "sum_1 = sum_2 && zipped_2 = zip(ys_1, xs_1)" } else { SUM };
        let inv = parse_predicate(text).unwrap();
        let c = CouplingConfig { seed, ..cfg(20) };
        let r = check_coupling(&p1, &p2, &inv, AnnotationPoint::LoopEnd, &c).unwrap();
        match r.verdict {
            Verdict::Pass { per_trial, .. } => {
                for (t, n) in per_trial.iter().enumerate() {
                    prop_assert_eq!(replay(&p1, &p2, &inv, AnnotationPoint::LoopEnd, &c, t as u64).unwrap(), Ok(*n));
                }
            }
            Verdict::Fail(f) => {
                prop_assert_eq!(f.seed, seed);
                let again = replay(&p1, &p2, &inv, AnnotationPoint::LoopEnd, &c, f.trial).unwrap();
                prop_assert_eq!(again, Err(f));
            }
        }
    }
}
