mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{arr, binary_body, definitional_instance};
use mrv_core::ffl::build::*;
use mrv_core::ffl::ops::{is_closed, shift_at};
use mrv_core::ffl::{alpha_equal, eval, expand_synonyms, shift, substitute, typecheck_term, FUnOp, FflType, Term, T};
use mrv_core::il::ast::BinOp;
use mrv_core::{Outcome, Value};

fn ints(xs: &[i64]) -> T {
    arr(FflType::Int, xs.iter().map(|&x| int(x)).collect())
}

fn rat_lit(n: i64, d: i64) -> T {
    Arc::new(Term::Rat(num_rational::BigRational::new(n.into(), d.into())))
}

fn val_ints(xs: &[i64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::int(x)).collect())
}

#[test]
fn typing_examples() {
    let id = lam("x", FflType::Int, var(0, "x"));
    assert_eq!(typecheck_term(&id).unwrap(), FflType::arrow(FflType::Int, FflType::Int));
    let add = lam("a", FflType::Rat, lam("v", FflType::Rat, bin(BinOp::Add, var(1, "a"), var(0, "v"))));
    let halves = arr(FflType::Rat, vec![rat_lit(1, 2), rat_lit(1, 2)]);
    assert_eq!(typecheck_term(&fold(add, rat_lit(0, 1), halves)).unwrap(), FflType::Rat);
    assert!(typecheck_term(&group(ints(&[1, 2]))).is_err());
}

#[test]
fn evaluation_examples() {
    assert_eq!(eval(&range(int(0), int(3)), 100).value(), Some(&val_ints(&[0, 1, 2])));
    let z = zip(ints(&[1, 2]), arr(FflType::Bool, vec![boolean(true), boolean(false)]));
    assert_eq!(
        eval(&z, 100).value(),
        Some(&Value::Array(vec![
            Value::pair(Value::int(1), Value::Bool(true)),
            Value::pair(Value::int(2), Value::Bool(false)),
        ]))
    );
    let plus = lam("a", FflType::Int, lam("x", FflType::Int, bin(BinOp::Add, var(1, "a"), var(0, "x"))));
    assert_eq!(eval(&fold(plus, int(0), ints(&[1, 2, 3])), 100).value(), Some(&Value::int(6)));
    let spin = app(iter(lam("s", FflType::Unit, inr(var(0, "s"), FflType::Unit))), unit());
    assert!(eval(&spin, 10_000).is_diverged());
    let kv = FflType::prod(FflType::Int, FflType::Int);
    let xs = arr(kv, vec![pair(int(1), int(10)), pair(int(2), int(20)), pair(int(1), int(30))]);
    assert_eq!(
        eval(&group(xs), 100).value(),
        Some(&Value::Array(vec![
            Value::pair(Value::int(1), val_ints(&[10, 30])),
            Value::pair(Value::int(2), val_ints(&[20])),
        ]))
    );
}

#[test]
fn alpha_equality_examples() {
    let a = lam("x", FflType::Int, var(0, "x"));
    let b = lam("y", FflType::Int, var(0, "y"));
    assert!(alpha_equal(&a, &b));
    let k1 = lam("x", FflType::Int, lam("y", FflType::Int, var(1, "x")));
    let k2 = lam("a", FflType::Int, lam("b", FflType::Int, var(0, "b")));
    assert!(!alpha_equal(&k1, &k2));
}

#[test]
fn synonym_expansions() {
    let f = lam("x", FflType::Int, ints(&[1]));
    let xss = ints(&[1, 2]);
    let fm = Arc::new(Term::FlatMap(f.clone(), xss.clone()));
    assert!(alpha_equal(&expand_synonyms(&fm).unwrap(), &concat(map(f, xss))));

    let kv = FflType::prod(FflType::Int, FflType::Int);
    let xs = arr(kv, vec![pair(int(1), int(2))]);
    let plus = lam("x", FflType::Int, lam("y", FflType::Int, bin(BinOp::Add, var(1, "x"), var(0, "y"))));
    let rbk = Arc::new(Term::ReduceByKey(plus.clone(), int(0), xs.clone()));
    // λp. (λk. λvs. (k, fold(f, i, vs))) (fst p) (snd p), f and i closed.
    let per_key = lam(
        "k",
        FflType::Int,
        lam(
            "vs",
            FflType::array(FflType::Int),
            pair(var(1, "k"), fold(plus, int(0), var(0, "vs"))),
        ),
    );
    let hand = map(
        lam(
            "p",
            FflType::prod(FflType::Int, FflType::array(FflType::Int)),
            app(app(per_key, fst(var(0, "p"))), snd(var(0, "p"))),
        ),
        group(xs),
    );
    assert!(alpha_equal(&expand_synonyms(&rbk).unwrap(), &hand));

    let plain = fold(lam("a", FflType::Int, lam("x", FflType::Int, var(0, "x"))), int(0), ints(&[3]));
    assert!(Arc::ptr_eq(&expand_synonyms(&plain).unwrap(), &plain));
}

#[test]
fn substitution_examples() {
    assert!(alpha_equal(&substitute(&var(0, "x"), 0, &int(42)), &int(42)));
    let under = lam("y", FflType::Int, var(1, "c"));
    let s = var(3, "z");
    assert!(alpha_equal(&substitute(&under, 0, &s), &lam("y", FflType::Int, var(4, "z"))));
}

fn pick_var(rng: &mut ChaCha8Rng, env: &[FflType], ty: &FflType) -> Option<T> {
    let hits: Vec<usize> = (0..env.len()).filter(|&i| env[env.len() - 1 - i] == *ty).collect();
    if hits.is_empty() {
        None
    } else {
        let i = hits[rng.gen_range(0..hits.len())];
        Some(var(i, "v"))
    }
}

/// A well-typed term of type `ty` (Int, Bool, [Int] or Int * Int) in `env`.
fn gen_term(rng: &mut ChaCha8Rng, ty: &FflType, env: &mut Vec<FflType>, depth: u32) -> T {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    let int_ty = FflType::Int;
    let arr_ty = FflType::array(FflType::Int);
    match ty {
        FflType::Int => {
            if leaf {
                return match pick_var(rng, env, ty) {
                    Some(v) if rng.gen_bool(0.5) => v,
                    _ => int(rng.gen_range(-5..=5)),
                };
            }
            match rng.gen_range(0..7) {
                0 => {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul][rng.gen_range(0..3)];
                    bin(op, gen_term(rng, ty, env, depth - 1), gen_term(rng, ty, env, depth - 1))
                }
                1 => ite(
                    gen_term(rng, &FflType::Bool, env, depth - 1),
                    gen_term(rng, ty, env, depth - 1),
                    gen_term(rng, ty, env, depth - 1),
                ),
                2 => length(gen_term(rng, &arr_ty, env, depth - 1)),
                3 => index(gen_term(rng, &arr_ty, env, depth - 1), gen_term(rng, ty, env, depth - 1)),
                4 => fst(gen_term(rng, &FflType::prod(int_ty.clone(), int_ty.clone()), env, depth - 1)),
                5 => {
                    let init = gen_term(rng, ty, env, depth - 1);
                    let xs = gen_term(rng, &arr_ty, env, depth - 1);
                    env.push(int_ty.clone());
                    env.push(int_ty.clone());
                    let body = gen_term(rng, ty, env, depth - 1);
                    env.truncate(env.len() - 2);
                    fold(lam("acc", int_ty.clone(), lam("x", int_ty.clone(), body)), init, xs)
                }
                _ => {
                    let v = gen_term(rng, ty, env, depth - 1);
                    env.push(int_ty.clone());
                    let body = gen_term(rng, ty, env, depth - 1);
                    env.pop();
                    let_in("l", int_ty.clone(), v, body)
                }
            }
        }
        FflType::Bool => {
            if leaf {
                return boolean(rng.gen_bool(0.5));
            }
            match rng.gen_range(0..4) {
                0 => bin(BinOp::Lt, gen_term(rng, &int_ty, env, depth - 1), gen_term(rng, &int_ty, env, depth - 1)),
                1 => bin(BinOp::Eq, gen_term(rng, &int_ty, env, depth - 1), gen_term(rng, &int_ty, env, depth - 1)),
                2 => bin(BinOp::And, gen_term(rng, ty, env, depth - 1), gen_term(rng, ty, env, depth - 1)),
                _ => un(FUnOp::Not, gen_term(rng, ty, env, depth - 1)),
            }
        }
        FflType::Prod(..) => pair(gen_term(rng, &int_ty, env, depth.saturating_sub(1)), gen_term(rng, &int_ty, env, depth.saturating_sub(1))),
        _ => {
            if leaf {
                let n = rng.gen_range(0..4);
                return arr(int_ty, (0..n).map(|_| gen_term(rng, &FflType::Int, env, 0)).collect());
            }
            match rng.gen_range(0..5) {
                0 => range(int(rng.gen_range(-1..=2)), int(rng.gen_range(0..=4))),
                1 => {
                    let xs = gen_term(rng, ty, env, depth - 1);
                    env.push(int_ty.clone());
                    let body = gen_term(rng, &int_ty, env, depth - 1);
                    env.pop();
                    map(lam("x", int_ty, body), xs)
                }
                2 => update(
                    gen_term(rng, ty, env, depth - 1),
                    gen_term(rng, &int_ty, env, depth - 1),
                    gen_term(rng, &int_ty, env, depth - 1),
                ),
                3 => replicate(int(rng.gen_range(0..4)), gen_term(rng, &int_ty, env, depth - 1)),
                _ => {
                    let a = gen_term(rng, ty, env, depth - 1);
                    let b = gen_term(rng, ty, env, depth - 1);
                    let pt = FflType::prod(int_ty.clone(), int_ty.clone());
                    map(lam("p", pt, fst(var(0, "p"))), zip(a, b))
                }
            }
        }
    }
}

fn inhabits(v: &Value, t: &FflType) -> bool {
    match (v, t) {
        (Value::Int(_), FflType::Int) | (Value::Rat(_), FflType::Rat) | (Value::Bool(_), FflType::Bool) => true,
        (Value::Unit, FflType::Unit) => true,
        (Value::Array(xs), FflType::Array(e)) => xs.iter().all(|x| inhabits(x, e)),
        (Value::Pair(a, b), FflType::Prod(s, t)) => inhabits(a, s) && inhabits(b, t),
        (Value::Inl(a), FflType::Sum(s, _)) => inhabits(a, s),
        (Value::Inr(b), FflType::Sum(_, t)) => inhabits(b, t),
        (Value::Closure(_), FflType::Arrow(..)) => true,
        _ => false,
    }
}

fn closed_term(seed: u64) -> (T, FflType) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tys = [FflType::Int, FflType::Bool, FflType::array(FflType::Int), FflType::prod(FflType::Int, FflType::Int)];
    let ty = tys[rng.gen_range(0..tys.len())].clone();
    (gen_term(&mut rng, &ty, &mut Vec::new(), 4), ty)
}

fn same_outcome(a: &Outcome, b: &Outcome) -> bool {
    match (a, b) {
        (Outcome::Diverged(x), Outcome::Diverged(y)) => x == y,
        _ => a.agrees_with(b),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn type_preservation(seed in any::<u64>()) {
        let (t, ty) = closed_term(seed);
        prop_assert!(is_closed(&t));
        prop_assert_eq!(typecheck_term(&t).unwrap(), ty.clone());
        match eval(&t, 100_000) {
            Outcome::Val(v) => prop_assert!(inhabits(&v, &ty), "{} : {}", v, ty),
            Outcome::RuntimeErr(e) => prop_assert_ne!(e.kind, mrv_core::ErrorKind::GuardNonBool),
            Outcome::Diverged(_) => {}
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>(), budget in 1u64..200) {
        let (t, _) = closed_term(seed);
        prop_assert!(same_outcome(&eval(&t, budget), &eval(&t, budget)));
    }
}

proptest! {
    #[test]
    fn synonyms_cohere(seed in any::<u64>(), which in 0usize..2) {
        let rule = ["flatmap-fuse", "reducebykey-fold"][which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, with_synonym) = definitional_instance(rule, &mut rng);
        prop_assert!(with_synonym.has_synonym());
        let expanded = expand_synonyms(&with_synonym).unwrap();
        prop_assert!(!expanded.has_synonym());
        prop_assert_eq!(typecheck_term(&expanded).unwrap(), typecheck_term(&with_synonym).unwrap());
        prop_assert!(eval(&with_synonym, 100_000).agrees_with(&eval(&expanded, 100_000)));
    }

    #[test]
    fn group_round_trip(pairs in proptest::collection::vec((0i64..4, -9i64..9), 0..10)) {
        let kv = FflType::prod(FflType::Int, FflType::Int);
        let xs = arr(kv.clone(), pairs.iter().map(|&(k, v)| pair(int(k), int(v))).collect());
        // concat(map(λ(k,vs). map(λv.(k,v), vs), group(xs)))
        let inner = lam(
            "g",
            FflType::prod(FflType::Int, FflType::array(FflType::Int)),
            map(lam("v", FflType::Int, pair(fst(var(1, "g")), var(0, "v"))), snd(var(0, "g"))),
        );
        let t = concat(map(inner, group(xs)));
        // Oracle: stable sort by first occurrence of the key.
        let mut order: Vec<i64> = Vec::new();
        for &(k, _) in &pairs {
            if !order.contains(&k) {
                order.push(k);
            }
        }
        let mut expect = pairs.clone();
        expect.sort_by_key(|(k, _)| order.iter().position(|o| o == k).unwrap());
        let expect = Value::Array(expect.iter().map(|&(k, v)| Value::pair(Value::int(k), Value::int(v))).collect());
        prop_assert_eq!(eval(&t, 100_000).value().cloned(), Some(expect));
    }

    #[test]
    fn fold_matches_explicit_loop(seed in any::<u64>(), a0 in -5i64..5, xs in proptest::collection::vec(-9i64..9, 0..7)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let body = binary_body(&mut rng);
        let f = lam("acc", FflType::Int, lam("x", FflType::Int, body));
        let folded = eval(&fold(f.clone(), int(a0), ints(&xs)), 100_000).value().cloned();
        let mut acc = Value::int(a0);
        for &x in &xs {
            let lit = |v: &Value| int(i64::try_from(v.as_int().unwrap().clone()).unwrap());
            acc = eval(&app(app(f.clone(), lit(&acc)), int(x)), 1000).value().unwrap().clone();
        }
        prop_assert_eq!(folded, Some(acc));
    }

    #[test]
    fn index_laws(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut env = vec![FflType::Int, FflType::array(FflType::Int)];
        let t = gen_term(&mut rng, &FflType::Int, &mut env, 3);
        prop_assert!(alpha_equal(&substitute(&t, 1, &var(1, "w")), &t));
        prop_assert!(alpha_equal(&shift(&shift(&t, 2), -2), &t));
        prop_assert!(alpha_equal(&shift_at(&t, 3, 5), &t) || !is_closed(&t));
    }

    #[test]
    fn binder_names_do_not_matter(seed in any::<u64>()) {
        let (t, _) = closed_term(seed);
        fn rename(t: &T) -> T {
            match &**t {
                Term::Lam(n, ty, b) => Arc::new(Term::Lam(format!("{n}_"), ty.clone(), rename(b))),
                Term::Var(i, n) => Arc::new(Term::Var(*i, format!("{n}_"))),
                _ => Arc::new(t.with_children(t.children().into_iter().map(|(c, _)| rename(c)).collect())),
            }
        }
        prop_assert!(alpha_equal(&rename(&t), &t));
    }
}
