#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use mrv_core::corpus::get_program;
use mrv_core::ffl::build::*;
use mrv_core::ffl::{FflType, T};
use mrv_core::il::ast::BinOp;
use mrv_core::il::{load, TypedProgram};
use mrv_core::rewrite::Instantiation;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn program(id: &str) -> TypedProgram {
    load(get_program(id).unwrap().source).unwrap()
}

pub fn lit(n: i64) -> T {
    int(n)
}

pub fn small(rng: &mut ChaCha8Rng) -> i64 {
    rng.gen_range(-8..=8)
}

pub fn int_array(rng: &mut ChaCha8Rng, len: usize) -> T {
    arr(FflType::Int, (0..len).map(|_| int(small(rng))).collect())
}

pub fn arr(elem: FflType, items: Vec<T>) -> T {
    std::sync::Arc::new(mrv_core::ffl::Term::ArrayLit(elem, items))
}

fn v(i: usize, n: &str) -> T {
    var(i, n)
}

/// A body over one Int binder `x`.
pub fn unary_body(rng: &mut ChaCha8Rng) -> T {
    let (a, c) = (int(small(rng)), int(small(rng)));
    let x = || v(0, "x");
    match rng.gen_range(0..4) {
        0 => bin(BinOp::Add, bin(BinOp::Mul, x(), a), c),
        1 => ite(bin(BinOp::Lt, x(), a), x(), c),
        2 => bin(BinOp::Sub, bin(BinOp::Mul, x(), x()), a),
        // constant in value, but xs stays recoverable from the lhs
        _ => bin(BinOp::Add, bin(BinOp::Mul, x(), int(0)), c),
    }
}

/// A body over `acc` (index 1) and `x` (index 0), both Int.
pub fn binary_body(rng: &mut ChaCha8Rng) -> T {
    let a = int(small(rng));
    let acc = || v(1, "acc");
    let x = || v(0, "x");
    match rng.gen_range(0..4) {
        0 => bin(BinOp::Add, acc(), bin(BinOp::Mul, a, x())),
        1 => bin(BinOp::Sub, bin(BinOp::Mul, acc(), int(2)), x()),
        2 => ite(bin(BinOp::Lt, x(), acc()), x(), acc()),
        _ => bin(BinOp::Add, bin(BinOp::Mul, acc(), x()), a),
    }
}

/// A body over key `k` (2), old value `o` (1) and value `w` (0).
pub fn ternary_body(rng: &mut ChaCha8Rng) -> T {
    let a = int(small(rng));
    let k = || v(2, "k");
    let o = || v(1, "o");
    let w = || v(0, "w");
    match rng.gen_range(0..4) {
        0 => bin(BinOp::Add, o(), w()),
        1 => bin(BinOp::Add, o(), bin(BinOp::Mul, w(), k())),
        2 => ite(bin(BinOp::Lt, w(), o()), w(), o()),
        _ => bin(BinOp::Add, bin(BinOp::Sub, bin(BinOp::Mul, o(), a), w()), k()),
    }
}

fn inst(metas: Vec<(&str, T)>, f: Option<(usize, T)>) -> Instantiation {
    let mut i = Instantiation::default();
    for (k, t) in metas {
        i.metas.insert(k.to_string(), t);
    }
    if let Some(f) = f {
        i.funs.insert("f".to_string(), f);
    }
    i
}

/// An instantiation for `rule` satisfying its side conditions and
/// obligations, plus the variant whose right-hand side applies.
pub fn rule_instance(rule: &str, rng: &mut ChaCha8Rng) -> (Instantiation, usize) {
    let len = rng.gen_range(0..=6);
    match rule {
        "map-introduce" => {
            let xs = int_array(rng, len);
            let ys = int_array(rng, len);
            (
                inst(vec![("xs", xs), ("ys", ys), ("n", lit(len as i64))], Some((1, unary_body(rng)))),
                0,
            )
        }
        "range-remove" => {
            let xs = int_array(rng, len);
            let a0 = int(small(rng));
            (
                inst(vec![("xs", xs), ("a0", a0), ("n", lit(len as i64))], Some((2, binary_body(rng)))),
                0,
            )
        }
        "concat-intro" => {
            let xss = arr(
                FflType::array(FflType::Int),
                (0..len)
                    .map(|_| {
                        let l = rng.gen_range(0..=4);
                        int_array(rng, l)
                    })
                    .collect(),
            );
            let a0 = int(small(rng));
            (inst(vec![("xss", xss), ("a0", a0)], Some((2, binary_body(rng)))), 0)
        }
        "group-intro" => {
            let keys = rng.gen_range(1..=4);
            let pairs = arr(
                FflType::prod(FflType::Int, FflType::Int),
                (0..len)
                    .map(|_| pair(int(rng.gen_range(0..keys)), int(small(rng))))
                    .collect(),
            );
            let f = Some((3, ternary_body(rng)));
            if rng.gen_bool(0.5) {
                let acc0 = int_array(rng, keys as usize);
                (inst(vec![("xs", pairs), ("acc0", acc0)], f), 0)
            } else {
                let (n, c) = (lit(keys), int(small(rng)));
                let acc0 = replicate(n.clone(), c.clone());
                (inst(vec![("xs", pairs), ("acc0", acc0), ("n", n), ("c", c)], f), 1)
            }
        }
        other => panic!("no generator for {other}"),
    }
}

/// A pair `(src, tgt)` for a definitional rule: `src` spells the synonym out
/// by hand inside a random context, `tgt` uses the synonym.
pub fn definitional_instance(rule: &str, rng: &mut ChaCha8Rng) -> (T, T) {
    let len = rng.gen_range(0..=6);
    match rule {
        "flatmap-fuse" => {
            let xs = int_array(rng, len);
            let c = int(small(rng));
            let f = match rng.gen_range(0..3) {
                0 => lam(
                    "x",
                    FflType::Int,
                    arr(FflType::Int, vec![v(0, "x"), bin(BinOp::Mul, v(0, "x"), c)]),
                ),
                1 => lam("x", FflType::Int, range(int(0), v(0, "x"))),
                _ => {
                    let ys = int_array(rng, 3);
                    lam("x", FflType::Int, map(lam("y", FflType::Int, bin(BinOp::Add, v(0, "y"), v(1, "x"))), ys))
                }
            };
            let src = concat(map(f.clone(), xs.clone()));
            let tgt = std::sync::Arc::new(mrv_core::ffl::Term::FlatMap(f, xs));
            wrap_int_array(rng, src, tgt)
        }
        "reducebykey-fold" => {
            let keys = rng.gen_range(1..=4);
            let kv = FflType::prod(FflType::Int, FflType::Int);
            let xs = arr(
                kv.clone(),
                (0..len)
                    .map(|_| pair(int(rng.gen_range(0..keys)), int(small(rng))))
                    .collect(),
            );
            let i = int(small(rng));
            let f = lam(
                "x",
                FflType::Int,
                lam(
                    "y",
                    FflType::Int,
                    match rng.gen_range(0..2) {
                        0 => bin(BinOp::Add, v(1, "x"), v(0, "y")),
                        _ => ite(bin(BinOp::Lt, v(0, "y"), v(1, "x")), v(0, "y"), v(1, "x")),
                    },
                ),
            );
            // λp. (λk. λvs. (k, fold(f, i, vs))) (fst p) (snd p), with f and
            // i closed so no shifting is needed.
            let per_key = lam(
                "k",
                FflType::Int,
                lam(
                    "vs",
                    FflType::array(FflType::Int),
                    pair(v(1, "k"), fold(f.clone(), i.clone(), v(0, "vs"))),
                ),
            );
            let handler = lam(
                "p",
                FflType::prod(FflType::Int, FflType::array(FflType::Int)),
                app(app(per_key, fst(v(0, "p"))), snd(v(0, "p"))),
            );
            let src = map(handler, group(xs.clone()));
            let tgt = std::sync::Arc::new(mrv_core::ffl::Term::ReduceByKey(f, i, xs));
            let ctx = rng.gen_range(0..3);
            let wrap = |t: T| match ctx {
                0 => t,
                1 => length(t),
                _ => fold(
                    lam(
                        "s",
                        FflType::Int,
                        lam("q", kv.clone(), bin(BinOp::Add, v(1, "s"), snd(v(0, "q")))),
                    ),
                    int(0),
                    t,
                ),
            };
            (wrap(src), wrap(tgt))
        }
        other => panic!("no generator for {other}"),
    }
}

fn wrap_int_array(rng: &mut ChaCha8Rng, src: T, tgt: T) -> (T, T) {
    let ctx = rng.gen_range(0..3);
    let wrap = |t: T| match ctx {
        0 => t,
        1 => length(t),
        _ => fold(
            lam("s", FflType::Int, lam("x", FflType::Int, bin(BinOp::Add, v(1, "s"), v(0, "x")))),
            int(0),
            t,
        ),
    };
    (wrap(src), wrap(tgt))
}
