use std::sync::Arc;

use super::ops::shift;
use super::term::{build::*, FflType, Term, T};
use super::typeck::{typecheck_in, FflTypeError};

/// Rewrites every `flatMap` and `reduceByKey` into core constructs:
/// `flatMap(f, xss)` becomes `concat(map(f, xss))` and
/// `reduceByKey(f, i, xs)` becomes
/// `map(λ(k, vs). (k, fold(f, i, vs)), group(xs))`.
pub fn expand_synonyms(t: &T) -> Result<T, FflTypeError> {
    expand_in(&mut Vec::new(), t)
}

/// As [`expand_synonyms`] for a term open in the typing context `env`.
pub fn expand_in(env: &mut Vec<FflType>, t: &T) -> Result<T, FflTypeError> {
    if !t.has_synonym() {
        return Ok(t.clone());
    }
    match &**t {
        Term::FlatMap(f, xss) => {
            let f = expand_in(env, f)?;
            let xss = expand_in(env, xss)?;
            Ok(concat(map(f, xss)))
        }
        Term::ReduceByKey(f, i, xs) => {
            let f = expand_in(env, f)?;
            let i = expand_in(env, i)?;
            let xs = expand_in(env, xs)?;
            let (k, v) = match typecheck_in(env, &xs)? {
                FflType::Array(kv) => match *kv {
                    FflType::Prod(k, v) => (*k, *v),
                    other => return Err(not_pairs(other)),
                },
                other => return Err(not_pairs(other)),
            };
            Ok(reduce_by_key_expansion(f, i, xs, k, v))
        }
        Term::Lam(n, ty, body) => {
            env.push(ty.clone());
            let b = expand_in(env, body);
            env.pop();
            Ok(Arc::new(Term::Lam(n.clone(), ty.clone(), b?)))
        }
        _ => {
            let cs = t
                .children()
                .into_iter()
                .map(|(c, _)| expand_in(env, c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Arc::new(t.with_children(cs)))
        }
    }
}

fn not_pairs(t: FflType) -> FflTypeError {
    FflTypeError {
        path: Vec::new(),
        message: format!("reduceByKey over {t}, not an array of key-value pairs"),
    }
}

/// The core form of `reduceByKey(f, i, xs)` with keys `k` and values `v`.
pub fn reduce_by_key_expansion(f: T, i: T, xs: T, k: FflType, v: FflType) -> T {
    // Context inside the body: outer, p, k, vs.
    let body = pair(
        var(1, "k"),
        fold(shift(&f, 3), shift(&i, 3), var(0, "vs")),
    );
    let g = pair_lambda(&["k", "vs"], &[k, FflType::array(v)], body);
    map(g, group(xs))
}

#[cfg(test)]
mod tests {
    use super::super::ops::alpha_equal;
    use super::*;
    use crate::il::ast::BinOp;

    fn plus() -> T {
        lam("x", FflType::Int, lam("y", FflType::Int, bin(BinOp::Add, var(1, "x"), var(0, "y"))))
    }

    fn kv() -> T {
        Arc::new(Term::ArrayLit(
            FflType::prod(FflType::Int, FflType::Int),
            vec![pair(int(1), int(2))],
        ))
    }

    #[test]
    fn flatmap_becomes_concat_of_map() {
        let f = lam("x", FflType::Int, Arc::new(Term::ArrayLit(FflType::Int, vec![var(0, "x")])));
        let xs = Arc::new(Term::ArrayLit(FflType::Int, vec![int(1)]));
        let t = Arc::new(Term::FlatMap(f.clone(), xs.clone()));
        let e = expand_synonyms(&t).unwrap();
        assert!(alpha_equal(&e, &concat(map(f, xs))));
    }

    #[test]
    fn reduce_by_key_matches_table_form() {
        let t = Arc::new(Term::ReduceByKey(plus(), int(0), kv()));
        let e = expand_synonyms(&t).unwrap();
        // Written out by hand: map(λp.(λk.λvs.(k, fold(+, 0, vs))) (fst p) (snd p), group(kv))
        let ty_p = FflType::prod(FflType::Int, FflType::array(FflType::Int));
        let inner = lam(
            "key",
            FflType::Int,
            lam(
                "values",
                FflType::array(FflType::Int),
                pair(var(1, "key"), fold(plus(), int(0), var(0, "values"))),
            ),
        );
        let want = map(
            lam("q", ty_p, apps(inner, [fst(var(0, "q")), snd(var(0, "q"))])),
            group(kv()),
        );
        assert!(alpha_equal(&e, &want));
    }

    #[test]
    fn synonym_free_terms_are_unchanged() {
        let t = map(lam("x", FflType::Int, var(0, "x")), kv());
        assert!(alpha_equal(&expand_synonyms(&t).unwrap(), &t));
    }
}
