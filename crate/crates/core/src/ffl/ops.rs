//! Index arithmetic on nameless terms.

use std::sync::Arc;

use super::term::{Term, T};

/// Adds `d` to every variable index `>= cutoff`.
pub fn shift_at(t: &T, d: isize, cutoff: usize) -> T {
    if d == 0 || max_free(t) <= cutoff {
        return t.clone();
    }
    match &**t {
        Term::Var(i, n) if *i >= cutoff => {
            let j = *i as isize + d;
            assert!(j >= 0, "negative de Bruijn index after shift");
            Arc::new(Term::Var(j as usize, n.clone()))
        }
        _ => {
            let cs = t
                .children()
                .into_iter()
                .map(|(c, b)| shift_at(c, d, cutoff + b))
                .collect();
            Arc::new(t.with_children(cs))
        }
    }
}

pub fn shift(t: &T, d: isize) -> T {
    shift_at(t, d, 0)
}

/// One more than the largest free index, so `0` means closed.
pub fn max_free(t: &Term) -> usize {
    match t {
        Term::Var(i, _) => i + 1,
        _ => t
            .children()
            .into_iter()
            .map(|(c, b)| max_free(c).saturating_sub(b))
            .max()
            .unwrap_or(0),
    }
}

pub fn is_closed(t: &Term) -> bool {
    max_free(t) == 0
}

/// Capture-avoiding substitution of `s` for index `j`. Indices above `j` are
/// left alone; callers that remove a binder shift afterwards.
pub fn substitute(t: &T, j: usize, s: &T) -> T {
    fn go(t: &T, j: usize, s: &T, depth: usize) -> T {
        match &**t {
            Term::Var(i, _) if *i == j + depth => shift(s, depth as isize),
            Term::Var(..) => t.clone(),
            _ => {
                if max_free(t) <= j + depth {
                    return t.clone();
                }
                let cs = t
                    .children()
                    .into_iter()
                    .map(|(c, b)| go(c, j, s, depth + b))
                    .collect();
                Arc::new(t.with_children(cs))
            }
        }
    }
    go(t, j, s, 0)
}

/// Beta-reduces `(λ.body) s` in one step.
pub fn instantiate(body: &T, s: &T) -> T {
    let r = substitute(body, 0, &shift(s, 1));
    shift(&r, -1)
}

/// True when some free occurrence refers to an index in `lo..hi`, counted
/// at the top of `t`.
pub fn mentions(t: &Term, lo: usize, hi: usize) -> bool {
    match t {
        Term::Var(i, _) => (lo..hi).contains(i),
        _ => t
            .children()
            .into_iter()
            .any(|(c, b)| mentions(c, lo + b, hi + b)),
    }
}

/// Structural equality up to the names of bound variables.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    use Term::*;
    let same_node = match (a, b) {
        (Var(i, _), Var(j, _)) => return i == j,
        (Lam(_, t1, _), Lam(_, t2, _)) => t1 == t2,
        (Int(x), Int(y)) => return x == y,
        (Rat(x), Rat(y)) => return x == y,
        (Bool(x), Bool(y)) => return x == y,
        (Unit, Unit) => return true,
        (Inl(_, t1), Inl(_, t2)) | (Inr(_, t1), Inr(_, t2)) => t1 == t2,
        (ArrayLit(t1, xs), ArrayLit(t2, ys)) => t1 == t2 && xs.len() == ys.len(),
        (Bin(o1, ..), Bin(o2, ..)) => o1 == o2,
        (Un(o1, _), Un(o2, _)) => o1 == o2,
        _ => std::mem::discriminant(a) == std::mem::discriminant(b),
    };
    same_node
        && a.children()
            .iter()
            .zip(b.children().iter())
            .all(|((x, _), (y, _))| alpha_equal(x, y))
}

/// The first position where two terms differ, as a child-index path with
/// the two node labels found there.
pub fn first_difference(a: &T, b: &T) -> Option<(Vec<usize>, String, String)> {
    if alpha_equal(a, b) {
        return None;
    }
    let (ca, cb) = (a.children(), b.children());
    let shallow_same = std::mem::discriminant(&**a) == std::mem::discriminant(&**b)
        && ca.len() == cb.len()
        && alpha_equal(&a.with_children(ca.iter().map(|_| Arc::new(Term::Unit)).collect()), &b.with_children(cb.iter().map(|_| Arc::new(Term::Unit)).collect()));
    if shallow_same {
        for (k, ((x, _), (y, _))) in ca.iter().zip(cb.iter()).enumerate() {
            if let Some((mut p, l, r)) = first_difference(x, y) {
                p.insert(0, k);
                return Some((p, l, r));
            }
        }
    }
    Some((
        Vec::new(),
        super::pretty::render_short(a),
        super::pretty::render_short(b),
    ))
}

/// The subterm at `path`, with the number of binders crossed to reach it.
pub fn subterm_at<'a>(t: &'a T, path: &[usize]) -> Option<(&'a T, usize)> {
    let mut cur = t;
    let mut depth = 0;
    for &k in path {
        let cs = cur.children();
        let (c, b) = *cs.get(k)?;
        depth += b;
        cur = c;
    }
    Some((cur, depth))
}

/// Replaces the subterm at `path` by `new`, which must already be expressed
/// in the context at that position.
pub fn replace_at(t: &T, path: &[usize], new: T) -> T {
    match path.split_first() {
        None => new,
        Some((&k, rest)) => {
            let mut cs: Vec<T> = t.children().into_iter().map(|(c, _)| c.clone()).collect();
            cs[k] = replace_at(&cs[k], rest, new);
            Arc::new(t.with_children(cs))
        }
    }
}

/// Every position in preorder (outermost first, then left to right).
pub fn positions(t: &T) -> Vec<(Vec<usize>, usize)> {
    fn go(t: &T, path: &mut Vec<usize>, depth: usize, out: &mut Vec<(Vec<usize>, usize)>) {
        out.push((path.clone(), depth));
        for (k, (c, b)) in t.children().into_iter().enumerate() {
            path.push(k);
            go(c, path, depth + b, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::term::build::*;
    use super::super::term::FflType;
    use super::*;

    #[test]
    fn substitute_var_zero() {
        let r = substitute(&var(0, "x"), 0, &int(42));
        assert!(alpha_equal(&r, &int(42)));
    }

    #[test]
    fn substitute_under_binder_shifts() {
        // λ.var1 with var0 := var3 becomes λ.var4
        let t = lam("y", FflType::Int, var(1, "x"));
        let r = substitute(&t, 0, &var(3, "c"));
        assert!(alpha_equal(&r, &lam("y", FflType::Int, var(4, "c"))));
    }

    #[test]
    fn identity_substitution() {
        let t = lam("y", FflType::Int, pair(var(1, "x"), var(0, "y")));
        let r = substitute(&t, 0, &var(0, "x"));
        assert!(alpha_equal(&r, &t));
    }

    #[test]
    fn alpha_equality_ignores_names() {
        let a = lam("x", FflType::Int, var(0, "x"));
        let b = lam("y", FflType::Int, var(0, "y"));
        assert!(alpha_equal(&a, &b));
        let k1 = lam("x", FflType::Int, lam("y", FflType::Int, var(1, "x")));
        let k2 = lam("a", FflType::Int, lam("b", FflType::Int, var(0, "b")));
        assert!(!alpha_equal(&k1, &k2));
    }

    #[test]
    fn instantiate_beta() {
        let body = pair(var(0, "x"), var(1, "z"));
        let r = instantiate(&body, &int(1));
        assert!(alpha_equal(&r, &pair(int(1), var(0, "z"))));
    }
}
