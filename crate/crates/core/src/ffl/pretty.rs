//! Deterministic textual rendering of FFL terms for diagnostics.

use std::fmt::Write;

use num_traits::One;

use super::term::{FUnOp, Term, T};

pub fn render(t: &T) -> String {
    let mut out = String::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// A one-line rendering cut to 80 characters.
pub fn render_short(t: &T) -> String {
    let s = render(t);
    if s.chars().count() > 80 {
        let cut: String = s.chars().take(77).collect();
        format!("{cut}...")
    } else {
        s
    }
}

fn call(name: &str, args: &[&T], names: &mut Vec<String>, out: &mut String) {
    out.push_str(name);
    out.push('(');
    for (k, a) in args.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        go(a, names, out);
    }
    out.push(')');
}

fn go(t: &T, names: &mut Vec<String>, out: &mut String) {
    use Term::*;
    match &**t {
        Var(i, n) => {
            let pos = names.len().checked_sub(i + 1);
            match pos {
                Some(p) => {
                    let shadowed = names[p + 1..].iter().any(|m| *m == names[p]);
                    if shadowed {
                        write!(out, "{}#{i}", names[p]).unwrap();
                    } else {
                        out.push_str(&names[p]);
                    }
                }
                None => write!(out, "{n}#free{i}").unwrap(),
            }
        }
        Lam(n, ty, body) => {
            write!(out, "(\\{n}:{ty}. ").unwrap();
            names.push(n.clone());
            go(body, names, out);
            names.pop();
            out.push(')');
        }
        App(f, x) => {
            out.push('(');
            go(f, names, out);
            out.push(' ');
            go(x, names, out);
            out.push(')');
        }
        Int(n) => write!(out, "{n}").unwrap(),
        Rat(r) => {
            if r.denom().is_one() {
                write!(out, "{}.", r.numer()).unwrap()
            } else {
                write!(out, "{}/{}", r.numer(), r.denom()).unwrap()
            }
        }
        Bool(b) => write!(out, "{b}").unwrap(),
        Unit => out.push_str("()"),
        Pair(a, b) => {
            out.push('(');
            go(a, names, out);
            out.push_str(", ");
            go(b, names, out);
            out.push(')');
        }
        Fst(a) => call("fst", &[a], names, out),
        Snd(a) => call("snd", &[a], names, out),
        Inl(a, _) => call("inl", &[a], names, out),
        Inr(a, _) => call("inr", &[a], names, out),
        Case(e, l, r) => call("case", &[e, l, r], names, out),
        If(c, a, b) => {
            out.push_str("(if ");
            go(c, names, out);
            out.push_str(" then ");
            go(a, names, out);
            out.push_str(" else ");
            go(b, names, out);
            out.push(')');
        }
        ArrayLit(_, xs) => {
            out.push('[');
            for (k, x) in xs.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                go(x, names, out);
            }
            out.push(']');
        }
        Index(a, i) => {
            go(a, names, out);
            out.push('[');
            go(i, names, out);
            out.push(']');
        }
        Update(a, i, v) => {
            go(a, names, out);
            out.push('[');
            go(i, names, out);
            out.push_str(" := ");
            go(v, names, out);
            out.push(']');
        }
        Length(a) => call("length", &[a], names, out),
        Replicate(n, x) => call("replicate", &[n, x], names, out),
        Range(a, b) => call("range", &[a, b], names, out),
        Zip(a, b) => call("zip", &[a, b], names, out),
        Map(f, xs) => call("map", &[f, xs], names, out),
        Concat(a) => call("concat", &[a], names, out),
        Group(a) => call("group", &[a], names, out),
        Fold(f, i, xs) => call("fold", &[f, i, xs], names, out),
        Iter(f) => call("iter", &[f], names, out),
        FlatMap(f, xs) => call("flatMap", &[f, xs], names, out),
        ReduceByKey(f, i, xs) => call("reduceByKey", &[f, i, xs], names, out),
        Assert(ob, b) => call("assert", &[ob, b], names, out),
        Bin(op, a, b) => {
            out.push('(');
            go(a, names, out);
            write!(out, " {} ", op.symbol()).unwrap();
            go(b, names, out);
            out.push(')');
        }
        Un(op, a) => {
            let name = match op {
                FUnOp::Neg => "-",
                FUnOp::Not => "!",
                FUnOp::IntToRat => "rat",
            };
            if *op == FUnOp::IntToRat {
                call(name, &[a], names, out);
            } else {
                out.push_str(name);
                go(a, names, out);
            }
        }
    }
}
