use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::il::ast::{BinOp, IlType};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FflType {
    Int,
    Rat,
    Bool,
    Unit,
    Array(Box<FflType>),
    Prod(Box<FflType>, Box<FflType>),
    Sum(Box<FflType>, Box<FflType>),
    Arrow(Box<FflType>, Box<FflType>),
}

impl FflType {
    pub fn array(t: FflType) -> FflType {
        FflType::Array(Box::new(t))
    }

    pub fn prod(a: FflType, b: FflType) -> FflType {
        FflType::Prod(Box::new(a), Box::new(b))
    }

    pub fn sum(a: FflType, b: FflType) -> FflType {
        FflType::Sum(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: FflType, b: FflType) -> FflType {
        FflType::Arrow(Box::new(a), Box::new(b))
    }

    /// Right-nested product of the given components; `Unit` when empty.
    pub fn tuple(ts: &[FflType]) -> FflType {
        match ts {
            [] => FflType::Unit,
            [t] => t.clone(),
            [t, rest @ ..] => FflType::prod(t.clone(), FflType::tuple(rest)),
        }
    }

    pub fn elem(&self) -> Option<&FflType> {
        match self {
            FflType::Array(t) => Some(t),
            _ => None,
        }
    }

    pub fn components(&self) -> Option<(&FflType, &FflType)> {
        match self {
            FflType::Prod(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

impl From<&IlType> for FflType {
    fn from(t: &IlType) -> FflType {
        match t {
            IlType::Int => FflType::Int,
            IlType::Rat => FflType::Rat,
            IlType::Bool => FflType::Bool,
            IlType::Array(e) => FflType::array(e.as_ref().into()),
            IlType::Pair(a, b) => FflType::prod(a.as_ref().into(), b.as_ref().into()),
            IlType::Sum(a, b) => FflType::sum(a.as_ref().into(), b.as_ref().into()),
            IlType::Fun(ps, r) => ps
                .iter()
                .rev()
                .fold(r.as_ref().into(), |acc, p| FflType::arrow(p.into(), acc)),
        }
    }
}

impl fmt::Display for FflType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Precedence: arrow 0, sum 1, product 2, atoms 3.
        fn go(t: &FflType, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let (p, l, r, sym) = match t {
                FflType::Int => return f.write_str("Int"),
                FflType::Rat => return f.write_str("Rat"),
                FflType::Bool => return f.write_str("Bool"),
                FflType::Unit => return f.write_str("Unit"),
                FflType::Array(e) => {
                    f.write_str("[")?;
                    go(e, 0, f)?;
                    return f.write_str("]");
                }
                FflType::Arrow(a, b) => (0, a, b, " -> "),
                FflType::Sum(a, b) => (1, a, b, " + "),
                FflType::Prod(a, b) => (2, a, b, " * "),
            };
            if prec > p {
                f.write_str("(")?;
            }
            go(l, p + 1, f)?;
            f.write_str(sym)?;
            go(r, p, f)?;
            if prec > p {
                f.write_str(")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FUnOp {
    Neg,
    Not,
    IntToRat,
}

pub type T = Arc<Term>;

/// Nameless FFL terms. Variables are de Bruijn indices; binder and variable
/// names are kept only for printing and never affect equality.
#[derive(Clone, Debug)]
pub enum Term {
    Var(usize, String),
    Lam(String, FflType, T),
    App(T, T),
    Int(BigInt),
    Rat(BigRational),
    Bool(bool),
    Unit,
    Pair(T, T),
    Fst(T),
    Snd(T),
    /// Injection with the type of the other summand.
    Inl(T, FflType),
    Inr(T, FflType),
    /// `case e of inl => l | inr => r`, with `l` and `r` functions.
    Case(T, T, T),
    If(T, T, T),
    ArrayLit(FflType, Vec<T>),
    Index(T, T),
    Update(T, T, T),
    Length(T),
    Replicate(T, T),
    Range(T, T),
    Zip(T, T),
    Map(T, T),
    Concat(T),
    Group(T),
    Fold(T, T, T),
    /// `iter(f)` with `f : S -> R + S`; applied to a state it loops while `f`
    /// answers `inr` and returns the `inl` payload.
    Iter(T),
    Bin(BinOp, T, T),
    Un(FUnOp, T),
    FlatMap(T, T),
    ReduceByKey(T, T, T),
    /// Evaluates the boolean obligation, fails if it is false, then
    /// evaluates the body. Inserted only by the rewrite engine's probes.
    Assert(T, T),
}

pub mod build {
    //! Shorthand constructors.
    use super::*;

    pub fn var(i: usize, name: &str) -> T {
        Arc::new(Term::Var(i, name.to_string()))
    }
    pub fn lam(name: &str, ty: FflType, body: T) -> T {
        Arc::new(Term::Lam(name.to_string(), ty, body))
    }
    pub fn app(f: T, x: T) -> T {
        Arc::new(Term::App(f, x))
    }
    pub fn apps(f: T, xs: impl IntoIterator<Item = T>) -> T {
        xs.into_iter().fold(f, app)
    }
    pub fn int(n: i64) -> T {
        Arc::new(Term::Int(BigInt::from(n)))
    }
    pub fn boolean(b: bool) -> T {
        Arc::new(Term::Bool(b))
    }
    pub fn unit() -> T {
        Arc::new(Term::Unit)
    }
    pub fn pair(a: T, b: T) -> T {
        Arc::new(Term::Pair(a, b))
    }
    pub fn fst(a: T) -> T {
        Arc::new(Term::Fst(a))
    }
    pub fn snd(a: T) -> T {
        Arc::new(Term::Snd(a))
    }
    pub fn inl(a: T, right: FflType) -> T {
        Arc::new(Term::Inl(a, right))
    }
    pub fn inr(a: T, left: FflType) -> T {
        Arc::new(Term::Inr(a, left))
    }
    pub fn ite(c: T, a: T, b: T) -> T {
        Arc::new(Term::If(c, a, b))
    }
    pub fn index(a: T, i: T) -> T {
        Arc::new(Term::Index(a, i))
    }
    pub fn update(a: T, i: T, v: T) -> T {
        Arc::new(Term::Update(a, i, v))
    }
    pub fn length(a: T) -> T {
        Arc::new(Term::Length(a))
    }
    pub fn replicate(n: T, x: T) -> T {
        Arc::new(Term::Replicate(n, x))
    }
    pub fn range(a: T, b: T) -> T {
        Arc::new(Term::Range(a, b))
    }
    pub fn zip(a: T, b: T) -> T {
        Arc::new(Term::Zip(a, b))
    }
    pub fn map(f: T, xs: T) -> T {
        Arc::new(Term::Map(f, xs))
    }
    pub fn concat(xs: T) -> T {
        Arc::new(Term::Concat(xs))
    }
    pub fn group(xs: T) -> T {
        Arc::new(Term::Group(xs))
    }
    pub fn fold(f: T, init: T, xs: T) -> T {
        Arc::new(Term::Fold(f, init, xs))
    }
    pub fn iter(f: T) -> T {
        Arc::new(Term::Iter(f))
    }
    pub fn bin(op: BinOp, a: T, b: T) -> T {
        Arc::new(Term::Bin(op, a, b))
    }
    pub fn un(op: FUnOp, a: T) -> T {
        Arc::new(Term::Un(op, a))
    }
    pub fn assert(ob: T, body: T) -> T {
        Arc::new(Term::Assert(ob, body))
    }

    /// `(λx.body) v`, the let encoding.
    pub fn let_in(name: &str, ty: FflType, v: T, body: T) -> T {
        app(lam(name, ty, body), v)
    }

    /// Projection `k` of an `n`-component right-nested tuple.
    pub fn proj(t: T, k: usize, n: usize) -> T {
        let mut cur = t;
        for _ in 0..k {
            cur = snd(cur);
        }
        if k + 1 < n {
            fst(cur)
        } else {
            cur
        }
    }

    pub fn tuple(items: Vec<T>) -> T {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => unit(),
            Some(last) => it.fold(last, |acc, x| pair(x, acc)),
        }
    }

    /// A function of one tuple argument destructured into `names`:
    /// `λp. (λx1 … λxn. body) (proj p 0) … (proj p n-1)`.
    /// `body` must already be built in a context that has `p` and then
    /// `x1 … xn` bound on top of the outer context.
    pub fn pair_lambda(names: &[&str], tys: &[FflType], body: T) -> T {
        let n = names.len();
        if n == 1 {
            // Drop the unused `p` binder that sits under `x1`.
            let body = crate::ffl::ops::shift_at(&body, -1, 1);
            return lam(names[0], tys[0].clone(), body);
        }
        let inner = names
            .iter()
            .zip(tys)
            .rev()
            .fold(body, |acc, (nm, ty)| lam(nm, ty.clone(), acc));
        let args = (0..n).map(|k| proj(var(0, "p"), k, n));
        lam("p", FflType::tuple(tys), apps(inner, args))
    }
}

impl Term {
    /// Direct children paired with the number of binders each sits under.
    pub fn children(&self) -> Vec<(&T, usize)> {
        use Term::*;
        match self {
            Var(..) | Int(_) | Rat(_) | Bool(_) | Unit => vec![],
            Lam(_, _, b) => vec![(b, 1)],
            Fst(a) | Snd(a) | Inl(a, _) | Inr(a, _) | Length(a) | Concat(a) | Group(a)
            | Iter(a) | Un(_, a) => vec![(a, 0)],
            App(a, b) | Pair(a, b) | Index(a, b) | Replicate(a, b) | Range(a, b) | Zip(a, b)
            | Map(a, b) | Bin(_, a, b) | FlatMap(a, b) | Assert(a, b) => vec![(a, 0), (b, 0)],
            Case(a, b, c) | If(a, b, c) | Update(a, b, c) | Fold(a, b, c) | ReduceByKey(a, b, c) => {
                vec![(a, 0), (b, 0), (c, 0)]
            }
            ArrayLit(_, xs) => xs.iter().map(|x| (x, 0)).collect(),
        }
    }

    /// Rebuilds this node with new children, in the order of [`children`].
    pub fn with_children(&self, mut cs: Vec<T>) -> Term {
        use Term::*;
        let mut next = || cs.remove(0);
        match self {
            Var(..) | Int(_) | Rat(_) | Bool(_) | Unit => self.clone(),
            Lam(n, t, _) => Lam(n.clone(), t.clone(), next()),
            Fst(_) => Fst(next()),
            Snd(_) => Snd(next()),
            Inl(_, t) => Inl(next(), t.clone()),
            Inr(_, t) => Inr(next(), t.clone()),
            Length(_) => Length(next()),
            Concat(_) => Concat(next()),
            Group(_) => Group(next()),
            Iter(_) => Iter(next()),
            Un(op, _) => Un(*op, next()),
            App(..) => App(next(), next()),
            Pair(..) => Pair(next(), next()),
            Index(..) => Index(next(), next()),
            Replicate(..) => Replicate(next(), next()),
            Range(..) => Range(next(), next()),
            Zip(..) => Zip(next(), next()),
            Map(..) => Map(next(), next()),
            Bin(op, ..) => Bin(*op, next(), next()),
            FlatMap(..) => FlatMap(next(), next()),
            Assert(..) => Assert(next(), next()),
            Case(..) => Case(next(), next(), next()),
            If(..) => If(next(), next(), next()),
            Update(..) => Update(next(), next(), next()),
            Fold(..) => Fold(next(), next(), next()),
            ReduceByKey(..) => ReduceByKey(next(), next(), next()),
            ArrayLit(t, xs) => ArrayLit(t.clone(), (0..xs.len()).map(|_| next()).collect()),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|(c, _)| c.size()).sum::<usize>()
    }

    /// True when a `flatMap` or `reduceByKey` node occurs anywhere.
    pub fn has_synonym(&self) -> bool {
        matches!(self, Term::FlatMap(..) | Term::ReduceByKey(..))
            || self.children().iter().any(|(c, _)| c.has_synonym())
    }

    /// A short label for the node, used in paths and diffs.
    pub fn label(&self) -> &'static str {
        use Term::*;
        match self {
            Var(..) => "var",
            Lam(..) => "lambda",
            App(..) => "app",
            Int(_) => "int",
            Rat(_) => "rat",
            Bool(_) => "bool",
            Unit => "unit",
            Pair(..) => "pair",
            Fst(_) => "fst",
            Snd(_) => "snd",
            Inl(..) => "inl",
            Inr(..) => "inr",
            Case(..) => "case",
            If(..) => "if",
            ArrayLit(..) => "array",
            Index(..) => "index",
            Update(..) => "update",
            Length(_) => "length",
            Replicate(..) => "replicate",
            Range(..) => "range",
            Zip(..) => "zip",
            Map(..) => "map",
            Concat(_) => "concat",
            Group(_) => "group",
            Fold(..) => "fold",
            Iter(_) => "iter",
            Bin(..) => "binop",
            Un(..) => "unop",
            FlatMap(..) => "flatMap",
            ReduceByKey(..) => "reduceByKey",
            Assert(..) => "assert",
        }
    }
}
