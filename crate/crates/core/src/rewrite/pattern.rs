//! Patterns over FFL terms.
//!
//! A pattern is a term skeleton with three kinds of holes:
//! first-order metavariables ([`Pat::Meta`]) that stand for whole subterms
//! not mentioning variables bound inside the pattern, references to binders
//! of the pattern itself ([`Pat::Bound`]), and higher-order metavariables
//! ([`Pat::Ho`]) that stand for a function applied to argument patterns.
//! A higher-order match abstracts every occurrence of the arguments out of
//! the matched subterm; what remains must not mention any pattern binder.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::ffl::ops::{alpha_equal, instantiate, mentions, shift, shift_at};
use crate::ffl::term::build;
use crate::ffl::{typecheck_in, FflType, Term, T};
use crate::il::ast::BinOp;

#[derive(Clone, Debug, PartialEq)]
pub enum TyPat {
    Int,
    Bool,
    /// The type of a first-order metavariable.
    Of(&'static str),
    Elem(Box<TyPat>),
    Fst(Box<TyPat>),
    Snd(Box<TyPat>),
    Array(Box<TyPat>),
    Prod(Box<TyPat>, Box<TyPat>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    App,
    Pair,
    Fst,
    Snd,
    Index,
    Update,
    Length,
    Replicate,
    Range,
    Zip,
    Map,
    Concat,
    Group,
    Fold,
    Bin(BinOp),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pat {
    Meta(&'static str),
    /// De Bruijn reference to a lambda of the pattern.
    Bound(usize),
    /// Higher-order metavariable applied to argument patterns. Arguments must
    /// not contain lambdas.
    Ho(&'static str, Vec<Pat>),
    /// Lambda; the type is ignored when matching and used when building.
    Lam(&'static str, TyPat, Box<Pat>),
    Int(i64),
    Bool(bool),
    Node(Node, Vec<Pat>),
}

/// Bindings of a successful match, all expressed in the context of the
/// match position.
#[derive(Clone, Debug, Default)]
pub struct Instantiation {
    pub metas: BTreeMap<String, T>,
    /// Body of each higher-order metavariable, under `arity` extra binders
    /// (the first argument is the outermost).
    pub funs: BTreeMap<String, (usize, T)>,
}

fn node_of(t: &Term) -> Option<(Node, Vec<&T>)> {
    use Term::*;
    Some(match t {
        App(a, b) => (Node::App, vec![a, b]),
        Pair(a, b) => (Node::Pair, vec![a, b]),
        Fst(a) => (Node::Fst, vec![a]),
        Snd(a) => (Node::Snd, vec![a]),
        Index(a, b) => (Node::Index, vec![a, b]),
        Update(a, b, c) => (Node::Update, vec![a, b, c]),
        Length(a) => (Node::Length, vec![a]),
        Replicate(a, b) => (Node::Replicate, vec![a, b]),
        Range(a, b) => (Node::Range, vec![a, b]),
        Zip(a, b) => (Node::Zip, vec![a, b]),
        Map(a, b) => (Node::Map, vec![a, b]),
        Concat(a) => (Node::Concat, vec![a]),
        Group(a) => (Node::Group, vec![a]),
        Fold(a, b, c) => (Node::Fold, vec![a, b, c]),
        Bin(op, a, b) => (Node::Bin(*op), vec![a, b]),
        _ => return None,
    })
}

fn build_node(n: Node, cs: Vec<T>) -> T {
    let mut it = cs.into_iter();
    let mut next = || it.next().expect("pattern arity");
    match n {
        Node::App => build::app(next(), next()),
        Node::Pair => build::pair(next(), next()),
        Node::Fst => build::fst(next()),
        Node::Snd => build::snd(next()),
        Node::Index => build::index(next(), next()),
        Node::Update => build::update(next(), next(), next()),
        Node::Length => build::length(next()),
        Node::Replicate => build::replicate(next(), next()),
        Node::Range => build::range(next(), next()),
        Node::Zip => build::zip(next(), next()),
        Node::Map => build::map(next(), next()),
        Node::Concat => build::concat(next()),
        Node::Group => build::group(next()),
        Node::Fold => build::fold(next(), next(), next()),
        Node::Bin(op) => build::bin(op, next(), next()),
    }
}

/// Outcome of matching one pattern at one position.
#[derive(Clone, Debug)]
pub enum MatchResult {
    Matched(Instantiation),
    /// The skeleton matched but a metavariable broke its scoping condition.
    SideCondition(String),
    NoMatch,
}

struct Deferred<'p> {
    name: &'static str,
    args: &'p [Pat],
    term: T,
    depth: usize,
}

struct Matcher<'p> {
    inst: Instantiation,
    deferred: Vec<Deferred<'p>>,
    side: Option<String>,
}

impl<'p> Matcher<'p> {
    /// `depth` counts binders between the match root and `t`; `extra` is the
    /// number of those that are not pattern binders (non-zero only while
    /// locating higher-order arguments).
    fn go(&mut self, p: &'p Pat, t: &T, depth: usize, extra: usize) -> bool {
        match p {
            Pat::Meta(name) => {
                if mentions(t, 0, depth) {
                    self.side.get_or_insert_with(|| {
                        format!("`{name}` depends on a variable bound inside the matched term")
                    });
                    return false;
                }
                let v = shift(t, -(depth as isize));
                match self.inst.metas.get(*name) {
                    Some(old) => alpha_equal(old, &v),
                    None => {
                        self.inst.metas.insert(name.to_string(), v);
                        true
                    }
                }
            }
            Pat::Bound(k) => matches!(&**t, Term::Var(i, _) if *i == k + extra),
            Pat::Ho(name, args) => {
                self.deferred.push(Deferred {
                    name,
                    args,
                    term: t.clone(),
                    depth,
                });
                true
            }
            Pat::Lam(_, _, body) => match &**t {
                Term::Lam(_, _, b) => self.go(body, b, depth + 1, extra),
                _ => false,
            },
            Pat::Int(n) => matches!(&**t, Term::Int(m) if *m == (*n).into()),
            Pat::Bool(v) => matches!(&**t, Term::Bool(w) if w == v),
            Pat::Node(n, ps) => match node_of(t) {
                Some((m, cs)) if m == *n && cs.len() == ps.len() => {
                    ps.iter().zip(cs).all(|(p, c)| self.go(p, c, depth, extra))
                }
                _ => false,
            },
        }
    }

    /// Binds metavariables that occur only inside higher-order arguments by
    /// finding the first subterm (preorder) the argument pattern matches.
    fn discover(&mut self, arg: &'p Pat, t: &T, depth: usize) -> bool {
        fn walk<'p>(m: &mut Matcher<'p>, arg: &'p Pat, t: &T, depth: usize, extra: usize) -> bool {
            let saved = m.inst.clone();
            let side = m.side.clone();
            if m.go(arg, t, depth + extra, extra) {
                return true;
            }
            m.inst = saved;
            m.side = side;
            t.children()
                .into_iter()
                .any(|(c, b)| walk(m, arg, c, depth, extra + b))
        }
        walk(self, arg, t, depth, 0)
    }

    fn resolve(&mut self) -> Result<(), String> {
        let pending = std::mem::take(&mut self.deferred);
        for d in pending {
            let mut args = Vec::with_capacity(d.args.len());
            for a in d.args {
                if !metas_of(a).iter().all(|m| self.inst.metas.contains_key(*m)) && !self.discover(a, &d.term, d.depth) {
                    return Err(format!("no argument of `{}` found in its body", d.name));
                }
                args.push(build_plain(a, &self.inst, d.depth)?);
            }
            let body = abstract_args(&d.term, &args, d.depth).map_err(|v| {
                format!("`{}` uses the bound variable `{v}` outside of its arguments", d.name)
            })?;
            match self.inst.funs.get(d.name) {
                Some((_, old)) if !alpha_equal(old, &body) => {
                    return Err(format!("`{}` matched two different functions", d.name))
                }
                Some(_) => {}
                None => {
                    self.inst.funs.insert(d.name.to_string(), (args.len(), body));
                }
            }
        }
        Ok(())
    }
}

fn metas_of(p: &Pat) -> Vec<&'static str> {
    let mut out = Vec::new();
    fn go(p: &Pat, out: &mut Vec<&'static str>) {
        match p {
            Pat::Meta(n) => out.push(n),
            Pat::Ho(_, ps) | Pat::Node(_, ps) => ps.iter().for_each(|p| go(p, out)),
            Pat::Lam(_, _, b) => go(b, out),
            Pat::Bound(_) | Pat::Int(_) | Pat::Bool(_) => {}
        }
    }
    go(p, &mut out);
    out
}

/// Replaces occurrences of `args` (given at pattern depth `pd`) in `t` by
/// fresh placeholder binders. The result lives in the match-root context
/// extended by one binder per argument. Fails with the name of a pattern
/// binder that is still referenced.
fn abstract_args(t: &T, args: &[T], pd: usize) -> Result<T, String> {
    let k = args.len();
    fn go(t: &T, args: &[T], pd: usize, k: usize, e: usize) -> Result<T, String> {
        for (i, a) in args.iter().enumerate() {
            if alpha_equal(t, &shift(a, e as isize)) {
                return Ok(build::var(e + (k - 1 - i), &format!("x{i}")));
            }
        }
        match &**t {
            Term::Var(j, n) => {
                if *j < e {
                    Ok(t.clone())
                } else if j - e < pd {
                    Err(n.clone())
                } else {
                    Ok(build::var(j - pd + k, n))
                }
            }
            _ => {
                let cs = t
                    .children()
                    .into_iter()
                    .map(|(c, b)| go(c, args, pd, k, e + b))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Arc::new(t.with_children(cs)))
            }
        }
    }
    go(t, args, pd, k, 0)
}

/// Applies a higher-order binding to argument terms given at depth `pd`.
fn apply_fun(arity: usize, body: &T, args: &[T], pd: usize) -> T {
    let mut b = shift_at(body, pd as isize, arity);
    for i in (0..arity).rev() {
        b = instantiate(&b, &shift(&args[i], i as isize));
    }
    b
}

/// Builds a pattern that contains no lambdas, at pattern depth `pd`.
fn build_plain(p: &Pat, inst: &Instantiation, pd: usize) -> Result<T, String> {
    build_with(p, inst, pd, &mut |_| Err("lambda in a higher-order argument".into()))
}

fn build_with(
    p: &Pat,
    inst: &Instantiation,
    pd: usize,
    ty: &mut dyn FnMut(&TyPat) -> Result<FflType, String>,
) -> Result<T, String> {
    Ok(match p {
        Pat::Meta(n) => shift(
            inst.metas.get(*n).ok_or_else(|| format!("unbound metavariable `{n}`"))?,
            pd as isize,
        ),
        Pat::Bound(k) => build::var(*k, "b"),
        Pat::Ho(n, args) => {
            let (arity, body) = inst.funs.get(*n).ok_or_else(|| format!("unbound function `{n}`"))?;
            let args = args
                .iter()
                .map(|a| build_with(a, inst, pd, ty))
                .collect::<Result<Vec<_>, _>>()?;
            apply_fun(*arity, body, &args, pd)
        }
        Pat::Lam(n, tp, body) => {
            let t = ty(tp)?;
            build::lam(n, t, build_with(body, inst, pd + 1, ty)?)
        }
        Pat::Int(n) => build::int(*n),
        Pat::Bool(b) => build::boolean(*b),
        Pat::Node(n, ps) => build_node(
            *n,
            ps.iter()
                .map(|p| build_with(p, inst, pd, ty))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    })
}

impl Instantiation {
    /// Builds `p` at the match root, whose binder types are `env`
    /// (`env.last()` is index 0).
    pub fn build(&self, p: &Pat, env: &[FflType]) -> Result<T, String> {
        let mut cache: BTreeMap<String, FflType> = BTreeMap::new();
        let mut ty = |tp: &TyPat| self.eval_ty(tp, env, &mut cache);
        build_with(p, self, 0, &mut ty)
    }

    pub fn type_of(&self, meta: &str, env: &[FflType]) -> Result<FflType, String> {
        let t = self.metas.get(meta).ok_or_else(|| format!("unbound metavariable `{meta}`"))?;
        typecheck_in(env, t).map_err(|e| format!("`{meta}` is ill-typed: {e}"))
    }

    fn eval_ty(&self, tp: &TyPat, env: &[FflType], cache: &mut BTreeMap<String, FflType>) -> Result<FflType, String> {
        let bad = |what: &str, t: &FflType| format!("expected {what}, found {t}");
        Ok(match tp {
            TyPat::Int => FflType::Int,
            TyPat::Bool => FflType::Bool,
            TyPat::Of(m) => {
                if let Some(t) = cache.get(*m) {
                    return Ok(t.clone());
                }
                let t = self.type_of(m, env)?;
                cache.insert(m.to_string(), t.clone());
                t
            }
            TyPat::Elem(a) => {
                let t = self.eval_ty(a, env, cache)?;
                t.elem().cloned().ok_or_else(|| bad("an array", &t))?
            }
            TyPat::Fst(a) => {
                let t = self.eval_ty(a, env, cache)?;
                t.components().map(|c| c.0.clone()).ok_or_else(|| bad("a pair", &t))?
            }
            TyPat::Snd(a) => {
                let t = self.eval_ty(a, env, cache)?;
                t.components().map(|c| c.1.clone()).ok_or_else(|| bad("a pair", &t))?
            }
            TyPat::Array(a) => FflType::array(self.eval_ty(a, env, cache)?),
            TyPat::Prod(a, b) => FflType::prod(self.eval_ty(a, env, cache)?, self.eval_ty(b, env, cache)?),
        })
    }
}

/// Matches `p` against `t`, which sits at the match root.
pub fn match_at(p: &Pat, t: &T) -> MatchResult {
    match_with(p, t, Instantiation::default())
}

/// As [`match_at`], extending an existing instantiation.
pub fn match_with(p: &Pat, t: &T, inst: Instantiation) -> MatchResult {
    let mut m = Matcher {
        inst,
        deferred: Vec::new(),
        side: None,
    };
    if !m.go(p, t, 0, 0) {
        return match m.side {
            Some(s) => MatchResult::SideCondition(s),
            None => MatchResult::NoMatch,
        };
    }
    match m.resolve() {
        Ok(()) => MatchResult::Matched(m.inst),
        Err(s) => MatchResult::SideCondition(s),
    }
}

/// Shorthand constructors used by the rule catalog and by tests.
pub mod dsl {
    use super::*;

    pub fn m(n: &'static str) -> Pat {
        Pat::Meta(n)
    }
    pub fn b(k: usize) -> Pat {
        Pat::Bound(k)
    }
    pub fn ho(n: &'static str, args: Vec<Pat>) -> Pat {
        Pat::Ho(n, args)
    }
    pub fn lam(n: &'static str, t: TyPat, body: Pat) -> Pat {
        Pat::Lam(n, t, Box::new(body))
    }
    pub fn int(n: i64) -> Pat {
        Pat::Int(n)
    }
    pub fn node(n: Node, cs: Vec<Pat>) -> Pat {
        Pat::Node(n, cs)
    }
    pub fn fold(f: Pat, i: Pat, xs: Pat) -> Pat {
        node(Node::Fold, vec![f, i, xs])
    }
    pub fn index(a: Pat, i: Pat) -> Pat {
        node(Node::Index, vec![a, i])
    }
    pub fn update(a: Pat, i: Pat, v: Pat) -> Pat {
        node(Node::Update, vec![a, i, v])
    }
    pub fn length(a: Pat) -> Pat {
        node(Node::Length, vec![a])
    }
    pub fn fst(a: Pat) -> Pat {
        node(Node::Fst, vec![a])
    }
    pub fn snd(a: Pat) -> Pat {
        node(Node::Snd, vec![a])
    }
    pub fn bin(op: BinOp, a: Pat, c: Pat) -> Pat {
        node(Node::Bin(op), vec![a, c])
    }
    pub fn of(n: &'static str) -> TyPat {
        TyPat::Of(n)
    }
    pub fn elem(t: TyPat) -> TyPat {
        TyPat::Elem(Box::new(t))
    }
    pub fn tfst(t: TyPat) -> TyPat {
        TyPat::Fst(Box::new(t))
    }
    pub fn tsnd(t: TyPat) -> TyPat {
        TyPat::Snd(Box::new(t))
    }
    pub fn tarr(t: TyPat) -> TyPat {
        TyPat::Array(Box::new(t))
    }
    pub fn tprod(a: TyPat, c: TyPat) -> TyPat {
        TyPat::Prod(Box::new(a), Box::new(c))
    }
}

#[cfg(test)]
mod tests {
    use super::dsl::*;
    use super::*;
    use crate::ffl::term::build as tb;

    #[test]
    fn first_order_meta_binds_closed_subterm() {
        let p = fold(lam("a", TyPat::Int, lam("x", TyPat::Int, b(0))), m("i"), m("xs"));
        let t = tb::fold(
            tb::lam("a", FflType::Int, tb::lam("x", FflType::Int, tb::var(0, "x"))),
            tb::int(3),
            tb::var(2, "free"),
        );
        match match_at(&p, &t) {
            MatchResult::Matched(inst) => {
                assert!(alpha_equal(&inst.metas["i"], &tb::int(3)));
                assert!(alpha_equal(&inst.metas["xs"], &tb::var(2, "free")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn meta_cannot_capture_pattern_binder() {
        // λx. x against λx. M: M would have to mention x.
        let p = lam("x", TyPat::Int, m("body"));
        let t = tb::lam("x", FflType::Int, tb::var(0, "x"));
        assert!(matches!(match_at(&p, &t), MatchResult::SideCondition(_)));
    }

    #[test]
    fn higher_order_abstracts_arguments() {
        // λi. F(xs[i]) against λi. xs[i] + 1 with xs free.
        let p = lam("i", TyPat::Int, ho("f", vec![index(m("xs"), b(0))]));
        let xs = tb::var(1, "xs");
        let t = tb::lam(
            "i",
            FflType::Int,
            tb::bin(BinOp::Add, tb::index(xs, tb::var(0, "i")), tb::int(1)),
        );
        let MatchResult::Matched(inst) = match_at(&p, &t) else {
            panic!("no match")
        };
        let (arity, body) = &inst.funs["f"];
        assert_eq!(*arity, 1);
        assert!(alpha_equal(body, &tb::bin(BinOp::Add, tb::var(0, "x"), tb::int(1))));
        assert!(alpha_equal(&inst.metas["xs"], &tb::var(0, "xs")));
    }

    #[test]
    fn higher_order_rejects_stray_binder_use() {
        // λi. xs[i] + i: the body uses i outside xs[i].
        let p = lam("i", TyPat::Int, ho("f", vec![index(m("xs"), b(0))]));
        let t = tb::lam(
            "i",
            FflType::Int,
            tb::bin(
                BinOp::Add,
                tb::index(tb::var(1, "xs"), tb::var(0, "i")),
                tb::var(0, "i"),
            ),
        );
        assert!(matches!(match_at(&p, &t), MatchResult::SideCondition(_)));
    }

    #[test]
    fn build_applies_function_binding() {
        let p = lam("i", TyPat::Int, ho("f", vec![index(m("xs"), b(0))]));
        let t = tb::lam(
            "i",
            FflType::Int,
            tb::bin(BinOp::Mul, tb::index(tb::var(1, "xs"), tb::var(0, "i")), tb::int(2)),
        );
        let MatchResult::Matched(inst) = match_at(&p, &t) else {
            panic!("no match")
        };
        let env = [FflType::array(FflType::Int)];
        let rebuilt = inst.build(&p, &env).unwrap();
        assert!(alpha_equal(&rebuilt, &t));
    }
}
