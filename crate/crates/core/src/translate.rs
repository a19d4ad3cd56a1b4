//! IL to FFL translation.
//!
//! Straight-line definitions and assignments are substituted symbolically.
//! A `for` loop becomes a `fold` whose accumulator holds the outer variables
//! the body writes; a `while` loop becomes `iter` over the same kind of
//! state. A single written variable is substituted directly, while tuples of
//! several variables and all `while` states are let-bound so that their
//! projections stay cheap and divergence is not duplicated or dropped.

use crate::ffl::build::*;
use crate::ffl::{eval_applied, FUnOp, FflType, T};
use crate::il::ast::*;
use crate::il::interp::interpret_il;
use crate::il::typeck::TypedProgram;
use crate::value::{Outcome, Value};

#[derive(Clone)]
struct Slot {
    name: String,
    term: T,
    /// Binder depth at which `term` was built.
    depth: usize,
    ty: FflType,
}

struct Tr<'p> {
    p: &'p TypedProgram,
    env: Vec<Slot>,
    depth: usize,
}

/// Translates a checked program into a closed term `λp1 … λpn. body`.
pub fn translate(p: &TypedProgram) -> T {
    let mut tr = Tr {
        p,
        env: Vec::new(),
        depth: 0,
    };
    let n = p.program.params.len();
    tr.depth = n;
    for (k, param) in p.program.params.iter().enumerate() {
        tr.env.push(Slot {
            name: param.name.clone(),
            term: var(n - 1 - k, &param.name),
            depth: n,
            ty: (&param.ty).into(),
        });
    }
    let body = tr.seq(&p.program.body, &mut |_| unreachable!("checked programs end with return"));
    p.program
        .params
        .iter()
        .rev()
        .fold(body, |acc, param| lam(&param.name, (&param.ty).into(), acc))
}

impl<'p> Tr<'p> {
    fn slot(&self, name: &str) -> &Slot {
        self.env
            .iter()
            .rev()
            .find(|s| s.name == name)
            .expect("checked variable")
    }

    fn cur(&self, name: &str) -> T {
        let s = self.slot(name);
        crate::ffl::shift(&s.term, (self.depth - s.depth) as isize)
    }

    fn set(&mut self, name: &str, term: T) {
        let depth = self.depth;
        let s = self
            .env
            .iter_mut()
            .rev()
            .find(|s| s.name == name)
            .expect("checked variable");
        s.term = term;
        s.depth = depth;
    }

    fn push(&mut self, name: &str, term: T, ty: FflType) {
        self.env.push(Slot {
            name: name.to_string(),
            term,
            depth: self.depth,
            ty,
        });
    }

    /// Outer variables written by a loop body, in declaration order.
    fn written(&self, body: &[Stmt]) -> Vec<(String, FflType)> {
        let mut names = Vec::new();
        for s in body {
            s.assigned_names(&mut names);
        }
        let mut out: Vec<(String, FflType)> = Vec::new();
        for slot in &self.env {
            if names.contains(&slot.name) && !out.iter().any(|(n, _)| *n == slot.name) {
                out.push((slot.name.clone(), slot.ty.clone()));
            }
        }
        out
    }

    fn state_of(&self, w: &[(String, FflType)]) -> (FflType, T) {
        let tys: Vec<FflType> = w.iter().map(|(_, t)| t.clone()).collect();
        let init = tuple(w.iter().map(|(n, _)| self.cur(n)).collect());
        (FflType::tuple(&tys), init)
    }

    /// Points every written variable at its component of the state bound at
    /// de Bruijn index `idx`.
    fn bind_components(&mut self, w: &[(String, FflType)], idx: usize, state_name: &str) {
        let n = w.len();
        for (k, (name, _)) in w.iter().enumerate() {
            self.set(name, proj(var(idx, state_name), k, n));
        }
    }

    fn seq(&mut self, stmts: &[Stmt], fin: &mut dyn FnMut(&mut Tr<'p>) -> T) -> T {
        for (k, s) in stmts.iter().enumerate() {
            match &s.kind {
                StmtKind::Var { name, init, .. } => {
                    let t = self.expr(init);
                    let ty = self.p.decl_types[s.id].as_ref().expect("checked declaration");
                    self.push(name, t, ty.into());
                }
                StmtKind::Assign {
                    name,
                    indices,
                    value,
                } => {
                    let t = self.assign(name, indices, value);
                    self.set(name, t);
                }
                StmtKind::For {
                    var: x,
                    iterable,
                    body,
                } => {
                    let w = self.written(body);
                    let xs = self.expr(iterable);
                    let elem: FflType = self.p.decl_types[s.id].as_ref().expect("checked loop").into();
                    let (sty, init) = self.state_of(&w);
                    let step = self.for_body(&w, &sty, x, elem, body);
                    let folded = fold(step, init, xs);
                    if w.len() == 1 {
                        self.set(&w[0].0, folded);
                    } else {
                        return self.bind_state(&w, sty, folded, &stmts[k + 1..], fin);
                    }
                }
                StmtKind::While { cond, body } => {
                    let w = self.written(body);
                    let (sty, init) = self.state_of(&w);
                    let f = self.while_body(&w, &sty, cond, body);
                    return self.bind_state(&w, sty, app(iter(f), init), &stmts[k + 1..], fin);
                }
                StmtKind::Return(e) => return self.expr(e),
            }
        }
        fin(self)
    }

    /// `let s = v in rest`, with the written variables read from `s`.
    fn bind_state(
        &mut self,
        w: &[(String, FflType)],
        sty: FflType,
        v: T,
        rest: &[Stmt],
        fin: &mut dyn FnMut(&mut Tr<'p>) -> T,
    ) -> T {
        let saved = self.env.clone();
        self.depth += 1;
        self.bind_components(w, 0, "state");
        let body = self.seq(rest, fin);
        self.depth -= 1;
        self.env = saved;
        let_in("state", sty, v, body)
    }

    fn final_state(w: &[(String, FflType)]) -> impl FnMut(&mut Tr<'p>) -> T + '_ {
        move |tr: &mut Tr<'p>| tuple(w.iter().map(|(n, _)| tr.cur(n)).collect())
    }

    fn for_body(&mut self, w: &[(String, FflType)], sty: &FflType, x: &str, elem: FflType, body: &[Stmt]) -> T {
        let saved = self.env.clone();
        let acc_name = if w.len() == 1 { w[0].0.clone() } else { "acc".to_string() };
        self.depth += 2;
        if w.len() == 1 {
            self.set(&w[0].0, var(1, &acc_name));
        } else {
            self.bind_components(w, 1, &acc_name);
        }
        self.push(x, var(0, x), elem.clone());
        let mut fin = Self::final_state(w);
        let b = self.seq(body, &mut fin);
        self.depth -= 2;
        self.env = saved;
        lam(&acc_name, sty.clone(), lam(x, elem, b))
    }

    fn while_body(&mut self, w: &[(String, FflType)], sty: &FflType, cond: &Expr, body: &[Stmt]) -> T {
        let saved = self.env.clone();
        self.depth += 1;
        self.bind_components(w, 0, "state");
        let c = self.expr(cond);
        let mut fin = Self::final_state(w);
        let b = self.seq(body, &mut fin);
        self.depth -= 1;
        self.env = saved;
        let step = ite(c, inr(b, sty.clone()), inl(var(0, "state"), sty.clone()));
        lam("state", sty.clone(), step)
    }

    fn assign(&mut self, name: &str, indices: &[Expr], value: &Expr) -> T {
        fn nest(tr: &mut Tr<'_>, target: T, indices: &[Expr], value: &Expr) -> T {
            match indices.split_first() {
                None => tr.expr(value),
                Some((i, rest)) => {
                    let it = tr.expr(i);
                    let inner_target = index(target.clone(), it.clone());
                    let inner = nest(tr, inner_target, rest, value);
                    update(target, it, inner)
                }
            }
        }
        let target = self.cur(name);
        nest(self, target, indices, value)
    }

    fn expr(&mut self, e: &Expr) -> T {
        let t = self.natural(e);
        if self.p.table.widened(e.id) {
            un(FUnOp::IntToRat, t)
        } else {
            t
        }
    }

    fn natural_type(&self, e: &Expr) -> FflType {
        self.p.table.natural(e.id).expect("typed expression").into()
    }

    fn natural(&mut self, e: &Expr) -> T {
        match &e.kind {
            ExprKind::Var(n) => self.cur(n),
            ExprKind::Int(n) => std::sync::Arc::new(crate::ffl::Term::Int(n.clone())),
            ExprKind::Rat(r) => std::sync::Arc::new(crate::ffl::Term::Rat(r.clone())),
            ExprKind::Bool(b) => boolean(*b),
            ExprKind::Unary(op, a) => {
                let a = self.expr(a);
                un(
                    match op {
                        UnOp::Neg => FUnOp::Neg,
                        UnOp::Not => FUnOp::Not,
                    },
                    a,
                )
            }
            ExprKind::Binary(op, a, b) => {
                let x = self.expr(a);
                let y = self.expr(b);
                bin(*op, x, y)
            }
            ExprKind::Index(a, i) => {
                let x = self.expr(a);
                let k = self.expr(i);
                index(x, k)
            }
            ExprKind::Pair(a, b) => {
                let x = self.expr(a);
                let y = self.expr(b);
                pair(x, y)
            }
            ExprKind::Array(es) => {
                let elem = self.natural_type(e).elem().expect("array type").clone();
                let items = es.iter().map(|x| self.expr(x)).collect();
                std::sync::Arc::new(crate::ffl::Term::ArrayLit(elem, items))
            }
            ExprKind::Lambda(..) => unreachable!("lambdas only occur as builtin arguments"),
            ExprKind::Forall(..) => unreachable!("quantifiers only occur in predicates"),
            ExprKind::Call(b, args) => self.call(e, *b, args),
        }
    }

    /// A lambda fed one value per call, destructured over its parameters.
    fn lambda_one(&mut self, f: &Expr) -> T {
        let ExprKind::Lambda(params, body) = &f.kind else {
            unreachable!("checked lambda")
        };
        let n = params.len();
        let mark = self.env.len();
        self.depth += 1 + n;
        for (k, p) in params.iter().enumerate() {
            self.push(&p.name, var(n - 1 - k, &p.name), (&p.ty).into());
        }
        let b = self.expr(body);
        self.env.truncate(mark);
        self.depth -= 1 + n;
        let names: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
        let tys: Vec<FflType> = params.iter().map(|p| (&p.ty).into()).collect();
        pair_lambda(&names, &tys, b)
    }

    /// A curried two-argument lambda, as taken by `fold`.
    fn lambda_two(&mut self, f: &Expr) -> T {
        let ExprKind::Lambda(params, body) = &f.kind else {
            unreachable!("checked lambda")
        };
        let mark = self.env.len();
        self.depth += 2;
        self.push(&params[0].name, var(1, &params[0].name), (&params[0].ty).into());
        self.push(&params[1].name, var(0, &params[1].name), (&params[1].ty).into());
        let b = self.expr(body);
        self.env.truncate(mark);
        self.depth -= 2;
        lam(
            &params[0].name,
            (&params[0].ty).into(),
            lam(&params[1].name, (&params[1].ty).into(), b),
        )
    }

    fn call(&mut self, e: &Expr, b: Builtin, args: &[Expr]) -> T {
        use std::sync::Arc;
        use crate::ffl::Term;
        match b {
            Builtin::Map => {
                let f = self.lambda_one(&args[0]);
                map(f, self.expr(&args[1]))
            }
            Builtin::FlatMap => {
                let f = self.lambda_one(&args[0]);
                Arc::new(Term::FlatMap(f, self.expr(&args[1])))
            }
            Builtin::Fold => {
                let f = self.lambda_two(&args[0]);
                let i = self.expr(&args[1]);
                fold(f, i, self.expr(&args[2]))
            }
            Builtin::ReduceByKey => {
                let f = self.lambda_two(&args[0]);
                let i = self.expr(&args[1]);
                Arc::new(Term::ReduceByKey(f, i, self.expr(&args[2])))
            }
            Builtin::Inl | Builtin::Inr => {
                let (l, r) = match self.natural_type(e) {
                    FflType::Sum(l, r) => (*l, *r),
                    _ => unreachable!("checked sum"),
                };
                let x = self.expr(&args[0]);
                if b == Builtin::Inl {
                    inl(x, r)
                } else {
                    inr(x, l)
                }
            }
            _ => {
                let xs: Vec<T> = args.iter().map(|a| self.expr(a)).collect();
                let mut it = xs.into_iter();
                let mut next = || it.next().unwrap();
                match b {
                    Builtin::Length => length(next()),
                    Builtin::Replicate => replicate(next(), next()),
                    Builtin::Range => range(next(), next()),
                    Builtin::Zip => zip(next(), next()),
                    Builtin::Concat => concat(next()),
                    Builtin::Group => group(next()),
                    Builtin::Fst => fst(next()),
                    Builtin::Snd => snd(next()),
                    _ => unreachable!(),
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum OracleVerdict {
    Agree(Outcome),
    Disagree { il: Outcome, ffl: Outcome },
}

impl OracleVerdict {
    pub fn agrees(&self) -> bool {
        matches!(self, OracleVerdict::Agree(_))
    }
}

/// Runs the program both through the IL interpreter and through its
/// translation, and compares the outcomes.
pub fn translation_oracle_check(p: &TypedProgram, args: &[Value], budget: u64) -> OracleVerdict {
    let t = translate(p);
    oracle_with(p, &t, args, budget)
}

/// As [`translation_oracle_check`] with a precomputed translation.
pub fn oracle_with(p: &TypedProgram, t: &T, args: &[Value], budget: u64) -> OracleVerdict {
    let il = interpret_il(p, args, budget);
    let ffl = eval_applied(t, args, budget);
    if il.agrees_with(&ffl) {
        OracleVerdict::Agree(il)
    } else {
        OracleVerdict::Disagree { il, ffl }
    }
}
