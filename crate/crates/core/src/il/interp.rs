//! Reference interpreter for type-checked IL.
//!
//! This is deliberately a direct statement-by-statement interpreter with
//! mutable frames, sharing nothing with the translator, so that it can serve
//! as the independent side of translation validation.

use num_traits::ToPrimitive;

use super::ast::*;
use super::typeck::{TypeTable, TypedProgram};
use crate::prims;
pub use crate::value::Stop;
use crate::value::{ErrorKind, Outcome, RuntimeError, Value};

pub type Exec<T> = Result<T, Stop>;

/// Mutable execution state: a stack of lexical frames plus the step budget.
/// One loop iteration costs one step.
pub struct Machine<'t> {
    table: &'t TypeTable,
    frames: Vec<Vec<(String, Value)>>,
    steps: u64,
    budget: u64,
}

fn err<T>(kind: ErrorKind, span: Span) -> Exec<T> {
    Err(Stop::Error(RuntimeError::at(kind, span)))
}

impl<'t> Machine<'t> {
    pub fn new(table: &'t TypeTable, budget: u64) -> Self {
        Machine {
            table,
            frames: vec![Vec::new()],
            steps: 0,
            budget,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn tick(&mut self) -> Exec<()> {
        if self.steps >= self.budget {
            return Err(Stop::Diverged(self.steps));
        }
        self.steps += 1;
        Ok(())
    }

    pub fn push_frame(&mut self) {
        self.frames.push(Vec::new());
    }

    pub fn pop_frame(&mut self) {
        self.frames.pop();
    }

    pub fn bind(&mut self, name: &str, v: Value) {
        self.frames
            .last_mut()
            .expect("frame")
            .push((name.to_string(), v));
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.frames
            .iter()
            .rev()
            .flat_map(|f| f.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    fn lookup_mut(&mut self, name: &str) -> Option<&mut Value> {
        self.frames
            .iter_mut()
            .rev()
            .flat_map(|f| f.iter_mut().rev())
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }

    /// All visible variables, outermost first.
    pub fn snapshot(&self) -> Vec<(String, Value)> {
        let mut out: Vec<(String, Value)> = Vec::new();
        for (n, v) in self.frames.iter().flatten() {
            match out.iter_mut().find(|(m, _)| m == n) {
                Some(slot) => slot.1 = v.clone(),
                None => out.push((n.clone(), v.clone())),
            }
        }
        out
    }

    pub fn exec_block(&mut self, stmts: &[Stmt]) -> Exec<()> {
        self.push_frame();
        let r = stmts.iter().try_for_each(|s| self.exec(s).map(|_| ()));
        self.pop_frame();
        r
    }

    /// Runs one statement; yields the returned value for `return`.
    pub fn exec(&mut self, s: &Stmt) -> Exec<Option<Value>> {
        match &s.kind {
            StmtKind::Var { name, init, .. } => {
                let v = self.eval(init)?;
                self.bind(name, v);
            }
            StmtKind::Assign {
                name,
                indices,
                value,
            } => self.assign(s.span, name, indices, value)?,
            StmtKind::For {
                var,
                iterable,
                body,
            } => {
                let xs = match self.eval(iterable)? {
                    Value::Array(xs) => xs,
                    _ => return err(ErrorKind::GuardNonBool, iterable.span),
                };
                for x in xs {
                    self.tick()?;
                    self.push_frame();
                    self.bind(var, x);
                    let r = self.exec_block(body);
                    self.pop_frame();
                    r?;
                }
            }
            StmtKind::While { cond, body } => loop {
                if !self.guard(cond)? {
                    break;
                }
                self.tick()?;
                self.exec_block(body)?;
            },
            StmtKind::Return(e) => return Ok(Some(self.eval(e)?)),
        }
        Ok(None)
    }

    pub fn guard(&mut self, cond: &Expr) -> Exec<bool> {
        match self.eval(cond)? {
            Value::Bool(b) => Ok(b),
            _ => err(ErrorKind::GuardNonBool, cond.span),
        }
    }

    fn assign(&mut self, span: Span, name: &str, indices: &[Expr], value: &Expr) -> Exec<()> {
        if indices.is_empty() {
            let v = self.eval(value)?;
            *self.lookup_mut(name).expect("checked variable") = v;
            return Ok(());
        }
        // Indices are evaluated and bounds-checked outermost first, then the
        // right-hand side, matching the nested `update` of the translation.
        let mut idx = Vec::with_capacity(indices.len());
        for (k, i) in indices.iter().enumerate() {
            let iv = self.eval(i)?;
            if k + 1 < indices.len() {
                let mut cur = self.lookup(name).expect("checked variable");
                for prev in &idx {
                    cur = &cur.as_array().expect("array")[index_of(prev)];
                }
                if let Err(kind) = prims::index(cur, &iv) {
                    return err(kind, i.span);
                }
            }
            idx.push(iv);
        }
        let v = self.eval(value)?;
        let mut slot = self.lookup_mut(name).expect("checked variable");
        let (last, init) = idx.split_last().unwrap();
        for i in init {
            slot = prims::element_mut(slot, i).map_err(|k| Stop::Error(RuntimeError::at(k, span)))?;
        }
        prims::update_in_place(slot, last, v).map_err(|k| Stop::Error(RuntimeError::at(k, span)))
    }

    /// Evaluates an expression, widening it to `Rat` where the type checker
    /// asked for it.
    pub fn eval(&mut self, e: &Expr) -> Exec<Value> {
        let v = self.eval_natural(e)?;
        Ok(if self.table.widened(e.id) { v.to_rat() } else { v })
    }

    fn prim(&self, r: Result<Value, ErrorKind>, span: Span) -> Exec<Value> {
        r.map_err(|k| Stop::Error(RuntimeError::at(k, span)))
    }

    fn eval_natural(&mut self, e: &Expr) -> Exec<Value> {
        match &e.kind {
            ExprKind::Var(n) => Ok(self.lookup(n).expect("checked variable").clone()),
            ExprKind::Int(n) => Ok(Value::Int(n.clone())),
            ExprKind::Rat(r) => Ok(Value::Rat(r.clone())),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Unary(op, a) => {
                let v = self.eval(a)?;
                let r = match op {
                    UnOp::Neg => prims::neg(&v),
                    UnOp::Not => prims::not(&v),
                };
                self.prim(r, e.span)
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
                let x = match self.eval(a)? {
                    Value::Bool(x) => x,
                    _ => return err(ErrorKind::GuardNonBool, a.span),
                };
                if (*op == BinOp::And) != x {
                    return Ok(Value::Bool(x));
                }
                match self.eval(b)? {
                    Value::Bool(y) => Ok(Value::Bool(y)),
                    _ => err(ErrorKind::GuardNonBool, b.span),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                self.prim(prims::binary(*op, &x, &y), e.span)
            }
            ExprKind::Index(a, i) => {
                let x = self.eval(a)?;
                let k = self.eval(i)?;
                self.prim(prims::index(&x, &k), e.span)
            }
            ExprKind::Pair(a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                Ok(Value::pair(x, y))
            }
            ExprKind::Array(es) => {
                let mut out = Vec::with_capacity(es.len());
                for x in es {
                    out.push(self.eval(x)?);
                }
                Ok(Value::Array(out))
            }
            ExprKind::Lambda(..) => unreachable!("lambdas only occur as builtin arguments"),
            ExprKind::Call(b, args) => self.call(e, *b, args),
            ExprKind::Forall(binders, body) => self.forall(binders, 0, body),
        }
    }

    fn forall(&mut self, binders: &[ForallBinder], k: usize, body: &Expr) -> Exec<Value> {
        if k == binders.len() {
            return self.eval(body);
        }
        let b = &binders[k];
        let range = match forall_range(b, body) {
            Some(r) => r,
            None => return err(ErrorKind::IndexOutOfBounds, body.span),
        };
        let n = match self.eval(range)? {
            Value::Array(xs) => xs.len(),
            _ => return err(ErrorKind::GuardNonBool, range.span),
        };
        for i in 0..n {
            self.push_frame();
            self.bind(&b.name, Value::int(i as i64));
            let r = self.forall(binders, k + 1, body);
            self.pop_frame();
            if r? != Value::Bool(true) {
                return Ok(Value::Bool(false));
            }
        }
        Ok(Value::Bool(true))
    }

    /// Applies a builtin's lambda argument to already evaluated values.
    fn apply(&mut self, f: &Expr, args: Vec<Value>) -> Exec<Value> {
        let ExprKind::Lambda(params, body) = &f.kind else {
            unreachable!("checked lambda argument")
        };
        let vals = if args.len() == params.len() {
            args
        } else {
            let v = args.into_iter().next().expect("argument");
            prims::split_pair(v, params.len())
                .map_err(|k| Stop::Error(RuntimeError::at(k, f.span)))?
        };
        self.push_frame();
        for (p, v) in params.iter().zip(vals) {
            self.bind(&p.name, v);
        }
        let r = self.eval(body);
        self.pop_frame();
        r
    }

    fn fold(&mut self, f: &Expr, init: Value, xs: Vec<Value>) -> Exec<Value> {
        let mut acc = init;
        for x in xs {
            acc = self.apply(f, vec![acc, x])?;
        }
        Ok(acc)
    }

    fn array(&mut self, e: &Expr) -> Exec<Vec<Value>> {
        match self.eval(e)? {
            Value::Array(xs) => Ok(xs),
            _ => err(ErrorKind::GuardNonBool, e.span),
        }
    }

    fn call(&mut self, e: &Expr, b: Builtin, args: &[Expr]) -> Exec<Value> {
        let span = e.span;
        match b {
            Builtin::Map | Builtin::FlatMap => {
                let xs = self.array(&args[1])?;
                let mut out = Vec::with_capacity(xs.len());
                for x in xs {
                    out.push(self.apply(&args[0], vec![x])?);
                }
                let out = Value::Array(out);
                if b == Builtin::FlatMap {
                    self.prim(prims::concat(&out), span)
                } else {
                    Ok(out)
                }
            }
            Builtin::Fold => {
                let init = self.eval(&args[1])?;
                let xs = self.array(&args[2])?;
                self.fold(&args[0], init, xs)
            }
            Builtin::ReduceByKey => {
                let init = self.eval(&args[1])?;
                let kv = self.eval(&args[2])?;
                let groups = match self.prim(prims::group(&kv), span)? {
                    Value::Array(gs) => gs,
                    _ => unreachable!(),
                };
                let mut out = Vec::with_capacity(groups.len());
                for g in groups {
                    let Value::Pair(k, vs) = g else { unreachable!() };
                    let Value::Array(vs) = *vs else { unreachable!() };
                    let r = self.fold(&args[0], init.clone(), vs)?;
                    out.push(Value::pair(*k, r));
                }
                Ok(Value::Array(out))
            }
            _ => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                let r = match b {
                    Builtin::Length => prims::length(&vals[0]),
                    Builtin::Replicate => prims::replicate(&vals[0], vals[1].clone()),
                    Builtin::Range => prims::range(&vals[0], &vals[1]),
                    Builtin::Zip => prims::zip(&vals[0], &vals[1]),
                    Builtin::Concat => prims::concat(&vals[0]),
                    Builtin::Group => prims::group(&vals[0]),
                    Builtin::Fst => prims::fst(&vals[0]),
                    Builtin::Snd => prims::snd(&vals[0]),
                    Builtin::Inl => Ok(Value::Inl(Box::new(vals.pop().unwrap()))),
                    Builtin::Inr => Ok(Value::Inr(Box::new(vals.pop().unwrap()))),
                    _ => unreachable!(),
                };
                self.prim(r, span)
            }
        }
    }
}

fn index_of(v: &Value) -> usize {
    v.as_int().and_then(|n| n.to_usize()).expect("checked index")
}

/// The array whose indices a quantifier ranges over: the explicit range, or
/// else the first `a[name]` in the body.
pub fn forall_range<'a>(b: &'a ForallBinder, body: &'a Expr) -> Option<&'a Expr> {
    if let Some(r) = &b.range {
        return Some(r);
    }
    let mut found = None;
    body.walk(&mut |e| {
        if found.is_some() {
            return;
        }
        if let ExprKind::Index(a, i) = &e.kind {
            if matches!(&i.kind, ExprKind::Var(n) if *n == b.name) {
                found = Some(&**a);
            }
        }
    });
    found
}

/// Runs a checked program on arguments of its parameter types.
pub fn interpret_il(p: &TypedProgram, args: &[Value], budget: u64) -> Outcome {
    let mut m = Machine::new(&p.table, budget);
    for (param, v) in p.program.params.iter().zip(args) {
        m.bind(&param.name, v.clone());
    }
    for s in &p.program.body {
        match m.exec(s) {
            Ok(Some(v)) => return Outcome::Val(v),
            Ok(None) => {}
            Err(stop) => return stop.into_outcome(),
        }
    }
    unreachable!("checked programs end with return")
}
