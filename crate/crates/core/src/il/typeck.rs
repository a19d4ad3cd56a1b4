//! Bidirectional type checking for IL.
//!
//! Expected types flow into literals and arithmetic so that `1 / length(xs)`
//! in a `Rat` position is rational division. Wherever an `Int` expression
//! meets an expected `Rat`, the node is marked for widening instead of being
//! rejected.

use std::fmt;

use super::ast::*;

#[derive(Clone, Debug, PartialEq)]
pub struct TypeError {
    pub span: Span,
    pub message: String,
    pub expected: Option<IlType>,
    pub actual: Option<IlType>,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BindingKind {
    Param,
    Local,
    LoopVar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub name: String,
    pub ty: IlType,
    pub kind: BindingKind,
}

/// Per-expression type information produced by the checker.
#[derive(Clone, Debug, Default)]
pub struct TypeTable {
    types: Vec<Option<IlType>>,
    widen: Vec<bool>,
}

impl TypeTable {
    pub fn with_capacity(n: usize) -> Self {
        TypeTable {
            types: vec![None; n],
            widen: vec![false; n],
        }
    }

    fn ensure(&mut self, id: ExprId) {
        if id >= self.types.len() {
            self.types.resize(id + 1, None);
            self.widen.resize(id + 1, false);
        }
    }

    fn set(&mut self, id: ExprId, t: IlType) {
        self.ensure(id);
        self.types[id] = Some(t);
    }

    fn mark_widen(&mut self, id: ExprId) {
        self.ensure(id);
        self.widen[id] = true;
    }

    /// The type the expression synthesizes before any widening.
    pub fn natural(&self, id: ExprId) -> Option<&IlType> {
        self.types.get(id).and_then(|t| t.as_ref())
    }

    /// True when the node's `Int` value is widened to `Rat` where it is used.
    pub fn widened(&self, id: ExprId) -> bool {
        self.widen.get(id).copied().unwrap_or(false)
    }

    /// The type of the value the node delivers to its context.
    pub fn effective(&self, id: ExprId) -> Option<IlType> {
        if self.widened(id) {
            Some(IlType::Rat)
        } else {
            self.natural(id).cloned()
        }
    }
}

#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: IlProgram,
    pub table: TypeTable,
    pub ret: IlType,
    /// Variables in scope before each statement, in declaration order,
    /// indexed by statement id.
    pub scopes: Vec<Vec<Binding>>,
    /// Declared type of each `var` statement and element type of each `for`
    /// loop variable, indexed by statement id.
    pub decl_types: Vec<Option<IlType>>,
}

impl TypedProgram {
    pub fn param_types(&self) -> Vec<IlType> {
        self.program.params.iter().map(|p| p.ty.clone()).collect()
    }

    pub fn type_of(&self, e: &Expr) -> Option<IlType> {
        self.table.effective(e.id)
    }

    /// Variables visible right after `stmt` completes, not counting those
    /// that go out of scope with it.
    pub fn scope_after(&self, stmt: &Stmt) -> Vec<Binding> {
        let mut s = self.scopes[stmt.id].clone();
        if let StmtKind::Var { name, .. } = &stmt.kind {
            if let Some(t) = &self.decl_types[stmt.id] {
                s.push(Binding {
                    name: name.clone(),
                    ty: t.clone(),
                    kind: BindingKind::Local,
                });
            }
        }
        s
    }
}

pub fn typecheck_program(p: &IlProgram) -> Result<TypedProgram, Vec<TypeError>> {
    let mut c = Checker::new(p.expr_count, p.stmt_count);
    let mut frame = Vec::new();
    for (i, param) in p.params.iter().enumerate() {
        if p.params[..i].iter().any(|q| q.name == param.name) {
            c.error(param.span, format!("duplicate parameter `{}`", param.name));
        }
        if !param.ty.is_first_order() {
            c.error(param.span, "parameters must have first-order types".into());
        }
        frame.push(Binding {
            name: param.name.clone(),
            ty: param.ty.clone(),
            kind: BindingKind::Param,
        });
    }
    c.frames.push(frame);

    let mut ret = None;
    match p.body.last() {
        Some(Stmt {
            kind: StmtKind::Return(_),
            ..
        }) => {}
        _ => c.error(p.span, "function body must end with a return statement".into()),
    }
    let n = p.body.len();
    for (i, s) in p.body.iter().enumerate() {
        if let StmtKind::Return(e) = &s.kind {
            if i + 1 != n {
                c.error(s.span, "return must be the last statement".into());
            }
            c.record_scope(s.id);
            if let Some(t) = c.check(e, p.ret.as_ref()) {
                if let Some(declared) = &p.ret {
                    if &t != declared {
                        c.mismatch(e.span, declared, &t);
                    }
                }
                ret = Some(p.ret.clone().unwrap_or(t));
            }
        } else {
            c.stmt(s);
        }
    }

    if c.errors.is_empty() {
        Ok(TypedProgram {
            program: p.clone(),
            table: c.table,
            ret: ret.expect("return type"),
            scopes: c.scopes,
            decl_types: c.decl_types,
        })
    } else {
        Err(c.errors)
    }
}

/// Type checks a standalone expression against a variable environment.
pub fn typecheck_expr(
    e: &Expr,
    env: &[Binding],
    expected: Option<&IlType>,
) -> Result<(IlType, TypeTable), Vec<TypeError>> {
    let mut c = Checker::new(0, 0);
    c.frames.push(env.to_vec());
    let t = c.check(e, expected);
    match t {
        Some(t) if c.errors.is_empty() => {
            if let Some(x) = expected {
                if &t != x {
                    c.mismatch(e.span, x, &t);
                    return Err(c.errors);
                }
            }
            Ok((t, c.table))
        }
        _ => Err(c.errors),
    }
}

struct Checker {
    table: TypeTable,
    errors: Vec<TypeError>,
    frames: Vec<Vec<Binding>>,
    scopes: Vec<Vec<Binding>>,
    decl_types: Vec<Option<IlType>>,
}

/// How a builtin feeds values into a lambda argument.
enum Feed<'a> {
    /// One value per call; with several parameters the value is split into
    /// right-nested pair components.
    One(&'a IlType),
    /// An accumulator and an element, as in `fold`.
    Two(&'a IlType),
}

impl Checker {
    fn new(exprs: usize, stmts: usize) -> Self {
        Checker {
            table: TypeTable::with_capacity(exprs),
            errors: Vec::new(),
            frames: Vec::new(),
            scopes: vec![Vec::new(); stmts],
            decl_types: vec![None; stmts],
        }
    }

    fn error(&mut self, span: Span, message: String) {
        self.errors.push(TypeError {
            span,
            message,
            expected: None,
            actual: None,
        });
    }

    fn mismatch(&mut self, span: Span, expected: &IlType, actual: &IlType) {
        self.errors.push(TypeError {
            span,
            message: format!("{actual} where {expected} expected"),
            expected: Some(expected.clone()),
            actual: Some(actual.clone()),
        });
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.frames
            .iter()
            .rev()
            .flat_map(|f| f.iter().rev())
            .find(|b| b.name == name)
    }

    fn record_scope(&mut self, id: StmtId) {
        let flat: Vec<Binding> = self.frames.iter().flatten().cloned().collect();
        if id < self.scopes.len() {
            self.scopes[id] = flat;
        }
    }

    fn declare(&mut self, span: Span, name: &str, ty: IlType, kind: BindingKind) {
        if let Some(b) = self.lookup(name) {
            let what = match b.kind {
                BindingKind::Param => "parameter",
                _ => "variable",
            };
            self.error(span, format!("`{name}` shadows an existing {what}"));
        }
        self.frames.last_mut().unwrap().push(Binding {
            name: name.to_string(),
            ty,
            kind,
        });
    }

    fn block(&mut self, stmts: &[Stmt]) {
        self.frames.push(Vec::new());
        for s in stmts {
            self.stmt(s);
        }
        self.frames.pop();
    }

    fn stmt(&mut self, s: &Stmt) {
        self.record_scope(s.id);
        match &s.kind {
            StmtKind::Var { name, ty, init } => {
                let t = self.check(init, ty.as_ref());
                let decl = match (ty, t) {
                    (Some(d), Some(t)) => {
                        if *d != t {
                            self.mismatch(init.span, d, &t);
                        }
                        Some(d.clone())
                    }
                    (Some(d), None) => Some(d.clone()),
                    (None, t) => t,
                };
                if let Some(d) = &decl {
                    if !d.is_first_order() {
                        self.error(s.span, "locals must have first-order types".into());
                    }
                }
                self.decl_types[s.id] = decl.clone();
                // Declare even on error so later uses do not cascade.
                let d = decl.unwrap_or(IlType::Int);
                self.declare(s.span, name, d, BindingKind::Local);
            }
            StmtKind::Assign {
                name,
                indices,
                value,
            } => {
                let target = match self.lookup(name) {
                    None => {
                        self.error(s.span, format!("assignment to undeclared variable `{name}`"));
                        None
                    }
                    Some(b) if b.kind == BindingKind::LoopVar => {
                        self.error(
                            s.span,
                            format!("loop variable `{name}` cannot be assigned inside its loop"),
                        );
                        None
                    }
                    Some(b) => Some(b.ty.clone()),
                };
                let mut target = target;
                for idx in indices {
                    if let Some(t) = self.check(idx, Some(&IlType::Int)) {
                        if t != IlType::Int {
                            self.mismatch(idx.span, &IlType::Int, &t);
                        }
                    }
                    target = match target {
                        Some(IlType::Array(e)) => Some(*e),
                        Some(other) => {
                            self.error(idx.span, format!("indexing a value of type {other}"));
                            None
                        }
                        None => None,
                    };
                }
                let v = self.check(value, target.as_ref());
                if let (Some(t), Some(v)) = (&target, &v) {
                    if t != v {
                        self.mismatch(value.span, t, v);
                    }
                }
            }
            StmtKind::For {
                var,
                iterable,
                body,
            } => {
                let elem = match self.check(iterable, None) {
                    Some(IlType::Array(e)) => Some(*e),
                    Some(other) => {
                        self.error(iterable.span, format!("for loop over non-array type {other}"));
                        None
                    }
                    None => None,
                };
                self.decl_types[s.id] = elem.clone();
                self.frames.push(Vec::new());
                self.declare(s.span, var, elem.unwrap_or(IlType::Int), BindingKind::LoopVar);
                self.block(body);
                self.frames.pop();
            }
            StmtKind::While { cond, body } => {
                if let Some(t) = self.check(cond, Some(&IlType::Bool)) {
                    if t != IlType::Bool {
                        self.mismatch(cond.span, &IlType::Bool, &t);
                    }
                }
                self.block(body);
            }
            StmtKind::Return(e) => {
                self.error(s.span, "return is only allowed as the last top-level statement".into());
                self.check(e, None);
            }
        }
    }

    /// Checks `e` against an optional expected type and returns the type it
    /// delivers (after widening).
    fn check(&mut self, e: &Expr, expected: Option<&IlType>) -> Option<IlType> {
        let t = self.synth(e, expected)?;
        self.table.set(e.id, t.clone());
        if t == IlType::Int && expected == Some(&IlType::Rat) {
            self.table.mark_widen(e.id);
            return Some(IlType::Rat);
        }
        Some(t)
    }

    fn numeric(&mut self, e: &Expr, t: &IlType) -> bool {
        if t.is_numeric() {
            true
        } else {
            self.error(e.span, format!("{t} where Int or Rat expected"));
            false
        }
    }

    fn synth(&mut self, e: &Expr, expected: Option<&IlType>) -> Option<IlType> {
        match &e.kind {
            ExprKind::Var(name) => match self.lookup(name) {
                Some(b) => Some(b.ty.clone()),
                None => {
                    self.error(e.span, format!("unknown variable `{name}`"));
                    None
                }
            },
            ExprKind::Int(_) => Some(IlType::Int),
            ExprKind::Rat(_) => Some(IlType::Rat),
            ExprKind::Bool(_) => Some(IlType::Bool),
            ExprKind::Unary(UnOp::Neg, a) => {
                let hint = expected.filter(|t| **t == IlType::Rat);
                let t = self.check(a, hint)?;
                self.numeric(a, &t).then_some(t)
            }
            ExprKind::Unary(UnOp::Not, a) => {
                let t = self.check(a, Some(&IlType::Bool))?;
                if t != IlType::Bool {
                    self.mismatch(a.span, &IlType::Bool, &t);
                    return None;
                }
                Some(IlType::Bool)
            }
            ExprKind::Binary(op, a, b) => self.binary(*op, a, b, expected),
            ExprKind::Index(a, i) => {
                let ta = self.check(a, None);
                let ti = self.check(i, Some(&IlType::Int));
                if let Some(ti) = &ti {
                    if *ti != IlType::Int {
                        self.mismatch(i.span, &IlType::Int, ti);
                    }
                }
                match ta? {
                    IlType::Array(t) => Some(*t),
                    other => {
                        self.error(a.span, format!("indexing a value of type {other}"));
                        None
                    }
                }
            }
            ExprKind::Pair(a, b) => {
                let (ha, hb) = match expected {
                    Some(IlType::Pair(x, y)) => (Some(&**x), Some(&**y)),
                    _ => (None, None),
                };
                let ta = self.check(a, ha);
                let tb = self.check(b, hb);
                Some(IlType::pair(ta?, tb?))
            }
            ExprKind::Array(es) => {
                let mut elem = expected.and_then(|t| t.elem()).cloned();
                if es.is_empty() && elem.is_none() {
                    self.error(e.span, "cannot infer the element type of an empty array".into());
                    return None;
                }
                let mut ok = true;
                for x in es {
                    match (self.check(x, elem.as_ref()), &elem) {
                        (Some(t), Some(want)) if t != *want => {
                            self.mismatch(x.span, want, &t);
                            ok = false;
                        }
                        (Some(t), None) => elem = Some(t),
                        (None, _) => ok = false,
                        _ => {}
                    }
                }
                ok.then(|| IlType::array(elem.unwrap()))
            }
            ExprKind::Lambda(..) => {
                self.error(e.span, "lambdas may only appear as builtin arguments".into());
                None
            }
            ExprKind::Call(b, args) => self.call(e, *b, args, expected),
            ExprKind::Forall(binders, body) => {
                self.frames.push(Vec::new());
                for bnd in binders {
                    if let Some(r) = &bnd.range {
                        match self.check(r, None) {
                            Some(IlType::Array(_)) | None => {}
                            Some(other) => {
                                self.error(r.span, format!("quantifier range over non-array type {other}"));
                            }
                        }
                    }
                    self.frames.last_mut().unwrap().push(Binding {
                        name: bnd.name.clone(),
                        ty: IlType::Int,
                        kind: BindingKind::LoopVar,
                    });
                }
                let t = self.check(body, Some(&IlType::Bool));
                self.frames.pop();
                match t? {
                    IlType::Bool => Some(IlType::Bool),
                    other => {
                        self.mismatch(body.span, &IlType::Bool, &other);
                        None
                    }
                }
            }
        }
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, expected: Option<&IlType>) -> Option<IlType> {
        if op.is_arith() {
            let hint = expected.filter(|t| **t == IlType::Rat);
            let ta = self.check(a, hint);
            let tb = self.check(b, hint);
            let (ta, tb) = (ta?, tb?);
            if !self.numeric(a, &ta) || !self.numeric(b, &tb) {
                return None;
            }
            return Some(match (ta, tb) {
                (IlType::Int, IlType::Int) => IlType::Int,
                (IlType::Int, _) => {
                    self.table.mark_widen(a.id);
                    IlType::Rat
                }
                (_, IlType::Int) => {
                    self.table.mark_widen(b.id);
                    IlType::Rat
                }
                _ => IlType::Rat,
            });
        }
        match op {
            BinOp::And | BinOp::Or => {
                for x in [a, b] {
                    let t = self.check(x, Some(&IlType::Bool))?;
                    if t != IlType::Bool {
                        self.mismatch(x.span, &IlType::Bool, &t);
                        return None;
                    }
                }
                Some(IlType::Bool)
            }
            _ => {
                let ta = self.check(a, None)?;
                let tb = self.check(b, Some(&ta))?;
                if op.is_order() && (!self.numeric(a, &ta) || !self.numeric(b, &tb)) {
                    return None;
                }
                match (&ta, &tb) {
                    (IlType::Int, IlType::Rat) => self.table.mark_widen(a.id),
                    (IlType::Rat, IlType::Int) => self.table.mark_widen(b.id),
                    _ if ta != tb => {
                        self.mismatch(b.span, &ta, &tb);
                        return None;
                    }
                    _ => {}
                }
                if !ta.is_first_order() {
                    self.error(a.span, "only first-order values can be compared".into());
                    return None;
                }
                Some(IlType::Bool)
            }
        }
    }

    fn expect_array(&mut self, e: &Expr, hint: Option<&IlType>) -> Option<IlType> {
        match self.check(e, hint)? {
            IlType::Array(t) => Some(*t),
            other => {
                self.error(e.span, format!("{other} where an array expected"));
                None
            }
        }
    }

    fn expect_int(&mut self, e: &Expr) -> Option<()> {
        let t = self.check(e, Some(&IlType::Int))?;
        if t != IlType::Int {
            self.mismatch(e.span, &IlType::Int, &t);
            return None;
        }
        Some(())
    }

    fn call(&mut self, e: &Expr, b: Builtin, args: &[Expr], expected: Option<&IlType>) -> Option<IlType> {
        let exp_elem = expected.and_then(|t| t.elem());
        match b {
            Builtin::Length => {
                self.expect_array(&args[0], None)?;
                Some(IlType::Int)
            }
            Builtin::Replicate => {
                let n = self.expect_int(&args[0]);
                let t = self.check(&args[1], exp_elem);
                n?;
                Some(IlType::array(t?))
            }
            Builtin::Range => {
                let a = self.expect_int(&args[0]);
                let c = self.expect_int(&args[1]);
                a?;
                c?;
                Some(IlType::array(IlType::Int))
            }
            Builtin::Zip => {
                let (ha, hb) = match exp_elem {
                    Some(IlType::Pair(x, y)) => (Some(IlType::array((**x).clone())), Some(IlType::array((**y).clone()))),
                    _ => (None, None),
                };
                let ta = self.expect_array(&args[0], ha.as_ref());
                let tb = self.expect_array(&args[1], hb.as_ref());
                Some(IlType::array(IlType::pair(ta?, tb?)))
            }
            Builtin::Map => {
                let a = self.expect_array(&args[1], None)?;
                let r = self.lambda(&args[0], Feed::One(&a), exp_elem)?;
                Some(IlType::array(r))
            }
            Builtin::FlatMap => {
                let a = self.expect_array(&args[1], None)?;
                let r = self.lambda(&args[0], Feed::One(&a), expected)?;
                match r {
                    IlType::Array(_) => Some(r),
                    other => {
                        self.error(args[0].span, format!("flatMap function returns {other}, not an array"));
                        None
                    }
                }
            }
            Builtin::Fold => {
                let a = self.expect_array(&args[2], None)?;
                let acc = self.lambda(&args[0], Feed::Two(&a), expected)?;
                let ti = self.check(&args[1], Some(&acc))?;
                if ti != acc {
                    self.mismatch(args[1].span, &acc, &ti);
                    return None;
                }
                Some(acc)
            }
            Builtin::ReduceByKey => {
                let kv = self.expect_array(&args[2], None)?;
                let (k, v) = match kv {
                    IlType::Pair(k, v) => (*k, *v),
                    other => {
                        self.error(args[2].span, format!("reduceByKey over {other}, not key-value pairs"));
                        return None;
                    }
                };
                let acc = self.lambda(&args[0], Feed::Two(&v), Some(&v))?;
                if acc != v {
                    self.mismatch(args[0].span, &v, &acc);
                    return None;
                }
                let ti = self.check(&args[1], Some(&v))?;
                if ti != v {
                    self.mismatch(args[1].span, &v, &ti);
                    return None;
                }
                Some(IlType::array(IlType::pair(k, v)))
            }
            Builtin::Group => match self.expect_array(&args[0], None)? {
                IlType::Pair(k, v) => Some(IlType::array(IlType::pair(*k, IlType::array(*v)))),
                other => {
                    self.error(
                        args[0].span,
                        format!("group expects key-value pairs, found elements of type {other}"),
                    );
                    None
                }
            },
            Builtin::Concat => {
                let hint = expected.map(|t| IlType::array(t.clone()));
                match self.expect_array(&args[0], hint.as_ref())? {
                    IlType::Array(t) => Some(IlType::array(*t)),
                    other => {
                        self.error(args[0].span, format!("concat expects an array of arrays, found [{other}]"));
                        None
                    }
                }
            }
            Builtin::Fst | Builtin::Snd => match self.check(&args[0], None)? {
                IlType::Pair(a, c) => Some(if b == Builtin::Fst { *a } else { *c }),
                other => {
                    self.error(args[0].span, format!("{} of non-pair type {other}", b.name()));
                    None
                }
            },
            Builtin::Inl | Builtin::Inr => match expected {
                Some(IlType::Sum(l, r)) => {
                    let want = if b == Builtin::Inl { &**l } else { &**r };
                    let t = self.check(&args[0], Some(want))?;
                    if &t != want {
                        self.mismatch(args[0].span, want, &t);
                        return None;
                    }
                    Some(expected.unwrap().clone())
                }
                _ => {
                    self.error(e.span, format!("cannot infer the sum type of `{}`", b.name()));
                    None
                }
            },
        }
    }

    /// Checks a lambda argument and returns its result type.
    fn lambda(&mut self, e: &Expr, feed: Feed<'_>, result_hint: Option<&IlType>) -> Option<IlType> {
        let ExprKind::Lambda(params, body) = &e.kind else {
            self.error(e.span, "function arguments must be lambdas".into());
            return None;
        };
        for p in params {
            if !p.ty.is_first_order() {
                self.error(p.span, "lambda parameters must have first-order types".into());
                return None;
            }
        }
        let result_hint = match feed {
            Feed::One(arg) => {
                let parts = split_pair(arg, params.len());
                match parts {
                    Some(parts) => {
                        for (p, want) in params.iter().zip(&parts) {
                            if p.ty != *want {
                                self.mismatch(p.span, want, &p.ty);
                                return None;
                            }
                        }
                    }
                    None => {
                        self.error(
                            e.span,
                            format!("a {}-parameter lambda cannot take elements of type {arg}", params.len()),
                        );
                        return None;
                    }
                }
                result_hint.cloned()
            }
            Feed::Two(elem) => {
                if params.len() != 2 {
                    self.error(e.span, "this lambda must take an accumulator and an element".into());
                    return None;
                }
                if params[1].ty != *elem {
                    self.mismatch(params[1].span, elem, &params[1].ty);
                    return None;
                }
                Some(params[0].ty.clone())
            }
        };
        self.frames.push(
            params
                .iter()
                .map(|p| Binding {
                    name: p.name.clone(),
                    ty: p.ty.clone(),
                    kind: BindingKind::LoopVar,
                })
                .collect(),
        );
        // Lambda parameters may shadow locals; suppress the shadowing check by
        // putting them in their own frame.
        let r = self.check(body, result_hint.as_ref());
        self.frames.pop();
        let r = r?;
        if let (Feed::Two(_), Some(acc)) = (&feed, &result_hint) {
            if r != *acc {
                self.mismatch(body.span, acc, &r);
                return None;
            }
        }
        if !r.is_first_order() {
            self.error(body.span, "lambdas must return first-order values".into());
            return None;
        }
        self.table.set(
            e.id,
            IlType::Fun(params.iter().map(|p| p.ty.clone()).collect(), Box::new(r.clone())),
        );
        Some(r)
    }
}

/// Splits `t` into `n` right-nested pair components.
pub fn split_pair(t: &IlType, n: usize) -> Option<Vec<IlType>> {
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(vec![t.clone()]);
    }
    match t {
        IlType::Pair(a, b) => {
            let mut rest = split_pair(b, n - 1)?;
            rest.insert(0, (**a).clone());
            Some(rest)
        }
        _ => None,
    }
}
