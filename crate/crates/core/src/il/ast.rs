use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

pub type ExprId = usize;
pub type StmtId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IlType {
    Int,
    Rat,
    Bool,
    Array(Box<IlType>),
    Pair(Box<IlType>, Box<IlType>),
    Sum(Box<IlType>, Box<IlType>),
    Fun(Vec<IlType>, Box<IlType>),
}

impl IlType {
    pub fn array(t: IlType) -> IlType {
        IlType::Array(Box::new(t))
    }

    pub fn pair(a: IlType, b: IlType) -> IlType {
        IlType::Pair(Box::new(a), Box::new(b))
    }

    pub fn elem(&self) -> Option<&IlType> {
        match self {
            IlType::Array(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, IlType::Int | IlType::Rat)
    }

    /// True when no function type occurs anywhere inside.
    pub fn is_first_order(&self) -> bool {
        match self {
            IlType::Int | IlType::Rat | IlType::Bool => true,
            IlType::Array(t) => t.is_first_order(),
            IlType::Pair(a, b) | IlType::Sum(a, b) => a.is_first_order() && b.is_first_order(),
            IlType::Fun(..) => false,
        }
    }
}

impl fmt::Display for IlType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `+` binds loosest, then `*`; both associate to the right.
        fn go(t: &IlType, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                IlType::Int => f.write_str("Int"),
                IlType::Rat => f.write_str("Rat"),
                IlType::Bool => f.write_str("Bool"),
                IlType::Array(e) => {
                    f.write_str("[")?;
                    go(e, 0, f)?;
                    f.write_str("]")
                }
                IlType::Sum(a, b) => {
                    if prec > 0 {
                        f.write_str("(")?;
                    }
                    go(a, 1, f)?;
                    f.write_str(" + ")?;
                    go(b, 0, f)?;
                    if prec > 0 {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                IlType::Pair(a, b) => {
                    if prec > 1 {
                        f.write_str("(")?;
                    }
                    go(a, 2, f)?;
                    f.write_str(" * ")?;
                    go(b, 1, f)?;
                    if prec > 1 {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                IlType::Fun(ps, r) => {
                    f.write_str("(")?;
                    for (i, p) in ps.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        go(p, 0, f)?;
                    }
                    f.write_str(") => ")?;
                    go(r, 0, f)
                }
            }
        }
        go(self, 0, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }

    pub fn is_order(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    /// Binding strength used by both the parser and the pretty-printer.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Replicate,
    Range,
    Zip,
    Map,
    Fst,
    Snd,
    Group,
    Concat,
    FlatMap,
    ReduceByKey,
    Length,
    Fold,
    Inl,
    Inr,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "replicate" => Builtin::Replicate,
            "range" => Builtin::Range,
            "zip" => Builtin::Zip,
            "map" => Builtin::Map,
            "fst" => Builtin::Fst,
            "snd" => Builtin::Snd,
            "group" => Builtin::Group,
            "concat" => Builtin::Concat,
            "flatMap" => Builtin::FlatMap,
            "reduceByKey" => Builtin::ReduceByKey,
            "length" => Builtin::Length,
            "fold" => Builtin::Fold,
            "inl" => Builtin::Inl,
            "inr" => Builtin::Inr,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Replicate => "replicate",
            Builtin::Range => "range",
            Builtin::Zip => "zip",
            Builtin::Map => "map",
            Builtin::Fst => "fst",
            Builtin::Snd => "snd",
            Builtin::Group => "group",
            Builtin::Concat => "concat",
            Builtin::FlatMap => "flatMap",
            Builtin::ReduceByKey => "reduceByKey",
            Builtin::Length => "length",
            Builtin::Fold => "fold",
            Builtin::Inl => "inl",
            Builtin::Inr => "inr",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Fst
            | Builtin::Snd
            | Builtin::Group
            | Builtin::Concat
            | Builtin::Length
            | Builtin::Inl
            | Builtin::Inr => 1,
            Builtin::Replicate | Builtin::Range | Builtin::Zip | Builtin::Map | Builtin::FlatMap => 2,
            Builtin::ReduceByKey | Builtin::Fold => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: String,
    pub ty: IlType,
    pub span: Span,
}

/// Ignores the span, like expression equality.
impl PartialEq for Param {
    fn eq(&self, other: &Param) -> bool {
        self.name == other.name && self.ty == other.ty
    }
}

/// One bound variable of a `forall` in a coupling predicate. Without an
/// explicit range the checker derives it from the first `a[name]` in the body.
#[derive(Clone, Debug, PartialEq)]
pub struct ForallBinder {
    pub name: String,
    pub range: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Var(String),
    Int(BigInt),
    /// A literal written with a trailing dot, such as `1.`.
    Rat(BigRational),
    Bool(bool),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Array(Vec<Expr>),
    Lambda(Vec<Param>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
    /// Only accepted inside coupling predicates.
    Forall(Vec<ForallBinder>, Box<Expr>),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub id: ExprId,
    pub span: Span,
    pub kind: ExprKind,
}

/// Structural equality that ignores node ids and spans.
impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug)]
pub enum StmtKind {
    Var {
        name: String,
        ty: Option<IlType>,
        init: Expr,
    },
    /// `name[i1]...[ik] := value`; an empty index list is a plain assignment.
    Assign {
        name: String,
        indices: Vec<Expr>,
        value: Expr,
    },
    For {
        var: String,
        iterable: Expr,
        body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Expr),
}

#[derive(Clone, Debug)]
pub struct Stmt {
    pub id: StmtId,
    pub span: Span,
    pub kind: StmtKind,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Stmt) -> bool {
        use StmtKind::*;
        match (&self.kind, &other.kind) {
            (
                Var { name, ty, init },
                Var {
                    name: n2,
                    ty: t2,
                    init: i2,
                },
            ) => name == n2 && ty == t2 && init == i2,
            (
                Assign {
                    name,
                    indices,
                    value,
                },
                Assign {
                    name: n2,
                    indices: i2,
                    value: v2,
                },
            ) => name == n2 && indices == i2 && value == v2,
            (
                For {
                    var,
                    iterable,
                    body,
                },
                For {
                    var: v2,
                    iterable: i2,
                    body: b2,
                },
            ) => var == v2 && iterable == i2 && body == b2,
            (While { cond, body }, While { cond: c2, body: b2 }) => cond == c2 && body == b2,
            (Return(a), Return(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IlProgram {
    pub name: String,
    pub params: Vec<Param>,
    /// `None` when the source omits `-> T`; the checker infers it from the
    /// return expression.
    pub ret: Option<IlType>,
    pub body: Vec<Stmt>,
    pub span: Span,
    /// One past the largest expression id in the tree.
    pub expr_count: usize,
    pub stmt_count: usize,
}

impl PartialEq for IlProgram {
    fn eq(&self, other: &IlProgram) -> bool {
        self.name == other.name
            && self.params == other.params
            && self.ret == other.ret
            && self.body == other.body
    }
}

impl Expr {
    /// Visits this expression and all of its subexpressions in preorder.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Int(_) | ExprKind::Rat(_) | ExprKind::Bool(_) => {}
            ExprKind::Unary(_, e) => e.walk(f),
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) | ExprKind::Pair(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Array(es) | ExprKind::Call(_, es) => es.iter().for_each(|e| e.walk(f)),
            ExprKind::Lambda(_, body) => body.walk(f),
            ExprKind::Forall(bs, body) => {
                for b in bs {
                    if let Some(r) = &b.range {
                        r.walk(f);
                    }
                }
                body.walk(f);
            }
        }
    }
}

impl Stmt {
    /// Names assigned anywhere inside this statement, including nested loops.
    pub fn assigned_names(&self, out: &mut Vec<String>) {
        match &self.kind {
            StmtKind::Assign { name, .. } => {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            StmtKind::For { body, .. } | StmtKind::While { body, .. } => {
                for s in body {
                    s.assigned_names(out);
                }
            }
            StmtKind::Var { .. } | StmtKind::Return(_) => {}
        }
    }
}
