//! Runtime values shared by the IL interpreter and the FFL evaluator.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::ffl::eval::Closure;
use crate::il::ast::Span;

#[derive(Clone, Debug)]
pub enum Value {
    Int(BigInt),
    /// Always normalized: positive denominator, coprime with the numerator.
    Rat(BigRational),
    Bool(bool),
    Unit,
    Array(Vec<Value>),
    Pair(Box<Value>, Box<Value>),
    Inl(Box<Value>),
    Inr(Box<Value>),
    Closure(Closure),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn rat(num: i64, den: i64) -> Value {
        Value::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Value]> {
        match self {
            Value::Array(xs) => Some(xs),
            _ => None,
        }
    }

    /// Widens an integer to a rational; every other value is returned as is.
    pub fn to_rat(self) -> Value {
        match self {
            Value::Int(n) => Value::Rat(BigRational::from_integer(n)),
            v => v,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        use Value::*;
        match (self, other) {
            (Int(a), Int(b)) => a == b,
            (Rat(a), Rat(b)) => a == b,
            (Bool(a), Bool(b)) => a == b,
            (Unit, Unit) => true,
            (Array(a), Array(b)) => a == b,
            (Pair(a1, a2), Pair(b1, b2)) => a1 == b1 && a2 == b2,
            (Inl(a), Inl(b)) | (Inr(a), Inr(b)) => a == b,
            _ => false,
        }
    }
}

fn fmt_rat(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}.", r.numer())
    } else if r.is_negative() {
        write!(f, "-{}/{}", r.numer().abs(), r.denom())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(r) => fmt_rat(r, f),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => write!(f, "unit"),
            Value::Array(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Inl(v) => write!(f, "inl({v})"),
            Value::Inr(v) => write!(f, "inr({v})"),
            Value::Closure(_) => write!(f, "<closure>"),
        }
    }
}

/// Renders an argument tuple as `(a, b, c)`.
pub fn render_args(args: &[Value]) -> String {
    let parts: Vec<String> = args.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorKind {
    IndexOutOfBounds,
    DivisionByZero,
    GuardNonBool,
    /// `zip` applied to arrays of different lengths.
    LengthMismatch,
    /// A negative length passed to `replicate`.
    NegativeLength,
    /// An instrumented rule obligation evaluated to false.
    ObligationViolated,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::IndexOutOfBounds => "index out of bounds",
            ErrorKind::DivisionByZero => "division by zero",
            ErrorKind::GuardNonBool => "non-boolean guard",
            ErrorKind::LengthMismatch => "zip of arrays with different lengths",
            ErrorKind::NegativeLength => "negative replicate length",
            ErrorKind::ObligationViolated => "obligation violated",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub span: Option<Span>,
}

impl RuntimeError {
    pub fn new(kind: ErrorKind) -> Self {
        RuntimeError { kind, span: None }
    }

    pub fn at(kind: ErrorKind, span: Span) -> Self {
        RuntimeError {
            kind,
            span: Some(span),
        }
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(s) => write!(f, "{}:{}: {}", s.line, s.col, self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Why execution stopped early.
#[derive(Clone, Debug)]
pub enum Stop {
    Error(RuntimeError),
    Diverged(u64),
}

impl Stop {
    pub fn into_outcome(self) -> Outcome {
        match self {
            Stop::Error(e) => Outcome::RuntimeErr(e),
            Stop::Diverged(n) => Outcome::Diverged(n),
        }
    }
}

/// Result of running a program or term under a step budget.
#[derive(Clone, Debug)]
pub enum Outcome {
    Val(Value),
    Diverged(u64),
    RuntimeErr(RuntimeError),
}

impl From<Result<Value, Stop>> for Outcome {
    fn from(r: Result<Value, Stop>) -> Outcome {
        match r {
            Ok(v) => Outcome::Val(v),
            Err(s) => s.into_outcome(),
        }
    }
}

impl Outcome {
    /// Outcome agreement used by every differential check: values must be
    /// exactly equal, divergence matches divergence regardless of step
    /// counts, and runtime errors match when their kinds agree.
    pub fn agrees_with(&self, other: &Outcome) -> bool {
        match (self, other) {
            (Outcome::Val(a), Outcome::Val(b)) => a == b,
            (Outcome::Diverged(_), Outcome::Diverged(_)) => true,
            (Outcome::RuntimeErr(a), Outcome::RuntimeErr(b)) => a.kind == b.kind,
            _ => false,
        }
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Outcome::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, Outcome::Diverged(_))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Val(v) => write!(f, "{v}"),
            Outcome::Diverged(n) => write!(f, "diverged after {n} steps"),
            Outcome::RuntimeErr(e) => write!(f, "runtime error: {e}"),
        }
    }
}
