//! The imperative input language: lexer, parser, type checker,
//! pretty-printer and a reference interpreter.

use std::fmt;

pub mod ast;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod typeck;

pub use ast::{Expr, ExprKind, IlProgram, IlType, Span, Stmt, StmtKind};
pub use interp::{interpret_il, Machine, Stop};
pub use parser::{parse_expr, parse_expr_list, parse_program, parse_type};
pub use pretty::{print_expr, print_program};
pub use typeck::{typecheck_expr, typecheck_program, Binding, TypeError, TypeTable, TypedProgram};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Errors from loading one IL source, rendered as `file:line:col: message`.
#[derive(Clone, Debug)]
pub enum FrontendError {
    Parse(ParseError),
    Type(Vec<TypeError>),
}

impl FrontendError {
    pub fn render(&self, file: &str) -> String {
        match self {
            FrontendError::Parse(e) => format!("{file}:{e}"),
            FrontendError::Type(es) => es
                .iter()
                .map(|e| format!("{file}:{e}"))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }
}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("<input>"))
    }
}

/// Parses and type checks in one go.
pub fn load(src: &str) -> Result<TypedProgram, FrontendError> {
    let p = parse_program(src).map_err(FrontendError::Parse)?;
    typecheck_program(&p).map_err(FrontendError::Type)
}

/// Evaluates a comma-separated list of IL literals, such as
/// `[[1],[0]], 1/2, 3`, as arguments of `p`.
pub fn parse_args(text: &str, p: &TypedProgram, budget: u64) -> Result<Vec<crate::value::Value>, String> {
    let exprs = parse_expr_list(text).map_err(|e| e.to_string())?;
    let tys = p.param_types();
    if exprs.len() != tys.len() {
        return Err(format!("expected {} arguments, got {}", tys.len(), exprs.len()));
    }
    exprs
        .iter()
        .zip(&tys)
        .map(|(e, t)| {
            let (_, table) = typecheck_expr(e, &[], Some(t))
                .map_err(|es| es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))?;
            Machine::new(&table, budget)
                .eval(e)
                .map_err(|s| s.into_outcome().to_string())
        })
        .collect()
}
