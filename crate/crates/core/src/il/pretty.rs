use std::fmt::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::ast::*;

const PREC_UNARY: u8 = 6;
const PREC_POSTFIX: u8 = 7;

pub fn print_program(p: &IlProgram) -> String {
    let mut out = String::new();
    let params: Vec<String> = p
        .params
        .iter()
        .map(|pr| format!("{} : {}", pr.name, pr.ty))
        .collect();
    write!(out, "fn {}({})", p.name, params.join(", ")).unwrap();
    if let Some(r) = &p.ret {
        write!(out, " -> {r}").unwrap();
    }
    out.push_str(" {\n");
    print_block(&p.body, 1, &mut out);
    out.push_str("}\n");
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn print_block(stmts: &[Stmt], level: usize, out: &mut String) {
    for s in stmts {
        print_stmt(s, level, out);
    }
}

pub fn print_stmt(s: &Stmt, level: usize, out: &mut String) {
    indent(level, out);
    match &s.kind {
        StmtKind::Var { name, ty, init } => {
            match ty {
                Some(t) => write!(out, "var {name} : {t} := ").unwrap(),
                None => write!(out, "var {name} := ").unwrap(),
            }
            out.push_str(&print_expr(init));
            out.push_str(";\n");
        }
        StmtKind::Assign {
            name,
            indices,
            value,
        } => {
            out.push_str(name);
            for i in indices {
                write!(out, "[{}]", print_expr(i)).unwrap();
            }
            writeln!(out, " := {};", print_expr(value)).unwrap();
        }
        StmtKind::For {
            var,
            iterable,
            body,
        } => {
            writeln!(out, "for ({var} : {}) {{", print_expr(iterable)).unwrap();
            print_block(body, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        StmtKind::While { cond, body } => {
            writeln!(out, "while ({}) {{", print_expr(cond)).unwrap();
            print_block(body, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        StmtKind::Return(e) => {
            writeln!(out, "return {};", print_expr(e)).unwrap();
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(e, 0, &mut out);
    out
}

fn rat_literal(r: &BigRational) -> String {
    if r.is_integer() {
        return format!("{}.", r.numer());
    }
    // Parsed literals are finite decimals; anything else falls back to a
    // division of whole rationals.
    let ten = BigInt::from(10);
    let mut d = r.denom().clone();
    let mut digits = 0usize;
    for p in [2u32, 5u32] {
        let p = BigInt::from(p);
        while d.is_multiple_of(&p) {
            d /= &p;
        }
    }
    if d.is_one() {
        let mut scaled = r.abs();
        while !scaled.is_integer() {
            scaled *= BigRational::from_integer(ten.clone());
            digits += 1;
        }
        let n = scaled.to_integer().to_string();
        let n = format!("{:0>width$}", n, width = digits + 1);
        let (whole, frac) = n.split_at(n.len() - digits);
        let sign = if r.is_negative() { "-" } else { "" };
        return format!("{sign}{whole}.{frac}");
    }
    format!("({}. / {}.)", r.numer(), r.denom())
}

fn expr(e: &Expr, ctx: u8, out: &mut String) {
    match &e.kind {
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Int(n) => {
            if n.is_negative() && ctx > 0 {
                write!(out, "({n})").unwrap();
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        ExprKind::Rat(r) => {
            let s = rat_literal(r);
            if (r.is_negative() || s.starts_with('(')) && ctx > 0 {
                write!(out, "({s})").unwrap();
            } else {
                out.push_str(&s);
            }
        }
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Unary(op, a) => {
            let paren = ctx > PREC_UNARY;
            if paren {
                out.push('(');
            }
            out.push_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            });
            expr(a, PREC_UNARY, out);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Binary(op, a, b) => {
            let p = op.precedence();
            let paren = ctx > p;
            if paren {
                out.push('(');
            }
            // Comparisons are non-associative; everything else associates left.
            let left_ctx = if p == 3 { p + 1 } else { p };
            expr(a, left_ctx, out);
            write!(out, " {} ", op.symbol()).unwrap();
            expr(b, p + 1, out);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Index(a, i) => {
            expr(a, PREC_POSTFIX, out);
            out.push('[');
            expr(i, 0, out);
            out.push(']');
        }
        ExprKind::Pair(a, b) => {
            out.push('(');
            expr(a, 0, out);
            out.push_str(", ");
            expr(b, 0, out);
            out.push(')');
        }
        ExprKind::Array(es) => {
            out.push('[');
            for (i, x) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(x, 0, out);
            }
            out.push(']');
        }
        ExprKind::Lambda(params, body) => {
            let paren = ctx > 0;
            if paren {
                out.push('(');
            }
            for p in params {
                write!(out, "({} : {}) ", p.name, p.ty).unwrap();
            }
            out.push_str("=> ");
            expr(body, 0, out);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Call(b @ (Builtin::Fst | Builtin::Snd), args) => {
            let paren = ctx > PREC_UNARY;
            if paren {
                out.push('(');
            }
            write!(out, "{} ", b.name()).unwrap();
            expr(&args[0], PREC_UNARY, out);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Call(b, args) => {
            out.push_str(b.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(a, 0, out);
            }
            out.push(')');
        }
        ExprKind::Forall(binders, body) => {
            let paren = ctx > 0;
            if paren {
                out.push('(');
            }
            out.push_str("forall ");
            for (i, b) in binders.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&b.name);
                if let Some(r) = &b.range {
                    out.push_str(" in ");
                    expr(r, 1, out);
                }
            }
            out.push_str(": ");
            expr(body, 0, out);
            if paren {
                out.push(')');
            }
        }
    }
}
