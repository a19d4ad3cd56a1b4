//! Recursive-descent parser for IL programs and expressions.
//!
//! Expression precedence, loosest first: `||`, `&&`, comparisons
//! (non-associative), `+ -`, `* /`, prefix `- ! fst snd`, postfix indexing.
//! `fst`/`snd` are prefix operators, so `snd xs[i]` reads as `snd (xs[i])`.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_expr: ExprId,
    next_stmt: StmtId,
    allow_forall: bool,
}

pub fn parse_program(src: &str) -> Result<IlProgram, ParseError> {
    let mut p = Parser::new(src)?;
    let prog = p.program()?;
    p.expect(Tok::Eof)?;
    Ok(prog)
}

/// Parses a standalone expression. `forall` is accepted only when
/// `allow_forall` is set (coupling predicates).
pub fn parse_expr(src: &str, allow_forall: bool) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    p.allow_forall = allow_forall;
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

/// Parses a comma-separated list of expressions (used for `--args`).
pub fn parse_expr_list(src: &str) -> Result<Vec<Expr>, ParseError> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    if p.peek() != &Tok::Eof {
        out.push(p.expr()?);
        while p.eat(&Tok::Comma) {
            out.push(p.expr()?);
        }
    }
    p.expect(Tok::Eof)?;
    Ok(out)
}

pub fn parse_type(src: &str) -> Result<IlType, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            next_expr: 0,
            next_stmt: 0,
            allow_forall: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let sp = self.span();
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        ParseError {
            line: sp.line,
            col: sp.col,
            message: format!(
                "unexpected {}, expected {}",
                self.peek(),
                expected.join(" or ")
            ),
            expected,
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Token, ParseError> {
        if *self.peek() == t {
            Ok(self.advance())
        } else {
            Err(self.error(&[&t.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok((s, sp))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn mk(&mut self, span: Span, kind: ExprKind) -> Expr {
        let id = self.next_expr;
        self.next_expr += 1;
        Expr { id, span, kind }
    }

    fn mk_stmt(&mut self, span: Span, kind: StmtKind) -> Stmt {
        let id = self.next_stmt;
        self.next_stmt += 1;
        Stmt { id, span, kind }
    }

    fn program(&mut self) -> Result<IlProgram, ParseError> {
        let span = self.span();
        self.expect(Tok::Fn)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let (pname, pspan) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                params.push(Param {
                    name: pname,
                    ty,
                    span: pspan,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let ret = if self.eat(&Tok::Arrow) {
            Some(self.ty()?)
        } else {
            None
        };
        let body = self.block()?;
        Ok(IlProgram {
            name,
            params,
            ret,
            body,
            span,
            expr_count: self.next_expr,
            stmt_count: self.next_stmt,
        })
    }

    pub fn ty(&mut self) -> Result<IlType, ParseError> {
        let left = self.ty_prod()?;
        if self.eat(&Tok::Plus) {
            let right = self.ty()?;
            Ok(IlType::Sum(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn ty_prod(&mut self) -> Result<IlType, ParseError> {
        let left = self.ty_atom()?;
        if self.eat(&Tok::Star) {
            let right = self.ty_prod()?;
            Ok(IlType::Pair(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn ty_atom(&mut self) -> Result<IlType, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Int" => {
                self.advance();
                Ok(IlType::Int)
            }
            Tok::Ident(s) if s == "Rat" => {
                self.advance();
                Ok(IlType::Rat)
            }
            Tok::Ident(s) if s == "Bool" => {
                self.advance();
                Ok(IlType::Bool)
            }
            Tok::LBracket => {
                self.advance();
                let t = self.ty()?;
                self.expect(Tok::RBracket)?;
                Ok(IlType::Array(Box::new(t)))
            }
            Tok::LParen => {
                self.advance();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.error(&["type"])),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return Err(self.error(&["`}`"]));
            }
            out.push(self.stmt()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Var => {
                self.advance();
                let (name, _) = self.ident()?;
                let ty = if self.eat(&Tok::Colon) {
                    Some(self.ty()?)
                } else {
                    None
                };
                // Both `:=` and `=` introduce an initializer.
                if !self.eat(&Tok::Assign) && !self.eat(&Tok::Eq) {
                    return Err(self.error(&["`:=`", "`=`"]));
                }
                let init = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(self.mk_stmt(span, StmtKind::Var { name, ty, init }))
            }
            Tok::For => {
                self.advance();
                self.expect(Tok::LParen)?;
                let (var, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let iterable = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                Ok(self.mk_stmt(
                    span,
                    StmtKind::For {
                        var,
                        iterable,
                        body,
                    },
                ))
            }
            Tok::While => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                Ok(self.mk_stmt(span, StmtKind::While { cond, body }))
            }
            Tok::Return => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(self.mk_stmt(span, StmtKind::Return(e)))
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                let mut indices = Vec::new();
                while self.eat(&Tok::LBracket) {
                    indices.push(self.expr()?);
                    self.expect(Tok::RBracket)?;
                }
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(self.mk_stmt(
                    span,
                    StmtKind::Assign {
                        name,
                        indices,
                        value,
                    },
                ))
            }
            _ => Err(self.error(&["statement"])),
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut left = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let span = left.span;
            self.advance();
            let right = self.binary(prec + 1)?;
            left = self.mk(span, ExprKind::Binary(op, Box::new(left), Box::new(right)));
            // Comparisons do not chain.
            if prec == 3 && self.binop().map(|o| o.precedence()) == Some(3) {
                return Err(self.error(&["`)`", "`;`", "operator of different precedence"]));
            }
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Minus => {
                self.advance();
                let e = self.unary()?;
                Ok(self.mk(span, ExprKind::Unary(UnOp::Neg, Box::new(e))))
            }
            Tok::Bang => {
                self.advance();
                let e = self.unary()?;
                Ok(self.mk(span, ExprKind::Unary(UnOp::Not, Box::new(e))))
            }
            Tok::Ident(s) if s == "fst" || s == "snd" => {
                self.advance();
                let b = if s == "fst" { Builtin::Fst } else { Builtin::Snd };
                let e = self.unary()?;
                Ok(self.mk(span, ExprKind::Call(b, vec![e])))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.peek() == &Tok::LBracket {
            self.advance();
            let idx = self.expr()?;
            self.expect(Tok::RBracket)?;
            let span = e.span;
            e = self.mk(span, ExprKind::Index(Box::new(e), Box::new(idx)));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(self.mk(span, ExprKind::Int(n)))
            }
            Tok::Rat(r) => {
                self.advance();
                Ok(self.mk(span, ExprKind::Rat(r)))
            }
            Tok::True => {
                self.advance();
                Ok(self.mk(span, ExprKind::Bool(true)))
            }
            Tok::False => {
                self.advance();
                Ok(self.mk(span, ExprKind::Bool(false)))
            }
            Tok::Ident(name) => {
                self.advance();
                match Builtin::from_name(&name) {
                    Some(b) if self.peek() == &Tok::LParen => {
                        self.advance();
                        let mut args = Vec::new();
                        if self.peek() != &Tok::RParen {
                            loop {
                                args.push(self.expr()?);
                                if !self.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RParen)?;
                        if args.len() != b.arity() {
                            return Err(ParseError {
                                line: span.line,
                                col: span.col,
                                message: format!(
                                    "`{}` takes {} argument(s), found {}",
                                    b.name(),
                                    b.arity(),
                                    args.len()
                                ),
                                expected: Vec::new(),
                            });
                        }
                        Ok(self.mk(span, ExprKind::Call(b, args)))
                    }
                    _ => Ok(self.mk(span, ExprKind::Var(name))),
                }
            }
            Tok::LBracket => {
                self.advance();
                let mut elems = Vec::new();
                if self.peek() != &Tok::RBracket {
                    loop {
                        elems.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(self.mk(span, ExprKind::Array(elems)))
            }
            Tok::LParen => {
                if matches!(self.peek_at(1), Tok::Ident(_)) && self.peek_at(2) == &Tok::Colon {
                    return self.lambda();
                }
                self.advance();
                let first = self.expr()?;
                if self.eat(&Tok::Comma) {
                    let mut rest = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        rest.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    // (a, b, c) nests to the right: (a, (b, c)).
                    let mut acc = rest.pop().unwrap();
                    while let Some(e) = rest.pop() {
                        let sp = e.span;
                        acc = self.mk(sp, ExprKind::Pair(Box::new(e), Box::new(acc)));
                    }
                    Ok(self.mk(span, ExprKind::Pair(Box::new(first), Box::new(acc))))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            Tok::Forall if self.allow_forall => {
                self.advance();
                let mut binders = Vec::new();
                loop {
                    let (name, _) = self.ident()?;
                    let range = if self.eat(&Tok::In) {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    binders.push(ForallBinder { name, range });
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Colon)?;
                let body = self.expr()?;
                Ok(self.mk(span, ExprKind::Forall(binders, Box::new(body))))
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    fn lambda(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let mut params = Vec::new();
        while self.peek() == &Tok::LParen {
            self.advance();
            let (name, pspan) = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::RParen)?;
            params.push(Param {
                name,
                ty,
                span: pspan,
            });
        }
        self.expect(Tok::FatArrow)?;
        let body = self.expr()?;
        Ok(self.mk(span, ExprKind::Lambda(params, Box::new(body))))
    }
}
