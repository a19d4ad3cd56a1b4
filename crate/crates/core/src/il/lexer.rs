use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Rat(BigRational),
    Fn,
    Var,
    For,
    While,
    Return,
    True,
    False,
    Forall,
    In,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Assign,
    Eq,
    Ne,
    FatArrow,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    Bang,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Rat(r) => return write!(f, "rational `{r}`"),
            Tok::Fn => "`fn`",
            Tok::Var => "`var`",
            Tok::For => "`for`",
            Tok::While => "`while`",
            Tok::Return => "`return`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Forall => "`forall`",
            Tok::In => "`in`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Assign => "`:=`",
            Tok::Eq => "`=`",
            Tok::Ne => "`!=`",
            Tok::FatArrow => "`=>`",
            Tok::Arrow => "`->`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Bang => "`!`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let span = Span { line, col };
        let peek = chars.get(i + 1).copied();
        let two = |a: char, b: char| c == a && peek == Some(b);

        let (tok, len) = if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let whole: String = chars[start..j].iter().collect();
            let whole = whole.parse::<BigInt>().expect("digits");
            if j < chars.len() && chars[j] == '.' {
                // `1.` or `1.25`: an exact rational literal.
                let mut k = j + 1;
                let mut frac = BigRational::zero();
                let mut scale = BigRational::one();
                while k < chars.len() && chars[k].is_ascii_digit() {
                    scale /= BigRational::from_integer(BigInt::from(10));
                    let d = chars[k].to_digit(10).unwrap();
                    frac += scale.clone() * BigRational::from_integer(BigInt::from(d));
                    k += 1;
                }
                (
                    Tok::Rat(BigRational::from_integer(whole) + frac),
                    k - start,
                )
            } else {
                (Tok::Int(whole), j - start)
            }
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            let tok = match word.as_str() {
                "fn" => Tok::Fn,
                "var" => Tok::Var,
                "for" => Tok::For,
                "while" => Tok::While,
                "return" => Tok::Return,
                "true" => Tok::True,
                "false" => Tok::False,
                "forall" => Tok::Forall,
                "in" => Tok::In,
                _ => Tok::Ident(word),
            };
            (tok, j - start)
        } else if two(':', '=') {
            (Tok::Assign, 2)
        } else if two('=', '>') {
            (Tok::FatArrow, 2)
        } else if two('=', '=') {
            (Tok::Eq, 2)
        } else if two('-', '>') {
            (Tok::Arrow, 2)
        } else if two('<', '=') {
            (Tok::Le, 2)
        } else if two('>', '=') {
            (Tok::Ge, 2)
        } else if two('!', '=') {
            (Tok::Ne, 2)
        } else if two('&', '&') {
            (Tok::AndAnd, 2)
        } else if two('|', '|') {
            (Tok::OrOr, 2)
        } else if two('/', '\\') {
            (Tok::AndAnd, 2)
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '!' => Tok::Bang,
                '∧' => Tok::AndAnd,
                '∨' => Tok::OrOr,
                _ => {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("unexpected character `{c}`"),
                        expected: Vec::new(),
                    })
                }
            };
            (tok, 1)
        };
        out.push(Token { tok, span });
        for _ in 0..len {
            bump!();
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}
