use std::fmt;

use super::term::{FUnOp, FflType, Term};
use crate::il::ast::BinOp;

#[derive(Clone, Debug, PartialEq)]
pub struct FflTypeError {
    /// Child-index path from the root to the failing node.
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for FflTypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.path.iter().map(|k| k.to_string()).collect();
        write!(f, "at /{}: {}", p.join("/"), self.message)
    }
}

impl std::error::Error for FflTypeError {}

pub fn typecheck_term(t: &Term) -> Result<FflType, FflTypeError> {
    typecheck_in(&[], t)
}

/// Types `t` under `env`, where `env.last()` is the type of index 0.
pub fn typecheck_in(env: &[FflType], t: &Term) -> Result<FflType, FflTypeError> {
    let mut cx = Cx {
        env: env.to_vec(),
        path: Vec::new(),
    };
    cx.ty(t)
}

struct Cx {
    env: Vec<FflType>,
    path: Vec<usize>,
}

type R = Result<FflType, FflTypeError>;

impl Cx {
    fn fail<X>(&self, msg: String) -> Result<X, FflTypeError> {
        Err(FflTypeError {
            path: self.path.clone(),
            message: msg,
        })
    }

    fn child(&mut self, k: usize, t: &Term) -> R {
        self.path.push(k);
        let r = self.ty(t)?;
        self.path.pop();
        Ok(r)
    }

    fn array(&mut self, k: usize, t: &Term) -> R {
        match self.child(k, t)? {
            FflType::Array(e) => Ok(*e),
            other => {
                self.path.push(k);
                let r = self.fail(format!("{other} where an array expected"));
                self.path.pop();
                r
            }
        }
    }

    fn expect(&mut self, k: usize, t: &Term, want: &FflType) -> Result<(), FflTypeError> {
        let got = self.child(k, t)?;
        if &got != want {
            self.path.push(k);
            let r = self.fail(format!("{got} where {want} expected"));
            self.path.pop();
            return r;
        }
        Ok(())
    }

    /// Checks `f : A -> B` and returns `B`.
    fn apply(&mut self, k: usize, f: &Term, arg: &FflType) -> R {
        match self.child(k, f)? {
            FflType::Arrow(a, b) if *a == *arg => Ok(*b),
            other => {
                self.path.push(k);
                let r = self.fail(format!("{other} cannot be applied to {arg}"));
                self.path.pop();
                r
            }
        }
    }

    fn ty(&mut self, t: &Term) -> R {
        use Term::*;
        match t {
            Var(i, n) => match self.env.len().checked_sub(i + 1) {
                Some(k) => Ok(self.env[k].clone()),
                None => self.fail(format!("unbound variable `{n}`")),
            },
            Lam(_, a, body) => {
                self.env.push(a.clone());
                self.path.push(0);
                let r = self.ty(body);
                self.path.pop();
                self.env.pop();
                Ok(FflType::arrow(a.clone(), r?))
            }
            App(f, x) => {
                let a = self.child(1, x)?;
                self.apply(0, f, &a)
            }
            Int(_) => Ok(FflType::Int),
            Rat(_) => Ok(FflType::Rat),
            Bool(_) => Ok(FflType::Bool),
            Unit => Ok(FflType::Unit),
            Pair(a, b) => Ok(FflType::prod(self.child(0, a)?, self.child(1, b)?)),
            Fst(p) | Snd(p) => match self.child(0, p)? {
                FflType::Prod(a, b) => Ok(if matches!(t, Fst(_)) { *a } else { *b }),
                other => self.fail(format!("projection from non-pair type {other}")),
            },
            Inl(a, r) => Ok(FflType::sum(self.child(0, a)?, r.clone())),
            Inr(b, l) => Ok(FflType::sum(l.clone(), self.child(0, b)?)),
            Case(e, l, r) => match self.child(0, e)? {
                FflType::Sum(a, b) => {
                    let x = self.apply(1, l, &a)?;
                    let y = self.apply(2, r, &b)?;
                    if x != y {
                        return self.fail(format!("case branches differ: {x} and {y}"));
                    }
                    Ok(x)
                }
                other => self.fail(format!("case on non-sum type {other}")),
            },
            If(c, a, b) => {
                self.expect(0, c, &FflType::Bool)?;
                let x = self.child(1, a)?;
                self.expect(2, b, &x)?;
                Ok(x)
            }
            ArrayLit(e, xs) => {
                for (k, x) in xs.iter().enumerate() {
                    self.expect(k, x, e)?;
                }
                Ok(FflType::array(e.clone()))
            }
            Index(a, i) => {
                let e = self.array(0, a)?;
                self.expect(1, i, &FflType::Int)?;
                Ok(e)
            }
            Update(a, i, v) => {
                let e = self.array(0, a)?;
                self.expect(1, i, &FflType::Int)?;
                self.expect(2, v, &e)?;
                Ok(FflType::array(e))
            }
            Length(a) => {
                self.array(0, a)?;
                Ok(FflType::Int)
            }
            Replicate(n, x) => {
                self.expect(0, n, &FflType::Int)?;
                Ok(FflType::array(self.child(1, x)?))
            }
            Range(a, b) => {
                self.expect(0, a, &FflType::Int)?;
                self.expect(1, b, &FflType::Int)?;
                Ok(FflType::array(FflType::Int))
            }
            Zip(a, b) => {
                let x = self.array(0, a)?;
                let y = self.array(1, b)?;
                Ok(FflType::array(FflType::prod(x, y)))
            }
            Map(f, xs) => {
                let e = self.array(1, xs)?;
                Ok(FflType::array(self.apply(0, f, &e)?))
            }
            FlatMap(f, xs) => {
                let e = self.array(1, xs)?;
                match self.apply(0, f, &e)? {
                    r @ FflType::Array(_) => Ok(r),
                    other => self.fail(format!("flatMap function returns {other}, not an array")),
                }
            }
            Concat(xss) => match self.array(0, xss)? {
                r @ FflType::Array(_) => Ok(r),
                other => self.fail(format!("concat of [{other}], not an array of arrays")),
            },
            Group(kv) => match self.array(0, kv)? {
                FflType::Prod(k, v) => Ok(FflType::array(FflType::prod(*k, FflType::array(*v)))),
                other => self.fail(format!("group of [{other}], not key-value pairs")),
            },
            Fold(f, init, xs) => {
                let acc = self.child(1, init)?;
                let e = self.array(2, xs)?;
                self.fold_fn(0, f, &acc, &e)?;
                Ok(acc)
            }
            ReduceByKey(f, init, kv) => {
                let v = self.child(1, init)?;
                match self.array(2, kv)? {
                    FflType::Prod(k, v2) if *v2 == v => {
                        self.fold_fn(0, f, &v, &v)?;
                        Ok(FflType::array(FflType::prod(*k, v)))
                    }
                    other => self.fail(format!("reduceByKey over [{other}] with initial value of type {v}")),
                }
            }
            Iter(f) => match self.child(0, f)? {
                FflType::Arrow(s, out) => match *out {
                    FflType::Sum(r, s2) if *s2 == *s => Ok(FflType::arrow(*s, *r)),
                    other => self.fail(format!("iter body returns {other}, expected R + {s}")),
                },
                other => self.fail(format!("iter of non-function type {other}")),
            },
            Bin(op, a, b) => {
                let x = self.child(0, a)?;
                let y = self.child(1, b)?;
                if x != y {
                    return self.fail(format!("operands of {} have types {x} and {y}", op.symbol()));
                }
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        if !matches!(x, FflType::Int | FflType::Rat) {
                            return self.fail(format!("arithmetic on {x}"));
                        }
                        Ok(x)
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        if !matches!(x, FflType::Int | FflType::Rat) {
                            return self.fail(format!("ordering on {x}"));
                        }
                        Ok(FflType::Bool)
                    }
                    BinOp::And | BinOp::Or => {
                        if x != FflType::Bool {
                            return self.fail(format!("connective on {x}"));
                        }
                        Ok(FflType::Bool)
                    }
                    BinOp::Eq | BinOp::Ne => Ok(FflType::Bool),
                }
            }
            Un(op, a) => {
                let x = self.child(0, a)?;
                match (op, &x) {
                    (FUnOp::Neg, FflType::Int | FflType::Rat) => Ok(x),
                    (FUnOp::Not, FflType::Bool) => Ok(x),
                    (FUnOp::IntToRat, FflType::Int) => Ok(FflType::Rat),
                    _ => self.fail(format!("{op:?} applied to {x}")),
                }
            }
            Assert(ob, body) => {
                self.expect(0, ob, &FflType::Bool)?;
                self.child(1, body)
            }
        }
    }

    fn fold_fn(&mut self, k: usize, f: &Term, acc: &FflType, elem: &FflType) -> Result<(), FflTypeError> {
        let want = FflType::arrow(acc.clone(), FflType::arrow(elem.clone(), acc.clone()));
        let got = self.child(k, f)?;
        if got != want {
            self.path.push(k);
            let r = self.fail(format!("fold function has type {got}, expected {want}"));
            self.path.pop();
            return r;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::term::build::*;
    use super::super::term::Term;
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use std::sync::Arc;

    fn half() -> super::super::term::T {
        Arc::new(Term::Rat(BigRational::new(BigInt::from(1), BigInt::from(2))))
    }

    #[test]
    fn identity_has_arrow_type() {
        let t = lam("x", FflType::Int, var(0, "x"));
        assert_eq!(typecheck_term(&t).unwrap(), FflType::arrow(FflType::Int, FflType::Int));
    }

    #[test]
    fn rational_fold_is_rat() {
        let f = lam(
            "a",
            FflType::Rat,
            lam("v", FflType::Rat, bin(BinOp::Add, var(1, "a"), var(0, "v"))),
        );
        let xs = Arc::new(Term::ArrayLit(FflType::Rat, vec![half(), half()]));
        let zero = un(FUnOp::IntToRat, int(0));
        assert_eq!(typecheck_term(&fold(f, zero, xs)).unwrap(), FflType::Rat);
    }

    #[test]
    fn group_needs_pairs() {
        let xs = Arc::new(Term::ArrayLit(FflType::Int, vec![int(1)]));
        assert!(typecheck_term(&group(xs)).is_err());
    }
}
