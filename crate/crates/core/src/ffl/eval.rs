//! Big-step, call-by-value evaluation of FFL terms under a step budget.
//! Every beta step and every primitive application costs one step.

use std::fmt;
use std::sync::Arc;

use super::term::{FUnOp, Term, T};
use crate::il::ast::BinOp;
use crate::prims;
use crate::value::{ErrorKind, Outcome, RuntimeError, Stop, Value};

#[derive(Clone, Debug, Default)]
pub struct Env(Option<Arc<EnvNode>>);

#[derive(Debug)]
struct EnvNode {
    value: Value,
    next: Env,
}

impl Env {
    pub fn empty() -> Env {
        Env(None)
    }

    pub fn push(&self, v: Value) -> Env {
        Env(Some(Arc::new(EnvNode {
            value: v,
            next: self.clone(),
        })))
    }

    fn get(&self, mut i: usize) -> Option<&Value> {
        let mut cur = self.0.as_ref()?;
        while i > 0 {
            cur = cur.next.0.as_ref()?;
            i -= 1;
        }
        Some(&cur.value)
    }
}

#[derive(Clone, Debug)]
pub enum Closure {
    Lam { env: Env, body: T },
    /// `iter(f)` awaiting its initial state.
    Iter(Box<Value>),
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<closure>")
    }
}

pub type Eval<X> = Result<X, Stop>;

pub struct Evaluator {
    steps: u64,
    budget: u64,
    /// Number of `Assert` nodes evaluated so far.
    pub probes: u64,
}

fn fail<X>(kind: ErrorKind) -> Eval<X> {
    Err(Stop::Error(RuntimeError::new(kind)))
}

fn lift(r: Result<Value, ErrorKind>) -> Eval<Value> {
    r.map_err(|k| Stop::Error(RuntimeError::new(k)))
}

impl Evaluator {
    pub fn new(budget: u64) -> Self {
        Evaluator {
            steps: 0,
            budget,
            probes: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn tick(&mut self) -> Eval<()> {
        if self.steps >= self.budget {
            return Err(Stop::Diverged(self.steps));
        }
        self.steps += 1;
        Ok(())
    }

    pub fn apply(&mut self, f: &Value, x: Value) -> Eval<Value> {
        self.tick()?;
        match f {
            Value::Closure(Closure::Lam { env, body }) => self.eval(body, &env.push(x)),
            Value::Closure(Closure::Iter(g)) => {
                let mut state = x;
                loop {
                    match self.apply(g, state)? {
                        Value::Inl(done) => return Ok(*done),
                        Value::Inr(next) => {
                            self.tick()?;
                            state = *next;
                        }
                        _ => return fail(ErrorKind::GuardNonBool),
                    }
                }
            }
            _ => fail(ErrorKind::GuardNonBool),
        }
    }

    fn apply2(&mut self, f: &Value, x: Value, y: Value) -> Eval<Value> {
        let g = self.apply(f, x)?;
        self.apply(&g, y)
    }

    fn array(&mut self, t: &T, env: &Env) -> Eval<Vec<Value>> {
        match self.eval(t, env)? {
            Value::Array(xs) => Ok(xs),
            _ => fail(ErrorKind::GuardNonBool),
        }
    }

    fn fold(&mut self, f: &Value, init: Value, xs: Vec<Value>) -> Eval<Value> {
        let mut acc = init;
        for x in xs {
            acc = self.apply2(f, acc, x)?;
        }
        Ok(acc)
    }

    fn map(&mut self, f: &Value, xs: Vec<Value>) -> Eval<Vec<Value>> {
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            out.push(self.apply(f, x)?);
        }
        Ok(out)
    }

    pub fn eval(&mut self, t: &T, env: &Env) -> Eval<Value> {
        use Term::*;
        match &**t {
            Var(i, _) => Ok(env.get(*i).expect("closed term").clone()),
            Lam(..) => Ok(Value::Closure(Closure::Lam {
                env: env.clone(),
                body: match &**t {
                    Lam(_, _, b) => b.clone(),
                    _ => unreachable!(),
                },
            })),
            App(f, x) => {
                let fv = self.eval(f, env)?;
                let xv = self.eval(x, env)?;
                self.apply(&fv, xv)
            }
            Int(n) => Ok(Value::Int(n.clone())),
            Rat(r) => Ok(Value::Rat(r.clone())),
            Bool(b) => Ok(Value::Bool(*b)),
            Unit => Ok(Value::Unit),
            Pair(a, b) => {
                let x = self.eval(a, env)?;
                let y = self.eval(b, env)?;
                Ok(Value::pair(x, y))
            }
            Fst(p) => {
                let v = self.eval(p, env)?;
                lift(prims::fst(&v))
            }
            Snd(p) => {
                let v = self.eval(p, env)?;
                lift(prims::snd(&v))
            }
            Inl(a, _) => Ok(Value::Inl(Box::new(self.eval(a, env)?))),
            Inr(a, _) => Ok(Value::Inr(Box::new(self.eval(a, env)?))),
            Case(e, l, r) => match self.eval(e, env)? {
                Value::Inl(v) => {
                    let f = self.eval(l, env)?;
                    self.apply(&f, *v)
                }
                Value::Inr(v) => {
                    let f = self.eval(r, env)?;
                    self.apply(&f, *v)
                }
                _ => fail(ErrorKind::GuardNonBool),
            },
            If(c, a, b) => match self.eval(c, env)? {
                Value::Bool(true) => self.eval(a, env),
                Value::Bool(false) => self.eval(b, env),
                _ => fail(ErrorKind::GuardNonBool),
            },
            ArrayLit(_, xs) => {
                let mut out = Vec::with_capacity(xs.len());
                for x in xs {
                    out.push(self.eval(x, env)?);
                }
                Ok(Value::Array(out))
            }
            Index(a, i) => {
                let x = self.eval(a, env)?;
                let k = self.eval(i, env)?;
                self.tick()?;
                lift(prims::index(&x, &k))
            }
            Update(a, i, v) => {
                let x = self.eval(a, env)?;
                let k = self.eval(i, env)?;
                let y = self.eval(v, env)?;
                self.tick()?;
                lift(prims::update(x, &k, y))
            }
            Length(a) => {
                let x = self.eval(a, env)?;
                self.tick()?;
                lift(prims::length(&x))
            }
            Replicate(n, x) => {
                let nv = self.eval(n, env)?;
                let xv = self.eval(x, env)?;
                self.tick()?;
                lift(prims::replicate(&nv, xv))
            }
            Range(a, b) => {
                let x = self.eval(a, env)?;
                let y = self.eval(b, env)?;
                self.tick()?;
                lift(prims::range(&x, &y))
            }
            Zip(a, b) => {
                let x = self.eval(a, env)?;
                let y = self.eval(b, env)?;
                self.tick()?;
                lift(prims::zip(&x, &y))
            }
            Map(f, xs) => {
                let fv = self.eval(f, env)?;
                let xs = self.array(xs, env)?;
                self.tick()?;
                Ok(Value::Array(self.map(&fv, xs)?))
            }
            FlatMap(f, xss) => {
                let fv = self.eval(f, env)?;
                let xs = self.array(xss, env)?;
                self.tick()?;
                let parts = Value::Array(self.map(&fv, xs)?);
                lift(prims::concat(&parts))
            }
            Concat(a) => {
                let x = self.eval(a, env)?;
                self.tick()?;
                lift(prims::concat(&x))
            }
            Group(a) => {
                let x = self.eval(a, env)?;
                self.tick()?;
                lift(prims::group(&x))
            }
            Fold(f, init, xs) => {
                let fv = self.eval(f, env)?;
                let iv = self.eval(init, env)?;
                let xs = self.array(xs, env)?;
                self.tick()?;
                self.fold(&fv, iv, xs)
            }
            ReduceByKey(f, init, kv) => {
                let fv = self.eval(f, env)?;
                let iv = self.eval(init, env)?;
                let kv = self.eval(kv, env)?;
                self.tick()?;
                let Value::Array(groups) = lift(prims::group(&kv))? else {
                    unreachable!()
                };
                let mut out = Vec::with_capacity(groups.len());
                for g in groups {
                    let Value::Pair(k, vs) = g else { unreachable!() };
                    let Value::Array(vs) = *vs else { unreachable!() };
                    out.push(Value::pair(*k, self.fold(&fv, iv.clone(), vs)?));
                }
                Ok(Value::Array(out))
            }
            Iter(f) => {
                let fv = self.eval(f, env)?;
                Ok(Value::Closure(Closure::Iter(Box::new(fv))))
            }
            Bin(op @ (BinOp::And | BinOp::Or), a, b) => {
                let x = match self.eval(a, env)? {
                    Value::Bool(x) => x,
                    _ => return fail(ErrorKind::GuardNonBool),
                };
                if (*op == BinOp::And) != x {
                    return Ok(Value::Bool(x));
                }
                match self.eval(b, env)? {
                    Value::Bool(y) => Ok(Value::Bool(y)),
                    _ => fail(ErrorKind::GuardNonBool),
                }
            }
            Bin(op, a, b) => {
                let x = self.eval(a, env)?;
                let y = self.eval(b, env)?;
                self.tick()?;
                lift(prims::binary(*op, &x, &y))
            }
            Un(op, a) => {
                let x = self.eval(a, env)?;
                match op {
                    FUnOp::Neg => lift(prims::neg(&x)),
                    FUnOp::Not => lift(prims::not(&x)),
                    FUnOp::IntToRat => Ok(x.to_rat()),
                }
            }
            Assert(ob, body) => {
                self.probes += 1;
                match self.eval(ob, env)? {
                    Value::Bool(true) => self.eval(body, env),
                    Value::Bool(false) => fail(ErrorKind::ObligationViolated),
                    _ => fail(ErrorKind::GuardNonBool),
                }
            }
        }
    }
}

/// Evaluates a closed term.
pub fn eval(t: &T, budget: u64) -> Outcome {
    Evaluator::new(budget).eval(t, &Env::empty()).into()
}

/// Evaluates a closed function term and applies it to `args` one at a time.
pub fn eval_applied(t: &T, args: &[Value], budget: u64) -> Outcome {
    let mut ev = Evaluator::new(budget);
    run_applied(&mut ev, t, args).into()
}

pub fn run_applied(ev: &mut Evaluator, t: &T, args: &[Value]) -> Eval<Value> {
    let mut f = ev.eval(t, &Env::empty())?;
    for a in args {
        f = ev.apply(&f, a.clone())?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::super::term::build::*;
    use super::super::term::FflType;
    use super::*;

    fn ints(xs: &[i64]) -> Value {
        Value::Array(xs.iter().map(|&x| Value::int(x)).collect())
    }

    #[test]
    fn range_zero_three() {
        let r = eval(&range(int(0), int(3)), 100);
        assert_eq!(r.value(), Some(&ints(&[0, 1, 2])));
    }

    #[test]
    fn zip_mixed() {
        let a = Arc::new(Term::ArrayLit(FflType::Int, vec![int(1), int(2)]));
        let b = Arc::new(Term::ArrayLit(FflType::Bool, vec![boolean(true), boolean(false)]));
        let want = Value::Array(vec![
            Value::pair(Value::int(1), Value::Bool(true)),
            Value::pair(Value::int(2), Value::Bool(false)),
        ]);
        assert_eq!(eval(&zip(a, b), 100).value(), Some(&want));
    }

    #[test]
    fn iter_forever_diverges() {
        let f = lam(
            "s",
            FflType::Unit,
            inr(var(0, "s"), FflType::Unit),
        );
        let t = app(iter(f), unit());
        assert!(eval(&t, 10_000).is_diverged());
    }

    #[test]
    fn iter_returns_left_payload() {
        // count up to 3
        let s = || var(0, "s");
        let body = ite(
            bin(BinOp::Lt, s(), int(3)),
            inr(bin(BinOp::Add, s(), int(1)), FflType::Int),
            inl(s(), FflType::Int),
        );
        let t = app(iter(lam("s", FflType::Int, body)), int(0));
        assert_eq!(eval(&t, 1000).value(), Some(&Value::int(3)));
    }
}
