//! First-order primitives shared by the IL interpreter and the FFL evaluator.
//! Keeping one implementation means the two semantics can only disagree in
//! how they sequence work, not in what a builtin computes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::il::ast::BinOp;
use crate::value::{ErrorKind, Value};

type Prim = Result<Value, ErrorKind>;

fn to_index(i: &Value, len: usize) -> Result<usize, ErrorKind> {
    match i {
        Value::Int(n) if !n.is_negative() => match n.to_usize() {
            Some(k) if k < len => Ok(k),
            _ => Err(ErrorKind::IndexOutOfBounds),
        },
        Value::Int(_) => Err(ErrorKind::IndexOutOfBounds),
        _ => Err(ErrorKind::GuardNonBool),
    }
}

fn array(v: &Value) -> Result<&[Value], ErrorKind> {
    v.as_array().ok_or(ErrorKind::GuardNonBool)
}

pub fn index(a: &Value, i: &Value) -> Prim {
    let xs = array(a)?;
    Ok(xs[to_index(i, xs.len())?].clone())
}

pub fn update(a: Value, i: &Value, v: Value) -> Prim {
    match a {
        Value::Array(mut xs) => {
            let k = to_index(i, xs.len())?;
            xs[k] = v;
            Ok(Value::Array(xs))
        }
        _ => Err(ErrorKind::GuardNonBool),
    }
}

/// In-place variant of [`update`] for the imperative interpreter.
pub fn update_in_place(a: &mut Value, i: &Value, v: Value) -> Result<(), ErrorKind> {
    match a {
        Value::Array(xs) => {
            let k = to_index(i, xs.len())?;
            xs[k] = v;
            Ok(())
        }
        _ => Err(ErrorKind::GuardNonBool),
    }
}

pub fn element_mut<'v>(a: &'v mut Value, i: &Value) -> Result<&'v mut Value, ErrorKind> {
    match a {
        Value::Array(xs) => {
            let k = to_index(i, xs.len())?;
            Ok(&mut xs[k])
        }
        _ => Err(ErrorKind::GuardNonBool),
    }
}

pub fn length(a: &Value) -> Prim {
    Ok(Value::Int(BigInt::from(array(a)?.len())))
}

pub fn replicate(n: &Value, x: Value) -> Prim {
    let n = n.as_int().ok_or(ErrorKind::GuardNonBool)?;
    if n.is_negative() {
        return Err(ErrorKind::NegativeLength);
    }
    let n = n.to_usize().ok_or(ErrorKind::NegativeLength)?;
    Ok(Value::Array(vec![x; n]))
}

pub fn range(a: &Value, b: &Value) -> Prim {
    let (a, b) = match (a, b) {
        (Value::Int(a), Value::Int(b)) => (a.clone(), b.clone()),
        _ => return Err(ErrorKind::GuardNonBool),
    };
    let mut out = Vec::new();
    let mut i = a;
    while i < b {
        out.push(Value::Int(i.clone()));
        i += 1;
    }
    Ok(Value::Array(out))
}

pub fn zip(a: &Value, b: &Value) -> Prim {
    let (xs, ys) = (array(a)?, array(b)?);
    if xs.len() != ys.len() {
        return Err(ErrorKind::LengthMismatch);
    }
    Ok(Value::Array(
        xs.iter()
            .zip(ys)
            .map(|(x, y)| Value::pair(x.clone(), y.clone()))
            .collect(),
    ))
}

pub fn concat(a: &Value) -> Prim {
    let mut out = Vec::new();
    for xs in array(a)? {
        out.extend_from_slice(array(xs)?);
    }
    Ok(Value::Array(out))
}

/// Keys in order of first occurrence, values per key in input order.
pub fn group(a: &Value) -> Prim {
    let mut groups: Vec<(Value, Vec<Value>)> = Vec::new();
    for kv in array(a)? {
        let Value::Pair(k, v) = kv else {
            return Err(ErrorKind::GuardNonBool);
        };
        match groups.iter_mut().find(|(g, _)| g == &**k) {
            Some((_, vs)) => vs.push((**v).clone()),
            None => groups.push(((**k).clone(), vec![(**v).clone()])),
        }
    }
    Ok(Value::Array(
        groups
            .into_iter()
            .map(|(k, vs)| Value::pair(k, Value::Array(vs)))
            .collect(),
    ))
}

pub fn fst(p: &Value) -> Prim {
    match p {
        Value::Pair(a, _) => Ok((**a).clone()),
        _ => Err(ErrorKind::GuardNonBool),
    }
}

pub fn snd(p: &Value) -> Prim {
    match p {
        Value::Pair(_, b) => Ok((**b).clone()),
        _ => Err(ErrorKind::GuardNonBool),
    }
}

pub fn neg(a: &Value) -> Prim {
    match a {
        Value::Int(n) => Ok(Value::Int(-n)),
        Value::Rat(r) => Ok(Value::Rat(-r)),
        _ => Err(ErrorKind::GuardNonBool),
    }
}

pub fn not(a: &Value) -> Prim {
    match a {
        Value::Bool(b) => Ok(Value::Bool(!b)),
        _ => Err(ErrorKind::GuardNonBool),
    }
}

fn rat_of(v: &Value) -> Option<BigRational> {
    match v {
        Value::Int(n) => Some(BigRational::from_integer(n.clone())),
        Value::Rat(r) => Some(r.clone()),
        _ => None,
    }
}

/// Arithmetic and comparison. `&&` and `||` are not handled here because
/// both evaluators short-circuit them.
pub fn binary(op: BinOp, a: &Value, b: &Value) -> Prim {
    use BinOp::*;
    match op {
        Eq => Ok(Value::Bool(a == b)),
        Ne => Ok(Value::Bool(a != b)),
        Add | Sub | Mul | Div => match (a, b) {
            (Value::Int(x), Value::Int(y)) => Ok(Value::Int(match op {
                Add => x + y,
                Sub => x - y,
                Mul => x * y,
                _ => {
                    if y.is_zero() {
                        return Err(ErrorKind::DivisionByZero);
                    }
                    x.div_floor(y)
                }
            })),
            _ => {
                let (x, y) = (
                    rat_of(a).ok_or(ErrorKind::GuardNonBool)?,
                    rat_of(b).ok_or(ErrorKind::GuardNonBool)?,
                );
                Ok(Value::Rat(match op {
                    Add => x + y,
                    Sub => x - y,
                    Mul => x * y,
                    _ => {
                        if y.is_zero() {
                            return Err(ErrorKind::DivisionByZero);
                        }
                        x / y
                    }
                }))
            }
        },
        Lt | Le | Gt | Ge => {
            let ord = match (a, b) {
                (Value::Int(x), Value::Int(y)) => x.cmp(y),
                _ => rat_of(a)
                    .ok_or(ErrorKind::GuardNonBool)?
                    .cmp(&rat_of(b).ok_or(ErrorKind::GuardNonBool)?),
            };
            Ok(Value::Bool(match op {
                Lt => ord.is_lt(),
                Le => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            }))
        }
        And | Or => {
            let (x, y) = (
                a.as_bool().ok_or(ErrorKind::GuardNonBool)?,
                b.as_bool().ok_or(ErrorKind::GuardNonBool)?,
            );
            Ok(Value::Bool(if op == And { x && y } else { x || y }))
        }
    }
}

/// Splits a value into `n` right-nested pair components, the runtime side of
/// multi-parameter lambdas in `map` position.
pub fn split_pair(v: Value, n: usize) -> Result<Vec<Value>, ErrorKind> {
    if n <= 1 {
        return Ok(vec![v]);
    }
    match v {
        Value::Pair(a, b) => {
            let mut rest = split_pair(*b, n - 1)?;
            rest.insert(0, *a);
            Ok(rest)
        }
        _ => Err(ErrorKind::GuardNonBool),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Value {
        Value::Array(xs.iter().map(|&x| Value::int(x)).collect())
    }

    #[test]
    fn floor_division_rounds_down() {
        let r = binary(BinOp::Div, &Value::int(-7), &Value::int(2)).unwrap();
        assert_eq!(r, Value::int(-4));
    }

    #[test]
    fn group_keeps_first_occurrence_order() {
        let kv = Value::Array(vec![
            Value::pair(Value::int(1), Value::int(10)),
            Value::pair(Value::int(2), Value::int(20)),
            Value::pair(Value::int(1), Value::int(30)),
        ]);
        let g = group(&kv).unwrap();
        let want = Value::Array(vec![
            Value::pair(Value::int(1), ints(&[10, 30])),
            Value::pair(Value::int(2), ints(&[20])),
        ]);
        assert_eq!(g, want);
    }

    #[test]
    fn zip_rejects_uneven_lengths() {
        assert_eq!(zip(&ints(&[1]), &ints(&[])), Err(ErrorKind::LengthMismatch));
    }

    #[test]
    fn range_is_half_open() {
        assert_eq!(range(&Value::int(0), &Value::int(3)).unwrap(), ints(&[0, 1, 2]));
        assert_eq!(range(&Value::int(3), &Value::int(0)).unwrap(), ints(&[]));
    }
}
