//! Coupling predicates: IL expressions over `x_1` (first program) and `x_2`
//! (second program) variables, with bounded `forall`.

use crate::il::ast::{Expr, IlType};
use crate::il::interp::Machine;
use crate::il::typeck::{typecheck_expr, Binding, TypeTable};
use crate::il::{parse_expr, ParseError};
use crate::value::{Stop, Value};

#[derive(Clone, Debug)]
pub struct CouplingPredicate {
    pub text: String,
    pub expr: Expr,
}

pub fn parse_predicate(text: &str) -> Result<CouplingPredicate, ParseError> {
    Ok(CouplingPredicate {
        text: text.to_string(),
        expr: parse_expr(text, true)?,
    })
}

/// A predicate type checked against the variables of both sides.
#[derive(Clone, Debug)]
pub struct ResolvedPredicate {
    pub text: String,
    pub expr: Expr,
    pub table: TypeTable,
    /// Suffixed names the predicate may refer to.
    pub names: Vec<String>,
}

pub fn suffixed(scope: &[Binding], side: usize) -> Vec<Binding> {
    scope
        .iter()
        .map(|b| Binding {
            name: format!("{}_{side}", b.name),
            ty: b.ty.clone(),
            kind: b.kind,
        })
        .collect()
}

impl CouplingPredicate {
    /// Resolves the predicate against the variables in scope on each side.
    pub fn resolve(&self, s1: &[Binding], s2: &[Binding]) -> Result<ResolvedPredicate, String> {
        let mut env = suffixed(s1, 1);
        env.extend(suffixed(s2, 2));
        let (_, table) = typecheck_expr(&self.expr, &env, Some(&IlType::Bool)).map_err(|es| {
            es.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        })?;
        Ok(ResolvedPredicate {
            text: self.text.clone(),
            expr: self.expr.clone(),
            table,
            names: env.into_iter().map(|b| b.name).collect(),
        })
    }
}

/// Evaluates the predicate on two states given as `(name, value)` lists of
/// unsuffixed names.
pub fn evaluate_predicate(inv: &ResolvedPredicate, s1: &[(String, Value)], s2: &[(String, Value)]) -> Result<bool, String> {
    let mut m = Machine::new(&inv.table, u64::MAX);
    let mut bound = Vec::new();
    for (side, state) in [(1, s1), (2, s2)] {
        for (n, v) in state {
            let name = format!("{n}_{side}");
            m.bind(&name, v.clone());
            bound.push(name);
        }
    }
    if let Some(missing) = inv.names.iter().find(|n| !bound.contains(n)) {
        return Err(format!("unbound variable `{missing}`"));
    }
    match m.eval(&inv.expr) {
        Ok(Value::Bool(b)) => Ok(b),
        Ok(v) => Err(format!("predicate evaluated to {v}")),
        Err(Stop::Error(e)) => Err(format!("predicate failed: {e}")),
        Err(Stop::Diverged(_)) => Err("predicate did not terminate".into()),
    }
}
