//! Discharging rule obligations by bounded testing. A pass only ever means
//! "no counterexample among the tried inputs".

use rayon::prelude::*;
use serde::Serialize;

use crate::ffl::eval::{run_applied, Evaluator};
use crate::ffl::ops::{replace_at, subterm_at};
use crate::ffl::term::build;
use crate::ffl::{eval_applied, typecheck_term, FflType, Term, T};
use crate::gen::{gen_args_ffl, Bounds, Profile};
use crate::value::{render_args, ErrorKind, Outcome, Stop, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ObligationConfig {
    pub trials: u64,
    pub seed: u64,
    pub budget: u64,
    pub bounds: Bounds,
}

impl Default for ObligationConfig {
    fn default() -> Self {
        ObligationConfig {
            trials: 200,
            seed: 42,
            budget: 1_000_000,
            bounds: Bounds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObligationVerdict {
    /// No counterexample in `trials` runs; `probes` counts how often the
    /// obligation was actually evaluated.
    TestedPass { trials: u64, probes: u64 },
    Counterexample { inputs: Vec<Value>, detail: String },
    /// The obligation was never evaluated on any generated input.
    Untested { trials: u64 },
    NotGenerable(String),
}

impl ObligationVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, ObligationVerdict::TestedPass { .. })
    }
}

impl std::fmt::Display for ObligationVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObligationVerdict::TestedPass { trials, probes } => {
                write!(f, "tested: no counterexample in {trials} trials ({probes} evaluations)")
            }
            ObligationVerdict::Counterexample { inputs, detail } => {
                write!(f, "counterexample {}: {detail}", render_args(inputs))
            }
            ObligationVerdict::Untested { trials } => {
                write!(f, "untested: never reached in {trials} trials")
            }
            ObligationVerdict::NotGenerable(m) => write!(f, "inputs not generable: {m}"),
        }
    }
}

/// Parameter types of the leading lambdas of `t`.
pub fn leading_params(t: &T) -> Vec<FflType> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Term::Lam(_, ty, body) = &**cur {
        out.push(ty.clone());
        cur = body;
    }
    out
}

/// Checks a closed boolean term, or a closed function into booleans whose
/// arguments are generated.
pub fn check_obligation(ob: &T, cfg: &ObligationConfig) -> ObligationVerdict {
    let ty = match typecheck_term(ob) {
        Ok(t) => t,
        Err(e) => return ObligationVerdict::NotGenerable(format!("ill-typed obligation: {e}")),
    };
    let sig = leading_params(ob);
    let mut result = ty;
    for _ in &sig {
        result = match result {
            FflType::Arrow(_, r) => *r,
            other => other,
        };
    }
    if result != FflType::Bool {
        return ObligationVerdict::NotGenerable(format!("obligation of type {ty_r} is not boolean", ty_r = result));
    }
    if sig.is_empty() {
        return match eval_applied(ob, &[], cfg.budget) {
            Outcome::Val(Value::Bool(true)) => ObligationVerdict::TestedPass { trials: 1, probes: 1 },
            other => ObligationVerdict::Counterexample {
                inputs: Vec::new(),
                detail: format!("evaluates to {other}"),
            },
        };
    }
    let verdicts: Vec<Result<Option<ObligationVerdict>, String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let args = gen_args_ffl(&sig, Profile::Any, cfg.seed, i, &cfg.bounds).map_err(|e| e.to_string())?;
            Ok(match eval_applied(ob, &args, cfg.budget) {
                Outcome::Val(Value::Bool(true)) => None,
                other => Some(ObligationVerdict::Counterexample {
                    inputs: args,
                    detail: format!("evaluates to {other}"),
                }),
            })
        })
        .collect();
    for v in verdicts {
        match v {
            Err(e) => return ObligationVerdict::NotGenerable(e),
            Ok(Some(cex)) => return cex,
            Ok(None) => {}
        }
    }
    ObligationVerdict::TestedPass {
        trials: cfg.trials,
        probes: cfg.trials,
    }
}

/// Checks an obligation where the rule fired: `ob` (built in the context of
/// `path`) is asserted in front of the matched subterm and the whole program
/// `src` is run on generated inputs.
pub fn discharge_in_context(src: &T, path: &[usize], ob: &T, profile: Profile, cfg: &ObligationConfig) -> ObligationVerdict {
    let Some((sub, _)) = subterm_at(src, path) else {
        return ObligationVerdict::NotGenerable("invalid path".into());
    };
    let probe = replace_at(src, path, build::assert(ob.clone(), sub.clone()));
    let sig = leading_params(src);
    let per_trial: Vec<Result<(u64, Option<Vec<Value>>), String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let args = gen_args_ffl(&sig, profile, cfg.seed, i, &cfg.bounds).map_err(|e| e.to_string())?;
            let mut ev = Evaluator::new(cfg.budget);
            let r = run_applied(&mut ev, &probe, &args);
            let violated = matches!(&r, Err(Stop::Error(e)) if e.kind == ErrorKind::ObligationViolated);
            Ok((ev.probes, violated.then_some(args)))
        })
        .collect();
    let mut probes = 0;
    for r in per_trial {
        match r {
            Err(e) => return ObligationVerdict::NotGenerable(e),
            Ok((_, Some(inputs))) => {
                return ObligationVerdict::Counterexample {
                    inputs,
                    detail: "obligation false where the rule applies".into(),
                }
            }
            Ok((p, None)) => probes += p,
        }
    }
    if probes == 0 {
        ObligationVerdict::Untested { trials: cfg.trials }
    } else {
        ObligationVerdict::TestedPass {
            trials: cfg.trials,
            probes,
        }
    }
}
