//! Checking a whole chain: every adjacent pair by its declared method, plus
//! a differential test of the two endpoints.

pub mod manifest;
pub mod report;

use std::time::Instant;

use rayon::prelude::*;

use crate::coupling::{check_coupling, CouplingConfig, Verdict};
use crate::ffl::expand::expand_synonyms;
use crate::ffl::ops::first_difference;
use crate::ffl::{eval_applied, T};
use crate::gen::{gen_args, infer_profile, Profile};
use crate::il::TypedProgram;
use crate::rewrite::{discharge_in_context, justify_step, ObligationConfig};
use crate::translate::translate;
use crate::value::{render_args, Outcome};
pub use manifest::{load_manifest, parse_manifest, ChainConfig, ChainManifest, ChainProgram, ManifestError, StepJustification};
pub use report::{DiffSummary, StepReport, StepStatus, VerificationReport, Witness};

fn profile_for(p: &TypedProgram, cfg: &ChainConfig) -> Profile {
    cfg.profile.unwrap_or_else(|| infer_profile(&p.param_types()))
}

/// Runs both programs' translations on the same generated inputs.
pub fn differential_test(p1: &TypedProgram, p2: &TypedProgram, cfg: &ChainConfig) -> DiffSummary {
    differential_terms(&translate(p1), &translate(p2), p1, cfg)
}

fn differential_terms(t1: &T, t2: &T, p1: &TypedProgram, cfg: &ChainConfig) -> DiffSummary {
    let sig = p1.param_types();
    let profile = profile_for(p1, cfg);
    let runs: Vec<Result<(Vec<_>, Outcome, Outcome), String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let args = gen_args(&sig, profile, cfg.seed, i, &cfg.bounds).map_err(|e| e.to_string())?;
            let a = eval_applied(t1, &args, cfg.budget);
            let b = eval_applied(t2, &args, cfg.budget);
            Ok((args, a, b))
        })
        .collect();
    let mut s = DiffSummary {
        trials: cfg.trials,
        mismatches: 0,
        diverged: 0,
        witness: None,
        error: None,
    };
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Err(e) => {
                s.error = Some(e);
                break;
            }
            Ok((args, a, b)) => {
                if !a.agrees_with(&b) {
                    s.mismatches += 1;
                    if s.witness.is_none() {
                        s.witness = Some(Witness {
                            trial: i as u64,
                            inputs: render_args(&args),
                            first: a.to_string(),
                            second: b.to_string(),
                        });
                    }
                } else if a.is_diverged() {
                    s.diverged += 1;
                }
            }
        }
    }
    s
}

struct StepInput<'a> {
    index: usize,
    p1: &'a ChainProgram,
    p2: &'a ChainProgram,
    t1: &'a T,
    t2: &'a T,
    just: &'a StepJustification,
}

fn run_step(s: &StepInput, cfg: &ChainConfig) -> StepReport {
    let start = Instant::now();
    let mut details = Vec::new();
    let status = match s.just {
        StepJustification::Rewrite { rule } => match justify_step(rule, s.t1, s.t2) {
            Err(m) => {
                details.push(m.to_string());
                StepStatus::Failed
            }
            Ok(j) => {
                details.push(format!(
                    "matched at /{} ({} positions searched)",
                    j.path.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/"),
                    j.positions_searched
                ));
                for (k, v) in j.rendered_bindings() {
                    details.push(format!("{k} := {v}"));
                }
                if !j.alternates.is_empty() {
                    details.push(format!("{} further matching positions", j.alternates.len()));
                }
                let ocfg = ObligationConfig {
                    trials: cfg.trials,
                    seed: cfg.seed,
                    budget: cfg.budget,
                    bounds: cfg.bounds,
                };
                let profile = profile_for(&s.p1.typed, cfg);
                let mut ok = true;
                for ob in &j.obligations {
                    let v = discharge_in_context(s.t1, &j.path, &ob.term, profile, &ocfg);
                    ok &= v.passed();
                    details.push(format!("obligation {}: {v}", ob.description));
                }
                if ok {
                    StepStatus::Justified
                } else {
                    StepStatus::Failed
                }
            }
        },
        StepJustification::Coupling { invariant, at } => {
            let ccfg = CouplingConfig {
                trials: cfg.trials,
                seed: cfg.seed,
                budget: cfg.budget,
                bounds: cfg.bounds,
                profile: cfg.profile,
            };
            details.push(format!("invariant at {at}: {}", invariant.text));
            match check_coupling(&s.p1.typed, &s.p2.typed, invariant, *at, &ccfg) {
                Err(e) => {
                    details.push(e.to_string());
                    StepStatus::Failed
                }
                Ok(r) => match r.verdict {
                    Verdict::Pass { trials, iterations, .. } => {
                        details.push(format!(
                            "empirically validated ({trials} trials, {iterations} iterations checked)"
                        ));
                        StepStatus::EmpiricallyValidated
                    }
                    Verdict::Fail(f) => {
                        details.push(f.to_string());
                        StepStatus::Failed
                    }
                },
            }
        }
        StepJustification::Definitional { rule: Some(rule) } => match justify_step(rule, s.t1, s.t2) {
            Ok(_) => {
                details.push("alpha-equal after synonym expansion".into());
                StepStatus::Justified
            }
            Err(m) => {
                details.push(m.to_string());
                StepStatus::Failed
            }
        },
        StepJustification::Definitional { rule: None } => {
            match (expand_synonyms(s.t1), expand_synonyms(s.t2)) {
                (Ok(a), Ok(b)) => match first_difference(&a, &b) {
                    None => {
                        details.push("alpha-equal after synonym expansion".into());
                        StepStatus::Justified
                    }
                    Some((p, x, y)) => {
                        details.push(format!(
                            "terms differ after synonym expansion at /{}: {x} vs {y}",
                            p.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/")
                        ));
                        StepStatus::Failed
                    }
                },
                (Err(e), _) | (_, Err(e)) => {
                    details.push(format!("ill-typed term: {e}"));
                    StepStatus::Failed
                }
            }
        }
    };
    StepReport {
        index: s.index,
        from: s.p1.path.clone(),
        to: s.p2.path.clone(),
        method: s.just.describe(),
        status,
        details,
        millis: start.elapsed().as_millis(),
    }
}

/// Checks every step independently and the endpoints differentially.
pub fn verify_chain(m: &ChainManifest) -> VerificationReport {
    let start = Instant::now();
    let terms: Vec<T> = m.programs.par_iter().map(|p| translate(&p.typed)).collect();
    let inputs: Vec<StepInput> = m
        .steps
        .iter()
        .enumerate()
        .map(|(i, just)| StepInput {
            index: i,
            p1: &m.programs[i],
            p2: &m.programs[i + 1],
            t1: &terms[i],
            t2: &terms[i + 1],
            just,
        })
        .collect();
    let steps: Vec<StepReport> = inputs.par_iter().map(|s| run_step(s, &m.config)).collect();
    let first = &m.programs[0];
    let endpoint = differential_terms(&terms[0], terms.last().expect("two programs"), &first.typed, &m.config);
    let pass = steps.iter().all(|s| s.status != StepStatus::Failed) && endpoint.passed();
    VerificationReport {
        programs: m.programs.iter().map(|p| p.path.clone()).collect(),
        steps,
        endpoint,
        pass,
        millis: start.elapsed().as_millis(),
    }
}
