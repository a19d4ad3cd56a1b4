//! Context-independent rewrite rules: matching a named rule between two FFL
//! terms and collecting the rule's semantic obligations.

pub mod obligation;
pub mod pattern;
pub mod rules;

use std::fmt;

use serde::Serialize;

use crate::ffl::expand::expand_synonyms;
use crate::ffl::ops::{alpha_equal, first_difference, positions, replace_at, subterm_at};
use crate::ffl::pretty::render_short;
use crate::ffl::{FflType, Term, T};
pub use obligation::{check_obligation, discharge_in_context, ObligationConfig, ObligationVerdict};
pub use pattern::{match_at, match_with, Instantiation, MatchResult, Pat, TyPat};
pub use rules::{catalog, RewriteRule, RuleKind, Synonym, Variant};

#[derive(Clone, Debug, Serialize)]
pub struct RuleDescriptor {
    pub name: &'static str,
    pub definitional: bool,
    pub doc: &'static str,
    pub side_conditions: Vec<&'static str>,
    pub obligations: Vec<&'static str>,
}

pub fn list_rules() -> Vec<RuleDescriptor> {
    catalog()
        .into_iter()
        .map(|r| {
            let obligations = match &r.kind {
                RuleKind::Structural { variants, .. } => {
                    let mut v: Vec<&'static str> = Vec::new();
                    for ob in variants.iter().flat_map(|v| v.obligations.iter().map(|o| o.0)) {
                        if !v.contains(&ob) {
                            v.push(ob);
                        }
                    }
                    v
                }
                RuleKind::Definitional(_) => Vec::new(),
            };
            RuleDescriptor {
                name: r.name,
                definitional: r.is_definitional(),
                doc: r.doc,
                side_conditions: r.side_conditions.to_vec(),
                obligations,
            }
        })
        .collect()
}

pub fn find_rule(name: &str) -> Option<RewriteRule> {
    catalog().into_iter().find(|r| r.name == name)
}

/// A semantic obligation, instantiated in the context of the match position.
#[derive(Clone, Debug)]
pub struct Obligation {
    pub description: String,
    pub term: T,
}

#[derive(Clone, Debug)]
pub struct Justification {
    pub rule: String,
    /// Child-index path of the rewritten subterm; empty for definitional
    /// steps.
    pub path: Vec<usize>,
    /// Binder types on the way to `path`, outermost first.
    pub env: Vec<FflType>,
    pub instantiation: Instantiation,
    pub variant: usize,
    pub obligations: Vec<Obligation>,
    /// Further positions whose rewrite also yields the target.
    pub alternates: Vec<Vec<usize>>,
    pub positions_searched: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MismatchReason {
    UnknownRule(String),
    /// No position matched the left-hand side at all.
    NoMatch,
    SideConditionFailed { path: Vec<usize>, detail: String },
    /// A match rewrote to something other than the target.
    RewrittenDiffers {
        path: Vec<usize>,
        diff_path: Vec<usize>,
        rewritten: String,
        target: String,
    },
    ExpansionsDiffer {
        diff_path: Vec<usize>,
        src: String,
        tgt: String,
    },
    /// Definitional step whose target does not use the synonym.
    SynonymAbsent(&'static str),
    IllTyped(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub rule: String,
    pub reason: MismatchReason,
    pub positions_searched: usize,
}

fn path_str(p: &[usize]) -> String {
    let parts: Vec<String> = p.iter().map(|k| k.to_string()).collect();
    format!("/{}", parts.join("/"))
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.rule)?;
        match &self.reason {
            MismatchReason::UnknownRule(n) => write!(f, "unknown rule `{n}`"),
            MismatchReason::NoMatch => write!(
                f,
                "no position matched the left-hand side ({} positions searched)",
                self.positions_searched
            ),
            MismatchReason::SideConditionFailed { path, detail } => {
                write!(f, "side condition failed at {}: {detail}", path_str(path))
            }
            MismatchReason::RewrittenDiffers {
                path,
                diff_path,
                rewritten,
                target,
            } => write!(
                f,
                "rewriting at {} does not give the target; first difference at {}: {rewritten} vs {target}",
                path_str(path),
                path_str(diff_path)
            ),
            MismatchReason::ExpansionsDiffer { diff_path, src, tgt } => write!(
                f,
                "terms differ after synonym expansion at {}: {src} vs {tgt}",
                path_str(diff_path)
            ),
            MismatchReason::SynonymAbsent(s) => write!(f, "neither side uses {s}"),
            MismatchReason::IllTyped(m) => write!(f, "ill-typed term: {m}"),
        }
    }
}

impl std::error::Error for Mismatch {}

/// Binder types crossed on the way from the root to `path`.
pub fn env_at(t: &T, path: &[usize]) -> Vec<FflType> {
    let mut env = Vec::new();
    let mut cur = t;
    for &k in path {
        if let Term::Lam(_, ty, _) = &**cur {
            env.push(ty.clone());
        }
        cur = cur.children()[k].0;
    }
    env
}

/// Tries one variant on a successful match; yields the rewritten term.
fn apply_variant(v: &Variant, inst: &Instantiation, env: &[FflType]) -> Option<(Instantiation, T)> {
    let inst = match &v.guard {
        None => inst.clone(),
        Some((meta, p)) => match match_with(p, inst.metas.get(*meta)?, inst.clone()) {
            MatchResult::Matched(i) => i,
            _ => return None,
        },
    };
    let rhs = inst.build(&v.rhs, env).ok()?;
    Some((inst, rhs))
}

/// Rebuilds the target from a justification: the rule's right-hand side,
/// instantiated and placed at the recorded path. `None` for definitional
/// steps.
pub fn replay(src: &T, j: &Justification) -> Option<T> {
    let rule = find_rule(&j.rule)?;
    let RuleKind::Structural { variants, .. } = &rule.kind else {
        return None;
    };
    let rhs = j.instantiation.build(&variants[j.variant].rhs, &j.env).ok()?;
    Some(replace_at(src, &j.path, rhs))
}

/// Looks for a position of `src` where `rule` rewrites it into `tgt`.
pub fn justify_step(rule: &str, src: &T, tgt: &T) -> Result<Justification, Mismatch> {
    let mismatch = |reason, n| Mismatch {
        rule: rule.to_string(),
        reason,
        positions_searched: n,
    };
    let Some(r) = find_rule(rule) else {
        return Err(mismatch(MismatchReason::UnknownRule(rule.to_string()), 0));
    };
    match &r.kind {
        RuleKind::Definitional(syn) => justify_definitional(rule, *syn, src, tgt),
        RuleKind::Structural { lhs, variants } => {
            let all = positions(src);
            let mut found: Option<Justification> = None;
            let mut alternates = Vec::new();
            let mut side: Option<MismatchReason> = None;
            let mut differs: Option<MismatchReason> = None;
            for (path, _) in &all {
                let (sub, _) = subterm_at(src, path).expect("valid position");
                let inst = match match_at(lhs, sub) {
                    MatchResult::Matched(i) => i,
                    MatchResult::SideCondition(detail) => {
                        side.get_or_insert(MismatchReason::SideConditionFailed {
                            path: path.clone(),
                            detail,
                        });
                        continue;
                    }
                    MatchResult::NoMatch => continue,
                };
                let env = env_at(src, path);
                for (vi, v) in variants.iter().enumerate() {
                    let Some((inst, rhs)) = apply_variant(v, &inst, &env) else {
                        continue;
                    };
                    let rewritten = replace_at(src, path, rhs);
                    if alpha_equal(&rewritten, tgt) {
                        if found.is_some() {
                            alternates.push(path.clone());
                        } else {
                            let obligations = v
                                .obligations
                                .iter()
                                .filter_map(|(d, p)| {
                                    inst.build(p, &env).ok().map(|t| Obligation {
                                        description: d.to_string(),
                                        term: t,
                                    })
                                })
                                .collect();
                            found = Some(Justification {
                                rule: rule.to_string(),
                                path: path.clone(),
                                env: env.clone(),
                                instantiation: inst,
                                variant: vi,
                                obligations,
                                alternates: Vec::new(),
                                positions_searched: all.len(),
                            });
                        }
                        break;
                    } else if differs.is_none() {
                        let (diff_path, a, b) =
                            first_difference(&rewritten, tgt).expect("terms differ");
                        differs = Some(MismatchReason::RewrittenDiffers {
                            path: path.clone(),
                            diff_path,
                            rewritten: a,
                            target: b,
                        });
                    }
                }
            }
            match found {
                Some(mut j) => {
                    j.alternates = alternates;
                    Ok(j)
                }
                None => Err(mismatch(
                    differs.or(side).unwrap_or(MismatchReason::NoMatch),
                    all.len(),
                )),
            }
        }
    }
}

fn has_node(t: &Term, syn: Synonym) -> bool {
    let here = match syn {
        Synonym::FlatMap => matches!(t, Term::FlatMap(..)),
        Synonym::ReduceByKey => matches!(t, Term::ReduceByKey(..)),
    };
    here || t.children().iter().any(|(c, _)| has_node(c, syn))
}

fn justify_definitional(rule: &str, syn: Synonym, src: &T, tgt: &T) -> Result<Justification, Mismatch> {
    let mismatch = |reason| Mismatch {
        rule: rule.to_string(),
        reason,
        positions_searched: 1,
    };
    if !has_node(tgt, syn) && !has_node(src, syn) {
        return Err(mismatch(MismatchReason::SynonymAbsent(match syn {
            Synonym::FlatMap => "flatMap",
            Synonym::ReduceByKey => "reduceByKey",
        })));
    }
    let es = expand_synonyms(src).map_err(|e| mismatch(MismatchReason::IllTyped(e.to_string())))?;
    let et = expand_synonyms(tgt).map_err(|e| mismatch(MismatchReason::IllTyped(e.to_string())))?;
    if let Some((diff_path, a, b)) = first_difference(&es, &et) {
        return Err(mismatch(MismatchReason::ExpansionsDiffer {
            diff_path,
            src: a,
            tgt: b,
        }));
    }
    Ok(Justification {
        rule: rule.to_string(),
        path: Vec::new(),
        env: Vec::new(),
        instantiation: Instantiation::default(),
        variant: 0,
        obligations: Vec::new(),
        alternates: Vec::new(),
        positions_searched: 1,
    })
}

impl Justification {
    /// The instantiation rendered for reports.
    pub fn rendered_bindings(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .instantiation
            .metas
            .iter()
            .map(|(k, v)| (k.clone(), render_short(v)))
            .collect();
        out.extend(
            self.instantiation
                .funs
                .iter()
                .map(|(k, (n, body))| (format!("{k}/{n}"), render_short(body))),
        );
        out
    }
}
