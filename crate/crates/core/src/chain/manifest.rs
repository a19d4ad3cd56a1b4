//! Chain manifests: a JSON document listing the programs of a chain and the
//! justification of every adjacent pair.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::coupling::{parse_predicate, AnnotationPoint, CouplingPredicate};
use crate::gen::{Bounds, Profile};
use crate::il::{load, TypedProgram};
use crate::rewrite::find_rule;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestError {
    /// JSON path of the offending field, such as `steps[3].rule`.
    pub field: String,
    pub cause: String,
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.cause)
    }
}

impl std::error::Error for ManifestError {}

fn merr(field: impl Into<String>, cause: impl Into<String>) -> ManifestError {
    ManifestError {
        field: field.into(),
        cause: cause.into(),
    }
}

#[derive(Clone, Debug)]
pub struct ChainProgram {
    pub path: String,
    pub source: String,
    pub typed: TypedProgram,
}

#[derive(Clone, Debug)]
pub enum StepJustification {
    Rewrite { rule: String },
    Coupling { invariant: CouplingPredicate, at: AnnotationPoint },
    /// Same term after expanding synonyms. `rule` optionally names the
    /// definitional rule, which then also requires the synonym to occur.
    Definitional { rule: Option<String> },
}

impl StepJustification {
    pub fn kind_letter(&self) -> char {
        match self {
            StepJustification::Rewrite { .. } => 'R',
            StepJustification::Coupling { .. } => 'C',
            StepJustification::Definitional { .. } => 'D',
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StepJustification::Rewrite { rule } => format!("rewrite {rule}"),
            StepJustification::Coupling { at, .. } => format!("coupling at {at}"),
            StepJustification::Definitional { rule: Some(r) } => format!("definitional {r}"),
            StepJustification::Definitional { rule: None } => "definitional".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainConfig {
    pub trials: u64,
    pub seed: u64,
    pub budget: u64,
    pub bounds: Bounds,
    pub profile: Option<Profile>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            trials: 200,
            seed: 42,
            budget: 1_000_000,
            bounds: Bounds::default(),
            profile: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainManifest {
    pub programs: Vec<ChainProgram>,
    pub steps: Vec<StepJustification>,
    pub config: ChainConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    programs: Vec<String>,
    steps: Vec<RawStep>,
    #[serde(default)]
    config: RawConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    kind: String,
    rule: Option<String>,
    invariant: Option<String>,
    at: Option<String>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawConfig {
    trials: Option<u64>,
    seed: Option<u64>,
    budget: Option<u64>,
    max_graph: Option<usize>,
    max_iter: Option<u32>,
    max_len: Option<usize>,
    int_range: Option<i64>,
    inputs: Option<Profile>,
}

fn step(i: usize, s: RawStep) -> Result<StepJustification, ManifestError> {
    let f = |name: &str| format!("steps[{i}].{name}");
    let forbid = |present: bool, name: &str| {
        if present {
            Err(merr(f(name), format!("not allowed for a {} step", s.kind)))
        } else {
            Ok(())
        }
    };
    match s.kind.as_str() {
        "rewrite" => {
            forbid(s.invariant.is_some(), "invariant")?;
            forbid(s.at.is_some(), "at")?;
            let rule = s.rule.clone().ok_or_else(|| merr(f("rule"), "missing"))?;
            match find_rule(&rule) {
                None => Err(merr(f("rule"), format!("unknown rule `{rule}`"))),
                Some(r) if r.is_definitional() => Err(merr(
                    f("rule"),
                    format!("`{rule}` is definitional; use a definitional step"),
                )),
                Some(_) => Ok(StepJustification::Rewrite { rule }),
            }
        }
        "coupling" => {
            forbid(s.rule.is_some(), "rule")?;
            let text = s.invariant.clone().ok_or_else(|| merr(f("invariant"), "missing"))?;
            let invariant = parse_predicate(&text).map_err(|e| merr(f("invariant"), e.to_string()))?;
            let at = match &s.at {
                None => AnnotationPoint::default(),
                Some(a) => a.parse().map_err(|e: String| merr(f("at"), e))?,
            };
            Ok(StepJustification::Coupling { invariant, at })
        }
        "definitional" => {
            forbid(s.invariant.is_some(), "invariant")?;
            forbid(s.at.is_some(), "at")?;
            if let Some(rule) = &s.rule {
                match find_rule(rule) {
                    Some(r) if r.is_definitional() => {}
                    Some(_) => return Err(merr(f("rule"), format!("`{rule}` is not definitional"))),
                    None => return Err(merr(f("rule"), format!("unknown rule `{rule}`"))),
                }
            }
            Ok(StepJustification::Definitional { rule: s.rule })
        }
        other => Err(merr(
            f("kind"),
            format!("`{other}` is not rewrite, coupling or definitional"),
        )),
    }
}

/// Parses and validates a manifest. `resolve` maps a program path as
/// written in the manifest to its source text.
pub fn parse_manifest(text: &str, resolve: &dyn Fn(&str) -> Result<String, String>) -> Result<ChainManifest, ManifestError> {
    let raw: RawManifest = serde_json::from_str(text).map_err(|e| merr("$", e.to_string()))?;
    if raw.programs.len() < 2 {
        return Err(merr("programs", "a chain needs at least two programs"));
    }
    if raw.steps.len() + 1 != raw.programs.len() {
        return Err(merr(
            "steps",
            format!(
                "{} programs need {} steps, found {}",
                raw.programs.len(),
                raw.programs.len() - 1,
                raw.steps.len()
            ),
        ));
    }
    let mut programs = Vec::with_capacity(raw.programs.len());
    for (i, path) in raw.programs.iter().enumerate() {
        let field = format!("programs[{i}]");
        let source = resolve(path).map_err(|e| merr(&field, e))?;
        let typed = load(&source).map_err(|e| merr(&field, e.render(path)))?;
        programs.push(ChainProgram {
            path: path.clone(),
            source,
            typed,
        });
    }
    let steps = raw
        .steps
        .into_iter()
        .enumerate()
        .map(|(i, s)| step(i, s))
        .collect::<Result<Vec<_>, _>>()?;
    let c = raw.config;
    let d = ChainConfig::default();
    let config = ChainConfig {
        trials: c.trials.unwrap_or(d.trials),
        seed: c.seed.unwrap_or(d.seed),
        budget: c.budget.unwrap_or(d.budget),
        bounds: Bounds {
            max_graph: c.max_graph.unwrap_or(d.bounds.max_graph),
            max_iter: c.max_iter.unwrap_or(d.bounds.max_iter),
            max_len: c.max_len.unwrap_or(d.bounds.max_len),
            int_range: c.int_range.unwrap_or(d.bounds.int_range),
        },
        profile: c.inputs,
    };
    if config.bounds.max_graph == 0 {
        return Err(merr("config.maxGraph", "must be at least 1"));
    }
    Ok(ChainManifest {
        programs,
        steps,
        config,
    })
}

/// Reads a manifest file; program paths are relative to its directory.
pub fn load_manifest(path: &Path) -> Result<ChainManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|e| merr("$", format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, &|p: &str| {
        let full = dir.join(p);
        std::fs::read_to_string(&full).map_err(|e| format!("{}: {e}", full.display()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROG: &str = "fn f(xs: [Int]) -> [Int] { var s := xs; for (x : xs) { s := s; } return s; }";

    fn res(_: &str) -> Result<String, String> {
        Ok(PROG.to_string())
    }

    #[test]
    fn unknown_rule() {
        let m = r#"{"programs": ["a.il", "b.il"], "steps": [{"kind": "rewrite", "rule": "fold-fuse"}]}"#;
        let e = parse_manifest(m, &res).unwrap_err();
        assert_eq!(e.field, "steps[0].rule");
    }

    #[test]
    fn arity() {
        let m = r#"{"programs": ["a.il", "b.il", "c.il"], "steps": [{"kind": "definitional"}]}"#;
        let e = parse_manifest(m, &res).unwrap_err();
        assert_eq!(e.field, "steps");
    }

    #[test]
    fn missing_file() {
        let m = r#"{"programs": ["a.il", "b.il"], "steps": [{"kind": "definitional"}]}"#;
        let e = parse_manifest(m, &|p: &str| Err(format!("{p}: not found"))).unwrap_err();
        assert_eq!(e.field, "programs[0]");
    }

    #[test]
    fn bad_annotation_point() {
        let m = r#"{"programs": ["a.il", "b.il"],
                    "steps": [{"kind": "coupling", "invariant": "s_1 = s_2", "at": "middle"}]}"#;
        assert_eq!(parse_manifest(m, &res).unwrap_err().field, "steps[0].at");
    }

    #[test]
    fn config_overrides() {
        let m = r#"{"programs": ["a.il", "b.il"], "steps": [{"kind": "definitional"}],
                    "config": {"trials": 7, "maxGraph": 3, "inputs": "any"}}"#;
        let c = parse_manifest(m, &res).unwrap().config;
        assert_eq!(c.trials, 7);
        assert_eq!(c.bounds.max_graph, 3);
        assert_eq!(c.profile, Some(Profile::Any));
        assert_eq!(c.seed, 42);
    }
}
