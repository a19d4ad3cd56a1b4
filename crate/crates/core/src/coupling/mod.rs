//! Context-dependent steps: two programs with one main loop each are run in
//! lockstep on the same inputs while a relational invariant over both states
//! is checked at a chosen program point.

pub mod predicate;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::gen::{gen_args, infer_profile, Bounds, GenError, Profile};
use crate::il::ast::{Stmt, StmtKind};
use crate::il::interp::Machine;
use crate::il::typeck::{Binding, TypedProgram};
use crate::value::{render_args, Stop, Value};
pub use predicate::{evaluate_predicate, parse_predicate, CouplingPredicate, ResolvedPredicate};

/// Where the invariant is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(Default)]
pub enum AnnotationPoint {
    /// Before the first guard and after every iteration.
    LoopHead,
    /// After every iteration only.
    #[default]
    LoopEnd,
    /// Inside every iteration, once side 1 has run `k1` body statements and
    /// side 2 has run `k2`.
    Body(usize, usize),
}


impl fmt::Display for AnnotationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotationPoint::LoopHead => f.write_str("loop-head"),
            AnnotationPoint::LoopEnd => f.write_str("loop-end"),
            AnnotationPoint::Body(a, b) => write!(f, "body:{a}:{b}"),
        }
    }
}

impl FromStr for AnnotationPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "loop-head" => Ok(AnnotationPoint::LoopHead),
            "loop-end" => Ok(AnnotationPoint::LoopEnd),
            _ => {
                let bad = || format!("`{s}` is not loop-head, loop-end or body:K1:K2");
                let rest = s.strip_prefix("body:").ok_or_else(bad)?;
                let (a, b) = rest.split_once(':').ok_or_else(bad)?;
                Ok(AnnotationPoint::Body(
                    a.parse().map_err(|_| bad())?,
                    b.parse().map_err(|_| bad())?,
                ))
            }
        }
    }
}

impl Serialize for AnnotationPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LoopKind {
    While,
    /// A `for` loop, run as a while loop guarded by its position.
    For,
}

/// One side of the product: the body splits into the statements before the
/// loop, the loop and the statements after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LoopSide {
    pub loop_index: usize,
    pub kind: LoopKind,
    pub body_len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProductLoop {
    pub sides: [LoopSide; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureError {
    pub side: usize,
    pub message: String,
}

impl fmt::Display for StructureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "program {}: {}", self.side, self.message)
    }
}

impl std::error::Error for StructureError {}

fn contains_return(s: &[Stmt]) -> bool {
    s.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::For { body, .. } | StmtKind::While { body, .. } => contains_return(body),
        _ => false,
    })
}

fn split_side(p: &TypedProgram, side: usize) -> Result<LoopSide, StructureError> {
    let body = &p.program.body;
    let err = |m: String| StructureError { side, message: m };
    let whiles: Vec<usize> = (0..body.len())
        .filter(|&i| matches!(body[i].kind, StmtKind::While { .. }))
        .collect();
    let (idx, kind) = match whiles.as_slice() {
        [i] => (*i, LoopKind::While),
        [] => {
            let fors: Vec<usize> = (0..body.len())
                .filter(|&i| matches!(body[i].kind, StmtKind::For { .. }))
                .collect();
            match fors.as_slice() {
                [i] => (*i, LoopKind::For),
                [] => return Err(err("no top-level loop".into())),
                _ => return Err(err(format!("{} top-level for loops and no while loop", fors.len()))),
            }
        }
        _ => return Err(err(format!("{} top-level while loops", whiles.len()))),
    };
    if contains_return(&body[..idx]) {
        return Err(err("return before the main loop".into()));
    }
    let lbody = loop_body(&body[idx]);
    if contains_return(lbody) {
        return Err(err("return inside the main loop".into()));
    }
    Ok(LoopSide {
        loop_index: idx,
        kind,
        body_len: lbody.len(),
    })
}

fn loop_body(s: &Stmt) -> &[Stmt] {
    match &s.kind {
        StmtKind::For { body, .. } | StmtKind::While { body, .. } => body,
        _ => &[],
    }
}

pub fn build_product(p1: &TypedProgram, p2: &TypedProgram) -> Result<ProductLoop, StructureError> {
    Ok(ProductLoop {
        sides: [split_side(p1, 1)?, split_side(p2, 2)?],
    })
}

/// Variables visible on one side at an annotation point.
pub fn scope_at(p: &TypedProgram, side: &LoopSide, at: AnnotationPoint, which: usize) -> Result<Vec<Binding>, String> {
    let lp = &p.program.body[side.loop_index];
    let k = match at {
        AnnotationPoint::LoopHead | AnnotationPoint::LoopEnd => return Ok(p.scopes[lp.id].clone()),
        AnnotationPoint::Body(a, b) => {
            if which == 1 {
                a
            } else {
                b
            }
        }
    };
    let body = loop_body(lp);
    if k > body.len() {
        return Err(format!(
            "program {which}: the loop body has {} statements, cannot stop after {k}",
            body.len()
        ));
    }
    if k < body.len() {
        return Ok(p.scopes[body[k].id].clone());
    }
    match body.last() {
        Some(last) => Ok(p.scope_after(last)),
        None => {
            let mut s = p.scopes[lp.id].clone();
            if let (StmtKind::For { var, .. }, Some(t)) = (&lp.kind, &p.decl_types[lp.id]) {
                s.push(Binding {
                    name: var.clone(),
                    ty: t.clone(),
                    kind: crate::il::typeck::BindingKind::LoopVar,
                });
            }
            Ok(s)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CouplingConfig {
    pub trials: u64,
    pub seed: u64,
    pub budget: u64,
    pub bounds: Bounds,
    /// Overrides the profile inferred from the parameter types.
    pub profile: Option<Profile>,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig {
            trials: 200,
            seed: 42,
            budget: 1_000_000,
            bounds: Bounds::default(),
            profile: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailKind {
    InvariantBrokenAtEntry,
    InvariantBrokenAfterIteration,
    GuardDisagreement,
    OutputMismatch,
    SideDivergence,
    /// A runtime error on one side.
    SideError,
    /// The invariant itself could not be evaluated.
    PredicateError,
}

impl fmt::Display for FailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub kind: FailKind,
    /// Replay with this seed and trial index.
    pub seed: u64,
    pub trial: u64,
    #[serde(serialize_with = "ser_args")]
    pub inputs: Vec<Value>,
    pub iteration: Option<u64>,
    pub detail: String,
    pub state1: String,
    pub state2: String,
}

fn ser_args<S: Serializer>(v: &[Value], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&render_args(v))
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (seed {}, trial {}", self.kind, self.seed, self.trial)?;
        if let Some(i) = self.iteration {
            write!(f, ", iteration {i}")?;
        }
        write!(f, ") on input {}: {}", render_args(&self.inputs), self.detail)?;
        if !self.state1.is_empty() || !self.state2.is_empty() {
            write!(f, "\n  side 1: {}\n  side 2: {}", self.state1, self.state2)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    Pass {
        trials: u64,
        /// Loop iterations checked, summed over all trials.
        iterations: u64,
        /// Iterations of each trial; both sides always agree on it.
        per_trial: Vec<u64>,
    },
    Fail(Box<Failure>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub predicate: String,
    pub at: AnnotationPoint,
    pub profile: Profile,
    pub verdict: Verdict,
}

impl CouplingReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingError {
    Structure(StructureError),
    Predicate(String),
    Signature(String),
    Gen(GenError),
}

impl fmt::Display for CouplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingError::Structure(e) => write!(f, "loop structure: {e}"),
            CouplingError::Predicate(m) => write!(f, "invariant: {m}"),
            CouplingError::Signature(m) => write!(f, "signatures differ: {m}"),
            CouplingError::Gen(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CouplingError {}

/// A checked coupling problem, ready to run trials.
pub struct Product<'a> {
    pub p: [&'a TypedProgram; 2],
    pub shape: ProductLoop,
    pub inv: ResolvedPredicate,
    pub at: AnnotationPoint,
}

impl<'a> Product<'a> {
    pub fn new(
        p1: &'a TypedProgram,
        p2: &'a TypedProgram,
        inv: &CouplingPredicate,
        at: AnnotationPoint,
    ) -> Result<Product<'a>, CouplingError> {
        if p1.param_types() != p2.param_types() {
            return Err(CouplingError::Signature(format!(
                "parameters {:?} vs {:?}",
                p1.param_types(),
                p2.param_types()
            )));
        }
        if p1.ret != p2.ret {
            return Err(CouplingError::Signature(format!("returns {} vs {}", p1.ret, p2.ret)));
        }
        let shape = build_product(p1, p2).map_err(CouplingError::Structure)?;
        let s1 = scope_at(p1, &shape.sides[0], at, 1).map_err(CouplingError::Predicate)?;
        let s2 = scope_at(p2, &shape.sides[1], at, 2).map_err(CouplingError::Predicate)?;
        let inv = inv.resolve(&s1, &s2).map_err(CouplingError::Predicate)?;
        Ok(Product {
            p: [p1, p2],
            shape,
            inv,
            at,
        })
    }

    pub fn profile(&self, cfg: &CouplingConfig) -> Profile {
        cfg.profile
            .unwrap_or_else(|| infer_profile(&self.p[0].param_types()))
    }

    /// Runs one trial; yields the number of iterations both loops made.
    pub fn run_trial(&self, cfg: &CouplingConfig, trial: u64) -> Result<u64, Box<Failure>> {
        let args = gen_args(&self.p[0].param_types(), self.profile(cfg), cfg.seed, trial, &cfg.bounds)
            .map_err(|e| {
                Box::new(Failure {
                    kind: FailKind::SideError,
                    seed: cfg.seed,
                    trial,
                    inputs: Vec::new(),
                    iteration: None,
                    detail: e.to_string(),
                    state1: String::new(),
                    state2: String::new(),
                })
            })?;
        Lockstep::new(self, cfg, trial, args).run()
    }
}

struct SideRun<'a> {
    p: &'a TypedProgram,
    shape: LoopSide,
    m: Machine<'a>,
    items: Vec<Value>,
}

impl<'a> SideRun<'a> {
    fn lp(&self) -> &'a Stmt {
        &self.p.program.body[self.shape.loop_index]
    }

    fn body(&self) -> &'a [Stmt] {
        loop_body(self.lp())
    }

    fn prelude(&mut self) -> Result<(), Stop> {
        for s in &self.p.program.body[..self.shape.loop_index] {
            self.m.exec(s)?;
        }
        if let StmtKind::For { iterable, .. } = &self.lp().kind {
            match self.m.eval(iterable)? {
                Value::Array(xs) => self.items = xs,
                _ => unreachable!("checked iterable"),
            }
        }
        Ok(())
    }

    fn guard(&mut self, n: u64) -> Result<bool, Stop> {
        match &self.lp().kind {
            StmtKind::While { cond, .. } => self.m.guard(cond),
            _ => Ok((n as usize) < self.items.len()),
        }
    }

    fn enter(&mut self, n: u64) -> Result<(), Stop> {
        self.m.tick()?;
        if let StmtKind::For { var, .. } = &self.lp().kind {
            self.m.push_frame();
            self.m.bind(var, self.items[n as usize].clone());
        }
        self.m.push_frame();
        Ok(())
    }

    fn run(&mut self, from: usize, to: usize) -> Result<(), Stop> {
        let body = self.body();
        for s in &body[from..to] {
            self.m.exec(s)?;
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.m.pop_frame();
        if matches!(self.lp().kind, StmtKind::For { .. }) {
            self.m.pop_frame();
        }
    }

    fn postlude(&mut self) -> Result<Value, Stop> {
        for s in &self.p.program.body[self.shape.loop_index + 1..] {
            if let Some(v) = self.m.exec(s)? {
                return Ok(v);
            }
        }
        unreachable!("checked programs end with return")
    }

    fn state(&self) -> String {
        self.m
            .snapshot()
            .iter()
            .map(|(n, v)| format!("{n} = {v}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

struct Lockstep<'a, 'b> {
    prod: &'b Product<'a>,
    seed: u64,
    trial: u64,
    args: Vec<Value>,
    sides: [SideRun<'a>; 2],
}

impl<'a, 'b> Lockstep<'a, 'b> {
    fn new(prod: &'b Product<'a>, cfg: &CouplingConfig, trial: u64, args: Vec<Value>) -> Self {
        let mk = |k: usize| {
            let p = prod.p[k];
            let mut m = Machine::new(&p.table, cfg.budget);
            for (param, v) in p.program.params.iter().zip(&args) {
                m.bind(&param.name, v.clone());
            }
            SideRun {
                p,
                shape: prod.shape.sides[k],
                m,
                items: Vec::new(),
            }
        };
        Lockstep {
            prod,
            seed: cfg.seed,
            trial,
            sides: [mk(0), mk(1)],
            args,
        }
    }

    fn fail(&self, kind: FailKind, iteration: Option<u64>, detail: String) -> Box<Failure> {
        Box::new(Failure {
            kind,
            seed: self.seed,
            trial: self.trial,
            inputs: self.args.clone(),
            iteration,
            detail,
            state1: self.sides[0].state(),
            state2: self.sides[1].state(),
        })
    }

    fn side(&mut self, k: usize, iteration: Option<u64>, f: impl FnOnce(&mut SideRun<'a>) -> Result<(), Stop>) -> Result<(), Box<Failure>> {
        match f(&mut self.sides[k]) {
            Ok(()) => Ok(()),
            Err(Stop::Diverged(n)) => Err(self.fail(
                FailKind::SideDivergence,
                iteration,
                format!("program {} exhausted its budget after {n} steps", k + 1),
            )),
            Err(Stop::Error(e)) => Err(self.fail(
                FailKind::SideError,
                iteration,
                format!("program {} failed: {e}", k + 1),
            )),
        }
    }

    fn check(&self, kind: FailKind, iteration: Option<u64>) -> Result<(), Box<Failure>> {
        let s1 = self.sides[0].m.snapshot();
        let s2 = self.sides[1].m.snapshot();
        match evaluate_predicate(&self.prod.inv, &s1, &s2) {
            Ok(true) => Ok(()),
            Ok(false) => Err(self.fail(
                kind,
                iteration,
                format!("invariant false at {}", self.prod.at),
            )),
            Err(e) => Err(self.fail(FailKind::PredicateError, iteration, e)),
        }
    }

    fn run(mut self) -> Result<u64, Box<Failure>> {
        self.side(0, None, |s| s.prelude())?;
        self.side(1, None, |s| s.prelude())?;
        let at = self.prod.at;
        if at == AnnotationPoint::LoopHead {
            self.check(FailKind::InvariantBrokenAtEntry, None)?;
        }
        let mut n = 0u64;
        loop {
            let mut g = [false; 2];
            for k in 0..2 {
                let mut out = false;
                self.side(k, Some(n), |s| {
                    out = s.guard(n)?;
                    Ok(())
                })?;
                g[k] = out;
            }
            if g[0] != g[1] {
                return Err(self.fail(
                    FailKind::GuardDisagreement,
                    Some(n),
                    format!("guards evaluate to {} and {}", g[0], g[1]),
                ));
            }
            if !g[0] {
                break;
            }
            self.side(0, Some(n), |s| s.enter(n))?;
            self.side(1, Some(n), |s| s.enter(n))?;
            let lens = [self.sides[0].shape.body_len, self.sides[1].shape.body_len];
            match at {
                AnnotationPoint::Body(k1, k2) => {
                    self.side(0, Some(n), |s| s.run(0, k1))?;
                    self.side(1, Some(n), |s| s.run(0, k2))?;
                    self.check(FailKind::InvariantBrokenAfterIteration, Some(n))?;
                    self.side(0, Some(n), |s| s.run(k1, lens[0]))?;
                    self.side(1, Some(n), |s| s.run(k2, lens[1]))?;
                }
                _ => {
                    self.side(0, Some(n), |s| s.run(0, lens[0]))?;
                    self.side(1, Some(n), |s| s.run(0, lens[1]))?;
                }
            }
            self.sides[0].leave();
            self.sides[1].leave();
            if matches!(at, AnnotationPoint::LoopHead | AnnotationPoint::LoopEnd) {
                self.check(FailKind::InvariantBrokenAfterIteration, Some(n))?;
            }
            n += 1;
        }
        let mut out: [Option<Value>; 2] = [None, None];
        for k in 0..2 {
            let mut v = None;
            self.side(k, None, |s| {
                v = Some(s.postlude()?);
                Ok(())
            })?;
            out[k] = v;
        }
        if out[0] != out[1] {
            let (a, b) = (out[0].as_ref().unwrap(), out[1].as_ref().unwrap());
            return Err(self.fail(FailKind::OutputMismatch, None, format!("results {a} and {b}")));
        }
        Ok(n)
    }
}

/// Checks the invariant on `cfg.trials` generated inputs.
pub fn check_coupling(
    p1: &TypedProgram,
    p2: &TypedProgram,
    inv: &CouplingPredicate,
    at: AnnotationPoint,
    cfg: &CouplingConfig,
) -> Result<CouplingReport, CouplingError> {
    let prod = Product::new(p1, p2, inv, at)?;
    let profile = prod.profile(cfg);
    // Surface generator problems up front instead of as a failed trial.
    gen_args(&p1.param_types(), profile, cfg.seed, 0, &cfg.bounds).map_err(CouplingError::Gen)?;
    let results: Vec<Result<u64, Box<Failure>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| prod.run_trial(cfg, t))
        .collect();
    let mut per_trial = Vec::with_capacity(results.len());
    let mut verdict = None;
    for r in results {
        match r {
            Ok(n) => per_trial.push(n),
            Err(f) => {
                verdict = Some(Verdict::Fail(f));
                break;
            }
        }
    }
    let verdict = verdict.unwrap_or_else(|| Verdict::Pass {
        trials: cfg.trials,
        iterations: per_trial.iter().sum(),
        per_trial,
    });
    Ok(CouplingReport {
        predicate: inv.text.clone(),
        at,
        profile,
        verdict,
    })
}

/// Reruns the trial of a failure.
pub fn replay(
    p1: &TypedProgram,
    p2: &TypedProgram,
    inv: &CouplingPredicate,
    at: AnnotationPoint,
    cfg: &CouplingConfig,
    trial: u64,
) -> Result<Result<u64, Box<Failure>>, CouplingError> {
    let prod = Product::new(p1, p2, inv, at)?;
    Ok(prod.run_trial(cfg, trial))
}
