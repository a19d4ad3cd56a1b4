//! Verification reports, as text or JSON.

use std::fmt::Write;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepStatus {
    /// Rewrite or definitional step accepted; obligations tested.
    Justified,
    /// Coupling invariant held on every trial.
    EmpiricallyValidated,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub from: String,
    pub to: String,
    pub method: String,
    pub status: StepStatus,
    /// Human-readable lines: bindings, obligations, failure diagnostics.
    pub details: Vec<String>,
    pub millis: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub trial: u64,
    pub inputs: String,
    pub first: String,
    pub second: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffSummary {
    pub trials: u64,
    pub mismatches: u64,
    /// Trials on which both sides ran out of budget.
    pub diverged: u64,
    pub witness: Option<Witness>,
    /// Set when inputs could not be generated at all.
    pub error: Option<String>,
}

impl DiffSummary {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.error.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub programs: Vec<String>,
    pub steps: Vec<StepReport>,
    pub endpoint: DiffSummary,
    pub pass: bool,
    pub millis: u128,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self, verbose: bool) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let status = match s.status {
                StepStatus::Justified => "JUSTIFIED",
                StepStatus::EmpiricallyValidated => "EMPIRICALLY VALIDATED",
                StepStatus::Failed => "FAILED",
            };
            writeln!(
                out,
                "step {} {} -> {} [{}]: {status} ({} ms)",
                s.index + 1,
                s.from,
                s.to,
                s.method,
                s.millis
            )
            .unwrap();
            if verbose || s.status == StepStatus::Failed {
                for d in &s.details {
                    writeln!(out, "    {d}").unwrap();
                }
            }
        }
        let e = &self.endpoint;
        write!(
            out,
            "endpoints {} vs {}: {} trials, {} mismatches",
            self.programs.first().map(String::as_str).unwrap_or("?"),
            self.programs.last().map(String::as_str).unwrap_or("?"),
            e.trials,
            e.mismatches
        )
        .unwrap();
        if e.diverged > 0 {
            write!(out, ", {} diverged on both sides", e.diverged).unwrap();
        }
        out.push('\n');
        if let Some(err) = &e.error {
            writeln!(out, "    {err}").unwrap();
        }
        if let Some(w) = &e.witness {
            writeln!(
                out,
                "    trial {} input {}: {} vs {}",
                w.trial, w.inputs, w.first, w.second
            )
            .unwrap();
        }
        writeln!(
            out,
            "overall: {} ({} ms)",
            if self.pass { "PASS" } else { "FAIL" },
            self.millis
        )
        .unwrap();
        out
    }
}
