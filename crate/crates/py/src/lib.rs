//! Python bindings: load and run IL programs, translate them, and verify
//! chain manifests.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyTuple};

use mrv_core::chain::{load_manifest, verify_chain, ChainManifest, StepStatus, VerificationReport};
use mrv_core::coupling::{check_coupling, parse_predicate, AnnotationPoint, CouplingConfig, Verdict};
use mrv_core::ffl::{alpha_equal, render};
use mrv_core::il::{interpret_il, load, parse_args, TypedProgram};
use mrv_core::rewrite::{justify_step, list_rules};
use mrv_core::translate::translate;
use mrv_core::{corpus, Outcome, Value};

fn verr(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    py.import_bound("fractions")?.getattr("Fraction")
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    Ok(match v {
        Value::Int(n) => n.to_object(py),
        Value::Rat(r) => fraction(py)?.call1((r.numer().to_object(py), r.denom().to_object(py)))?.unbind(),
        Value::Bool(b) => b.to_object(py),
        Value::Unit => PyTuple::empty_bound(py).into_any().unbind(),
        Value::Array(xs) => {
            let items = xs.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new_bound(py, items).into_any().unbind()
        }
        Value::Pair(a, b) => PyTuple::new_bound(py, [to_py(py, a)?, to_py(py, b)?]).into_any().unbind(),
        Value::Inl(a) => PyTuple::new_bound(py, ["inl".to_object(py), to_py(py, a)?]).into_any().unbind(),
        Value::Inr(b) => PyTuple::new_bound(py, ["inr".to_object(py), to_py(py, b)?]).into_any().unbind(),
        Value::Closure(_) => return Err(PyValueError::new_err("functions have no Python value")),
    })
}

/// A parsed and type-checked IL program.
#[pyclass(module = "mrv", frozen)]
struct Program {
    inner: TypedProgram,
}

#[pymethods]
impl Program {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        load(source)
            .map(|inner| Program { inner })
            .map_err(|e| verr(e.render("<source>")))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let src = std::fs::read_to_string(&path).map_err(|e| verr(format!("{}: {e}", path.display())))?;
        load(&src)
            .map(|inner| Program { inner })
            .map_err(|e| verr(e.render(&path.display().to_string())))
    }

    /// A program of the shipped corpus, e.g. `"pagerank/listing-1"`.
    #[staticmethod]
    fn from_corpus(id: &str) -> PyResult<Self> {
        let e = corpus::get_program(id).map_err(verr)?;
        Program::new(e.source)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.program.name.clone()
    }

    /// `(name, type)` pairs.
    #[getter]
    fn params(&self) -> Vec<(String, String)> {
        self.inner
            .program
            .params
            .iter()
            .map(|p| (p.name.clone(), p.ty.to_string()))
            .collect()
    }

    #[getter]
    fn return_type(&self) -> String {
        self.inner.ret.to_string()
    }

    /// Runs the program on IL argument literals such as `"[[1],[0]], 1/2, 3"`.
    /// Rationals come back as `Fraction`, pairs as tuples. Raises
    /// `RuntimeError` when the program fails or runs out of budget.
    #[pyo3(signature = (args, budget = 1_000_000))]
    fn run(&self, py: Python<'_>, args: &str, budget: u64) -> PyResult<PyObject> {
        let vals = parse_args(args, &self.inner, budget).map_err(verr)?;
        match py.allow_threads(|| interpret_il(&self.inner, &vals, budget)) {
            Outcome::Val(v) => to_py(py, &v),
            other => Err(PyRuntimeError::new_err(other.to_string())),
        }
    }

    /// The FFL translation, pretty-printed.
    fn translate(&self) -> String {
        render(&translate(&self.inner))
    }

    /// True when both programs translate to alpha-equal terms.
    fn same_translation(&self, other: &Program) -> bool {
        alpha_equal(&translate(&self.inner), &translate(&other.inner))
    }

    /// Checks that `rule` rewrites this program's translation into
    /// `other`'s. Returns the bindings as text; raises `ValueError` with
    /// the mismatch otherwise.
    fn justify(&self, rule: &str, other: &Program) -> PyResult<Vec<(String, String)>> {
        let (a, b) = (translate(&self.inner), translate(&other.inner));
        justify_step(rule, &a, &b).map(|j| j.rendered_bindings()).map_err(verr)
    }

    /// Runs a coupling check of this program against `other`.
    /// Returns `None` on success and the failure text otherwise.
    #[pyo3(signature = (other, invariant, at = "loop-end", trials = 200, seed = 42))]
    fn couple(
        &self,
        py: Python<'_>,
        other: &Program,
        invariant: &str,
        at: &str,
        trials: u64,
        seed: u64,
    ) -> PyResult<Option<String>> {
        let inv = parse_predicate(invariant).map_err(verr)?;
        let at: AnnotationPoint = at.parse().map_err(verr)?;
        let cfg = CouplingConfig {
            trials,
            seed,
            ..CouplingConfig::default()
        };
        let r = py
            .allow_threads(|| check_coupling(&self.inner, &other.inner, &inv, at, &cfg))
            .map_err(verr)?;
        Ok(match r.verdict {
            Verdict::Pass { .. } => None,
            Verdict::Fail(f) => Some(f.to_string()),
        })
    }

    fn __repr__(&self) -> String {
        format!("<Program {}>", self.inner.program.name)
    }
}

/// The outcome of verifying a chain.
#[pyclass(module = "mrv", frozen)]
struct Report {
    inner: VerificationReport,
}

#[pymethods]
impl Report {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    /// `(method, status)` per step; status is `justified`,
    /// `empirically-validated` or `failed`.
    #[getter]
    fn steps(&self) -> Vec<(String, &'static str)> {
        self.inner
            .steps
            .iter()
            .map(|s| {
                let st = match s.status {
                    StepStatus::Justified => "justified",
                    StepStatus::EmpiricallyValidated => "empirically-validated",
                    StepStatus::Failed => "failed",
                };
                (s.method.clone(), st)
            })
            .collect()
    }

    #[getter]
    fn endpoint_mismatches(&self) -> u64 {
        self.inner.endpoint.mismatches
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[pyo3(signature = (verbose = false))]
    fn to_text(&self, verbose: bool) -> String {
        self.inner.to_text(verbose)
    }

    fn __repr__(&self) -> String {
        format!(
            "<Report {} steps, {}>",
            self.inner.steps.len(),
            if self.inner.pass { "pass" } else { "fail" }
        )
    }
}

fn run_chain(
    py: Python<'_>,
    mut m: ChainManifest,
    trials: Option<u64>,
    seed: Option<u64>,
    budget: Option<u64>,
) -> Report {
    if let Some(t) = trials {
        m.config.trials = t;
    }
    if let Some(s) = seed {
        m.config.seed = s;
    }
    if let Some(b) = budget {
        m.config.budget = b;
    }
    Report {
        inner: py.allow_threads(|| verify_chain(&m)),
    }
}

/// Verifies a manifest file.
#[pyfunction]
#[pyo3(signature = (manifest, trials = None, seed = None, budget = None))]
fn verify(py: Python<'_>, manifest: PathBuf, trials: Option<u64>, seed: Option<u64>, budget: Option<u64>) -> PyResult<Report> {
    let m = load_manifest(&manifest).map_err(|e| verr(format!("{}: {e}", manifest.display())))?;
    Ok(run_chain(py, m, trials, seed, budget))
}

/// Verifies a shipped chain, `"pagerank"` or `"sumarrays"`.
#[pyfunction]
#[pyo3(signature = (name, trials = None, seed = None, budget = None))]
fn verify_corpus(py: Python<'_>, name: &str, trials: Option<u64>, seed: Option<u64>, budget: Option<u64>) -> PyResult<Report> {
    let m = corpus::get_chain(name).map_err(verr)?;
    Ok(run_chain(py, m, trials, seed, budget))
}

/// The rewrite rules as dicts.
#[pyfunction]
fn rules(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    list_rules()
        .into_iter()
        .map(|r| {
            let d = PyDict::new_bound(py);
            d.set_item("name", r.name)?;
            d.set_item("definitional", r.definitional)?;
            d.set_item("doc", r.doc)?;
            d.set_item("side_conditions", r.side_conditions)?;
            d.set_item("obligations", r.obligations)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn corpus_programs() -> Vec<&'static str> {
    corpus::entries().iter().map(|e| e.id).collect()
}

#[pyfunction]
fn corpus_chains() -> Vec<&'static str> {
    corpus::chain_names()
}

/// Exact PageRank ranks. `dampening` may be an int, a `Fraction` or a
/// string such as `"17/20"`.
#[pyfunction]
fn pagerank_reference(py: Python<'_>, links: Vec<Vec<usize>>, dampening: &Bound<'_, PyAny>, iterations: u32) -> PyResult<PyObject> {
    let frac = fraction(py)?.call1((dampening,))?;
    let d = format!("{}/{}", frac.getattr("numerator")?, frac.getattr("denominator")?);
    let Ok(Value::Rat(d)) = parse_rat(&d) else {
        return Err(verr(format!("bad dampening `{d}`")));
    };
    let input = corpus::PageRankInput {
        links,
        dampening: d,
        iterations,
    };
    if !input.is_valid() {
        return Err(verr("links must be non-empty, in range and every page must link out; 0 < dampening < 1"));
    }
    let ranks = corpus::pagerank_reference(&input);
    to_py(py, &Value::Array(ranks.into_iter().map(Value::Rat).collect()))
}

fn parse_rat(s: &str) -> Result<Value, String> {
    let p = load("fn f(d: Rat) -> Rat { return d; }").expect("fixed program");
    parse_args(s, &p, 1000)?.pop().ok_or_else(|| "no value".to_string())
}

#[pymodule]
fn mrv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(verify_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(rules, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_programs, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_chains, m)?)?;
    m.add_function(wrap_pyfunction!(pagerank_reference, m)?)?;
    Ok(())
}
