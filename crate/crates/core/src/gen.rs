//! Deterministic input generation. Trial `i` of seed `s` always yields the
//! same argument tuple, independently of the other trials.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::PageRankInput;
use crate::ffl::FflType;
use crate::il::ast::IlType;
use crate::value::Value;

/// Size bounds shared by all profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub max_graph: usize,
    pub max_iter: u32,
    pub max_len: usize,
    pub int_range: i64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_graph: 6,
            max_iter: 3,
            max_len: 6,
            int_range: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `(links, dampening, iterations)` with a valid graph.
    Pagerank,
    /// Every array parameter gets the same length.
    EqualLength,
    /// Each parameter independently.
    Any,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Pagerank => "pagerank",
            Profile::EqualLength => "equal-length",
            Profile::Any => "any",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenError(pub String);

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot generate inputs: {}", self.0)
    }
}

impl std::error::Error for GenError {}

pub fn pagerank_signature() -> Vec<IlType> {
    vec![
        IlType::array(IlType::array(IlType::Int)),
        IlType::Rat,
        IlType::Int,
    ]
}

/// Picks a profile from the parameter types alone.
pub fn infer_profile(sig: &[IlType]) -> Profile {
    if sig == pagerank_signature().as_slice() {
        Profile::Pagerank
    } else if sig.len() >= 2 && sig.iter().all(|t| matches!(t, IlType::Array(_))) {
        Profile::EqualLength
    } else {
        Profile::Any
    }
}

/// The random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Graphs tried before any random ones: a self-loop, a 2-cycle and a page
/// with no incoming edges.
const BOUNDARY_GRAPHS: &[&[&[usize]]] = &[&[&[0]], &[&[1], &[0]], &[&[1], &[1]]];

pub fn gen_pagerank(rng: &mut ChaCha8Rng, trial: u64, b: &Bounds) -> PageRankInput {
    let links: Vec<Vec<usize>> = match BOUNDARY_GRAPHS.get(trial as usize) {
        Some(g) => g.iter().map(|out| out.to_vec()).collect(),
        None => {
            let n = rng.gen_range(1..=b.max_graph.max(1));
            (0..n)
                .map(|_| {
                    let d = rng.gen_range(1..=n);
                    let mut all: Vec<usize> = (0..n).collect();
                    all.shuffle(rng);
                    all.truncate(d);
                    all
                })
                .collect()
        }
    };
    let den = rng.gen_range(2..=10i64);
    let num = rng.gen_range(1..den);
    PageRankInput {
        links,
        dampening: BigRational::new(BigInt::from(num), BigInt::from(den)),
        iterations: rng.gen_range(0..=b.max_iter),
    }
}

fn gen_rat(rng: &mut ChaCha8Rng, b: &Bounds) -> Value {
    let den = rng.gen_range(1..=4i64);
    let num = rng.gen_range(-b.int_range..=b.int_range);
    Value::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// A random value of an IL type; `len` fixes the outermost array length.
pub fn gen_value(rng: &mut ChaCha8Rng, t: &IlType, len: Option<usize>, b: &Bounds) -> Result<Value, GenError> {
    gen_ffl_value(rng, &t.into(), len, b)
}

pub fn gen_ffl_value(rng: &mut ChaCha8Rng, t: &FflType, len: Option<usize>, b: &Bounds) -> Result<Value, GenError> {
    Ok(match t {
        FflType::Int => Value::int(rng.gen_range(-b.int_range..=b.int_range)),
        FflType::Rat => gen_rat(rng, b),
        FflType::Bool => Value::Bool(rng.gen()),
        FflType::Unit => Value::Unit,
        FflType::Array(e) => {
            let n = len.unwrap_or_else(|| rng.gen_range(0..=b.max_len));
            let inner = Bounds {
                max_len: (b.max_len / 2).max(1),
                ..*b
            };
            Value::Array(
                (0..n)
                    .map(|_| gen_ffl_value(rng, e, None, &inner))
                    .collect::<Result<_, _>>()?,
            )
        }
        FflType::Prod(a, c) => Value::pair(gen_ffl_value(rng, a, None, b)?, gen_ffl_value(rng, c, None, b)?),
        FflType::Sum(a, c) => {
            if rng.gen() {
                Value::Inl(Box::new(gen_ffl_value(rng, a, None, b)?))
            } else {
                Value::Inr(Box::new(gen_ffl_value(rng, c, None, b)?))
            }
        }
        FflType::Arrow(..) => return Err(GenError(format!("function type {t}"))),
    })
}

/// The argument tuple of one trial.
pub fn gen_args(sig: &[IlType], profile: Profile, seed: u64, trial: u64, b: &Bounds) -> Result<Vec<Value>, GenError> {
    let tys: Vec<FflType> = sig.iter().map(|t| t.into()).collect();
    gen_args_ffl(&tys, profile, seed, trial, b)
}

pub fn gen_args_ffl(sig: &[FflType], profile: Profile, seed: u64, trial: u64, b: &Bounds) -> Result<Vec<Value>, GenError> {
    let mut rng = trial_rng(seed, trial);
    match profile {
        Profile::Pagerank => {
            let want: Vec<FflType> = pagerank_signature().iter().map(|t| t.into()).collect();
            if sig != want.as_slice() {
                return Err(GenError("the pagerank profile needs ([[Int]], Rat, Int)".into()));
            }
            Ok(gen_pagerank(&mut rng, trial, b).to_args())
        }
        Profile::EqualLength => {
            // Small lengths first so that empty and singleton arrays are
            // always covered.
            let len = if (trial as usize) <= b.max_len {
                trial as usize
            } else {
                rng.gen_range(0..=b.max_len)
            };
            sig.iter()
                .map(|t| match t {
                    FflType::Array(_) => gen_ffl_value(&mut rng, t, Some(len), b),
                    _ => gen_ffl_value(&mut rng, t, None, b),
                })
                .collect()
        }
        Profile::Any => sig.iter().map(|t| gen_ffl_value(&mut rng, t, None, b)).collect(),
    }
}

/// A lazily generated stream of argument tuples, trial 0 first.
pub fn gen_inputs<'a>(
    sig: &'a [IlType],
    profile: Profile,
    seed: u64,
    b: Bounds,
) -> impl Iterator<Item = Result<Vec<Value>, GenError>> + 'a {
    (0u64..).map(move |i| gen_args(sig, profile, seed, i, &b))
}
