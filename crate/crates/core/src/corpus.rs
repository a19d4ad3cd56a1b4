//! The shipped example programs and chains, plus an executable reference
//! for the PageRank update law.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::chain::manifest::{parse_manifest, ChainManifest, ManifestError};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: &'static str,
    pub source: &'static str,
    pub provenance: &'static str,
}

macro_rules! entry {
    ($id:literal, $prov:literal) => {
        CorpusEntry {
            id: $id,
            source: include_str!(concat!("../../../corpus/", $id, ".il")),
            provenance: $prov,
        }
    };
}

const ENTRIES: &[CorpusEntry] = &[
    entry!("pagerank/listing-1", "imperative PageRank with nested loops"),
    entry!("pagerank/listing-2", "rank update loop replaced by map"),
    entry!("pagerank/listing-3", "ranks zipped with the adjacency lists"),
    entry!("pagerank/listing-4", "loop over zipped pairs instead of indices"),
    entry!("pagerank/listing-5", "contributions computed by nested maps"),
    entry!("pagerank/listing-6", "nested loops collapsed with concat"),
    entry!("pagerank/listing-7", "concat of map written as flatMap"),
    entry!("pagerank/listing-8", "accumulation by group and fold"),
    entry!("pagerank/listing-9", "group and fold written as reduceByKey"),
    entry!("sumarrays/plain", "element-wise sum by index"),
    entry!("sumarrays/zipped", "element-wise sum over zipped inputs"),
];

const CHAINS: &[(&str, &str)] = &[
    ("pagerank", include_str!("../../../corpus/pagerank.chain.json")),
    ("sumarrays", include_str!("../../../corpus/sumarrays.chain.json")),
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus program `{0}`")]
    UnknownProgram(String),
    #[error("unknown corpus chain `{0}`")]
    UnknownChain(String),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

pub fn entries() -> &'static [CorpusEntry] {
    ENTRIES
}

pub fn get_program(id: &str) -> Result<CorpusEntry, CorpusError> {
    ENTRIES
        .iter()
        .find(|e| e.id == id)
        .cloned()
        .ok_or_else(|| CorpusError::UnknownProgram(id.to_string()))
}

pub fn chain_names() -> Vec<&'static str> {
    CHAINS.iter().map(|(n, _)| *n).collect()
}

/// The raw manifest text of a shipped chain.
pub fn chain_source(name: &str) -> Result<&'static str, CorpusError> {
    CHAINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| CorpusError::UnknownChain(name.to_string()))
}

/// Loads a shipped chain, resolving its program paths against the embedded
/// corpus rather than the file system.
pub fn get_chain(name: &str) -> Result<ChainManifest, CorpusError> {
    let text = chain_source(name)?;
    let m = parse_manifest(text, &|path: &str| {
        let id = path.trim_start_matches("./").trim_end_matches(".il");
        get_program(id)
            .map(|e| e.source.to_string())
            .map_err(|e| e.to_string())
    })?;
    Ok(m)
}

/// Inputs of the PageRank programs.
#[derive(Clone, Debug, PartialEq)]
pub struct PageRankInput {
    pub links: Vec<Vec<usize>>,
    pub dampening: BigRational,
    pub iterations: u32,
}

impl PageRankInput {
    /// True when every target is a valid page and every page links out.
    pub fn is_valid(&self) -> bool {
        let n = self.links.len();
        n > 0
            && self.links.iter().all(|out| !out.is_empty() && out.iter().all(|&t| t < n))
            && self.dampening > BigRational::zero()
            && self.dampening < BigRational::from_integer(BigInt::from(1))
    }

    pub fn to_args(&self) -> Vec<Value> {
        let links = Value::Array(
            self.links
                .iter()
                .map(|out| Value::Array(out.iter().map(|&t| Value::int(t as i64)).collect()))
                .collect(),
        );
        vec![
            links,
            Value::Rat(self.dampening.clone()),
            Value::int(self.iterations as i64),
        ]
    }

    /// Reads back an argument tuple of the PageRank signature.
    pub fn from_args(args: &[Value]) -> Option<PageRankInput> {
        let [links, d, k] = args else { return None };
        let links = links
            .as_array()?
            .iter()
            .map(|out| {
                out.as_array()?
                    .iter()
                    .map(|t| t.as_int()?.to_usize())
                    .collect::<Option<Vec<usize>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        let dampening = match d {
            Value::Rat(r) => r.clone(),
            _ => return None,
        };
        let iterations = k.as_int()?.to_u32()?;
        Some(PageRankInput {
            links,
            dampening,
            iterations,
        })
    }
}

/// Rank of every page after `iterations` rounds, computed over the edge set:
/// `Rank_0(p) = 1/N` and
/// `Rank_k(p) = δ·Δ_k(p) + (1−δ)/N` with
/// `Δ_k(p) = Σ_{(o,p) ∈ E} Rank_{k−1}(o) / outdeg(o)`.
pub fn pagerank_reference(input: &PageRankInput) -> Vec<BigRational> {
    pagerank_trace(input).pop().expect("rank 0")
}

/// The ranks after every round, starting with round 0.
pub fn pagerank_trace(input: &PageRankInput) -> Vec<Vec<BigRational>> {
    let n = input.links.len();
    let nn = BigRational::from_integer(BigInt::from(n));
    let one = BigRational::from_integer(BigInt::from(1));
    let mut ranks = vec![one.clone() / nn.clone(); n];
    let mut out = vec![ranks.clone()];
    for _ in 0..input.iterations {
        let delta = delta(input, &ranks);
        ranks = (0..n)
            .map(|p| input.dampening.clone() * delta[p].clone() + (one.clone() - input.dampening.clone()) / nn.clone())
            .collect();
        out.push(ranks.clone());
    }
    out
}

/// `Δ(p)` for the given previous ranks, summed over the set of edges.
pub fn delta(input: &PageRankInput, prev: &[BigRational]) -> Vec<BigRational> {
    // Edges as a multiset keyed by (source, target); duplicate targets in one
    // adjacency list count once per occurrence.
    let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (o, out) in input.links.iter().enumerate() {
        for &p in out {
            *edges.entry((o, p)).or_default() += 1;
        }
    }
    let mut d = vec![BigRational::zero(); input.links.len()];
    for (&(o, p), &mult) in &edges {
        let outdeg = BigRational::from_integer(BigInt::from(input.links[o].len()));
        d[p] += prev[o].clone() * BigRational::from_integer(BigInt::from(mult)) / outdeg;
    }
    d
}
