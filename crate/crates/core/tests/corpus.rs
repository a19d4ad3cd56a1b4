mod common;

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use mrv_core::corpus::{entries, get_program, pagerank_reference, pagerank_trace, PageRankInput};
use mrv_core::il::{interpret_il, load};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn lookup() {
    assert!(get_program("pagerank/listing-0").is_err());
    assert!(get_program("pagerank/listing-9").unwrap().source.contains("reduceByKey"));
    assert!(get_program("sumarrays/zipped").unwrap().source.contains("zip(xs, ys)"));
}

#[test]
fn hygiene() {
    let es = entries();
    assert_eq!(es.len(), 11);
    let ids: HashSet<_> = es.iter().map(|e| e.id).collect();
    assert_eq!(ids.len(), es.len());
    let sources: HashSet<_> = es.iter().map(|e| e.source).collect();
    assert_eq!(sources.len(), es.len());
    for e in es {
        assert!(!e.provenance.is_empty(), "{}", e.id);
        assert!(load(e.source).is_ok(), "{}", e.id);
    }
    let sig = load(es[0].source).unwrap().param_types();
    for e in es.iter().filter(|e| e.id.starts_with("pagerank/")) {
        assert_eq!(load(e.source).unwrap().param_types(), sig, "{}", e.id);
    }
}

#[test]
fn reference_examples() {
    let two = PageRankInput {
        links: vec![vec![1], vec![0]],
        dampening: rat(1, 2),
        iterations: 4,
    };
    assert_eq!(pagerank_reference(&two), vec![rat(1, 2), rat(1, 2)]);

    // 0 -> 1, 1 -> 0, 2 -> 0 with d = 1/2, one round:
    // rank(0) = 1/2 (1/3 + 1/3) + 1/6 = 1/2, rank(1) = 1/2 · 1/3 + 1/6 = 1/3,
    // rank(2) = 1/6.
    let star = PageRankInput {
        links: vec![vec![1], vec![0], vec![0]],
        dampening: rat(1, 2),
        iterations: 1,
    };
    assert_eq!(pagerank_reference(&star), vec![rat(1, 2), rat(1, 3), rat(1, 6)]);
    assert_eq!(pagerank_trace(&star).len(), 2);
    assert!(star.is_valid());
    assert!(!PageRankInput { links: vec![vec![]], ..star.clone() }.is_valid());
    assert!(!PageRankInput { links: vec![vec![3]], ..star.clone() }.is_valid());
    assert_eq!(PageRankInput::from_args(&star.to_args()), Some(star));
}

/// Power iteration with an explicit column-stochastic matrix.
fn dense_oracle(links: &[Vec<usize>], d: &BigRational, k: u32) -> Vec<BigRational> {
    let n = links.len();
    let nn = BigRational::from_integer(BigInt::from(n));
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for (o, out) in links.iter().enumerate() {
        let w = BigRational::one() / BigRational::from_integer(BigInt::from(out.len()));
        for &p in out {
            m[p][o] += w.clone();
        }
    }
    let mut r = vec![BigRational::one() / nn.clone(); n];
    for _ in 0..k {
        r = (0..n)
            .map(|p| {
                let s: BigRational = (0..n).map(|o| m[p][o].clone() * r[o].clone()).sum();
                d.clone() * s + (BigRational::one() - d.clone()) / nn.clone()
            })
            .collect();
    }
    r
}

fn graph() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0..n, 1..4), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reference_matches_dense_iteration(links in graph(), num in 1i64..10, k in 0u32..5) {
        let input = PageRankInput { links, dampening: rat(num, 10), iterations: k };
        let r = pagerank_reference(&input);
        prop_assert_eq!(&r, &dense_oracle(&input.links, &input.dampening, k));
        // Every page links out, so no rank mass is lost.
        prop_assert_eq!(r.iter().cloned().sum::<BigRational>(), BigRational::one());
    }

    #[test]
    fn listing_9_matches_reference(links in graph(), num in 1i64..10, k in 0u32..4) {
        let input = PageRankInput { links, dampening: rat(num, 10), iterations: k };
        let p = common::program("pagerank/listing-9");
        let out = interpret_il(&p, &input.to_args(), 10_000_000);
        let got: Vec<BigRational> = out
            .value()
            .and_then(|v| v.as_array())
            .expect("ranks")
            .iter()
            .map(|v| match v {
                mrv_core::Value::Rat(r) => r.clone(),
                v => panic!("{v}"),
            })
            .collect();
        prop_assert_eq!(got, pagerank_reference(&input));
    }
}
