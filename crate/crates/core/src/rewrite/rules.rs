//! The rule catalog.

use super::pattern::dsl::*;
use super::pattern::{Node, Pat, TyPat};
use crate::il::ast::BinOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Synonym {
    FlatMap,
    ReduceByKey,
}

/// One way of building the right-hand side. `guard` further constrains an
/// already bound metavariable before the variant applies.
#[derive(Clone, Debug)]
pub struct Variant {
    pub guard: Option<(&'static str, Pat)>,
    pub rhs: Pat,
    /// Boolean terms over the instantiation, with a description each.
    pub obligations: Vec<(&'static str, Pat)>,
}

#[derive(Clone, Debug)]
pub enum RuleKind {
    Structural { lhs: Pat, variants: Vec<Variant> },
    /// The step only introduces or removes a synonym.
    Definitional(Synonym),
}

#[derive(Clone, Debug)]
pub struct RewriteRule {
    pub name: &'static str,
    pub doc: &'static str,
    /// Syntactic side conditions, enforced while matching.
    pub side_conditions: &'static [&'static str],
    pub kind: RuleKind,
}

impl RewriteRule {
    pub fn is_definitional(&self) -> bool {
        matches!(self.kind, RuleKind::Definitional(_))
    }
}

fn eq(a: Pat, c: Pat) -> Pat {
    bin(BinOp::Eq, a, c)
}

fn map_introduce() -> RewriteRule {
    let lhs = fold(
        lam(
            "acc",
            of("ys"),
            lam("i", TyPat::Int, update(b(1), b(0), ho("f", vec![index(m("xs"), b(0))]))),
        ),
        m("ys"),
        node(Node::Range, vec![int(0), m("n")]),
    );
    let rhs = node(Node::Map, vec![lam("x", elem(of("xs")), ho("f", vec![b(0)])), m("xs")]);
    RewriteRule {
        name: "map-introduce",
        doc: "fold(acc, i => acc[i := f(xs[i])], ys, range(0, n)) becomes map(f, xs) \
              when f never looks at the index i itself",
        side_conditions: &["f uses the index only through xs[i]", "the accumulator is only written at i"],
        kind: RuleKind::Structural {
            lhs,
            variants: vec![Variant {
                guard: None,
                rhs,
                obligations: vec![
                    ("length(ys) = length(xs)", eq(length(m("ys")), length(m("xs")))),
                    ("n = length(xs)", eq(m("n"), length(m("xs")))),
                ],
            }],
        },
    }
}

fn range_remove() -> RewriteRule {
    let lhs = fold(
        lam(
            "acc",
            of("a0"),
            lam("i", TyPat::Int, ho("f", vec![b(1), index(m("xs"), b(0))])),
        ),
        m("a0"),
        node(Node::Range, vec![int(0), m("n")]),
    );
    let rhs = fold(
        lam("acc", of("a0"), lam("x", elem(of("xs")), ho("f", vec![b(1), b(0)]))),
        m("a0"),
        m("xs"),
    );
    RewriteRule {
        name: "range-remove",
        doc: "a fold over range(0, n) whose body reads the index only as xs[i] \
              becomes a fold over the elements of xs",
        side_conditions: &["the index is used only in xs[i]"],
        kind: RuleKind::Structural {
            lhs,
            variants: vec![Variant {
                guard: None,
                rhs,
                obligations: vec![("n = length(xs)", eq(m("n"), length(m("xs"))))],
            }],
        },
    }
}

fn concat_intro() -> RewriteRule {
    let inner = |acc: Pat, xs: Pat| {
        fold(
            lam("a", of("a0"), lam("x", elem(elem(of("xss"))), ho("f", vec![b(1), b(0)]))),
            acc,
            xs,
        )
    };
    let lhs = fold(
        lam("acc", of("a0"), lam("xs", elem(of("xss")), inner(b(1), b(0)))),
        m("a0"),
        m("xss"),
    );
    let rhs = inner(m("a0"), node(Node::Concat, vec![m("xss")]));
    RewriteRule {
        name: "concat-intro",
        doc: "an outer fold whose body is just an inner fold over the current \
              element collapses into one fold over concat(xss)",
        side_conditions: &["the inner body does not mention the outer element or accumulator"],
        kind: RuleKind::Structural {
            lhs,
            variants: vec![Variant {
                guard: None,
                rhs,
                obligations: vec![],
            }],
        },
    }
}

fn group_intro() -> RewriteRule {
    let key = || tfst(elem(of("xs")));
    let val = || tsnd(elem(of("xs")));
    let acc_elem = || elem(of("acc0"));
    let lhs = fold(
        lam(
            "acc",
            of("acc0"),
            lam(
                "p",
                elem(of("xs")),
                update(
                    b(1),
                    fst(b(0)),
                    ho("f", vec![fst(b(0)), index(b(1), fst(b(0))), snd(b(0))]),
                ),
            ),
        ),
        m("acc0"),
        m("xs"),
    );
    // Under λp λi λvs, INIT is built with i = b(1).
    let rhs = |init: Pat| {
        let per_group = lam(
            "p",
            tprod(key(), tarr(val())),
            node(
                Node::App,
                vec![
                    node(
                        Node::App,
                        vec![
                            lam(
                                "i",
                                key(),
                                lam(
                                    "vs",
                                    tarr(val()),
                                    node(
                                        Node::Pair,
                                        vec![
                                            b(1),
                                            fold(
                                                lam(
                                                    "o",
                                                    acc_elem(),
                                                    lam("v", val(), ho("f", vec![b(3), b(1), b(0)])),
                                                ),
                                                init,
                                                b(0),
                                            ),
                                        ],
                                    ),
                                ),
                            ),
                            fst(b(0)),
                        ],
                    ),
                    snd(b(0)),
                ],
            ),
        );
        fold(
            lam(
                "acc",
                of("acc0"),
                lam("q", tprod(key(), acc_elem()), update(b(1), fst(b(0)), snd(b(0)))),
            ),
            m("acc0"),
            node(Node::Map, vec![per_group, node(Node::Group, vec![m("xs")])]),
        )
    };
    let in_range = fold(
        lam(
            "ok",
            TyPat::Bool,
            lam(
                "p",
                elem(of("xs")),
                bin(
                    BinOp::And,
                    b(1),
                    bin(
                        BinOp::And,
                        bin(BinOp::Le, int(0), fst(b(0))),
                        bin(BinOp::Lt, fst(b(0)), length(m("acc0"))),
                    ),
                ),
            ),
        ),
        Pat::Bool(true),
        m("xs"),
    );
    RewriteRule {
        name: "group-intro",
        doc: "a fold that combines each pair (k, v) into acc[k] becomes a map over \
              group(xs) folding every group, followed by a loop writing the \
              results back into the array; the combining function may read the key",
        side_conditions: &["the accumulator is read and written only at the key of the current pair"],
        kind: RuleKind::Structural {
            lhs,
            variants: vec![
                Variant {
                    guard: None,
                    rhs: rhs(index(m("acc0"), b(1))),
                    obligations: vec![],
                },
                Variant {
                    guard: Some(("acc0", node(Node::Replicate, vec![m("n"), m("c")]))),
                    rhs: rhs(m("c")),
                    obligations: vec![("every key is an index of acc0", in_range)],
                },
            ],
        },
    }
}

/// The six rules, in catalog order.
pub fn catalog() -> Vec<RewriteRule> {
    vec![
        map_introduce(),
        range_remove(),
        concat_intro(),
        group_intro(),
        RewriteRule {
            name: "flatmap-fuse",
            doc: "flatMap(f, xs) is concat(map(f, xs)) written as one call",
            side_conditions: &[],
            kind: RuleKind::Definitional(Synonym::FlatMap),
        },
        RewriteRule {
            name: "reducebykey-fold",
            doc: "reduceByKey(f, i, xs) is the map over group(xs) that folds every \
                  group with f starting from i",
            side_conditions: &[],
            kind: RuleKind::Definitional(Synonym::ReduceByKey),
        },
    ]
}
