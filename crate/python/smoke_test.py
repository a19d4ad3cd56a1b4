"""Smoke test for the mrv extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
Then run:                 python3 python/smoke_test.py
"""

import json
from fractions import Fraction
from pathlib import Path

import mrv

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def check_programs():
    p = mrv.Program.load(CORPUS / "pagerank" / "listing-1.il")
    assert p.name == "pageRank"
    assert [t for _, t in p.params] == ["[[Int]]", "Rat", "Int"], p.params
    assert p.run("[[1],[0]], 1/2, 3") == [Fraction(1, 2), Fraction(1, 2)]
    assert "iter" in p.translate()

    s = mrv.Program.from_corpus("sumarrays/plain")
    assert s.run("[1, 2], [10, 20]") == [11, 22]
    try:
        s.run("[1, 2], [10]")
    except RuntimeError as e:
        assert "index" in str(e).lower(), e
    else:
        raise AssertionError("expected an index error")

    try:
        mrv.Program("fn f() -> Int { var x := ; return x; }")
    except ValueError as e:
        assert "<source>:1:" in str(e), e
    else:
        raise AssertionError("expected a parse error")

    spin = mrv.Program("fn f(n: Int) -> Int { var x := n; while (true) { x := x; } return x; }")
    try:
        spin.run("0", budget=1000)
    except RuntimeError:
        pass
    else:
        raise AssertionError("expected divergence")


def check_rules_and_steps():
    names = [r["name"] for r in mrv.rules()]
    assert names == [
        "map-introduce",
        "range-remove",
        "concat-intro",
        "group-intro",
        "flatmap-fuse",
        "reducebykey-fold",
    ], names
    l1, l2, l3 = (mrv.Program.from_corpus(f"pagerank/listing-{i}") for i in (1, 2, 3))
    bindings = dict(l1.justify("map-introduce", l2))
    assert any("dampening" in v for v in bindings.values()), bindings
    try:
        l1.justify("map-introduce", l3)
    except ValueError:
        pass
    else:
        raise AssertionError("expected a mismatch")

    plain, zipped = mrv.Program.from_corpus("sumarrays/plain"), mrv.Program.from_corpus("sumarrays/zipped")
    assert plain.couple(zipped, "sum_1 = sum_2 && zipped_2 = zip(xs_1, ys_1)", trials=50) is None
    failure = plain.couple(zipped, "sum_1 = sum_2 && zipped_2 = zip(ys_1, xs_1)", trials=50)
    assert failure is not None and "InvariantBrokenAfterIteration" in failure, failure


def check_chains():
    assert mrv.corpus_chains() == ["pagerank", "sumarrays"]
    assert len(mrv.corpus_programs()) == 11
    r = mrv.verify(CORPUS / "pagerank.chain.json", trials=40)
    assert r.passed, r.to_text(True)
    assert [m for m, _ in r.steps][0] == "rewrite map-introduce"
    assert [st for _, st in r.steps].count("empirically-validated") == 2
    assert json.loads(r.to_json())["pass"] is True
    r = mrv.verify_corpus("pagerank", trials=20, budget=30)
    assert not r.passed
    try:
        mrv.verify(CORPUS / "missing.chain.json")
    except ValueError:
        pass
    else:
        raise AssertionError("expected a manifest error")


def check_reference():
    ranks = mrv.pagerank_reference([[1], [0], [0]], Fraction(1, 2), 1)
    assert ranks == [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)], ranks
    assert mrv.pagerank_reference([[0]], "3/4", 5) == [1]
    l9 = mrv.Program.from_corpus("pagerank/listing-9")
    assert l9.run("[[1, 2], [0], [0, 1]], 17/20, 3") == mrv.pagerank_reference([[1, 2], [0], [0, 1]], "17/20", 3)


if __name__ == "__main__":
    for check in (check_programs, check_rules_and_steps, check_chains, check_reference):
        check()
        print(f"ok  {check.__name__}")
    print("smoke test passed")
