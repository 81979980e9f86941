import json
from pathlib import Path

import pytest
from hypothesis import given
from strategies import formulas

from artifact.formula import parse
from artifact.semantics import build_universe, layer_raising_j
from artifact.sequent import (
    Derivation,
    Sequent,
    check_axiom,
    check_derivation,
    derivation_from_json,
    derivation_to_json,
    instantiate,
    sequent_from_text,
    soundness_sweep,
)

GOLDEN = Path(__file__).parent / "data" / "golden"


def node(conclusion, rule, *premises):
    return {"conclusion": conclusion, "rule": rule, "premises": list(premises)}


def check(tree, **kw):
    return check_derivation(derivation_from_json(tree), **kw)


def seq(text):
    return sequent_from_text(text)[0]


@pytest.mark.parametrize(
    "text, name",
    [
        ("x in y => x in y", "identity"),
        ("=> x = x", "refl"),
        ("x = y => y = x", "sym"),
        ("x = y, y = z => x = z", "trans"),
        ("x = y => j(x) = j(y)", "jcong"),
        ("x = y, u = v, x in u => y in v", "memcong"),
    ],
)
def test_axioms_accepted(text, name):
    assert check_axiom(seq(text)) == (True, name)


def test_swapped_congruence_rejected():
    ok, why = check_axiom(seq("x = y => j(y) = j(x)"))
    assert not ok and "swapped" in why


@pytest.mark.parametrize(
    "text", ["x = y, z = y => x = z", "=> x = y", "x in y => y in x", "x = y => x = y, y = x"]
)
def test_non_axioms_rejected(text):
    assert not check_axiom(seq(text))[0]


@given(formulas())
def test_identity_for_any_formula(f):
    assert check_axiom(Sequent((f,), (f,))) == (True, "identity")


def test_structural_rules():
    ident = node("x = y => x = y", "identity")
    weak = node("x = y, x = y => x = y", "weak-l", ident)
    assert check(node("x = y => x = y", "contr-l", weak)).ok
    two = node("x = y => x = y, y = x", "weak-r", ident)
    assert check(node("x = y => y = x, x = y", "exch-r", two)).ok
    assert not check(node("x = y => y = x, x = y", "exch-l", two)).ok
    assert not check(node("x = y => x = y", "contr-l", ident)).ok


def test_bounded_universal_right():
    refl = node("=> z = z", "refl")
    prem = node("z in y => z = z", "weak-l", refl)
    assert check(node("=> A z in y: z = z", "ball-r", prem)).ok
    # the eigenvariable may not stay free in the conclusion
    prem2 = node("z in y, z = z => z = z", "weak-l", node("z = z => z = z", "identity"))
    bad = node("z = z => A w in y: z = z", "ball-r", prem2)
    assert not check(bad).ok


def test_rule_errors():
    ident = node("x = y => x = y", "identity")
    assert "premise" in check(node("x = y => x = y", "and-r", ident)).summary()
    assert "unknown" in check(node("x = y => x = y", "frobnicate", ident)).summary()
    assert "not an axiom" in check(node("x = y => y = y", "identity")).summary()
    assert not check(node("x = y => x = y", "weak-l")).ok
    assert not check(node("=> x = x", "refl", ident)).ok


def _cut_through_conjunction():
    i = node("x = y => x = y", "identity")
    left = node("x = y => x = y & x = y", "and-r", i, i)
    right = node("x = y & x = y => x = y", "and-l1", i)
    return node("x = y => x = y", "cut", left, right)


def test_cut():
    d = _cut_through_conjunction()
    rep = check(d)
    assert rep.ok and rep.cut
    rep = check(d, cut_free=True)
    assert not rep.ok and "cut" in rep.summary()
    assert rep.subformula_violation == parse("x = y & x = y", {"x": 0, "y": 1})


def test_cut_context():
    i = node("x = y => x = y", "identity")
    s = node("x = y => y = x", "sym")
    assert check(node("x = y => y = x", "cut", i, s)).ok
    assert not check(node("x = y, x = y => y = x", "cut", i, s)).ok


def test_json_roundtrip():
    for path in sorted(GOLDEN.glob("*.json")):
        if path.name == "manifest.json":
            continue
        d = derivation_from_json(path.read_text())
        again = derivation_from_json(json.dumps(derivation_to_json(d)))
        assert again == d, path.name


def test_node_order():
    d = derivation_from_json(_cut_through_conjunction())
    rules = [n.rule for n in d.nodes()]
    assert rules == ["identity", "identity", "and-r", "identity", "and-l1", "cut"]


def test_instantiate():
    s = seq("x in y => y = z")
    t = instantiate(s, [3, 1])
    assert t == Sequent((parse("#3 in #1"),), (parse("#1 = #0"),))
    assert instantiate(s, {2: 5}).succedent == (parse("#0 = #5"),)
    assert not instantiate(s).free_vars()


def test_sequent_text_errors():
    with pytest.raises(ValueError):
        sequent_from_text("x in y")


def test_sweep_finds_unsound_leaf():
    levels = (2, 3, 4)
    u = build_universe(4, levels=levels, j=layer_raising_j(levels, 0))
    bad = derivation_from_json(node("x in y => y in x", "identity"))
    rep = soundness_sweep(bad, u, domain=range(4))
    assert not rep.ok and rep.index == 0
    assert tuple(rep.assignment) in {(0, 1), (1, 2), (0, 3), (1, 3), (2, 3)}
    good = derivation_from_json(_cut_through_conjunction())
    assert soundness_sweep(good, u, domain=range(4)).ok
