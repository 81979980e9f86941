import pytest

from artifact.axioms import emit_schema_instances, generate_formulas, sep_sentence
from artifact.formula import Not, parse
from artifact.semantics import DegreeError, build_universe, layer_raising_j
from artifact.weakmodel import WeakModel, weak_model_check

LEVELS = (2, 3, 4)


@pytest.fixture(scope="module")
def u():
    return build_universe(4, levels=LEVELS, j=layer_raising_j(LEVELS, 3))


def test_needs_layers():
    with pytest.raises(DegreeError):
        WeakModel(build_universe(3))


def test_rejects_sentences_outside_the_closure(u):
    with pytest.raises(ValueError):
        weak_model_check([parse("E x: A y: j(y) in x")], u)


def test_separation_sentences(u):
    phis = generate_formulas(4, 1, with_j=True, unbounded=False)[:30]
    rep = weak_model_check([sep_sentence(p, 0) for p in phis], u, domain=range(4))
    assert rep.ok, [str(v) for v in rep.violations]
    # one witness per sentence and value of a
    assert rep.witnesses == 30 * 4
    assert rep.summary().startswith("level 0: ok")


def test_unbounded_quantifiers_use_the_input_layer(u):
    # degree-0 inputs search only W_0 = V_2, so the witness {1} is not seen;
    # the clause check over a wider parameter domain reports this
    T = WeakModel(u)
    f = parse("E y: x in y")
    assert not T(f, {1: 1}) and T(f, {1: 0})
    rep = weak_model_check([parse("A x: E y: x in y")], u, domain=range(4))
    assert any(v.clause == "existential" for v in rep.violations)


def test_false_axiom_is_reported(u):
    rep = weak_model_check([parse("#1 in #0")], u)
    assert not rep.ok and rep.violations[0].clause == "axiom"
    assert str(rep.violations[0]).startswith("axiom: #1 in #0")


def test_truth_function_negation(u):
    T = WeakModel(u)
    f = parse("E y in x: y in j(y)")
    for x in range(16):
        assert T(Not(f), {0: x}) != T(f, {0: x})
