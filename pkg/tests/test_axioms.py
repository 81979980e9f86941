import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.axioms import (
    TOP,
    AxiomError,
    PreEvaluationError,
    build_gamma,
    build_iteration_formulas,
    build_red,
    build_reduced_axioms,
    build_truth_predicate,
    critical_point_sentence,
    elementarity_sentence,
    emit_schema_instances,
    generate_formulas,
    level_class,
    pre_evaluate,
    red_sentences,
    s_closure,
    sep_sentence,
)
from artifact.formula import Bin, IMP, Not, free_vars, parse
from artifact.hierarchy import ClassificationError, classify_j, classify_sigma_inf
from artifact.semantics import Evaluator, build_universe, ordinal, sampled_j_tables

SEP_PHIS = generate_formulas(4, 1, with_j=True, unbounded=False)


def test_iteration_formulas():
    it = build_iteration_formulas()
    assert classify_j(it.jiter).is_("Sigma", 1)
    assert classify_j(it.critseq).is_("Sigma", 1)
    # keeping the witness quantifier under the implication leaves the class
    assert classify_j(it.jiter_literal).shape == "NotInFamily"
    assert free_vars(it.jiter) == {0, 1, 2}


def test_gamma_rejects_bad_input():
    with pytest.raises(AxiomError):
        build_gamma(parse("x in y & y in z"))
    with pytest.raises(AxiomError):
        build_gamma(parse("A v2: v2 in v0 | v1 in v2"))


def test_gamma_levels():
    g = build_gamma(parse("E v2: v2 in v0 & v1 in j(v2)"))
    assert g.n == 1 and classify_j(g.gamma).is_("Pi", 2)
    g = build_gamma(parse("E v2 in v0: v1 in j(v2)"))
    assert g.n == 0 and classify_j(g.gamma).is_("Pi", 1)
    assert free_vars(g.gamma) <= {0, 1}


def test_critical_point_sentence():
    f = critical_point_sentence()
    two, three = ordinal(2), ordinal(3)
    good = list(range(16))
    good[two] = three
    ok = build_universe(4, j=good, slots={"kappa": two})
    assert Evaluator(ok).compile(f)({})
    fixed = build_universe(4, j=range(16), slots={"kappa": two})
    assert not Evaluator(fixed).compile(f)({})


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SEP_PHIS), st.integers(0, 10**6))
def test_sep_sentences_hold(phi, seed):
    # a subset of a member of V_4 is again in V_4
    (table,) = sampled_j_tables(4, 1, seed)
    u = build_universe(4, j=table)
    assert Evaluator(u).compile(sep_sentence(phi, 0))({})


def test_elementarity_sentence_holds_for_identity():
    u = build_universe(3, j=range(4))
    for phi in generate_formulas(4, 1)[:50]:
        f = elementarity_sentence(phi)
        assert not free_vars(f)
        assert Evaluator(u).compile(f)({})


def test_reduced_axioms_dispatch():
    kinds = [a.schema for a in build_reduced_axioms(parse("A y in x: y = y"))]
    assert kinds == ["reduced-elementarity", "reduced-separation"]
    kinds = [a.schema for a in build_reduced_axioms(parse("x in y"))]
    assert kinds == ["two-variable-elementarity"]
    with pytest.raises(AxiomError):
        build_reduced_axioms(parse("x in y & y in z"))
    with pytest.raises(AxiomError):
        build_reduced_axioms(parse("j(x) in y"))


def test_emit_schema_instances():
    btee = emit_schema_instances("btee", 4)
    assert sum(a.schema == "critical-point" for a in btee) == 1
    for theory in ("btee", "wa0", "sep", "wan:1"):
        small, big = emit_schema_instances(theory, 3), emit_schema_instances(theory, 4)
        assert len(small) <= len(big)
        assert all(not free_vars(a.sentence) for a in big)
        assert emit_schema_instances(theory, 3) == small
    with pytest.raises(AxiomError):
        emit_schema_instances("zf", 3)
    with pytest.raises(AxiomError):
        emit_schema_instances("wan:0", 3)


def test_pre_evaluate_examples():
    # without j the sentence is already in the decidable class
    plain = sep_sentence(parse("A y in x: y = y"), 0)
    assert pre_evaluate(plain) == plain
    sep = sep_sentence(parse("x in j(x)"), 0)
    assert pre_evaluate(sep) == TOP
    assert pre_evaluate(sep.body) == TOP
    d = parse("A x in y: x in y")
    assert pre_evaluate(d) == d
    assert pre_evaluate(Not(sep)) == Not(TOP)
    f = Bin(IMP, d, elementarity_sentence(parse("E y: y in x")))
    assert pre_evaluate(f) == Bin(IMP, d, TOP)
    with pytest.raises(PreEvaluationError):
        pre_evaluate(parse("E x: A y: j(y) in x"))


def test_pre_evaluate_closure_sample():
    ax = emit_schema_instances("wa0", 4)
    for f in s_closure([a.sentence for a in ax])[:2000]:
        g = pre_evaluate(f)
        assert level_class(g, 0) and pre_evaluate(g) == g


def test_pre_evaluate_red_sentences():
    phi = parse("E v1: v0 in j(v1)")
    psi = parse("E v1: v1 in v0")
    r = build_red(phi, psi)
    eb, aeb = red_sentences(r)
    assert pre_evaluate(aeb, 1, [r]) == TOP
    assert pre_evaluate(Not(aeb), 1, [r]) == Not(TOP)
    with pytest.raises(PreEvaluationError):
        pre_evaluate(aeb, 1, [])


def test_build_red():
    phi = parse("E v1: v0 in j(v1)")
    psi = parse("E v1: v1 in v0")
    r1, r2 = build_red(phi, psi), build_red(phi, psi)
    assert r1 == r2 and r1.trace == r2.trace
    for p in (r1.P0, r1.P1, r1.P2):
        assert classify_j(p).is_("Pi", 1)
    assert free_vars(r1.Red) <= {0, 1}
    vars_ = [rec.var for rec in r1.trace]
    assert len(vars_) == len(set(vars_))
    d = build_red(parse("A v1 in v0: v1 = v1"), parse("E v1 in v0: v1 = v1"))
    assert d.n == 0 and d.Red == d.body and not d.trace
    with pytest.raises(AxiomError):
        build_red(phi, parse("A v1 in v0: v1 = v1"))
    with pytest.raises(AxiomError):
        build_red(parse("v0 in v1"), psi)


def test_truth_predicate_levels():
    tp = build_truth_predicate(0, parse("E y in j(x): y in x"))
    assert classify_j(tp.pi_form).is_("Pi", 1) and classify_j(tp.sigma_form).is_("Sigma", 1)
    assert tp.height == 1
    phi = parse("E y: A z: j(z) in y | x in j(y)")
    tp = build_truth_predicate(2, phi)
    assert tp.pi_form is None and classify_sigma_inf(tp.sigma_form).is_("Sigma", 2)
    with pytest.raises(ClassificationError):
        build_truth_predicate(1, phi)
    with pytest.raises(ClassificationError):
        build_truth_predicate(0, parse("A x: j(x) in x"))
    with pytest.raises(ValueError):
        build_truth_predicate(-1, phi)


def test_generate_formulas():
    fs = generate_formulas(4, 1)
    assert fs == generate_formulas(4, 1)
    assert all(free_vars(f) == {0} for f in fs)
    assert len(set(fs)) == len(fs)
    assert set(generate_formulas(3, 1)) <= set(fs)


def test_reduced_elementarity_instance():
    (inst,) = [a for a in build_reduced_axioms(parse("x = x")) if a.schema == "reduced-elementarity"]
    assert inst.sentence == parse("A x: (x = x -> j(x) = j(x))")


@pytest.mark.parametrize("text", ["x in j(x)", "A y in x: y in j(y)"])
def test_separation_sentence_is_pi2(text):
    s = sep_sentence(parse(text), 0)
    assert classify_sigma_inf(s).is_("Pi", 2) and classify_j(s).is_("Pi", 2)
