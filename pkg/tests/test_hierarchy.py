from hypothesis import given, settings

from corpora import with_prefix
from strategies import formulas

from artifact.axioms import build_gamma, build_iteration_formulas, generate_formulas
from artifact.formula import AND, EXISTS, FORALL, Bin, Not, is_j_free, parse, rename_apart
from artifact.hierarchy import (
    DELTA0,
    NOT_IN,
    ClassificationError,
    classify_fleischmann,
    classify_j,
    classify_levy,
    classify_sigma_inf,
    describe,
    j_height,
    verify_certificate,
)
from artifact.normalize import negate_prenex

import pytest


def label(c):
    return c.label


def test_levy_examples():
    assert classify_levy(parse("A w in z: (w = x | w = y)")).shape == DELTA0
    c = classify_levy(parse("E x: E y: x in y"))
    assert c.shape == NOT_IN and c.path == (0,)
    assert classify_levy(parse("A u: E v: u in v")).is_("Pi", 2)
    assert classify_levy(parse("E u: A v: u in v")).is_("Sigma", 2)


def test_levy_rejects_j():
    c = classify_levy(parse("j(x) in y"))
    assert c.shape == NOT_IN and c.certificate


def test_j_examples():
    assert classify_j(build_iteration_formulas().jiter).is_("Sigma", 1)
    assert classify_j(parse("A x in y: x in z")).shape == DELTA0
    assert classify_j(parse("E y: y in j(x)")).is_("Sigma", 1)
    phi = parse("E v2: v2 in v0 & v1 in j(v2)")
    assert classify_j(build_gamma(phi).gamma).is_("Pi", 2)


def test_sigma_inf_examples():
    assert classify_sigma_inf(parse("E x in j(a): (A y: y in x)")).shape == DELTA0
    assert classify_sigma_inf(parse("A x: ((A y: y in x) -> (A y: y in j(x)))")).is_("Pi", 1)
    assert classify_sigma_inf(parse("E x: A y: x in y")).shape == DELTA0


def test_fleischmann_examples():
    assert classify_fleischmann(parse("A x in a: x in b")).shape == DELTA0
    assert classify_fleischmann(parse("A z in q: E x: x in z")).is_("Sigma", 1)
    # the antecedent of the implication clause must sit one level down, so
    # an unbounded existential antecedent forces level 2
    assert classify_fleischmann(parse("(E x: x in a) -> (A y: y in b)")).is_("Pi", 2)
    assert classify_fleischmann(parse("(E x in c: x in a) -> (A y: y in b)")).is_("Pi", 1)


def test_j_height_examples():
    assert j_height(parse("A x in y: x in y")) == 0
    assert j_height(parse("j(x) in j(x)")) == 2
    assert j_height(parse("E x in j(y): j(x) in y")) == 2
    with pytest.raises(ClassificationError):
        j_height(parse("A x: j(x) in x"))


@given(formulas(with_j=False))
def test_levy_agrees_with_j_on_j_free(f):
    assert label(classify_levy(f)) == label(classify_j(f))


@given(formulas())
def test_certificates_replay(f):
    for fn in (classify_levy, classify_j, classify_sigma_inf, classify_fleischmann):
        c = fn(f)
        assert verify_certificate(f, c)
        assert isinstance(describe(f, c), str)


@given(formulas(unbounded=False), formulas(unbounded=False))
def test_j_height_additive(f, g):
    assert j_height(Bin(AND, f, g)) == j_height(f) + j_height(g)
    assert j_height(Not(f)) == j_height(f)


@given(formulas())
def test_classification_invariant_under_renaming(f):
    g = rename_apart(f)
    for fn in (classify_levy, classify_j, classify_sigma_inf):
        assert label(fn(f)) == label(fn(g))


@settings(max_examples=50)
@given(formulas(unbounded=False))
def test_negated_prenex_swaps_class(m):
    for n in (1, 2, 3):
        f = with_prefix(m, n, EXISTS, start=4)
        c = classify_j(f)
        if c.shape == DELTA0:
            continue
        d = classify_j(negate_prenex(f))
        assert d.n == c.n and {c.shape, d.shape} == {"Sigma", "Pi"}


def test_generated_prefixes_classify():
    for m in generate_formulas(4, 3, max_vars=3, unbounded=False)[:200]:
        for n, first in ((2, FORALL), (2, EXISTS)):
            f = with_prefix(m, n, first)
            want = ("Pi" if first == FORALL else "Sigma", n)
            fn = classify_levy if is_j_free(f) else classify_j
            c = fn(f)
            if c.shape != DELTA0:
                assert (c.shape, c.n) == want
