import oracles
import pytest
from hypothesis import given, settings
from strategies import formulas

from artifact.formula import (
    AND,
    EXISTS,
    FORALL,
    Bin,
    Not,
    Quant,
    Var,
    ball,
    conj,
    has_unbounded,
    mem,
    parse,
    rename_apart,
)
from artifact.normalize import (
    KIT,
    ShapeError,
    _Fresh,
    binary_union_formula,
    d_normalize,
    empty_formula,
    is_upair,
    j_d_normalize,
    negate_prenex,
    normalize_prenex,
    prenex,
    reduce_two_leading,
    union_formula,
    upair_member_formula,
)
from artifact.semantics import Evaluator, build_universe, check_equivalence, pairing_domains

V2, V3, V4 = oracles.hf(2), oracles.hf(3), oracles.hf(4)
U3 = build_universe(3)
U4 = build_universe(4)
C = oracles.code


def truth(f, env, u=U4):
    return Evaluator(u).compile(f)({i: C(s) for i, s in env.items()})


def test_pair_kit_against_oracle():
    for x in V2:
        for y in V2:
            for z in V4:
                assert truth(KIT.pair(Var(0), Var(1), Var(2)), {0: z, 1: x, 2: y}) == (
                    z == oracles.kpair(x, y)
                )


def test_projections_against_oracle():
    for x in V4:
        for y in V4:
            env = {0: y, 1: x}
            assert truth(KIT.proj0(Var(0), Var(1)), env) == (oracles.first_proj(x) == y)
            if oracles.pi0(x) is not None:
                assert oracles.first_proj(x) == oracles.pi0(x)
            assert truth(KIT.proj1(Var(0), Var(1)), env) == (oracles.pi1(x) == y)


def test_set_operations_against_oracle():
    z, x, y = Var(0), Var(1), Var(2)
    forms = {
        "union": (union_formula(z, x, _Fresh(range(3))), lambda a, b, c: a == oracles.union(b)),
        "binary union": (binary_union_formula(z, x, y, _Fresh(range(3))), lambda a, b, c: a == b | c),
        "empty": (empty_formula(z, _Fresh(range(3))), lambda a, b, c: not a),
        "upair": (is_upair(z, x, y, _Fresh(range(3))), lambda a, b, c: a == frozenset({b, c})),
        "upair member": (
            upair_member_formula(x, y, z, _Fresh(range(3))),
            lambda a, b, c: frozenset({b, c}) in a,
        ),
    }
    for name, (f, want) in forms.items():
        for a in V3:
            for b in V3:
                for c in V3:
                    assert truth(f, {0: a, 1: b, 2: c}) == want(a, b, c), name


def test_conjunctive_binary_union_is_wrong():
    # reading the last clause as a conjunction defines something else
    z, x, y = Var(0), Var(1), Var(2)
    right = binary_union_formula(z, x, y, _Fresh(range(3)))
    wrong = conj(
        ball(3, x, mem(Var(3), z)),
        ball(4, y, mem(Var(4), z)),
        ball(5, z, conj(mem(Var(5), x), mem(Var(5), y))),
    )
    r = check_equivalence(right, wrong, U3)
    assert not r


def test_reduce_two_leading_shape_errors():
    with pytest.raises(ShapeError):
        reduce_two_leading(parse("E x: A y: x in y"))
    with pytest.raises(ShapeError):
        reduce_two_leading(Quant(EXISTS, 0, Quant(EXISTS, 0, mem(Var(0), Var(1)))))
    with pytest.raises(ShapeError):
        reduce_two_leading(parse("x in y"))
    with pytest.raises(ShapeError):
        reduce_two_leading(parse("E x: E y: (x in y & (A z: z in x))"))


@settings(max_examples=40, deadline=None)
@given(formulas(with_j=False, unbounded=False, max_leaves=4))
def test_reduce_two_leading_is_exact_on_pairing_ranges(m):
    for q in (EXISTS, FORALL):
        f = Quant(q, 0, Quant(q, 1, m))
        trace = []
        g = reduce_two_leading(f, trace)
        assert len(trace) == 1 and (trace[0].left, trace[0].right) == (0, 1)
        doms = pairing_domains(trace, range(4))
        assert check_equivalence(f, g, U3, range(4), default_domain=range(4), domains_g=doms)


def test_d_normalize_errors():
    with pytest.raises(ShapeError):
        d_normalize(parse("E x: j(x) in y"), "exists")
    with pytest.raises(ShapeError):
        d_normalize(parse("x in y"), "exists")
    with pytest.raises(ShapeError):
        d_normalize(parse("(E x: x in y) & (A z: z in y)"), "and")
    with pytest.raises(ShapeError):
        d_normalize(parse("A x: E y: x in y"), "exists")
    with pytest.raises(ShapeError):
        d_normalize(parse("E x: E y: x in y"), "sideways")


def test_d_normalize_delta0_passes_through():
    f = parse("(A x in a: x in b) & (E y in b: y in a)")
    assert d_normalize(f, "and") == rename_apart(f)


SAMPLES = [
    ("E x: E y: x in y & y in z", "exists"),
    ("A x: A y: E w: x in w | y in w", "forall"),
    ("(E x: A y: x in y) | (E u: A v: v in u)", "or"),
    ("(A x: x in a) & (A y: a in y)", "and"),
]


@pytest.mark.parametrize("text, mode", SAMPLES)
def test_d_normalize_deterministic_and_family_agnostic(text, mode):
    f = parse(text)
    t1, t2 = [], []
    g = d_normalize(f, mode, t1)
    assert g == d_normalize(f, mode, t2) and t1 == t2
    assert j_d_normalize(f, mode) == g


@pytest.mark.parametrize("text, mode", SAMPLES)
def test_d_normalize_equivalent(text, mode):
    f = parse(text)
    trace = []
    g = d_normalize(f, mode, trace)
    doms = pairing_domains(trace, range(4))
    assert check_equivalence(f, g, U3, range(4), default_domain=range(4), domains_g=doms)


@settings(max_examples=60, deadline=None)
@given(formulas(with_j=False, max_leaves=4))
def test_prenex_equivalent(f):
    g = prenex(f, unbind=True)
    assert check_equivalence(f, g, U3)
    # every unbounded quantifier sits in the prefix
    while isinstance(g, Quant):
        g = g.body
    assert not has_unbounded(g)


@settings(max_examples=40, deadline=None)
@given(formulas(with_j=False, max_leaves=4))
def test_normalize_prenex_equivalent(f):
    trace = []
    g = normalize_prenex(f, trace, unbind=True)
    doms = pairing_domains(trace, range(4))
    assert check_equivalence(f, g, U3, range(4), default_domain=range(4), domains_g=doms)


@settings(max_examples=60, deadline=None)
@given(formulas(with_j=False, max_leaves=4))
def test_negate_prenex(f):
    g = prenex(f, unbind=True)
    assert check_equivalence(negate_prenex(g), Not(g), U3)
