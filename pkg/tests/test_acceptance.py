"""Acceptance suite: one test per criterion, each under its time limit.

A summary line per criterion is printed at the end of the run.
"""

from __future__ import annotations

import gc
import itertools
import json
import time
from pathlib import Path

import oracles
import pytest
from corpora import delta0_j, prenex_pairs, sigma_j

from artifact.axioms import (
    PreEvaluationError,
    build_gamma,
    build_iteration_formulas,
    build_red,
    build_truth_predicate,
    emit_schema_instances,
    level_class,
    pre_evaluate,
    s_closure,
    sep_sentence,
)
from artifact.formula import AND, FORALL, OR, Bin, Const, JApp, Quant, is_j_free, parse_with_names
from artifact.hierarchy import (
    DELTA0,
    classify_j,
    classify_levy,
    in_delta_sigma_inf,
    verify_certificate,
)
from artifact.normalize import KIT, d_normalize, j_d_normalize
from artifact.semantics import (
    Evaluator,
    all_j_tables,
    build_universe,
    check_equivalence,
    check_equivalence_under_j,
    kpair,
    layer_raising_j,
    members,
    pairing_domains,
    sampled_j_tables,
)
from artifact.sequent import check_derivation, derivation_from_json, soundness_sweep
from artifact.weakmodel import weak_model_check

GOLDEN = Path(__file__).parent / "data" / "golden"
LAYERS = (3, 4, 5)
V3, V4 = range(4), range(16)


@pytest.fixture(autouse=True)
def _quiet_heap():
    # objects left by earlier tests would otherwise be rescanned by every
    # full collection inside the timed region
    gc.collect()
    gc.freeze()
    # the corpora allocate millions of small nodes; the default young
    # generation threshold spends more time collecting than checking
    old = gc.get_threshold()
    gc.set_threshold(200_000, 50, 100)
    yield
    gc.set_threshold(*old)
    gc.unfreeze()


class Clock:
    def __init__(self, limit: float):
        self.limit = limit
        self.t0 = time.perf_counter()

    def check(self) -> float:
        dt = time.perf_counter() - self.t0
        assert dt < self.limit, f"took {dt:.1f}s, limit {self.limit}s"
        return dt


# --------------------------------------------------------------------- 1

# hand transcriptions of the displayed Delta_0 forms; {x} and {x,y} are
# unfolded through the first one
UPAIR = "(({a} in {z} & {b} in {z}) & A {w} in {z}: ({w} = {a} | {w} = {b}))"


def upair_text(z, a, b, w):
    return UPAIR.format(z=z, a=a, b=b, w=w)


DELTA0_FORMS = {
    "upair": (upair_text("z", "x", "y", "w"),
              lambda z, x, y: z == frozenset({x, y})),
    "upair-member": ("E w in z: " + upair_text("w", "x", "y", "u"),
                     lambda z, x, y: frozenset({x, y}) in z),
    "kpair": ("((E s in z: " + upair_text("s", "x", "x", "u") + ") & (E t in z: "
              + upair_text("t", "x", "y", "u") + ")) & A w in z: ("
              + upair_text("w", "x", "x", "u") + " | " + upair_text("w", "x", "y", "u") + ")",
              lambda z, x, y: z == oracles.kpair(x, y)),
    "union": ("(A w in z: E y in x: w in y) & (A y in x: A w in y: w in z)",
              lambda z, x, y: z == oracles.union(x)),
    "binary-union": ("((A w in x: w in z) & (A w in y: w in z)) & (A w in z: (w in x | w in y))",
                     lambda z, x, y: z == x | y),
    "empty": ("A w in z: ~(w = w)", lambda z, x, y: z == frozenset()),
}


def test_criterion_1_delta0_characterisation():
    clock = Clock(10)
    u = build_universe(4)
    sets = oracles.by_code(4)
    for name, (text, truth) in DELTA0_FORMS.items():
        f, names = parse_with_names(text, {"z": 0, "x": 1, "y": 2})
        assert classify_levy(f).shape == DELTA0, name
        run = Evaluator(u).compile(f)
        for z, x, y in itertools.product(V4, repeat=3):
            want = truth(sets[z], sets[x], sets[y])
            env = {0: z, 1: x, 2: y}
            assert run(dict(env)) == want, (name, z, x, y)
            oenv = {0: sets[z], 1: sets[x], 2: sets[y]}
            assert oracles.holds(f, oenv, sets.values()) == want, (name, z, x, y)
    # Kuratowski injectivity, on codes and on independent frozensets
    codes = {}
    for x, y in itertools.product(V4, repeat=2):
        p = kpair(x, y)
        assert codes.setdefault(p, (x, y)) == (x, y)
    fsets = {}
    for x, y in itertools.product(sets.values(), repeat=2):
        assert fsets.setdefault(oracles.kpair(x, y), (x, y)) == (x, y)
    assert len(codes) == len(fsets) == 256
    clock.check()


# --------------------------------------------------------------------- 2


def test_criterion_2_projections():
    clock = Clock(10)
    for f in (KIT.pair_def, KIT.proj0_def, KIT.proj1_def):
        c = classify_levy(f)
        assert c.shape == DELTA0 and verify_certificate(f, c)
    ev = Evaluator(build_universe(4))
    pair, p0, p1 = (ev.compile(f) for f in (KIT.pair_def, KIT.proj0_def, KIT.proj1_def))
    sets = oracles.by_code(4)
    for x, y in itertools.product(V4, repeat=2):
        p = kpair(x, y)
        op = oracles.kpair(sets[x], sets[y])
        assert oracles.pi0(op) == sets[x] and oracles.pi1(op) == sets[y]
        for v in V4:
            assert p0({0: v, 1: p}) == (v == x), (x, y, v)
            assert p1({0: v, 1: p}) == (v == y), (x, y, v)
            assert oracles.holds(KIT.proj0_def, {0: sets[v], 1: op}, ()) == (v == x)
            assert oracles.holds(KIT.proj1_def, {0: sets[v], 1: op}, ()) == (v == y)
        for a, b in itertools.product(V4, repeat=2):
            assert pair({0: p, 1: a, 2: b}) == ((a, b) == (x, y))
    clock.check()


# --------------------------------------------------------------------- 3


def test_criterion_3_d_operator():
    clock = Clock(300)
    u4 = build_universe(4)
    u3 = build_universe(3)
    tables3 = list(all_j_tables(3))
    tables4 = sampled_j_tables(4, 200, seed=3)
    assert len(tables3) == 256
    levy = prenex_pairs(100, with_j=False, seed=31)
    jvar = prenex_pairs(67, with_j=True, seed=32)[:200]
    assert len(levy) + len(jvar) >= 500
    for family, pairs in (("levy", levy), ("j", jvar)):
        normal = d_normalize if family == "levy" else j_d_normalize
        classify = classify_levy if family == "levy" else classify_j
        for phi, psi, mode in pairs:
            f = Bin(AND if mode == "and" else OR, phi, psi)
            trace: list = []
            g = normal(f, mode, trace)
            cf, cg = classify(phi), classify(g)
            assert (cg.shape, cg.n) == (cf.shape, cf.n), (mode, cf, cg)
            doms = pairing_domains(trace, V3)
            if family == "levy":
                r = check_equivalence(f, g, u4, free_domain=V4, default_domain=V3, domains_g=doms)
                assert r, (mode, r.counterexample)
                continue
            for u, tables, free in ((u3, tables3, V3), (u4, tables4, V4)):
                k, r = check_equivalence_under_j(f, g, u, tables, free_domain=free,
                                                 default_domain=V3, domains_g=doms)
                assert r, (mode, k, r.counterexample)
    # the quantifier modes on the same matrices
    for phi, _, _ in levy[:50] + jvar[:50]:
        q = Quant(phi.q, 0, phi)
        normal = d_normalize if is_j_free(phi) else j_d_normalize
        trace = []
        g = normal(q, "forall" if phi.q == FORALL else "exists", trace)
        c = (classify_levy if is_j_free(phi) else classify_j)(g)
        assert (c.shape, c.n) == (classify_j(phi).shape, classify_j(phi).n)
        if is_j_free(phi):
            r = check_equivalence(q, g, u4, free_domain=V4, default_domain=V3,
                                  domains_g=pairing_domains(trace, V3))
        else:
            _, r = check_equivalence_under_j(q, g, u4, tables4, free_domain=V4, default_domain=V3,
                                             domains_g=pairing_domains(trace, V3))
        assert r
    clock.check()


# --------------------------------------------------------------------- 4


def test_criterion_4_certification():
    clock = Clock(30)
    it = build_iteration_formulas()
    c = classify_j(it.jiter)
    assert c.is_("Sigma", 1) and verify_certificate(it.jiter, c)
    corpus = [(n, phi) for n in range(4) for phi in sigma_j(n, 50, seed=40 + n)]
    assert len(corpus) == 200
    for n, phi in corpus:
        g = build_gamma(phi)
        cg = classify_j(g.gamma)
        assert cg.is_("Pi", n + 1) and verify_certificate(g.gamma, cg), (n, cg)
    tcorpus = [f for f in delta0_j(400, seed=44, size=5) if in_delta_sigma_inf(f)][:200]
    assert len(tcorpus) == 200
    for f in tcorpus:
        tp = build_truth_predicate(0, f)
        a, b = classify_j(tp.pi_form), classify_j(tp.sigma_form)
        assert a.is_("Pi", 1) and verify_certificate(tp.pi_form, a)
        assert b.is_("Sigma", 1) and verify_certificate(tp.sigma_form, b)
    clock.check()


# --------------------------------------------------------------------- 5


def test_criterion_5_pre_evaluation():
    clock = Clock(30)
    ax = emit_schema_instances("wa0", 7)
    corpus = s_closure([a.sentence for a in ax], [Const(0), JApp(Const(1), 1)])
    bad = []
    for f in corpus:
        try:
            g = pre_evaluate(f)
            if not level_class(g, 0) or pre_evaluate(g) != g:
                bad.append(f)
        except PreEvaluationError:
            bad.append(f)
    assert not bad, f"{len(bad)} of {len(corpus)}"
    clock.check()


# --------------------------------------------------------------------- 6


def test_criterion_6_weak_model():
    clock = Clock(120)
    u = build_universe(5, levels=LAYERS, j=layer_raising_j(LAYERS, 7))
    corpus = delta0_j(100, seed=1)
    assert all(classify_j(f).shape == DELTA0 for f in corpus)
    sentences = [sep_sentence(f, 0) for f in corpus]
    rep = weak_model_check(sentences, u, 0, domain=V4)
    assert rep.ok, [str(v) for v in rep.violations[:5]]
    assert rep.witnesses >= 100 * 16
    clock.check()


# --------------------------------------------------------------------- 7


def test_criterion_7_sequent_kernel():
    clock = Clock(60)
    u = build_universe(5, levels=LAYERS, j=layer_raising_j(LAYERS, 0))
    manifest = json.loads((GOLDEN / "manifest.json").read_text())
    assert len(manifest) == 20
    for entry in manifest:
        d = derivation_from_json((GOLDEN / entry["file"]).read_text())
        rep = check_derivation(d)
        sweep = soundness_sweep(d, u, 0, domain=V4)
        if entry["valid"]:
            assert rep.ok, (entry["file"], rep.summary())
            assert sweep.ok, (entry["file"], sweep.summary())
        else:
            assert not rep.ok and rep.errors[0][0] == entry["bad_node"], entry["file"]
            assert not sweep.ok and sweep.index == entry["bad_node"], (entry["file"], sweep.summary())
    clock.check()


# --------------------------------------------------------------------- 8


def test_criterion_8_degree_bookkeeping():
    clock = Clock(60)
    rank: dict = {}

    def rk(c: int) -> int:
        r = rank.get(c)
        if r is None:
            r = rank[c] = max((rk(i) + 1 for i in range(c.bit_length()) if c >> i & 1), default=0)
        return r

    def odeg(c: int) -> int:
        return next(m for m, n in enumerate(LAYERS) if rk(c) < n)

    from artifact.semantics import deg

    for seed in (0, 1, 2):
        table = layer_raising_j(LAYERS, seed)
        u = build_universe(5, levels=LAYERS, j=table)
        for a in u.elements:
            da = deg(a, u)
            assert da == odeg(a)
            x = a
            for e in range(4):
                for b in members(x):
                    assert deg(b, u) <= da + e, (seed, a, e, b)
                    assert odeg(b) <= da + e
                x = table[x]
    clock.check()


# --------------------------------------------------------------------- 9


def test_criterion_9_reduction():
    clock = Clock(120)
    import random

    from artifact.axioms import generate_formulas

    mats = [m for m in generate_formulas(4, 2, with_j=True, unbounded=False) if not is_j_free(m)]
    rng = random.Random(9)
    pairs = [(Quant("E", 1, a), Quant("E", 1, b)) for a, b in (rng.sample(mats, 2) for _ in range(100))]
    u = build_universe(4)
    tables = sampled_j_tables(4, 20, seed=9)
    for phi, psi in pairs:
        assert classify_j(phi).is_("Sigma", 1) and classify_j(psi).is_("Sigma", 1)
        r = build_red(phi, psi)
        for p in (r.P0, r.P1, r.P2):
            c = classify_j(p)
            assert c.is_("Pi", 1) and verify_certificate(p, c)
        k, res = check_equivalence_under_j(r.body, r.Red, u, tables, free_domain=V4,
                                           default_domain=V3,
                                           domains_g=pairing_domains(r.trace, V3))
        assert res, (k, res.counterexample)
    clock.check()
