"""Constructors for the embedding axioms and the formulas built around them.

Set-theoretic notions used inside formulas ("f is a function", "dom f = m",
"g restricted to i", "n is a natural number", ...) are spelled out as
bounded formulas over the pair kit.  The critical point and V_kappa are
slot terms (``@kappa``, ``@vkappa``) resolved by the universe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .formula import (
    has_unbounded,
    AND,
    EXISTS,
    FORALL,
    IMP,
    OR,
    TOP,
    Atom,
    Bin,
    BQuant,
    Formula,
    JApp,
    Not,
    Prim,
    Quant,
    Slot,
    Term,
    Top,
    Var,
    all_vars,
    ball,
    bex,
    conj,
    disj,
    eq,
    exists,
    forall,
    free_vars,
    fresh_indices,
    imp,
    is_j_free,
    jterm,
    match,
    mem,
    rename_apart,
    subformulas,
    substitute_terms,
    terms_of,
    term_power,
    term_var,
)
from .hierarchy import (
    DELTA0,
    PI,
    SIGMA,
    ClassificationError,
    HierarchyClass,
    classify_blocks,
    classify_j,
    classify_sigma_inf,
    delta_sigma_inf,
    in_delta_sigma_inf,
    j_height,
    pi_n_sigma_inf,
)
from .normalize import (
    _Fresh,
    _rebind,
    collapse,
    j_d_normalize,
    negate_prenex,
    pair_formula,
    prenex,
    split_prefix,
    with_prefix,
)

KAPPA = Slot("kappa")
VKAPPA = Slot("vkappa")


class AxiomError(ValueError):
    pass


# ---------------------------------------------------------------- macros


class Macros:
    """Bounded definitions; every call draws fresh bound variables."""

    def __init__(self, avoid: Iterable[int] = ()):
        self.fresh = _Fresh(avoid)

    def var(self) -> Var:
        return Var(self.fresh())

    def reserve(self, f: Formula) -> Formula:
        self.fresh.used |= all_vars(f)
        return f

    def pair(self, z: Term, x: Term, y: Term) -> Formula:
        return pair_formula(z, x, y, self.fresh)

    def empty(self, z: Term) -> Formula:
        w = self.var()
        return ball(w.index, z, Not(eq(w, w)))

    def succ(self, s: Term, i: Term) -> Formula:
        """s = i + 1"""
        x, y = self.var(), self.var()
        return conj(
            mem(i, s),
            ball(x.index, i, mem(x, s)),
            ball(y.index, s, disj(mem(y, i), eq(y, i))),
        )

    def components(self, p: Term, body) -> Formula:
        """Some a, b with p = <a, b> satisfy body(a, b)."""
        c, a, d, b = self.var(), self.var(), self.var(), self.var()
        inner = conj(self.pair(p, a, b), body(a, b))
        return bex(c.index, p, bex(a.index, c, bex(d.index, p, bex(b.index, d, inner))))

    def all_components(self, p: Term, body) -> Formula:
        """Every a, b with p = <a, b> satisfy body(a, b)."""
        c, a, d, b = self.var(), self.var(), self.var(), self.var()
        inner = imp(self.pair(p, a, b), body(a, b))
        return ball(c.index, p, ball(a.index, c, ball(d.index, p, ball(b.index, d, inner))))

    def function(self, f: Term) -> Formula:
        p, q = self.var(), self.var()
        pairs = ball(p.index, f, self.components(p, lambda a, b: TOP))

        def single(a, b):
            e, b2 = self.var(), self.var()
            return ball(q.index, f, ball(e.index, q, ball(b2.index, e,
                        imp(self.pair(q, a, b2), eq(b, b2)))))

        p2 = self.var()
        return conj(pairs, ball(p2.index, f, self.all_components(p2, single)))

    def app(self, f: Term, i: Term, y: Term) -> Formula:
        """f(i) = y"""
        p = self.var()
        return bex(p.index, f, self.pair(p, i, y))

    def app_some(self, f: Term, i: Term) -> Formula:
        """i is in the domain of f"""
        p, d, b = self.var(), self.var(), self.var()
        return bex(p.index, f, bex(d.index, p, bex(b.index, d, self.pair(p, i, b))))

    def dom_eq(self, f: Term, m: Term, with_top: bool = False) -> Formula:
        """dom f = m, or dom f = m + 1 when ``with_top`` is set."""
        p, i = self.var(), self.var()

        def inside(a, b):
            return disj(mem(a, m), eq(a, m)) if with_top else mem(a, m)

        parts = [
            ball(p.index, f, self.all_components(p, inside)),
            ball(i.index, m, self.app_some(f, i)),
        ]
        if with_top:
            parts.append(self.app_some(f, m))
        return conj(*parts)

    def restrict(self, x: Term, g: Term, i: Term) -> Formula:
        """x = g restricted to i"""
        p, p2 = self.var(), self.var()
        sub = ball(p.index, x, conj(mem(p, g), self.components(p, lambda a, b: mem(a, i))))
        sup = ball(p2.index, g, self.all_components(p2, lambda a, b: imp(mem(a, i), mem(p2, x))))
        return conj(sub, sup)

    def transitive(self, n: Term) -> Formula:
        y, z = self.var(), self.var()
        return ball(y.index, n, ball(z.index, y, mem(z, n)))

    def zero_or_succ(self, n: Term) -> Formula:
        p = self.var()
        return disj(self.empty(n), bex(p.index, n, self.succ(n, p)))

    def nat(self, n: Term) -> Formula:
        """n is a natural number: a transitive set of transitive sets, linearly
        ordered by membership, in which every element is zero or a successor."""
        y, z, y2, y3 = self.var(), self.var(), self.var(), self.var()
        linear = ball(y.index, n, ball(z.index, n, disj(mem(y, z), eq(y, z), mem(z, y))))
        return conj(
            self.transitive(n),
            ball(y2.index, n, self.transitive(y2)),
            linear,
            self.zero_or_succ(n),
            ball(y3.index, n, self.zero_or_succ(y3)),
        )

    def ge_plus(self, m: Term, l: Term, h: int) -> Formula:
        """m >= l + h for natural numbers m, l and a fixed standard h."""
        if h == 0:
            return disj(mem(l, m), eq(l, m))
        chain = [self.var() for _ in range(h - 1)]
        prev: Term = l
        links = []
        for s in chain:
            links.append(self.succ(s, prev))
            prev = s
        last = self.var()
        links.append(disj(self.succ(m, prev), bex(last.index, m, self.succ(last, prev))))
        body = conj(*links)
        for s in reversed(chain):
            body = bex(s.index, m, body)
        return body

    # iteration of j
    def prejiter(self, f: Term, n: Term, x: Term) -> Formula:
        """f is a function with domain n + 1, f(0) = x, f(i + 1) = j(f(i)) for i < n."""
        p, c, e = self.var(), self.var(), self.var()
        start = bex(p.index, f, bex(c.index, p, bex(e.index, c,
                    conj(self.empty(e), self.pair(p, e, x)))))
        q, r = self.var(), self.var()

        def step(i, y):
            return ball(r.index, f, self.all_components(
                r, lambda s, z: imp(self.succ(s, i), eq(z, jterm(y)))))

        steps = ball(q.index, f, self.all_components(q, step))
        return conj(self.function(f), self.dom_eq(f, n, with_top=True), start, steps)


# ---------------------------------------------------- iteration formulas


@dataclass(frozen=True)
class IterationFormulas:
    """prejiter(f=v0, n=v1, x=v2); jiter(n=v0, x=v1, y=v2); critseq(n=v0, y=v1).

    ``jiter`` is the prenex form  Ef [n in omega -> prejiter(f,n,x) & f(n)=y];
    ``jiter_literal`` keeps the quantifier inside the implication.
    """

    prejiter: Formula
    jiter: Formula
    critseq: Formula
    jiter_literal: Formula

    # older names for the same three formulas
    @property
    def Theta(self) -> Formula:
        return self.prejiter

    @property
    def Phi(self) -> Formula:
        return self.jiter

    @property
    def Psi(self) -> Formula:
        return self.critseq

    def as_dict(self) -> dict:
        return {"prejiter": self.prejiter, "jiter": self.jiter, "critseq": self.critseq}


def jiter_formula(n: Term, x: Term, y: Term, mac: Macros, literal: bool = False) -> Formula:
    f = mac.var()
    body = conj(mac.prejiter(f, n, x), mac.app(f, n, y))
    if literal:
        return imp(mac.nat(n), exists(f.index, body))
    return exists(f.index, imp(mac.nat(n), body))


def build_iteration_formulas() -> IterationFormulas:
    pre = Macros(range(3)).prejiter(Var(0), Var(1), Var(2))
    ji = jiter_formula(Var(0), Var(1), Var(2), Macros(range(3)))
    lit = jiter_formula(Var(0), Var(1), Var(2), Macros(range(3)), literal=True)
    crit = jiter_formula(Var(0), KAPPA, Var(1), Macros(range(2)))
    return IterationFormulas(pre, ji, crit, lit)


# ----------------------------------------------------------------- gamma


def _relabel(f: Formula, free: dict, avoid: Iterable[int]) -> Formula:
    """Rename free variables by ``free`` and move every binder off ``avoid``."""
    f = rename_apart(f)
    bound = sorted(all_vars(f) - free_vars(f))
    targets = set(avoid) | set(free.values()) | set(all_vars(f))
    new = fresh_indices(targets, len(bound))
    f = _rebind(f, {k: Var(i) for k, i in zip(bound, new)})
    return substitute_terms(f, {k: Var(i) for k, i in free.items()})


def _level(phi: Formula, what: str) -> int:
    c = classify_j(phi)
    if c.shape == DELTA0:
        return 0
    if c.shape == SIGMA:
        return c.n
    raise AxiomError(f"{what} must be Sigma^j_n, got {c.label}")


@dataclass(frozen=True)
class GammaResult:
    """gamma(g=v0, m=v1) and the two definitions of G(m=v0) = y=v1."""

    body: Formula
    gamma: Formula
    g_sigma: Formula
    g_pi: Formula
    n: int
    trace: tuple = field(default=(), compare=False)


def _gamma_body(phi: Formula, g: Var, m: Var, mac: Macros, with_top: bool) -> Formula:
    i, x, y = mac.var(), mac.var(), mac.var()
    inner = _relabel(phi, {0: x.index, 1: y.index}, mac.fresh.used)
    mac.reserve(inner)
    guard = conj(
        disj(mem(i, m), eq(i, m)) if with_top else mem(i, m),
        mac.restrict(x, g, i),
        mac.app(g, i, y),
    )
    block = forall(i.index, forall(x.index, forall(y.index, imp(guard, inner))))
    return conj(mac.function(g), mac.dom_eq(g, m, with_top), block)


def build_gamma(phi: Formula) -> GammaResult:
    """gamma(g, m): g is a function with domain m and phi(g|i, g(i)) for i in m.

    ``phi`` has free variables among v0 (the restriction) and v1 (the value).
    The restriction has no bounding term, so the i-block is unbounded and the
    result is collapsed to a single universal quantifier.
    """
    if not free_vars(phi) <= {0, 1}:
        raise AxiomError("phi must have free variables among v0, v1")
    n = _level(phi, "phi")
    g, m = Var(0), Var(1)
    mac = Macros({0, 1} | set(all_vars(phi)))
    body = _gamma_body(phi, g, m, mac, with_top=False)
    trace: list = []
    gamma = collapse(prenex(body), trace)

    # G(m) = y, with g ranging over functions on m + 1
    mac2 = Macros({0, 1} | set(all_vars(phi)))
    gg = mac2.var()
    core = _gamma_body(phi, gg, Var(0), mac2, with_top=True)
    val = mac2.app(gg, Var(0), Var(1))
    g_sigma = collapse(prenex(exists(gg.index, conj(core, val))), trace)
    g_pi = collapse(prenex(forall(gg.index, imp(core, val))), trace)
    return GammaResult(body, gamma, g_sigma, g_pi, n, tuple(trace))


# -------------------------------------------------------- reduced axioms


@dataclass(frozen=True)
class SchemaInstance:
    schema: str
    source: tuple
    sentence: Formula
    classification: HierarchyClass = field(compare=False)
    extra: object = field(default=None, compare=False)


def _instance(schema: str, source: tuple, sentence: Formula, extra=None) -> SchemaInstance:
    if free_vars(sentence):
        raise AxiomError(f"{schema} instance is not closed")
    return SchemaInstance(schema, source, sentence, classify_blocks(sentence), extra)


def elementarity_sentence(phi: Formula) -> Formula:
    """For all free x..: phi(x..) -> phi(j(x)..)."""
    fv = sorted(free_vars(phi))
    lifted = substitute_terms(phi, {i: jterm(Var(i)) for i in fv})
    out: Formula = imp(phi, lifted)
    for i in reversed(fv):
        out = forall(i, out)
    return out


def sep_prime(phi: Formula, x: int, a: Term, b: Term, avoid: Iterable[int] = ()) -> Formula:
    """For x in a (phi(x) -> x in b) and for x in b (x in a and phi(x))."""
    used = all_vars(phi)
    tv = {term_var(t) for t in (a, b)} - {None}
    if tv & used:
        # a or b would be captured; move phi off them first
        y = fresh_indices(used | tv | set(avoid), 1)[0]
        phi = _relabel(phi, {x: y}, used | tv | set(avoid) | {y})
        x = y
    return conj(
        ball(x, a, imp(phi, mem(Var(x), b))),
        ball(x, b, conj(mem(Var(x), a), phi)),
    )


def sep_sentence(phi: Formula, x: int, params: Sequence[int] = ()) -> Formula:
    """For all p.. and a there is b with Sep_phi(p.., a, b)."""
    used = set(all_vars(phi)) | set(params) | {x}
    a, b = fresh_indices(used, 2)
    body = sep_prime(phi, x, Var(a), Var(b), used | {a, b})
    out: Formula = forall(a, exists(b, body))
    for p in reversed(list(params)):
        out = forall(p, out)
    return out


def build_reduced_axioms(phi: Formula) -> list[SchemaInstance]:
    """Reduced elementarity, two-variable elementarity and reduced Separation
    instances that apply to phi, chosen by its free variables and class."""
    fv = sorted(free_vars(phi))
    out = []
    if len(fv) == 1:
        (x,) = fv
        if is_j_free(phi):
            out.append(_instance("reduced-elementarity", (phi,), elementarity_sentence(phi)))
        if classify_j(phi).shape == DELTA0:
            out.append(_instance("reduced-separation", (phi,), sep_sentence(phi, x)))
        if not out:
            raise AxiomError("single-variable phi must be j-free or Delta^j_0")
        return out
    if len(fv) == 2:
        if not is_j_free(phi) or classify_j(phi).shape != DELTA0:
            raise AxiomError("two-variable elementarity needs a j-free Delta_0 phi")
        return [_instance("two-variable-elementarity", (phi,), elementarity_sentence(phi))]
    raise AxiomError(f"phi must have one or two free variables, has {len(fv)}")


def critical_point_sentence() -> Formula:
    """kappa is an ordinal, j fixes every smaller ordinal, and kappa < j(kappa)."""
    mac = Macros()
    a, b, c = mac.var(), mac.var(), mac.var()
    ordinal = conj(
        mac.transitive(KAPPA),
        ball(a.index, KAPPA, mac.transitive(a)),
        ball(b.index, KAPPA, ball(c.index, KAPPA, disj(mem(b, c), eq(b, c), mem(c, b)))),
    )
    d = mac.var()
    return conj(ordinal, ball(d.index, KAPPA, eq(jterm(d), d)), mem(KAPPA, jterm(KAPPA)))


# ------------------------------------------------------------ reduction


@dataclass(frozen=True)
class RedResult:
    """P0(a), P1(a, b), P2(a, b) and Red(a, b) = P0 -> (P1 & P2); a=v0, b=v1."""

    P0: Formula
    P1: Formula
    P2: Formula
    Red: Formula
    bodies: tuple
    body: Formula
    n: int
    a: int = 0
    b: int = 1
    trace: tuple = field(default=(), compare=False)
    phi: Formula | None = None
    psi: Formula | None = None


def _single_free(f: Formula, what: str) -> int:
    fv = free_vars(f)
    if len(fv) != 1:
        raise AxiomError(f"{what} must have exactly one free variable")
    return next(iter(fv))


def red_bodies(phi: Formula, psi: Formula) -> tuple:
    """The three bounded-universal formulas before normalisation (x = v2)."""
    px, sx = _single_free(phi, "phi"), _single_free(psi, "psi")
    a, b, x = Var(0), Var(1), Var(2)
    p = _relabel(phi, {px: 2}, {0, 1, 2})
    s = _relabel(psi, {sx: 2}, {0, 1, 2} | all_vars(p))
    b0 = ball(2, a, disj(Not(p), Not(s)))
    b1 = ball(2, a, imp(p, mem(x, b)))
    b2 = ball(2, b, imp(mem(x, a), Not(s)))
    return b0, b1, b2, p, s


def _forall_collapse(g: Formula, trace: list, used: set) -> Formula:
    g = prenex(g)
    while isinstance(g, Quant) and isinstance(g.body, Quant) and g.body.q == g.q:
        g = j_d_normalize(g, "forall", trace, used)
        used |= all_vars(g)
    return g


def build_red(phi: Formula, psi: Formula) -> RedResult:
    n_phi, n_psi = _level(phi, "phi"), _level(psi, "psi")
    if n_phi != n_psi:
        raise AxiomError("phi and psi must share a level")
    n = n_phi
    b0, b1, b2, p, s = red_bodies(phi, psi)
    body = imp(b0, conj(b1, b2))
    if n == 0:
        return RedResult(b0, b1, b2, body, (b0, b1, b2), body, 0, phi=phi, psi=psi)
    a, b, x = Var(0), Var(1), Var(2)
    trace: list = []
    np_, ns = negate_prenex(p), negate_prenex(s)
    # pairing variables stay distinct across the three formulas, so the
    # trace names each of them once
    used = {0, 1, 2} | all_vars(p) | all_vars(s)
    d_or = j_d_normalize(Bin(OR, np_, ns), "or", trace, used)
    used |= all_vars(d_or)
    P0 = _forall_collapse(forall(2, imp(mem(x, a), d_or)), trace, used)
    P1 = _forall_collapse(forall(2, imp(mem(x, a), imp(p, mem(x, b)))), trace, used)
    P2 = _forall_collapse(forall(2, imp(mem(x, b), imp(mem(x, a), ns))), trace, used)
    red = imp(P0, conj(P1, P2))
    return RedResult(P0, P1, P2, red, (b0, b1, b2), body, n, trace=tuple(trace),
                     phi=phi, psi=psi)


def red_sentences(r: RedResult) -> tuple:
    """(Eb Red(a, b), Aa Eb Red(a, b))."""
    eb = exists(r.b, r.Red)
    return eb, forall(r.a, eb)


# ------------------------------------------------------ truth predicate


@dataclass(frozen=True)
class TruthPredicate:
    """Formulas expressing that phi holds of the values of its free variables.

    Level 0 gives both the universal and the existential definition; above
    level 0 the form matching phi's own shape is given and the other is None.
    """

    pi_form: Formula | None
    sigma_form: Formula | None
    n: int
    height: int


def _deg_bound(m: Var, args: Sequence[Term], h: int, mac: Macros) -> Formula:
    """m >= deg(args) + h, with deg(args) = l given by an iteration record f:
    rank(args) < f(l) and rank(args) >= f(k) for every k < l."""
    l, f, p = mac.var(), mac.var(), mac.var()

    def earlier(k, y):
        return imp(mem(k, l), Prim("rank_ge", tuple(args) + (y,)))

    body = conj(
        mac.nat(l),
        mac.prejiter(f, l, KAPPA),
        exists_value(f, l, lambda y: Prim("rank_lt", tuple(args) + (y,)), mac),
        ball(p.index, f, mac.all_components(p, earlier)),
        mac.ge_plus(m, l, h),
    )
    return exists(l.index, exists(f.index, body))


def exists_value(f: Term, i: Term, body, mac: Macros) -> Formula:
    """f(i) = y for some y satisfying body(y)."""
    p = mac.var()
    return bex(p.index, f, mac.components(p, lambda a, b: conj(eq(a, i), body(b))))


def _level0_forms(phi: Formula, args: Sequence[Term], avoid: Iterable[int]):
    h = j_height(phi)
    mac = Macros(set(avoid) | all_vars(phi))
    m, v = mac.var(), mac.var()
    sat = Prim("sat", (v,), phi)
    deg_s = _deg_bound(m, args, h, mac)
    it_s = jiter_formula(m, VKAPPA, v, mac)
    sigma = exists(m.index, exists(v.index, conj(mac.nat(m), deg_s, it_s, sat)))
    deg_p = _deg_bound(m, args, h, mac)
    it_p = jiter_formula(m, VKAPPA, v, mac)
    pi = forall(m.index, forall(v.index, imp(conj(mac.nat(m), deg_p, it_p), sat)))
    return collapse(prenex(pi)), collapse(prenex(sigma)), h


def build_truth_predicate(n: int, phi: Formula) -> TruthPredicate:
    """Truth of phi(a..) for its free variables a.., built syntactically.

    n = 0: phi in Delta^j_0(Sigma_inf); the universal form quantifies over
    every admissible level m and iterate v, the existential form asks for one.
    n >= 1: phi = Q x1 .. Q xk theta with theta in the base class and k <= n;
    the quantifier prefix is kept and the innermost one is merged with the
    matching level-0 form.
    """
    if n < 0:
        raise ValueError("level must be non-negative")
    if n == 0:
        ok, why, path = delta_sigma_inf(phi)
        if not ok:
            raise ClassificationError(f"not Delta^j_0(Sigma_inf): {why} at {path}")
        args = [Var(i) for i in sorted(free_vars(phi))]
        pi, sigma, h = _level0_forms(phi, args, ())
        return TruthPredicate(pi, sigma, 0, h)
    c = classify_sigma_inf(phi)
    if c.shape == DELTA0:
        return build_truth_predicate(0, phi)
    if c.shape not in (SIGMA, PI) or c.n > n:
        raise ClassificationError(f"not in Sigma^j_{n}(Sigma_inf): {c.label}")
    prefix, matrix = split_prefix(phi)
    args = [Var(i) for i in sorted(free_vars(phi) | {v for _, v in prefix})]
    pi0, sigma0, h = _level0_forms(matrix, args, all_vars(phi))
    inner = sigma0 if prefix[-1][0] == EXISTS else pi0
    out = collapse(prenex(with_prefix(prefix, inner)))
    if c.shape == SIGMA:
        return TruthPredicate(None, out, n, h)
    return TruthPredicate(out, None, n, h)


# --------------------------------------------------------- pre-evaluation


class PreEvaluationError(ValueError):
    pass


def _is_closed_term(t: Term) -> bool:
    return term_var(t) is None


def _lifted(left: Formula, right: Formula, lift: set) -> bool:
    """right is left with the variables in ``lift`` and every closed term
    raised by one application of j; variables bound inside stay put."""

    def term(s: Term, t: Term, bound: dict) -> bool:
        sv = term_var(s)
        if sv is not None and sv in bound:
            return term_var(t) == bound[sv] and term_power(t) == term_power(s)
        if (sv is not None and sv in lift) or sv is None:
            return t == jterm(s)
        return False

    def go(p: Formula, q: Formula, bound: dict) -> bool:
        if type(p) is not type(q):
            return False
        if isinstance(p, Atom):
            return p.rel == q.rel and term(p.left, q.left, bound) and term(p.right, q.right, bound)
        if isinstance(p, Not):
            return go(p.body, q.body, bound)
        if isinstance(p, Bin):
            return p.conn == q.conn and go(p.left, q.left, bound) and go(p.right, q.right, bound)
        if isinstance(p, (Quant, BQuant)):
            if p.q != q.q:
                return False
            if isinstance(p, BQuant) and not term(p.bound, q.bound, bound):
                return False
            return go(p.body, q.body, {**bound, p.var: q.var})
        return p == q

    return go(left, right, {})


def _base_j_free(f: Formula) -> bool:
    """No j except on closed terms (which come from substitution)."""
    return not any(isinstance(t, JApp) and not _is_closed_term(t) for t in terms_of(f))


def _elementarity_shape(f: Formula) -> bool:
    """Ax [phi(x) -> phi(j x)], Ax Ay [phi(x,y) -> ...] or Ay [phi(t,y) -> phi(j t, j y)]."""
    vars_: list = []
    g = f
    while isinstance(g, Quant) and g.q == FORALL and len(vars_) < 2:
        vars_.append(g.var)
        g = g.body
    if not vars_ or not (isinstance(g, Bin) and g.conn == IMP):
        return False
    left, right = g.left, g.right
    if not _base_j_free(left):
        return False
    open_ = free_vars(left) - set(vars_)
    if len(vars_) == 1 and not open_:
        return _lifted(left, right, set(vars_))  # reduced elementarity
    if classify_j(left).shape != DELTA0 or len(free_vars(left) | set(vars_)) > 2:
        return False
    return _lifted(left, right, set(vars_) | open_)


def _sep_shape(body: Formula, b: int) -> bool:
    """body is Sep'_phi(a, b) for some Delta^j_0 phi and term a."""
    if not (isinstance(body, Bin) and body.conn == AND):
        return False
    l, r = body.left, body.right
    if not (isinstance(l, BQuant) and l.q == FORALL and isinstance(r, BQuant) and r.q == FORALL):
        return False
    if r.bound != Var(b) or term_var(l.bound) == b:
        return False
    a = l.bound
    if not (isinstance(l.body, Bin) and l.body.conn == IMP):
        return False
    phi1, tail = l.body.left, l.body.right
    if tail != mem(Var(l.var), Var(b)):
        return False
    if not (isinstance(r.body, Bin) and r.body.conn == AND):
        return False
    if r.body.left != mem(Var(r.var), a):
        return False
    phi2 = r.body.right
    if l.var == r.var:
        if phi1 != phi2:
            return False
    elif match(phi1, substitute_terms(phi2, {r.var: Var(l.var)})) != {}:
        return False
    # Delta_0 with j: every quantifier bounded
    return free_vars(phi1) <= {l.var} and not has_unbounded(phi1)


def _sep_sentence_shape(f: Formula) -> bool:
    if isinstance(f, Quant) and f.q == FORALL:
        f = f.body
        if not (isinstance(f, Quant) and f.q == EXISTS):
            return False
    if not (isinstance(f, Quant) and f.q == EXISTS):
        return False
    return _sep_shape(f.body, f.var)


def _red_match(f: Formula, reds: Sequence[RedResult]) -> bool:
    for r in reds:
        eb, aeb = red_sentences(r)
        if match(aeb, f) is not None or match(eb, f, {r.a}) is not None:
            return True
    return False


def level_class(f: Formula, level: int) -> bool:
    """The class pre-evaluation must land in: Delta^j_0(Sigma_inf) at level 0,
    propositional combinations of Pi^j_n(Sigma_inf) formulas at level n."""
    if level == 0:
        return in_delta_sigma_inf(f)
    if pi_n_sigma_inf(f, level):
        return True
    if isinstance(f, Not):
        return level_class(f.body, level)
    if isinstance(f, Bin):
        return level_class(f.left, level) and level_class(f.right, level)
    return False


def pre_evaluate(f: Formula, level: int = 0, reds: Sequence[RedResult] = ()) -> Formula:
    """Replace the schema sentences that the decidable class cannot see by true.

    Level 0 replaces reduced elementarity sentences, two-variable elementarity
    sentences and their one-quantifier bodies, and Sep' sentences (with or
    without the outer universal).  Level n replaces Eb Red and Aa Eb Red for
    the reductions in ``reds``; everything inside Red is left alone.
    """
    if isinstance(f, Top):
        return f
    if level == 0:
        return _pre_evaluate0(f)
    if _red_match(f, reds):
        return TOP
    if pi_n_sigma_inf(f, level):
        return f
    if isinstance(f, Not):
        return Not(pre_evaluate(f.body, level, reds))
    if isinstance(f, Bin):
        return Bin(f.conn, pre_evaluate(f.left, level, reds), pre_evaluate(f.right, level, reds))
    raise PreEvaluationError("formula is outside the closure of the axiom set")


# closure members share their sentences, so level 0 is memoised
@lru_cache(maxsize=1 << 16)
def _pre_evaluate0(f: Formula) -> Formula:
    if isinstance(f, Top) or in_delta_sigma_inf(f):
        return f
    if _elementarity_shape(f) or _sep_sentence_shape(f):
        return TOP
    if isinstance(f, Not):
        return Not(_pre_evaluate0(f.body))
    if isinstance(f, Bin):
        return Bin(f.conn, _pre_evaluate0(f.left), _pre_evaluate0(f.right))
    raise PreEvaluationError("formula is outside the closure of the axiom set")


# ------------------------------------------------------- schema emission


def generate_formulas(
    size_bound: int,
    free: int = 1,
    with_j: bool = False,
    unbounded: bool = True,
    max_vars: int | None = None,
) -> list[Formula]:
    """Formulas of at most ``size_bound`` nodes with free variables exactly
    v0..v{free-1}, in a deterministic order.

    The grammar is kept small: atoms x in y (x != y), x = y (x < y) and, with
    ``with_j``, x in j(y) for the innermost y; negation of non-negations; conjunction and
    implication with an atom as one operand; quantifiers over the next
    variable index (at most ``max_vars`` in scope, default one more than the
    free ones) that occurs in the body, bounded by the innermost variable
    in scope (or j of it) or, with ``unbounded``, unbounded.
    """
    if max_vars is None:
        max_vars = free + 1
    cache: dict = {}

    def gen(sz: int, scope: tuple) -> list:
        key = (sz, scope)
        if key in cache:
            return cache[key]
        out: list = []
        if sz == 1:
            for s in scope:
                for t in scope:
                    if s != t:
                        out.append(mem(Var(s), Var(t)))
                    if s < t:
                        out.append(eq(Var(s), Var(t)))
                    if with_j and t == scope[-1]:
                        out.append(mem(Var(s), JApp(Var(t), 1)))
        else:
            out += [Not(g) for g in gen(sz - 1, scope) if not isinstance(g, Not)]
            atoms = gen(1, scope)
            if sz >= 3:
                for g in gen(sz - 2, scope):
                    for a in atoms:
                        out.append(Bin(AND, g, a))
                        out.append(Bin(IMP, g, a))
                        if sz > 3:
                            out.append(Bin(IMP, a, g))
            if len(scope) < max_vars:
                nv = len(scope)
                bounds = [Var(scope[-1])] if scope else []
                if with_j and scope:
                    bounds.append(JApp(Var(scope[-1]), 1))
                for g in gen(sz - 1, scope + (nv,)):
                    if nv not in free_vars(g):
                        continue
                    for t in bounds:
                        out.append(BQuant(EXISTS, nv, t, g))
                        out.append(BQuant(FORALL, nv, t, g))
                    if unbounded:
                        out.append(Quant(EXISTS, nv, g))
                        out.append(Quant(FORALL, nv, g))
        cache[key] = out
        return out

    scope = tuple(range(free))
    want = frozenset(scope)
    result = []
    for sz in range(1, size_bound + 1):
        for g in gen(sz, scope):
            if free_vars(g) == want:
                result.append(g)
    return result


def emit_schema_instances(theory: str, size_bound: int) -> list[SchemaInstance]:
    """Schema instances over generated formulas of at most ``size_bound`` nodes.

    theory: "btee" (critical point and one-variable elementarity), "wa0" /
    "reduced" (the level-0 reduced axioms), "sep" (only the reduced
    Delta^j_0-Separation instances), "wan:N" (the level-N axioms with
    Red sentences for Sigma^j_N pairs built from the generated matrices).
    """
    theory = theory.lower()
    out: list[SchemaInstance] = []
    if theory == "btee":
        out.append(_instance("critical-point", (), critical_point_sentence()))
        for phi in generate_formulas(size_bound, 1):
            out.append(_instance("elementarity", (phi,), elementarity_sentence(phi)))
        return out
    if theory in ("wa0", "reduced"):
        for phi in generate_formulas(size_bound, 1):
            out.append(_instance("reduced-elementarity", (phi,), elementarity_sentence(phi)))
        for phi in _two_variable(size_bound):
            out.append(_instance("two-variable-elementarity", (phi,), elementarity_sentence(phi)))
        for phi in generate_formulas(size_bound, 1, with_j=True, unbounded=False):
            out.append(_instance("reduced-separation", (phi,), sep_sentence(phi, 0)))
        return out
    if theory == "sep":
        for phi in generate_formulas(size_bound, 1, with_j=True, unbounded=False):
            out.append(_instance("reduced-separation", (phi,), sep_sentence(phi, 0)))
        return out
    if theory.startswith("wan:"):
        n = int(theory[4:])
        if n < 1:
            raise AxiomError("wan:N needs N >= 1")
        for phi in generate_formulas(size_bound, 1):
            out.append(_instance("reduced-elementarity", (phi,), elementarity_sentence(phi)))
        for phi in _two_variable(size_bound):
            out.append(_instance("two-variable-elementarity", (phi,), elementarity_sentence(phi)))
        mats = generate_formulas(max(1, size_bound - 2), 1 + n, with_j=True, unbounded=False)
        sig = [_sigma_prefix(m, n) for m in mats]
        for phi, psi in zip(sig, sig[1:]):
            r = build_red(phi, psi)
            eb, aeb = red_sentences(r)
            out.append(_instance("reduction", (phi, psi), aeb, r))
        return out
    raise AxiomError(f"unknown theory {theory!r}")


def _two_variable(size_bound: int) -> list[Formula]:
    # two free variables make the grammar much wider; two nodes smaller keeps
    # the three families of comparable size
    return generate_formulas(max(1, size_bound - 2), 2, unbounded=False)


def _sigma_prefix(matrix: Formula, n: int) -> Formula:
    """E v1 A v2 ... over the matrix, leaving v0 free."""
    f = matrix
    for k in range(n, 0, -1):
        f = Quant(EXISTS if k % 2 == 1 else FORALL, k, f)
    return f


def _strip_universals(f: Formula) -> list[Formula]:
    out = []
    while isinstance(f, Quant) and f.q == FORALL:
        f = f.body
        out.append(f)
    return out


def s_closure(
    sentences: Sequence[Formula], constants: Sequence[Term] = (), combine: bool = True
) -> list[Formula]:
    """A finite slice of the closure under subformulas, substitution of
    closed terms for free variables, and propositional combination.

    Closed terms are substituted, one term for all free variables at once,
    into the bodies left after stripping leading universals from a sentence
    (the instances a universal axiom is used at); their subformulas are not
    added again.  Combination adds the
    negation of every closed member and the conjunction and implication of
    neighbouring closed members.
    """
    seen: dict = {}
    for s in sentences:
        for g in subformulas(s):
            seen.setdefault(g, None)
    for s in sentences:
        for g in _strip_universals(s):
            fv = free_vars(g)
            for c in constants:
                seen.setdefault(substitute_terms(g, {i: c for i in fv}), None)
    if combine:
        closed = [g for g in seen if not free_vars(g)]
        for g in closed:
            seen.setdefault(Not(g), None)
        for g, h in zip(closed, closed[1:]):
            seen.setdefault(Bin(AND, g, h), None)
            seen.setdefault(Bin(IMP, h, g), None)
    return list(seen)
