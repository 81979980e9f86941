"""Kuratowski-pair formulas and the quantifier-collapsing D-operators.

Two adjacent same-type quantifiers Q x0 Q x1 are merged into one
quantifier Q w over pairs.  The components are recovered relationally: the
old variables become bounded quantifiers over members of the union of w,
guarded by the projection formulas (universal guards under a universal
w, existential guards under an existential w).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .formula import (
    AND,
    FORALL,
    IMP,
    OR,
    Atom,
    Bin,
    BQuant,
    Formula,
    Not,
    Quant,
    Term,
    Var,
    all_vars,
    ball,
    bex,
    conj,
    disj,
    dual,
    eq,
    fresh_indices,
    imp,
    is_j_free,
    iter_nodes,
    mem,
    rename_apart,
    substitute_terms,
    term_var,
)
from .formula import _subst_term
from .hierarchy import DELTA0, NOT_IN, classify_j, classify_levy


class ShapeError(ValueError):
    pass


# ---------------------------------------------------------- Delta_0 kit


class _Fresh:
    def __init__(self, avoid: Iterable[int]):
        self.used = set(avoid)

    def __call__(self) -> int:
        i = fresh_indices(self.used, 1)[0]
        self.used.add(i)
        return i


def is_upair(z: Term, x: Term, y: Term, fresh: _Fresh) -> Formula:
    """z = {x, y}"""
    w = fresh()
    return conj(mem(x, z), mem(y, z), ball(w, z, disj(eq(Var(w), x), eq(Var(w), y))))


def pair_formula(z: Term, x: Term, y: Term, fresh: _Fresh) -> Formula:
    """z = <x, y>: {x} in z, {x,y} in z, and every member of z is one of them."""
    s, t, w = fresh(), fresh(), fresh()
    return conj(
        bex(s, z, is_upair(Var(s), x, x, fresh)),
        bex(t, z, is_upair(Var(t), x, y, fresh)),
        ball(w, z, disj(is_upair(Var(w), x, x, fresh), is_upair(Var(w), x, y, fresh))),
    )


def _in_proj0(z: Term, x: Term, fresh: _Fresh) -> Formula:
    """z in pi0(x), i.e. z lies in some u in Ux that belongs to every member of x."""
    w1, w0, vv = fresh(), fresh(), fresh()
    return bex(w1, x, bex(w0, Var(w1), conj(mem(z, Var(w0)), ball(vv, x, mem(Var(w0), Var(vv))))))


def proj0_formula(y: Term, x: Term, fresh: _Fresh) -> Formula:
    """y = pi0(x) with pi0(x) = U{u in Ux : u in every member of x}."""
    w1, w0, z, vv, z2 = fresh(), fresh(), fresh(), fresh(), fresh()
    subset = ball(
        w1, x,
        ball(w0, Var(w1),
             ball(z, Var(w0), imp(ball(vv, x, mem(Var(w0), Var(vv))), mem(Var(z), y)))),
    )
    superset = ball(z2, y, _in_proj0(Var(z2), x, fresh))
    return conj(subset, superset)


def proj1_formula(y: Term, x: Term, fresh: _Fresh) -> Formula:
    """y = pi1(x): x is a pair <a, y> for some a in Ux."""
    w, a = fresh(), fresh()
    return bex(w, x, bex(a, Var(w), pair_formula(x, Var(a), y, fresh)))


def union_formula(z: Term, x: Term, fresh: _Fresh) -> Formula:
    w, y, y2, w2 = fresh(), fresh(), fresh(), fresh()
    return conj(
        ball(w, z, bex(y, x, mem(Var(w), Var(y)))),
        ball(y2, x, ball(w2, Var(y2), mem(Var(w2), z))),
    )


def binary_union_formula(z: Term, x: Term, y: Term, fresh: _Fresh) -> Formula:
    w0, w1, w2 = fresh(), fresh(), fresh()
    return conj(
        conj(ball(w0, x, mem(Var(w0), z)), ball(w1, y, mem(Var(w1), z))),
        ball(w2, z, disj(mem(Var(w2), x), mem(Var(w2), y))),
    )


def empty_formula(z: Term, fresh: _Fresh) -> Formula:
    w = fresh()
    return ball(w, z, Not(eq(Var(w), Var(w))))


def upair_member_formula(x: Term, y: Term, z: Term, fresh: _Fresh) -> Formula:
    """{x, y} in z"""
    w = fresh()
    return bex(w, z, is_upair(Var(w), x, y, fresh))


@dataclass(frozen=True)
class PairKit:
    """Templates over v0, v1, v2 (bound variables start at 3).

    pair_def(v0, v1, v2): v0 = <v1, v2>; proj0_def(v0, v1): v0 = pi0(v1);
    proj1_def(v0, v1): v0 = pi1(v1).
    """

    pair_def: Formula
    proj0_def: Formula
    proj1_def: Formula

    def pair(self, z: Term, x: Term, y: Term, avoid: Iterable[int] = ()) -> Formula:
        return _instance(self.pair_def, (z, x, y), avoid)

    def proj0(self, y: Term, x: Term, avoid: Iterable[int] = ()) -> Formula:
        return _instance(self.proj0_def, (y, x), avoid)

    def proj1(self, y: Term, x: Term, avoid: Iterable[int] = ()) -> Formula:
        return _instance(self.proj1_def, (y, x), avoid)


def _instance(template: Formula, args: tuple, avoid: Iterable[int]) -> Formula:
    arg_vars = {term_var(t) for t in args} - {None}
    used = set(avoid) | arg_vars | set(range(len(args)))
    bound = sorted(all_vars(template) - set(range(len(args))))
    new = fresh_indices(used, len(bound))
    # move bound variables out of the way first, then plug in the arguments
    moved = _rebind(template, {k: Var(i) for k, i in zip(bound, new)})
    return substitute_terms(moved, dict(enumerate(args)))


def _rebind(f: Formula, m: dict) -> Formula:
    """Rename binders and their occurrences together (no capture checks)."""
    if isinstance(f, Atom):
        return Atom(f.rel, _subst_term(f.left, m), _subst_term(f.right, m))
    if isinstance(f, Not):
        return Not(_rebind(f.body, m))
    if isinstance(f, Bin):
        return Bin(f.conn, _rebind(f.left, m), _rebind(f.right, m))
    if isinstance(f, Quant):
        return Quant(f.q, _subst_term(Var(f.var), m).index, _rebind(f.body, m))
    if isinstance(f, BQuant):
        var = _subst_term(Var(f.var), m).index
        return BQuant(f.q, var, _subst_term(f.bound, m), _rebind(f.body, m))
    return f


def build_pair_kit() -> PairKit:
    fresh = _Fresh(range(3))
    pair = pair_formula(Var(0), Var(1), Var(2), fresh)
    fresh = _Fresh(range(3))
    p0 = proj0_formula(Var(0), Var(1), fresh)
    fresh = _Fresh(range(3))
    p1 = proj1_formula(Var(0), Var(1), fresh)
    return PairKit(pair, p0, p1)


KIT = build_pair_kit()


# ------------------------------------------------------------- collapse


@dataclass(frozen=True)
class Pairing:
    """Record that variable ``var`` codes the pair (left, right)."""

    var: int
    left: int
    right: int


def split_prefix(f: Formula) -> tuple[list, Formula]:
    prefix = []
    while isinstance(f, Quant):
        prefix.append((f.q, f.var))
        f = f.body
    return prefix, f


def with_prefix(prefix: list, matrix: Formula) -> Formula:
    for q, var in reversed(prefix):
        matrix = Quant(q, var, matrix)
    return matrix


def _guard(q: str, w: int, x0: int, x1: int, matrix: Formula, avoid: set) -> Formula:
    fresh = _Fresh(avoid | {w, x0, x1})
    c, d = fresh(), fresh()
    g0 = KIT.proj0(Var(x0), Var(w), fresh.used)
    fresh.used |= all_vars(g0)
    g1 = KIT.proj1(Var(x1), Var(w), fresh.used)
    fresh.used |= all_vars(g1)
    if q == FORALL:
        inner = imp(conj(g0, g1), matrix)
        return ball(c, Var(w), ball(x0, Var(c), ball(d, Var(w), ball(x1, Var(d), inner))))
    inner = conj(g0, g1, matrix)
    return bex(c, Var(w), bex(x0, Var(c), bex(d, Var(w), bex(x1, Var(d), inner))))


def reduce_two_leading(
    f: Formula, trace: list | None = None, avoid: Iterable[int] = ()
) -> Formula:
    """Q x0 Q x1 P M  ->  Q w P M' with x0, x1 read off w by projection guards."""
    if not (isinstance(f, Quant) and isinstance(f.body, Quant) and f.q == f.body.q):
        raise ShapeError("expected two leading quantifiers of the same type")
    q, x0, x1 = f.q, f.var, f.body.var
    if x0 == x1:
        raise ShapeError("leading quantifiers bind the same variable")
    prefix, matrix = split_prefix(f.body.body)
    if any(isinstance(g, Quant) for g in _nodes(matrix)):
        raise ShapeError("matrix is not quantifier-free over unbounded quantifiers")
    used = set(all_vars(f)) | set(avoid)
    w = fresh_indices(used, 1)[0]
    used.add(w)
    new_matrix = _guard(q, w, x0, x1, matrix, used)
    if trace is not None:
        trace.append(Pairing(w, x0, x1))
    return Quant(q, w, with_prefix(prefix, new_matrix))


def _nodes(f: Formula):
    return iter_nodes(f)


def collapse(f: Formula, trace: list | None = None, avoid: Iterable[int] = ()) -> Formula:
    """Merge adjacent same-type quantifiers, innermost blocks first."""
    prefix, matrix = split_prefix(f)
    avoid = set(avoid) | set(all_vars(f))
    # rebuild from the inside, collapsing whenever the two outermost agree
    cur = matrix
    for q, var in reversed(prefix):
        cur = Quant(q, var, cur)
        while isinstance(cur.body, Quant) and cur.body.q == cur.q:
            cur = reduce_two_leading(cur, trace, avoid)
            avoid |= all_vars(cur)
    return cur


# ---------------------------------------------------------- D-operators


def _classify(f: Formula, family: str):
    return classify_levy(f) if family == "levy" else classify_j(f)


def negate_prenex(f: Formula) -> Formula:
    """Push a negation through a prenex prefix: not Q x M -> dual Q x not M."""
    prefix, matrix = split_prefix(f)
    return with_prefix([(dual(q), v) for q, v in prefix], Not(matrix))


def _d_normalize(
    f: Formula, mode: str, family: str, trace: list | None, avoid: Iterable[int] = ()
) -> Formula:
    if family == "levy" and not is_j_free(f):
        raise ShapeError("mixed families: j occurs in a Levy normalisation")
    f = rename_apart(f)
    if mode in ("forall", "exists"):
        if not isinstance(f, Quant):
            raise ShapeError("expected a leading quantifier")
        inner = _classify(f.body, family)
        if inner.shape == NOT_IN:
            raise ShapeError("operand is not prenex")
        if inner.shape == DELTA0:
            return f
        if (f.q == FORALL) != (inner.shape == "Pi"):
            raise ShapeError("quantifier does not match the operand's class")
        return reduce_two_leading(f, trace, avoid)
    if mode not in ("and", "or"):
        raise ShapeError(f"unknown mode {mode!r}")
    conn = AND if mode == "and" else OR
    if not (isinstance(f, Bin) and f.conn == conn):
        raise ShapeError(f"expected a {mode} of two formulas")
    cl, cr = _classify(f.left, family), _classify(f.right, family)
    if NOT_IN in (cl.shape, cr.shape):
        raise ShapeError("operand is not prenex")
    if cl.shape == DELTA0 and cr.shape == DELTA0:
        return f
    if (cl.shape, cl.n) != (cr.shape, cr.n):
        raise ShapeError(f"operands differ in class: {cl.label} vs {cr.label}")
    pl, ml = split_prefix(f.left)
    pr, mr = split_prefix(f.right)
    interleaved = []
    for a, b in zip(pl, pr):
        interleaved += [a, b]
    merged = with_prefix(interleaved, Bin(conn, ml, mr))
    return collapse(merged, trace, avoid)


def d_normalize(
    f: Formula, mode: str, trace: list | None = None, avoid: Iterable[int] = ()
) -> Formula:
    """D-operator for j-free strict Sigma_n/Pi_n operands.

    mode "forall" (or "exists") takes Q x0 phi; "and"/"or" take phi & psi or
    phi | psi.  Pairing variables are appended to ``trace`` when given and
    are chosen off ``avoid``.
    """
    return _d_normalize(f, mode, "levy", trace, avoid)


def j_d_normalize(
    f: Formula, mode: str, trace: list | None = None, avoid: Iterable[int] = ()
) -> Formula:
    """As d_normalize, with j allowed in atoms."""
    return _d_normalize(f, mode, "j", trace, avoid)


# --------------------------------------------------------- prenex pass


def unbound(f: BQuant) -> Quant:
    """Q x in t: phi  ->  Q x (x in t -> phi) / Q x (x in t & phi)."""
    guard = mem(Var(f.var), f.bound)
    body = imp(guard, f.body) if f.q == FORALL else conj(guard, f.body)
    return Quant(f.q, f.var, body)


def prenex(f: Formula, unbind: bool = False) -> Formula:
    """Pull unbounded quantifiers to the front (left operand first).

    A bounded quantifier with an unbounded one below it is rewritten as an
    unbounded quantifier when ``unbind`` is set, and is an error otherwise.
    """
    f = rename_apart(f)

    def go(g: Formula) -> tuple[list, Formula]:
        if isinstance(g, Quant):
            p, m = go(g.body)
            return [(g.q, g.var)] + p, m
        if isinstance(g, BQuant):
            p, m = go(g.body)
            if not p:
                return [], BQuant(g.q, g.var, g.bound, m)
            if not unbind:
                raise ShapeError("unbounded quantifier under a bounded one")
            return go(unbound(g))
        if isinstance(g, Not):
            p, m = go(g.body)
            return [(dual(q), v) for q, v in p], Not(m)
        if isinstance(g, Bin):
            pl, ml = go(g.left)
            pr, mr = go(g.right)
            if g.conn == IMP:
                pl = [(dual(q), v) for q, v in pl]
            return pl + pr, Bin(g.conn, ml, mr)
        return [], g

    p, m = go(f)
    return with_prefix(p, m)


def normalize_prenex(f: Formula, trace: list | None = None, unbind: bool = False) -> Formula:
    """Prenex form with repeated quantifier blocks collapsed."""
    return collapse(prenex(f, unbind), trace)
