"""Toy weak class models over a layered finite universe.

``T(sigma, env)`` pre-evaluates sigma and evaluates the result in the
universe, with unbounded quantifiers ranging over the layer
``min(top, deg(env) + j-height)``.  ``weak_model_check`` then walks a slice
of the closure of the axiom list and checks every truth-definition clause
on every assignment of the free variables into a parameter domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .axioms import (
    PreEvaluationError,
    RedResult,
    SchemaInstance,
    _sep_shape,
    level_class,
    pre_evaluate,
    s_closure,
)
from .formula import (
    AND,
    EXISTS,
    FORALL,
    IMP,
    OR,
    Atom,
    Bin,
    BQuant,
    Formula,
    Not,
    Quant,
    Top,
    constants_of,
    free_vars,
    to_text,
)
from .hierarchy import ClassificationError, j_height
from .semantics import (
    DegreeError,
    Evaluator,
    FiniteUniverse,
    assignments,
    deg,
    is_member,
    make_set,
    members,
)


@dataclass(frozen=True)
class Violation:
    clause: str
    formula: Formula
    env: tuple
    detail: str = ""

    def __str__(self) -> str:
        vals = ", ".join(f"v{i}=#{x}" for i, x in self.env)
        return f"{self.clause}: {to_text(self.formula)} [{vals}] {self.detail}".rstrip()


@dataclass
class WeakModelReport:
    level: int
    formulas: int = 0
    checks: int = 0
    witnesses: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        head = "ok" if self.ok else f"{len(self.violations)} violation(s)"
        return (
            f"level {self.level}: {head}; {self.formulas} formulas, "
            f"{self.checks} clause checks, {self.witnesses} separation witnesses"
        )


class WeakModel:
    """The truth function T for one axiom list on one universe."""

    def __init__(
        self,
        u: FiniteUniverse,
        level: int = 0,
        reds: Sequence[RedResult] = (),
    ):
        if not u.layers:
            raise DegreeError("the weak model needs a layered universe")
        self.u = u
        self.level = level
        self.reds = tuple(reds)
        self.top = len(u.layers) - 1
        self._evaluators: dict = {}
        self._hat: dict = {}
        self._memo: dict = {}

    def hat(self, f: Formula) -> Formula:
        g = self._hat.get(f)
        if g is None:
            g = pre_evaluate(f, self.level, self.reds)
            self._hat[f] = g
        return g

    def _layer(self, g: Formula, env: dict) -> int:
        try:
            h = j_height(g)
        except ClassificationError:
            return self.top
        d = max((deg(x, self.u) for x in env.values()), default=0)
        for c in constants_of(g):
            d = max(d, deg(c, self.u))
        return min(self.top, d + h)

    def _evaluator(self, m: int) -> Evaluator:
        ev = self._evaluators.get(m)
        if ev is None:
            ev = Evaluator(self.u, default_domain=self.u.layer(m))
            self._evaluators[m] = ev
        return ev

    def term(self, t, env: dict) -> int:
        return Evaluator(self.u).term(t)(env)

    def __call__(self, f: Formula, env: dict) -> bool:
        fv = free_vars(f)
        key = (f, tuple(sorted((i, env.get(i, 0)) for i in fv)))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        g = self.hat(f)
        local = {i: env.get(i, 0) for i in fv}
        ev = self._evaluator(self._layer(g, local))
        r = bool(ev.compile(g)(dict(local)))
        self._memo[key] = r
        return r


def _sep_parts(f: Formula):
    """(phi, x, a-term, b-var) when f is E b Sep'_phi(a, b), else None."""
    if isinstance(f, Quant) and f.q == EXISTS and _sep_shape(f.body, f.var):
        left = f.body.left
        return left.body.left, left.var, left.bound, f.var
    return None


def weak_model_check(
    axioms: Iterable[SchemaInstance | Formula],
    u: FiniteUniverse,
    level: int = 0,
    domain: Sequence[int] | None = None,
    reds: Sequence[RedResult] = (),
    witness_domain: Sequence[int] | None = None,
    limit: int = 50,
) -> WeakModelReport:
    """Check the truth-definition clauses of T on the closure slice of the axioms.

    Free variables range over ``domain`` (default W_0).  Unbounded quantifier
    clauses are checked against ``domain`` for the universal direction and
    against ``witness_domain`` (default ``domain``) when a witness or a
    counterexample has to be found; separation sentences get the witness
    {x in a : T(phi(x))} instead of a search.
    """
    sentences = [a.sentence if isinstance(a, SchemaInstance) else a for a in axioms]
    for s in sentences:
        try:
            if not level_class(pre_evaluate(s, level, reds), level):
                raise ValueError(f"pre-evaluation leaves the decidable class: {to_text(s)}")
        except PreEvaluationError as e:
            raise ValueError(f"{e}: {to_text(s)}") from None
    T = WeakModel(u, level, reds)
    dom = list(u.layer(0)) if domain is None else list(domain)
    wdom = dom if witness_domain is None else list(witness_domain)
    slice_ = s_closure(sentences, combine=False)
    rep = WeakModelReport(level, formulas=len(slice_))

    def fail(clause, f, env, detail=""):
        if len(rep.violations) < limit:
            rep.violations.append(Violation(clause, f, tuple(sorted(env.items())), detail))

    for s in sentences:
        rep.checks += 1
        if not T(s, {}):
            fail("axiom", s, {})

    ev = Evaluator(u)
    for f in slice_:
        fv = sorted(free_vars(f))
        for a in assignments(fv, dom):
            env = {i: a[i] for i in fv}
            val = T(f, env)
            rep.checks += 1
            if isinstance(f, Top):
                if not val:
                    fail("top", f, env)
            elif isinstance(f, Atom):
                s, t = ev.term(f.left)(env), ev.term(f.right)(env)
                want = is_member(s, t) if f.rel == "in" else s == t
                if val != want:
                    fail("atom", f, env)
            elif isinstance(f, Not):
                if val == T(f.body, env):
                    fail("negation", f, env)
            elif isinstance(f, Bin):
                l, r = T(f.left, env), T(f.right, env)
                want = {AND: l and r, OR: l or r, IMP: (not l) or r}[f.conn]
                if val != want:
                    fail("connective", f, env)
            elif isinstance(f, BQuant):
                rng = members(ev.term(f.bound)(env))
                inst = (T(f.body, {**env, f.var: x}) for x in rng)
                want = all(inst) if f.q == FORALL else any(inst)
                if val != want:
                    fail("bounded-quantifier", f, env)
            elif isinstance(f, Quant):
                sep = _sep_parts(f)
                if sep is not None and val:
                    phi, x, aterm, b = sep
                    av = ev.term(aterm)(env)
                    wit = make_set(y for y in members(av) if T(phi, {**env, x: y}))
                    rep.witnesses += 1
                    if not u.contains(wit) or not T(f.body, {**env, b: wit}):
                        fail("separation-witness", f, env, f"b=#{wit}")
                    continue
                body = f.body
                if f.q == FORALL:
                    if val:
                        bad = next((x for x in dom if not T(body, {**env, f.var: x})), None)
                        if bad is not None:
                            fail("universal", f, env, f"fails at v{f.var}=#{bad}")
                    elif all(T(body, {**env, f.var: x}) for x in wdom):
                        fail("universal", f, env, "no counterexample")
                else:
                    if val:
                        if not any(T(body, {**env, f.var: x}) for x in wdom):
                            fail("existential", f, env, "no witness")
                    else:
                        good = next((x for x in dom if T(body, {**env, f.var: x})), None)
                        if good is not None:
                            fail("existential", f, env, f"witness v{f.var}=#{good} ignored")
    return rep
