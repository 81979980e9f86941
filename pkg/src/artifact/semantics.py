"""Hereditarily finite universes and a brute-force satisfaction oracle.

Sets are represented by their Ackermann codes: the code of a set is the
sum of 2**c over the codes c of its members, so V_N is exactly the range
[0, |V_N|).  Universes may carry a layer sequence W_0 <= W_1 <= ... (a toy
critical sequence) and an interpretation of j.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from .formula import (
    AND,
    FORALL,
    IN,
    OR,
    Assignment,
    Atom,
    Bin,
    Bottom,
    BQuant,
    Const,
    Formula,
    JApp,
    Not,
    Prim,
    Quant,
    Slot,
    Term,
    Top,
    Var,
    free_vars,
    iter_nodes,
    jterm,
    substitute_terms,
)

MAX_RANK = 6


class EvalError(RuntimeError):
    pass


class DegreeError(ValueError):
    pass


# ------------------------------------------------------------ set codes


def tower(n: int) -> int:
    """|V_n|: 0, 1, 2, 4, 16, 65536, 2**65536."""
    size = 0
    for _ in range(n):
        size = 1 << size
    return size


# Sets that are not subsets of V_5 (nested pairs, for instance) would need
# astronomically large Ackermann codes.  They get negative ids instead,
# interned by member set, so every hereditarily finite set still has
# exactly one representation.
ACKERMANN_LIMIT = 1 << 16
_SYNTH_IDS: dict = {}
_SYNTH_MEMBERS: list = []


def make_set(elems: Iterable[int]) -> int:
    es = frozenset(elems)
    if all(0 <= e < ACKERMANN_LIMIT for e in es):
        code = 0
        for e in es:
            code |= 1 << e
        return code
    sid = _SYNTH_IDS.get(es)
    if sid is None:
        _SYNTH_MEMBERS.append((tuple(sorted(es)), es))
        sid = -len(_SYNTH_MEMBERS)
        _SYNTH_IDS[es] = sid
    return sid


@lru_cache(maxsize=None)
def members(code: int) -> tuple:
    if code < 0:
        return _SYNTH_MEMBERS[-code - 1][0]
    out = []
    c = code
    while c:
        low = c & -c
        out.append(low.bit_length() - 1)
        c ^= low
    return tuple(out)


def encode(elems: Iterable[int]) -> int:
    return make_set(elems)


def is_member(a: int, b: int) -> bool:
    if b < 0:
        return a in _SYNTH_MEMBERS[-b - 1][1]
    return a >= 0 and (b >> a) & 1 == 1


def singleton(a: int) -> int:
    return make_set((a,))


def upair(a: int, b: int) -> int:
    return make_set((a, b))


def kpair(a: int, b: int) -> int:
    """Kuratowski pair {{a},{a,b}}."""
    return upair(singleton(a), upair(a, b))


def union(a: int) -> int:
    return make_set(x for m in members(a) for x in members(m))


@lru_cache(maxsize=None)
def rank(code: int) -> int:
    ms = members(code)
    return max((rank(m) + 1 for m in ms), default=0)


def ordinal(n: int) -> int:
    code = 0
    for _ in range(n):
        code |= 1 << code
    return code


def unpair(p: int) -> tuple | None:
    """Components of p if p is a Kuratowski pair."""
    ms = members(p)
    if len(ms) == 1:
        inner = members(ms[0])
        if len(inner) == 1:
            return inner[0], inner[0]
        return None
    if len(ms) == 2:
        a_set, b_set = ms
        if len(members(a_set)) != 1:
            a_set, b_set = b_set, a_set
        if len(members(a_set)) != 1:
            return None
        a = members(a_set)[0]
        rest = [x for x in members(b_set) if x != a]
        if len(members(b_set)) == 2 and a in members(b_set) and len(rest) == 1:
            return a, rest[0]
    return None


# ------------------------------------------------------------- universe


@dataclass(frozen=True)
class FiniteUniverse:
    rank_cap: int
    layers: tuple = ()
    j_table: Mapping[int, int] | None = None
    slots: Mapping[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return tower(self.rank_cap)

    @property
    def elements(self) -> range:
        return range(self.size)

    def contains(self, code: int) -> bool:
        return 0 <= code < self.size

    def j(self, code: int) -> int:
        if self.j_table is None:
            raise EvalError("universe has no j interpretation")
        try:
            return self.j_table[code]
        except (KeyError, IndexError):
            raise EvalError(f"j undefined at #{code}") from None

    def japp(self, code: int, power: int) -> int:
        for _ in range(power):
            code = self.j(code)
        return code

    def slot(self, name: str) -> int:
        try:
            return self.slots[name]
        except KeyError:
            raise EvalError(f"slot @{name} not set") from None

    def layer(self, m: int) -> range:
        return range(tower(self.layers[min(m, len(self.layers) - 1)]))

    def with_j(self, j_table: Mapping[int, int] | Sequence[int]) -> "FiniteUniverse":
        return FiniteUniverse(self.rank_cap, self.layers, j_table, self.slots)


def build_universe(
    n: int,
    levels: Sequence[int] | None = None,
    j: Mapping[int, int] | Sequence[int] | Callable[[int], int] | None = None,
    slots: Mapping[str, int] | None = None,
) -> FiniteUniverse:
    """V_n, optionally layered as W_m = V_{levels[m]}, with j given as a table.

    With layers present, j must send W_m into W_{m+1} (the top layer into
    itself).
    """
    if not 0 <= n <= MAX_RANK:
        raise ValueError(f"rank cap must be between 0 and {MAX_RANK}")
    lv = tuple(levels or ())
    if lv:
        if any(b <= a for a, b in zip(lv, lv[1:])) or lv[-1] > n:
            raise ValueError("layers must be strictly increasing and inside V_n")
    table = None
    if j is not None:
        if n > 5:
            raise ValueError("j tables are supported up to V_5")
        size = tower(n)
        if callable(j):
            table = tuple(j(x) for x in range(size))
        elif isinstance(j, Mapping):
            if any(x not in j for x in range(size)):
                raise ValueError("j is not total on the universe")
            table = tuple(j[x] for x in range(size))
        else:
            table = tuple(j)
            if len(table) != size:
                raise ValueError("j is not total on the universe")
        if any(not 0 <= y < size for y in table):
            raise ValueError("j leaves the universe")
        if lv:
            for x in range(size):
                m = _deg(x, lv)
                top = min(m + 1, len(lv) - 1)
                if table[x] >= tower(lv[top]):
                    raise ValueError(f"j raises #{x} by more than one layer")
    return FiniteUniverse(n, lv, table, dict(slots or {}))


def _deg(code: int, levels: Sequence[int]) -> int:
    for m, r in enumerate(levels):
        if code < tower(r):
            return m
    raise DegreeError(f"#{code} lies outside every layer")


def deg(code: int, u: FiniteUniverse) -> int:
    """Least m with code in W_m."""
    if not u.layers:
        raise DegreeError("universe has no layers")
    return _deg(code, u.layers)


def all_j_tables(n: int) -> Iterable[tuple]:
    """Every function V_n -> V_n (256 of them on V_3)."""
    size = tower(n)
    return itertools.product(range(size), repeat=size)


def sampled_j_tables(n: int, count: int, seed: int) -> list[tuple]:
    size = tower(n)
    rng = random.Random(seed)
    return [tuple(rng.randrange(size) for _ in range(size)) for _ in range(count)]


def layer_raising_j(levels: Sequence[int], seed: int, fix_bottom: bool = True) -> tuple:
    """A seeded j on V_{levels[-1]} sending W_m into W_{m+1}."""
    rng = random.Random(seed)
    out = []
    for x in range(tower(levels[-1])):
        m = _deg(x, levels)
        if m == 0 and fix_bottom:
            out.append(x)
            continue
        top = tower(levels[min(m + 1, len(levels) - 1)])
        out.append(rng.randrange(top))
    return tuple(out)


# ------------------------------------------------------------ evaluator


Env = dict


def _has_quantifier(f: Formula) -> bool:
    return any(isinstance(g, (Quant, BQuant)) for g in iter_nodes(f))


class Evaluator:
    """Compiles formulas into closures over an environment dict.

    Unbounded quantifiers range over ``domains[var]`` when given, else over
    ``default_domain`` (all of the universe by default).  Quantified
    subformulas are memoised on the values of their free variables.
    """

    def __init__(
        self,
        universe: FiniteUniverse,
        domains: Mapping[int, Sequence[int]] | None = None,
        default_domain: Sequence[int] | None = None,
    ):
        self.u = universe
        self.domains = dict(domains or {})
        self.default_domain = universe.elements if default_domain is None else default_domain
        self._cache: dict = {}

    # terms
    def term(self, t: Term) -> Callable[[Env], int]:
        u = self.u
        if isinstance(t, Var):
            i = t.index
            return lambda env: env.get(i, 0)
        if isinstance(t, Const):
            c = t.code
            return lambda env: c
        if isinstance(t, Slot):
            c = u.slot(t.name)
            return lambda env: c
        if isinstance(t, JApp):
            base, p = self.term(t.base), t.power
            return lambda env: u.japp(base(env), p)
        raise TypeError(t)

    def compile(self, f: Formula) -> Callable[[Env], bool]:
        key = id(f)
        hit = self._cache.get(key)
        if hit is not None and hit[0] is f:
            return hit[1]
        fn = self._compile(f, None)
        self._cache[key] = (f, fn)
        return fn

    def _domain_for(self, var: int, restrict):
        if restrict is not None:
            return restrict
        dom = self.domains.get(var, self.default_domain)
        return lambda env: dom

    def _compile(self, f: Formula, restrict) -> Callable[[Env], bool]:
        if isinstance(f, Atom):
            s, t = self.term(f.left), self.term(f.right)
            if f.rel == IN:
                return lambda env: is_member(s(env), t(env))
            return lambda env: s(env) == t(env)
        if isinstance(f, Top):
            return lambda env: True
        if isinstance(f, Bottom):
            return lambda env: False
        if isinstance(f, Not):
            b = self._compile(f.body, restrict)
            return lambda env: not b(env)
        if isinstance(f, Bin):
            l, r = self._compile(f.left, restrict), self._compile(f.right, restrict)
            if f.conn == AND:
                return lambda env: l(env) and r(env)
            if f.conn == OR:
                return lambda env: l(env) or r(env)
            return lambda env: (not l(env)) or r(env)
        if isinstance(f, Prim):
            return self._prim(f)
        if isinstance(f, (Quant, BQuant)):
            body = self._compile(f.body, restrict)
            var = f.var
            if isinstance(f, BQuant):
                bound = self.term(f.bound)
                dom = lambda env: members(bound(env))
            else:
                dom = self._domain_for(var, restrict)
            is_all = f.q == FORALL

            def run(env: Env) -> bool:
                saved = env.get(var, None)
                result = is_all
                for x in dom(env):
                    env[var] = x
                    if body(env) != is_all:
                        result = not is_all
                        break
                if saved is None:
                    env.pop(var, None)
                else:
                    env[var] = saved
                return result

            # innermost quantifiers are cheaper to rerun than to memoise
            if restrict is not None or not _has_quantifier(f.body):
                return run
            fv = tuple(sorted(free_vars(f)))
            memo: dict = {}

            def cached(env: Env) -> bool:
                k = tuple(map(env.get, fv))
                r = memo.get(k)
                if r is None:
                    r = run(env)
                    memo[k] = r
                return r

            return cached
        raise TypeError(f)

    def _prim(self, f: Prim) -> Callable[[Env], bool]:
        args = [self.term(t) for t in f.args]
        if f.name == "rank_lt":
            if len(args) < 1:
                raise EvalError("rank_lt needs arguments")
            lhs, rhs = args[:-1], args[-1]
            return lambda env: max((rank(a(env)) for a in lhs), default=0) < rank(rhs(env))
        if f.name == "rank_ge":
            lhs, rhs = args[:-1], args[-1]
            return lambda env: max((rank(a(env)) for a in lhs), default=0) >= rank(rhs(env))
        if f.name == "sat":
            model = args[0]
            inner = self._compile(f.body, lambda env: members(model(env)))
            return inner
        raise EvalError(f"unknown primitive ${f.name}")


@dataclass(frozen=True)
class Valuation:
    assignment: Assignment
    universe: FiniteUniverse

    def env(self) -> dict:
        return dict(enumerate(self.assignment))


def eval_formula(
    f: Formula,
    v: Valuation,
    domains: Mapping[int, Sequence[int]] | None = None,
    default_domain: Sequence[int] | None = None,
) -> bool:
    ev = Evaluator(v.universe, domains, default_domain)
    return ev.compile(f)(v.env())


# short alias
eval = eval_formula  # noqa: A001


def assignments(
    variables: Sequence[int], domain: Sequence[int] | Mapping[int, Sequence[int]]
) -> Iterable[Assignment]:
    """All assignments of the given variables, in canonical (lexicographic) order."""
    variables = sorted(variables)
    doms = [domain[i] if isinstance(domain, Mapping) else domain for i in variables]
    width = (max(variables) + 1) if variables else 0
    for values in itertools.product(*doms):
        a = [0] * width
        for i, x in zip(variables, values):
            a[i] = x
        yield Assignment(a)


@dataclass(frozen=True)
class EquivalenceResult:
    equal: bool
    counterexample: Assignment | None = None

    def __bool__(self) -> bool:
        return self.equal


def check_equivalence(
    f: Formula,
    g: Formula,
    u: FiniteUniverse,
    free_domain: Sequence[int] | None = None,
    domains: Mapping[int, Sequence[int]] | None = None,
    default_domain: Sequence[int] | None = None,
    domains_g: Mapping[int, Sequence[int]] | None = None,
) -> EquivalenceResult:
    """Compare truth tables over every assignment of the free variables.

    ``domains_g`` lets the second formula use different ranges for its own
    unbounded quantifiers (pairing variables, for instance).
    """
    fv = sorted(free_vars(f) | free_vars(g))
    ef = Evaluator(u, domains, default_domain).compile(f)
    eg = Evaluator(u, domains_g if domains_g is not None else domains, default_domain).compile(g)
    dom = u.elements if free_domain is None else free_domain
    for a in assignments(fv, dom):
        env = dict(enumerate(a))
        if ef(dict(env)) != eg(dict(env)):
            return EquivalenceResult(False, a)
    return EquivalenceResult(True)


class MaskEvaluator:
    """Evaluates a formula under many j tables at once.

    The value is an int whose bit k is the truth value under ``j_tables[k]``.
    Variables always hold single elements; only j-terms differ between
    tables.  A quantifier bounded by a j-term runs over every element that
    is a member under some table, with the membership mask as guard.
    """

    def __init__(
        self,
        universe: FiniteUniverse,
        j_tables: Sequence[Sequence[int]],
        domains: Mapping[int, Sequence[int]] | None = None,
        default_domain: Sequence[int] | None = None,
    ):
        self.u = universe
        self.tables = [tuple(t) for t in j_tables]
        self.all = (1 << len(self.tables)) - 1
        self.domains = dict(domains or {})
        self.default_domain = universe.elements if default_domain is None else default_domain
        self._vals: dict = {}
        self._atoms: dict = {}
        self._union: dict = {}

    def _jvals(self, x: int, p: int) -> tuple:
        key = (x, p)
        v = self._vals.get(key)
        if v is None:
            out = []
            for t in self.tables:
                y = x
                for _ in range(p):
                    y = t[y]
                out.append(y)
            v = self._vals[key] = tuple(out)
        return v

    def term(self, t: Term):
        """Closure returning an element, or a tuple of elements (one per table)."""
        if isinstance(t, Var):
            i = t.index
            return lambda env: env.get(i, 0)
        if isinstance(t, Const):
            c = t.code
            return lambda env: c
        if isinstance(t, Slot):
            c = self.u.slot(t.name)
            return lambda env: c
        if isinstance(t, JApp):
            base, p = self.term(t.base), t.power
            if isinstance(t.base, JApp):
                raise EvalError("nested j applications are not supported")
            return lambda env: self._jvals(base(env), p)
        raise TypeError(t)

    def _atom_mask(self, rel: str, a, b) -> int:
        if not isinstance(a, tuple) and not isinstance(b, tuple):
            ok = is_member(a, b) if rel == IN else a == b
            return self.all if ok else 0
        key = (rel, a, b)
        m = self._atoms.get(key)
        if m is None:
            n = len(self.tables)
            xs = a if isinstance(a, tuple) else (a,) * n
            ys = b if isinstance(b, tuple) else (b,) * n
            m = 0
            for k, (x, y) in enumerate(zip(xs, ys)):
                if (is_member(x, y) if rel == IN else x == y):
                    m |= 1 << k
            self._atoms[key] = m
        return m

    def _members_any(self, vals: tuple) -> tuple:
        r = self._union.get(vals)
        if r is None:
            r = self._union[vals] = tuple(sorted(set().union(*(members(v) for v in vals))))
        return r

    def compile(self, f: Formula) -> Callable[[Env], int]:
        full = self.all
        if isinstance(f, Atom):
            s, t, rel = self.term(f.left), self.term(f.right), f.rel
            return lambda env: self._atom_mask(rel, s(env), t(env))
        if isinstance(f, Top):
            return lambda env: full
        if isinstance(f, Bottom):
            return lambda env: 0
        if isinstance(f, Not):
            b = self.compile(f.body)
            return lambda env: full ^ b(env)
        if isinstance(f, Bin):
            l, r = self.compile(f.left), self.compile(f.right)
            if f.conn == AND:
                return lambda env: (m := l(env)) and m & r(env)
            if f.conn == OR:
                return lambda env: m if (m := l(env)) == full else m | r(env)
            return lambda env: (full ^ (m := l(env))) | (r(env) if m else 0)
        if isinstance(f, (Quant, BQuant)):
            return self._quant(f)
        raise EvalError(f"cannot evaluate {type(f).__name__} under several j tables")

    def _quant(self, f) -> Callable[[Env], int]:
        full, var, is_all = self.all, f.var, f.q == FORALL
        body = self.compile(f.body)
        if isinstance(f, BQuant):
            bound = self.term(f.bound)
            dom = None
        else:
            bound = None
            dom = self.domains.get(var, self.default_domain)

        def run(env: Env) -> int:
            saved = env.get(var, None)
            acc = full if is_all else 0
            if bound is None:
                pairs = ((x, full) for x in dom)
            else:
                bv = bound(env)
                if isinstance(bv, tuple):
                    pairs = ((x, self._atom_mask(IN, x, bv)) for x in self._members_any(bv))
                else:
                    pairs = ((x, full) for x in members(bv))
            for x, guard in pairs:
                env[var] = x
                if is_all:
                    acc &= (full ^ guard) | body(env)
                    if not acc:
                        break
                else:
                    acc |= guard & body(env)
                    if acc == full:
                        break
            if saved is None:
                env.pop(var, None)
            else:
                env[var] = saved
            return acc

        if not _has_quantifier(f.body):
            return run
        fv = tuple(sorted(free_vars(f)))
        memo: dict = {}

        def cached(env: Env) -> int:
            k = tuple(map(env.get, fv))
            r = memo.get(k)
            if r is None:
                r = memo[k] = run(env)
            return r

        return cached


def check_equivalence_under_j(
    f: Formula,
    g: Formula,
    u: FiniteUniverse,
    j_tables: Sequence[Sequence[int]],
    free_domain: Sequence[int] | None = None,
    default_domain: Sequence[int] | None = None,
    domains_g: Mapping[int, Sequence[int]] | None = None,
) -> tuple[int, EquivalenceResult]:
    """check_equivalence under every table of ``j_tables`` in one pass.

    Returns (index of the first failing table, counterexample), or
    (-1, success).
    """
    fv = sorted(free_vars(f) | free_vars(g))
    ef = MaskEvaluator(u, j_tables, None, default_domain).compile(f)
    eg = MaskEvaluator(u, j_tables, domains_g, default_domain).compile(g)
    dom = u.elements if free_domain is None else free_domain
    for a in assignments(fv, dom):
        env = dict(enumerate(a))
        diff = ef(dict(env)) ^ eg(dict(env))
        if diff:
            return (diff & -diff).bit_length() - 1, EquivalenceResult(False, a)
    return -1, EquivalenceResult(True)


def lift(f: Formula, variables: Iterable[int] | None = None) -> Formula:
    """f(j(x0), ..., j(xk)) for the given (default: all free) variables."""
    vs = free_vars(f) if variables is None else variables
    return substitute_terms(f, {i: jterm(Var(i)) for i in vs})


@dataclass(frozen=True)
class ElementarityResult:
    holds: bool
    counterexample: Assignment | None = None

    def __bool__(self) -> bool:
        return self.holds


def check_elementarity(
    f: Formula,
    u: FiniteUniverse,
    free_domain: Sequence[int] | None = None,
    default_domain: Sequence[int] | None = None,
) -> ElementarityResult:
    """Check every instance of f(x..) -> f(j(x)..) over the universe."""
    fv = sorted(free_vars(f))
    ev = Evaluator(u, default_domain=default_domain)
    src, tgt = ev.compile(f), ev.compile(lift(f))
    dom = u.elements if free_domain is None else free_domain
    for a in assignments(fv, dom):
        env = dict(enumerate(a))
        if src(dict(env)) and not tgt(dict(env)):
            return ElementarityResult(False, a)
    return ElementarityResult(True)


def pairing_domains(
    trace: Sequence, base: Sequence[int], source: Mapping[int, Sequence[int]] | None = None
) -> dict:
    """Ranges for pairing variables recorded by the normaliser.

    A variable w coding (x, y) ranges over the base domain together with every
    Kuratowski pair of a value of x with a value of y.  No finite V_n is closed
    under pairing, so this is the smallest range on which the two-for-one
    quantifier collapse is exact.
    """
    doms: dict = dict(source or {})
    for rec in trace:
        left = doms.get(rec.left, base)
        right = doms.get(rec.right, base)
        extra = {kpair(a, b) for a in left for b in right}
        doms[rec.var] = tuple(sorted(set(base) | extra))
    return doms
