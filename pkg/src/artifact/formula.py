"""Terms and formulas over the signature {in, =, j}.

Variables are natural-number indices.  ``j`` is applied only to atomic
terms (a variable, a universe constant or a designated slot), and nested
applications are folded into a single power.  Everything here is
immutable, so formulas can be shared freely.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from operator import attrgetter
from typing import Iterable, Iterator, Mapping, Sequence, Union

EMPTY = 0  # Ackermann code of the empty set


# ---------------------------------------------------------------- terms


@dataclass(frozen=True, slots=True)
class Var:
    index: int


@dataclass(frozen=True, slots=True)
class Const:
    """A universe element, identified by its Ackermann code."""

    code: int


@dataclass(frozen=True, slots=True)
class Slot:
    """A designated parameter such as kappa, resolved by the universe."""

    name: str


@dataclass(frozen=True, slots=True)
class JApp:
    base: Union[Var, Const, Slot]
    power: int

    def __post_init__(self) -> None:
        if self.power < 1:
            raise ValueError("j power must be at least 1")
        if isinstance(self.base, JApp):
            raise ValueError("JApp base must be atomic; use jterm() to fold powers")


Term = Union[Var, Const, Slot, JApp]


def jterm(t: Term, power: int = 1) -> Term:
    """j^power(t), folding j(j^k(x)) into j^(k+1)(x)."""
    if power == 0:
        return t
    if isinstance(t, JApp):
        return JApp(t.base, t.power + power)
    return JApp(t, power)


def term_base(t: Term) -> Union[Var, Const, Slot]:
    return t.base if isinstance(t, JApp) else t


def term_power(t: Term) -> int:
    return t.power if isinstance(t, JApp) else 0


def term_var(t: Term) -> int | None:
    b = term_base(t)
    return b.index if isinstance(b, Var) else None



def _hashed(cls):
    """Cache the structural hash at construction; formulas are hashed a lot."""
    names = [n for n in cls.__annotations__ if n != "_h"]
    key = attrgetter(*names)
    post = cls.__dict__.get("__post_init__")

    def __post_init__(self) -> None:
        if post is not None:
            post(self)
        object.__setattr__(self, "_h", hash((cls.__name__, key(self))))

    def __hash__(self) -> int:
        return self._h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(other) is not type(self) or self._h != other._h:
            return False
        return key(self) == key(other)

    cls.__post_init__ = __post_init__
    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    return cls


# ------------------------------------------------------------- formulas

IN, EQ = "in", "="
AND, OR, IMP = "&", "|", "->"
FORALL, EXISTS = "A", "E"


@dataclass(frozen=True, slots=True)
@_hashed
class Atom:
    rel: str
    left: Term
    right: Term
    _h: int = field(init=False, repr=False, compare=False, default=0)


@dataclass(frozen=True, slots=True)
@_hashed
class Not:
    body: "Formula"
    _h: int = field(init=False, repr=False, compare=False, default=0)


@dataclass(frozen=True, slots=True)
@_hashed
class Bin:
    conn: str
    left: "Formula"
    right: "Formula"
    _h: int = field(init=False, repr=False, compare=False, default=0)


@dataclass(frozen=True, slots=True)
@_hashed
class Quant:
    q: str
    var: int
    body: "Formula"
    _h: int = field(init=False, repr=False, compare=False, default=0)


@dataclass(frozen=True, slots=True)
@_hashed
class BQuant:
    q: str
    var: int
    bound: Term
    body: "Formula"
    _h: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self) -> None:
        if term_var(self.bound) == self.var:
            raise ValueError("bounded quantifier bound mentions its own variable")


@dataclass(frozen=True, slots=True)
class Top:
    pass


@dataclass(frozen=True, slots=True)
class Bottom:
    pass


@dataclass(frozen=True, slots=True)
@_hashed
class Prim:
    """Abstract atom expanded only by the finite evaluator.

    ``rank_lt(a.., c)``: the largest rank among ``a..`` is below rank(c).
    ``sat(v){body}``: ``body`` holds in the structure of members of v, with
    the free variables of ``body`` read from the surrounding assignment.
    """

    name: str
    args: tuple
    body: "Formula | None" = None
    _h: int = field(init=False, repr=False, compare=False, default=0)


Formula = Union[Atom, Not, Bin, Quant, BQuant, Top, Bottom, Prim]

TOP = Top()
BOTTOM = Bottom()


# convenience constructors


def v(i: int) -> Var:
    return Var(i)


def mem(s: Term, t: Term) -> Atom:
    return Atom(IN, s, t)


def eq(s: Term, t: Term) -> Atom:
    return Atom(EQ, s, t)


def conj(*fs: Formula) -> Formula:
    if not fs:
        return TOP
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Bin(AND, f, out)
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        return BOTTOM
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Bin(OR, f, out)
    return out


def imp(a: Formula, b: Formula) -> Formula:
    return Bin(IMP, a, b)


def iff(a: Formula, b: Formula) -> Formula:
    """Biconditional as sugar for a pair of implications."""
    return Bin(AND, Bin(IMP, a, b), Bin(IMP, b, a))


def forall(i: int, body: Formula) -> Quant:
    return Quant(FORALL, i, body)


def exists(i: int, body: Formula) -> Quant:
    return Quant(EXISTS, i, body)


def ball(i: int, bound: Term, body: Formula) -> BQuant:
    return BQuant(FORALL, i, bound, body)


def bex(i: int, bound: Term, body: Formula) -> BQuant:
    return BQuant(EXISTS, i, bound, body)


def dual(q: str) -> str:
    return EXISTS if q == FORALL else FORALL


# ------------------------------------------------------------ traversal


def children(f: Formula) -> tuple:
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, Bin):
        return (f.left, f.right)
    if isinstance(f, (Quant, BQuant)):
        return (f.body,)
    return ()


def iter_nodes(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def terms_of(f: Formula) -> Iterator[Term]:
    """Every term occurring in f, including bounds and Prim arguments."""
    for g in iter_nodes(f):
        if isinstance(g, Atom):
            yield g.left
            yield g.right
        elif isinstance(g, BQuant):
            yield g.bound
        elif isinstance(g, Prim):
            # a Prim body is a coded parameter, not part of the object syntax
            yield from g.args


_NOVARS: frozenset = frozenset()


def _tv(t: Term) -> frozenset:
    i = term_var(t)
    return _NOVARS if i is None else frozenset((i,))


@lru_cache(maxsize=1 << 20)
def free_vars(f: Formula) -> frozenset:
    tp = type(f)
    if tp is Atom:
        return _tv(f.left) | _tv(f.right)
    if tp is Not:
        return free_vars(f.body)
    if tp is Bin:
        return free_vars(f.left) | free_vars(f.right)
    if tp is Quant:
        return free_vars(f.body) - {f.var}
    if tp is BQuant:
        return (free_vars(f.body) - {f.var}) | _tv(f.bound)
    if tp is Prim:
        out = _NOVARS
        for t in f.args:
            out = out | _tv(t)
        if f.body is not None:
            out = out | free_vars(f.body)
        return out
    return _NOVARS


def all_vars(f: Formula) -> frozenset:
    """Every variable index mentioned anywhere, free or bound."""
    out: set[int] = set()
    for g in iter_nodes(f):
        if isinstance(g, (Quant, BQuant)):
            out.add(g.var)
        if isinstance(g, Prim) and g.body is not None:
            out |= all_vars(g.body)
    for t in terms_of(f):
        i = term_var(t)
        if i is not None:
            out.add(i)
    return frozenset(out)


def fresh_index(used: Iterable[int]) -> int:
    s = set(used)
    i = 0
    while i in s:
        i += 1
    return i


def fresh_indices(used: Iterable[int], k: int) -> list[int]:
    s = set(used)
    out = []
    i = 0
    while len(out) < k:
        if i not in s:
            out.append(i)
        i += 1
    return out


def is_j_free(f: Formula) -> bool:
    return not any(isinstance(t, JApp) for t in terms_of(f))


@lru_cache(maxsize=1 << 16)
def has_unbounded(f: Formula) -> bool:
    return isinstance(f, Quant) or any(has_unbounded(c) for c in children(f))


def size(f: Formula) -> int:
    return sum(1 for _ in iter_nodes(f))


def constants_of(f: Formula) -> frozenset:
    return frozenset(
        term_base(t).code for t in terms_of(f) if isinstance(term_base(t), Const)
    )


# --------------------------------------------------------- substitution


def _subst_term(t: Term, m: Mapping[int, Term]) -> Term:
    i = term_var(t)
    if i is None or i not in m:
        return t
    return jterm(m[i], term_power(t))


def substitute_terms(f: Formula, m: Mapping[int, Term]) -> Formula:
    """Capture-avoiding replacement of free variables by terms."""
    if not m:
        return f
    if isinstance(f, Atom):
        return Atom(f.rel, _subst_term(f.left, m), _subst_term(f.right, m))
    if isinstance(f, Not):
        return Not(substitute_terms(f.body, m))
    if isinstance(f, Bin):
        return Bin(f.conn, substitute_terms(f.left, m), substitute_terms(f.right, m))
    if isinstance(f, Prim):
        body = substitute_terms(f.body, m) if f.body is not None else None
        return Prim(f.name, tuple(_subst_term(t, m) for t in f.args), body)
    if isinstance(f, (Quant, BQuant)):
        bound = _subst_term(f.bound, m) if isinstance(f, BQuant) else None
        inner = {k: t for k, t in m.items() if k != f.var}
        var = f.var
        incoming = {term_var(t) for k, t in inner.items() if k in free_vars(f.body)}
        if var in incoming:
            avoid = all_vars(f.body) | set(inner) | {
                term_var(t) for t in inner.values() if term_var(t) is not None
            }
            new = fresh_index(avoid | {var})
            inner[var] = Var(new)
            var = new
        body = substitute_terms(f.body, inner)
        if isinstance(f, Quant):
            return Quant(f.q, var, body)
        return BQuant(f.q, var, bound, body)
    return f


def rename(f: Formula, m: Mapping[int, int]) -> Formula:
    return substitute_terms(f, {k: Var(i) for k, i in m.items()})


class Assignment(tuple):
    """Universe elements indexed by variable number.

    Slots past the end read as the empty set.
    """

    def __new__(cls, entries: Iterable[int] = ()) -> "Assignment":
        return super().__new__(cls, tuple(entries))

    def lookup(self, i: int) -> int:
        return self[i] if i < len(self) else EMPTY

    def replace(self, i: int, b: int) -> "Assignment":
        """a[b/v_i], padding with empty sets when i is past the end."""
        xs = list(self) + [EMPTY] * max(0, i + 1 - len(self))
        xs[i] = b
        return Assignment(xs)


def substitute(f: Formula, a: Sequence[int]) -> Formula:
    """Replace every free variable v_i by the constant a_i (or the empty set)."""
    a = a if isinstance(a, Assignment) else Assignment(a)
    return substitute_terms(f, {i: Const(a.lookup(i)) for i in free_vars(f)})


# ------------------------------------------------------------ renaming


def rename_apart(f: Formula) -> Formula:
    """Make every binder use a distinct index that is not free in f.

    A binder keeps its index the first time it is seen (unless that index is
    free); later clashes get the smallest index not used anywhere in f,
    allocated in left-to-right order.
    """
    free = free_vars(f)
    taken = set(all_vars(f))
    seen: set[int] = set()

    def alloc() -> int:
        i = fresh_index(taken)
        taken.add(i)
        return i

    def go(g: Formula, env: dict) -> Formula:
        if isinstance(g, (Atom, Prim)):
            return substitute_terms(g, {k: Var(i) for k, i in env.items()})
        if isinstance(g, Not):
            return Not(go(g.body, env))
        if isinstance(g, Bin):
            left = go(g.left, env)
            return Bin(g.conn, left, go(g.right, env))
        if isinstance(g, (Quant, BQuant)):
            bound = None
            if isinstance(g, BQuant):
                bound = _subst_term(g.bound, {k: Var(i) for k, i in env.items()})
            if g.var in free or g.var in seen:
                new = alloc()
            else:
                new = g.var
            seen.add(new)
            inner = dict(env)
            inner[g.var] = new
            body = go(g.body, inner)
            if isinstance(g, Quant):
                return Quant(g.q, new, body)
            return BQuant(g.q, new, bound, body)
        return g

    return go(f, {})


def is_renamed_apart(f: Formula) -> bool:
    binders = [g.var for g in iter_nodes(f) if isinstance(g, (Quant, BQuant))]
    return len(binders) == len(set(binders)) and not (set(binders) & free_vars(f))


def subformulas(f: Formula) -> list:
    """Distinct subformulas, each listed before any formula containing it; f last."""
    out: dict = {}

    def go(g: Formula) -> None:
        for c in children(g):
            go(c)
        out.setdefault(g, None)

    go(f)
    return list(out)


# ------------------------------------------------------------- matching


def match(
    pattern: Formula, target: Formula, holes: Iterable[int] = ()
) -> dict | None:
    """Match up to renaming of bound variables.

    Free occurrences of a hole variable in ``pattern`` may stand for any
    term (consistently); other free variables must match themselves.
    Returns the hole bindings, or None.
    """
    holes = set(holes)
    binding: dict[int, Term] = {}

    def term(p: Term, t: Term, env: dict) -> bool:
        pv = term_var(p)
        if pv is not None and pv in env:
            return isinstance(t, (Var, JApp)) and term_var(t) == env[pv] and (
                term_power(t) == term_power(p)
            )
        if pv is not None and pv in holes:
            k = term_power(p)
            if term_power(t) < k:
                return False
            if term_var(t) is not None and term_var(t) in env.values():
                return False  # would capture a bound variable
            base = term_base(t)
            val = jterm(base, term_power(t) - k)
            old = binding.setdefault(pv, val)
            return old == val
        if term_var(t) is not None and term_var(t) in env.values():
            return False
        return p == t

    def go(p: Formula, t: Formula, env: dict) -> bool:
        if type(p) is not type(t):
            return False
        if isinstance(p, Atom):
            return p.rel == t.rel and term(p.left, t.left, env) and term(p.right, t.right, env)
        if isinstance(p, Not):
            return go(p.body, t.body, env)
        if isinstance(p, Bin):
            return p.conn == t.conn and go(p.left, t.left, env) and go(p.right, t.right, env)
        if isinstance(p, (Quant, BQuant)):
            if p.q != t.q:
                return False
            if isinstance(p, BQuant) and not term(p.bound, t.bound, env):
                return False
            inner = {k: x for k, x in env.items() if x != t.var}
            inner[p.var] = t.var
            return go(p.body, t.body, inner)
        if isinstance(p, Prim):
            return (
                p.name == t.name
                and len(p.args) == len(t.args)
                and all(term(a, b, env) for a, b in zip(p.args, t.args))
                and (p.body is None) == (t.body is None)
                and (p.body is None or go(p.body, t.body, env))
            )
        return p == t

    return binding if go(pattern, target, {}) else None


def alpha_equal(f: Formula, g: Formula) -> bool:
    return match(f, g) is not None


# ------------------------------------------------------------- printing


def term_str(t: Term, names: Mapping[int, str] | None = None) -> str:
    if isinstance(t, JApp):
        inner = term_str(t.base, names)
        return f"j({inner})" if t.power == 1 else f"j^{t.power}({inner})"
    if isinstance(t, Var):
        if names and t.index in names:
            return names[t.index]
        return f"v{t.index}"
    if isinstance(t, Const):
        return f"#{t.code}"
    return f"@{t.name}"


def to_text(f: Formula, names: Mapping[int, str] | None = None) -> str:
    def vn(i: int) -> str:
        return names[i] if names and i in names else f"v{i}"

    def wrap(g: Formula) -> str:
        s = go(g)
        return f"({s})" if isinstance(g, (Quant, BQuant)) else s

    def go(g: Formula) -> str:
        if isinstance(g, Atom):
            return f"{term_str(g.left, names)} {g.rel} {term_str(g.right, names)}"
        if isinstance(g, Not):
            return "~" + wrap(g.body)
        if isinstance(g, Bin):
            return f"({wrap(g.left)} {g.conn} {go(g.right)})"
        if isinstance(g, Quant):
            return f"{g.q} {vn(g.var)}: {go(g.body)}"
        if isinstance(g, BQuant):
            return f"{g.q} {vn(g.var)} in {term_str(g.bound, names)}: {go(g.body)}"
        if isinstance(g, Top):
            return "true"
        if isinstance(g, Bottom):
            return "false"
        if isinstance(g, Prim):
            args = ", ".join(term_str(t, names) for t in g.args)
            body = "" if g.body is None else "{" + go(g.body) + "}"
            return f"${g.name}({args}){body}"
        raise TypeError(g)

    return go(f)


def _term_sexpr(t: Term) -> str:
    if isinstance(t, JApp):
        return f"(j {_term_sexpr(t.base)} {t.power})"
    if isinstance(t, Var):
        return f"v{t.index}"
    if isinstance(t, Const):
        return f"#{t.code}"
    return f"@{t.name}"


_BQ = {FORALL: "ball", EXISTS: "bex"}
_UQ = {FORALL: "forall", EXISTS: "exists"}
_CONN = {AND: "and", OR: "or", IMP: "imp"}


def to_sexpr(f: Formula) -> str:
    """Canonical single-line s-expression."""
    if isinstance(f, Atom):
        rel = "in" if f.rel == IN else "eq"
        return f"({rel} {_term_sexpr(f.left)} {_term_sexpr(f.right)})"
    if isinstance(f, Not):
        return f"(not {to_sexpr(f.body)})"
    if isinstance(f, Bin):
        return f"({_CONN[f.conn]} {to_sexpr(f.left)} {to_sexpr(f.right)})"
    if isinstance(f, Quant):
        return f"({_UQ[f.q]} {f.var} {to_sexpr(f.body)})"
    if isinstance(f, BQuant):
        return f"({_BQ[f.q]} {f.var} {_term_sexpr(f.bound)} {to_sexpr(f.body)})"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Prim):
        args = " ".join(_term_sexpr(t) for t in f.args)
        body = "" if f.body is None else " " + to_sexpr(f.body)
        return f"(prim {f.name} ({args}){body})"
    raise TypeError(f)


def _sexpr_tokens(s: str) -> list[str]:
    return re.findall(r"\(|\)|[^\s()]+", s)


def _sexpr_tree(tokens: list[str]):
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise SyntaxError("unexpected end of s-expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(read())
            if pos >= len(tokens):
                raise SyntaxError("unbalanced parenthesis")
            pos += 1
            return items
        if tok == ")":
            raise SyntaxError("unexpected ')'")
        return tok

    tree = read()
    if pos != len(tokens):
        raise SyntaxError("trailing tokens in s-expression")
    return tree


def _term_from_tree(x) -> Term:
    if isinstance(x, list):
        if len(x) != 3 or x[0] != "j":
            raise SyntaxError(f"bad term {x}")
        return jterm(_term_from_tree(x[1]), int(x[2]))
    if x.startswith("v") and x[1:].isdigit():
        return Var(int(x[1:]))
    if x.startswith("#") and x[1:].isdigit():
        return Const(int(x[1:]))
    if x.startswith("@") and len(x) > 1:
        return Slot(x[1:])
    raise SyntaxError(f"bad term {x!r}")


def _formula_from_tree(x) -> Formula:
    if x == "true":
        return TOP
    if x == "false":
        return BOTTOM
    if not isinstance(x, list) or not x:
        raise SyntaxError(f"bad formula {x!r}")
    head = x[0]
    inv_conn = {b: a for a, b in _CONN.items()}
    if head in ("in", "eq"):
        return Atom(IN if head == "in" else EQ, _term_from_tree(x[1]), _term_from_tree(x[2]))
    if head == "not":
        return Not(_formula_from_tree(x[1]))
    if head in inv_conn:
        return Bin(inv_conn[head], _formula_from_tree(x[1]), _formula_from_tree(x[2]))
    if head in ("forall", "exists"):
        q = FORALL if head == "forall" else EXISTS
        return Quant(q, int(x[1]), _formula_from_tree(x[2]))
    if head in ("ball", "bex"):
        q = FORALL if head == "ball" else EXISTS
        return BQuant(q, int(x[1]), _term_from_tree(x[2]), _formula_from_tree(x[3]))
    if head == "prim":
        body = _formula_from_tree(x[3]) if len(x) > 3 else None
        return Prim(x[1], tuple(_term_from_tree(t) for t in x[2]), body)
    raise SyntaxError(f"unknown head {head!r}")


def from_sexpr(s: str) -> Formula:
    return _formula_from_tree(_sexpr_tree(_sexpr_tokens(s)))


# -------------------------------------------------------------- parsing


class ParseError(SyntaxError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_RESERVED = {"in", "j", "true", "false"}


class _Parser:
    def __init__(self, text: str, names: dict[str, int]):
        self.s = text
        self.i = 0
        self.names = names

    # lexical helpers
    def ws(self) -> None:
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self, lit: str) -> bool:
        self.ws()
        return self.s.startswith(lit, self.i)

    def eat(self, lit: str) -> bool:
        if self.peek(lit):
            if _IDENT.fullmatch(lit):
                end = self.i + len(lit)
                if end < len(self.s) and re.match(r"[A-Za-z0-9_']", self.s[end]):
                    return False
            self.i += len(lit)
            return True
        return False

    def expect(self, lit: str) -> None:
        if not self.eat(lit):
            raise ParseError(f"expected {lit!r}", self.i)

    def ident(self) -> str:
        self.ws()
        m = _IDENT.match(self.s, self.i)
        if not m:
            raise ParseError("expected identifier", self.i)
        self.i = m.end()
        return m.group()

    def var(self, name: str) -> int:
        if name in _RESERVED:
            raise ParseError(f"reserved word {name!r} used as variable", self.i)
        if name not in self.names:
            self.names[name] = fresh_index(self.names.values())
        return self.names[name]

    # grammar
    def formula(self) -> Formula:
        left = self.implication()
        while self.eat("<->"):
            left = iff(left, self.implication())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.eat("->"):
            return Bin(IMP, left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.eat("|"):
            left = Bin(OR, left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.eat("&"):
            left = Bin(AND, left, self.unary())
        return left

    def quantifier(self) -> Formula | None:
        start = self.i
        self.ws()
        m = re.compile(r"([AE])\s*([A-Za-z_][A-Za-z0-9_']*)\s*").match(self.s, self.i)
        if not m:
            return None
        q, name = m.group(1), m.group(2)
        self.i = m.end()
        try:
            if self.eat(":"):
                return Quant(q, self.var(name), self.formula())
            if self.eat("in"):
                bound = self.term()
                self.expect(":")
                idx = self.var(name)
                if term_var(bound) == idx:
                    raise ParseError("bound mentions the quantified variable", self.i)
                return BQuant(q, idx, bound, self.formula())
        except ParseError:
            if self.s.find(":", start) < 0:
                self.i = start
                return None
            raise
        self.i = start
        return None

    def unary(self) -> Formula:
        if self.eat("~"):
            return Not(self.unary())
        q = self.quantifier()
        if q is not None:
            return q
        if self.eat("("):
            f = self.formula()
            self.expect(")")
            return f
        if self.eat("true"):
            return TOP
        if self.eat("false"):
            return BOTTOM
        if self.eat("$"):
            name = self.ident()
            self.expect("(")
            args = []
            if not self.peek(")"):
                args.append(self.term())
                while self.eat(","):
                    args.append(self.term())
            self.expect(")")
            body = None
            if self.eat("{"):
                body = self.formula()
                self.expect("}")
            return Prim(name, tuple(args), body)
        left = self.term()
        if self.eat("in"):
            return Atom(IN, left, self.term())
        if self.eat("="):
            return Atom(EQ, left, self.term())
        raise ParseError("expected 'in' or '='", self.i)

    def term(self) -> Term:
        self.ws()
        if self.eat("#"):
            m = re.compile(r"\d+").match(self.s, self.i)
            if not m:
                raise ParseError("expected constant code", self.i)
            self.i = m.end()
            return Const(int(m.group()))
        if self.eat("@"):
            return Slot(self.ident())
        m = re.compile(r"j\s*(\^\s*(\d+))?\s*\(").match(self.s, self.i)
        if m:
            self.i = m.end()
            power = int(m.group(2)) if m.group(2) else 1
            if power < 1:
                raise ParseError("j power must be positive", self.i)
            inner = self.term_or_reject()
            self.expect(")")
            return jterm(inner, power)
        return Var(self.var(self.ident()))

    def term_or_reject(self) -> Term:
        start = self.i
        t = self.term()
        self.ws()
        if not self.peek(")"):
            raise ParseError("j applies only to a variable", start)
        return t


def _collect_names(text: str, preset: Mapping[str, int] | None) -> dict[str, int]:
    names = dict(preset or {})
    for m in re.finditer(r"(?<![A-Za-z0-9_'])v(\d+)(?![A-Za-z0-9_'])", text):
        names.setdefault(m.group(), int(m.group(1)))
    return names


def parse_with_names(text: str, names: Mapping[str, int] | None = None):
    """Parse text; returns the formula and the name -> index table used."""
    table = _collect_names(text, names)
    p = _Parser(text, table)
    f = p.formula()
    p.ws()
    if p.i != len(text):
        raise ParseError("unexpected trailing input", p.i)
    return f, table


def parse(text: str, names: Mapping[str, int] | None = None) -> Formula:
    return parse_with_names(text, names)[0]


def parse_term(text: str, names: Mapping[str, int] | None = None) -> Term:
    table = _collect_names(text, names)
    p = _Parser(text, table)
    t = p.term()
    p.ws()
    if p.i != len(text):
        raise ParseError("unexpected trailing input", p.i)
    return t
