"""Syntactic classifiers for the quantifier hierarchies, and j-height.

All classifiers are literal: a formula is Sigma(n) only if it has exactly
n strictly alternating unbounded quantifiers in front of a matrix of the
family's base class.  Repeated same-type quantifiers are left to
``normalize``.  ``Prim`` atoms count as atomic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .formula import (
    EXISTS,
    IMP,
    Atom,
    Bin,
    BQuant,
    Formula,
    JApp,
    Not,
    Prim,
    Quant,
    Var,

    terms_of,
    to_text,
)

LEVY, LEVYJ, SIGMAINF, FLEISCHMANN = "Levy", "LevyJ", "SigmaInfBased", "Fleischmann"
SIGMA, PI, DELTA0, NOT_IN = "Sigma", "Pi", "Delta0", "NotInFamily"


@dataclass(frozen=True)
class HierarchyClass:
    family: str
    shape: str
    n: int = 0
    certificate: tuple = field(default=(), compare=False)
    path: tuple | None = field(default=None, compare=False)

    @property
    def label(self) -> str:
        if self.shape in (SIGMA, PI):
            return f"{self.shape}({self.n})"
        return self.shape

    def __str__(self) -> str:
        return f"{self.family}:{self.label}"

    def is_(self, shape: str, n: int = 0) -> bool:
        return self.shape == shape and (shape in (DELTA0, NOT_IN) or self.n == n)


class ClassificationError(ValueError):
    pass


def _children_with_index(f: Formula):
    if isinstance(f, Not):
        return [(0, f.body)]
    if isinstance(f, Bin):
        return [(0, f.left), (1, f.right)]
    if isinstance(f, (Quant, BQuant)):
        return [(0, f.body)]
    return []


def _find(f: Formula, pred, path=()):
    if pred(f):
        return path
    for i, c in _children_with_index(f):
        p = _find(c, pred, path + (i,))
        if p is not None:
            return p
    return None


def _has_j(f: Formula) -> bool:
    if isinstance(f, Atom):
        return isinstance(f.left, JApp) or isinstance(f.right, JApp)
    if isinstance(f, BQuant):
        return isinstance(f.bound, JApp)
    if isinstance(f, Prim):
        return any(isinstance(t, JApp) for t in f.args)
    return False


def _prenex(f: Formula, family: str, matrix_ok, blocks: bool = False) -> HierarchyClass:
    prefix = []
    g, path = f, ()
    quick = _QUICK.get(matrix_ok, lambda h: matrix_ok(h)[0])
    while isinstance(g, Quant) and not quick(g):
        prefix.append((g.q, g.var))
        g, path = g.body, path + (0,)
    ok, why, sub = matrix_ok(g)
    if not ok:
        return HierarchyClass(family, NOT_IN, 0, (why,), path + sub)
    cert = [f"matrix in base class: {why}"]
    for k in range(1, len(prefix)):
        if prefix[k][0] == prefix[k - 1][0] and not blocks:
            return HierarchyClass(
                family,
                NOT_IN,
                0,
                (f"repeated {prefix[k][0]} quantifier; not literally prenex",),
                (0,) * k,
            )
    if not prefix:
        return HierarchyClass(family, DELTA0, 0, tuple(cert), None)
    n = 0
    for k in range(len(prefix) - 1, -1, -1):
        q, var = prefix[k]
        shape = SIGMA if q == EXISTS else PI
        if k + 1 < len(prefix) and prefix[k + 1][0] == q:
            cert.append(f"{q} v{var} joins the {shape}({n}) block")
            continue
        n += 1
        cert.append(f"{q} v{var} -> {shape}({n})")
    shape = SIGMA if prefix[0][0] == EXISTS else PI
    return HierarchyClass(family, shape, n, tuple(cert), None)


def _bounded(g: Formula):
    p = _find(g, lambda h: isinstance(h, Quant))
    if p is None:
        return True, "no unbounded quantifiers", ()
    return False, "unbounded quantifier inside the matrix", p


def classify_levy(f: Formula) -> HierarchyClass:
    p = _find(f, _has_j)
    if p is not None:
        return HierarchyClass(LEVY, NOT_IN, 0, ("formula mentions j",), p)
    return _prenex(f, LEVY, _bounded)


def classify_j(f: Formula) -> HierarchyClass:
    return _prenex(f, LEVYJ, _bounded)


# ------------------------------------------------- Sigma_infinity-based


_EMPTY: frozenset = frozenset()


def _jv(t) -> frozenset:
    if type(t) is JApp and type(t.base) is Var:
        return frozenset((t.base.index,))
    return _EMPTY


@lru_cache(maxsize=1 << 16)
def _scan(g: Formula):
    """(in class, j-term variables free in g, some j-term bound inside g).

    g is a base formula when no j-term in it mentions a variable bound inside
    it; the class closes the base formulas under connectives and bounded
    quantifiers.
    """
    tp = type(g)
    if tp is Atom:
        return True, _jv(g.left) | _jv(g.right), False
    if tp is Not:
        return _scan(g.body)
    if tp is Bin:
        lok, lj, lbad = _scan(g.left)
        rok, rj, rbad = _scan(g.right)
        return lok and rok, lj | rj, lbad or rbad
    if tp is Quant or tp is BQuant:
        ok, js, bad = _scan(g.body)
        if g.var in js:
            bad = True
            js = js - {g.var}
        if tp is BQuant:
            return ok or not bad, js | _jv(g.bound), bad
        return not bad, js, bad
    if tp is Prim:
        js = _EMPTY
        for t in g.args:
            js = js | _jv(t)
        return True, js, False
    return True, _EMPTY, False


def _is_base(g: Formula) -> bool:
    """A j-free formula with j-terms substituted only for its free variables."""
    return not _scan(g)[2]


def delta_sigma_inf(g: Formula):
    """Membership in the least class over Sigma_infinity closed under
    connectives and quantifiers bounded by terms j^e(y).

    Returns (ok, reason, path-to-offending-node).
    """
    ok, _, bad = _scan(g)
    if ok:
        return True, ("Sigma_inf formula with substituted j-terms" if not bad else "connective"), ()
    return False, "unbounded quantifier over a j-formula", _first_bad(g)


def _first_bad(g: Formula) -> tuple:
    for i, c in _children_with_index(g):
        if not _scan(c)[0]:
            return (i,) + _first_bad(c)
    return ()


_QUICK = {delta_sigma_inf: lambda g: _scan(g)[0]}


def classify_sigma_inf(f: Formula) -> HierarchyClass:
    return _prenex(f, SIGMAINF, delta_sigma_inf)


def classify_blocks(f: Formula, family: str = "sigmainf") -> HierarchyClass:
    """As the literal classifiers, but a run of like quantifiers counts once.

    The verdict is the one the literal classifier gives after the run has
    been collapsed by pairing.
    """
    if family == "sigmainf":
        return _prenex(f, SIGMAINF, delta_sigma_inf, blocks=True)
    if family == "levy":
        p = _find(f, _has_j)
        if p is not None:
            return HierarchyClass(LEVY, NOT_IN, 0, ("formula mentions j",), p)
        return _prenex(f, LEVY, _bounded, blocks=True)
    return _prenex(f, LEVYJ, _bounded, blocks=True)


def in_delta_sigma_inf(f: Formula) -> bool:
    return _scan(f)[0]


def j_height(f: Formula) -> int:
    """Sum of j-powers over all term occurrences.

    Each occurrence is read as its own argument slot of the surrounding
    Sigma_inf formula, which makes the value additive over connectives and
    gives bounded quantifiers over j^l(y) the extra l.
    """
    ok, why, p = delta_sigma_inf(f)
    if not ok:
        raise ClassificationError(f"j-height undefined: {why} at {p}")
    return sum(t.power for t in terms_of(f) if isinstance(t, JApp))


def pi_n_sigma_inf(f: Formula, n: int) -> bool:
    """f is in Pi^j_n(Sigma_inf) (Delta0 counts for every n, lower levels too).

    Runs of like quantifiers count as one block.
    """
    c = classify_blocks(f)
    if c.shape == DELTA0:
        return True
    if c.shape == PI:
        return c.n <= n
    if c.shape == SIGMA:
        return c.n < n
    return False


# ---------------------------------------------------------- Fleischmann

INF = 10**9


def _fleischmann(g: Formula, cert: list) -> tuple:
    """(least n with g in underline Sigma_n, least n with g in underline Pi_n)."""
    if _bounded(g)[0]:
        return 0, 0
    if isinstance(g, Not):
        # read as g.body -> false
        s, _ = _fleischmann(g.body, cert)
        sd, pd = INF, max(1, s + 1)
    elif isinstance(g, Bin):
        ls, lp = _fleischmann(g.left, cert)
        rs, rp = _fleischmann(g.right, cert)
        if g.conn == IMP:
            sd, pd = INF, max(1, ls + 1, rp)
        else:
            sd, pd = max(1, ls, rs), max(1, lp, rp)
    elif isinstance(g, BQuant):
        s, p = _fleischmann(g.body, cert)
        sd, pd = max(1, s), max(1, p)
    elif isinstance(g, Quant):
        s, p = _fleischmann(g.body, cert)
        if g.q == EXISTS:
            sd, pd = max(1, s), INF
        else:
            sd, pd = INF, max(1, p)
    else:
        sd = pd = 0
    s, p = min(sd, pd + 1), min(pd, sd + 1)
    cert.append(f"{type(g).__name__}: Sigma<={s} Pi<={p}")
    return s, p


def classify_fleischmann(f: Formula) -> HierarchyClass:
    cert: list = []
    s, p = _fleischmann(f, cert)
    if s == 0 and p == 0:
        return HierarchyClass(FLEISCHMANN, DELTA0, 0, ("bounded formula",))
    if s <= p:
        return HierarchyClass(FLEISCHMANN, SIGMA, s, tuple(cert))
    return HierarchyClass(FLEISCHMANN, PI, p, tuple(cert))


CLASSIFIERS = {
    "levy": classify_levy,
    "j": classify_j,
    "sigmainf": classify_sigma_inf,
    "fleischmann": classify_fleischmann,
}


def verify_certificate(f: Formula, c: HierarchyClass) -> bool:
    """Recompute the verdict and compare verdict and trace."""
    fn = {LEVY: classify_levy, LEVYJ: classify_j, SIGMAINF: classify_sigma_inf,
          FLEISCHMANN: classify_fleischmann}[c.family]
    again = fn(f)
    if again.certificate != c.certificate and any("block" in s for s in c.certificate):
        again = classify_blocks(f, {LEVY: "levy", LEVYJ: "j", SIGMAINF: "sigmainf"}[c.family])
    return again == c and again.certificate == c.certificate and again.path == c.path


def describe(f: Formula, c: HierarchyClass) -> str:
    lines = [f"{c} {to_text(f)}"]
    lines += [f"  {step}" for step in c.certificate]
    if c.path is not None:
        lines.append(f"  at path {list(c.path)}")
    return "\n".join(lines)
