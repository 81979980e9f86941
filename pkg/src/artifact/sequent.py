"""Two-sided sequent calculus checker and the instantiated truth sweep.

Rule schemata (principal formulas are the first antecedent formula or the
last succedent formula; ``exchange`` moves them anywhere):

    identity    A => A
    refl        => s = s
    sym         s = t => t = s
    trans       s0 = s1, s1 = s2 => s0 = s2
    jcong       s = t => j(s) = j(t)
    memcong     s0 = s1, t0 = t1, s0 in t0 => s1 in t1

    weak-l / weak-r        G => D          /  A, G => D   |  G => D, A
    contr-l / contr-r      A, A, G => D    /  A, G => D   (and dually)
    exch-l / exch-r        G, A, B, P => D /  G, B, A, P => D (and dually)
    cut                    G => D, A ; A, P => L  /  G, P => D, L
    not-l                  G => D, A      /  ~A, G => D
    not-r                  A, G => D      /  G => D, ~A
    and-l1 / and-l2        A, G => D      /  A & B, G => D
    and-r                  G => D, A ; G => D, B  /  G => D, A & B
    or-l                   A, G => D ; B, G => D  /  A | B, G => D
    or-r1 / or-r2          G => D, A      /  G => D, A | B
    imp-l                  G => D, A ; B, P => L  /  A -> B, G, P => D, L
    imp-r                  A, G => D, B   /  G => D, A -> B
    all-l / ex-r           F(t), G => D   /  Ax F(x), G => D   (dually)
    all-r / ex-l           G => D, F(a)   /  G => D, Ax F(x)   (a eigenvariable)
    ball-l                 G => D, s in t ; F(s), G => D  /  Ax in t F, G => D
    ball-r                 a in t, G => D, F(a)  /  G => D, Ax in t F  (a eigen)
    bex-l                  a in t, F(a), G => D  /  Ex in t F, G => D  (a eigen)
    bex-r                  G => D, s in t ; G => D, F(s)  /  G => D, Ex in t F
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .formula import (
    AND,
    EQ,
    EXISTS,
    FORALL,
    IMP,
    IN,
    OR,
    Assignment,
    Atom,
    Bin,
    BQuant,
    Const,
    Formula,
    Not,
    Quant,
    Var,
    alpha_equal,
    conj,
    disj,
    free_vars,
    jterm,
    match,
    parse_with_names,
    subformulas,
    substitute_terms,
    to_text,
)
from .semantics import FiniteUniverse, assignments

AXIOMS = ("identity", "refl", "sym", "trans", "jcong", "memcong")
RULES = AXIOMS + (
    "weak-l", "weak-r", "contr-l", "contr-r", "exch-l", "exch-r", "cut",
    "not-l", "not-r", "and-l1", "and-l2", "and-r", "or-l", "or-r1", "or-r2",
    "imp-l", "imp-r", "all-l", "all-r", "ex-l", "ex-r",
    "ball-l", "ball-r", "bex-l", "bex-r",
)


@dataclass(frozen=True)
class Sequent:
    antecedent: tuple = ()
    succedent: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "antecedent", tuple(self.antecedent))
        object.__setattr__(self, "succedent", tuple(self.succedent))

    def formulas(self) -> tuple:
        return self.antecedent + self.succedent

    def free_vars(self) -> frozenset:
        out: frozenset = frozenset()
        for f in self.formulas():
            out |= free_vars(f)
        return out

    def __str__(self) -> str:
        left = ", ".join(to_text(f) for f in self.antecedent)
        right = ", ".join(to_text(f) for f in self.succedent)
        return f"{left} => {right}".strip()


@dataclass(frozen=True)
class Derivation:
    conclusion: Sequent
    rule: str
    premises: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "premises", tuple(self.premises))

    def nodes(self) -> list:
        """Canonical enumeration: premises (left to right) before conclusions."""
        out: list = []
        for p in self.premises:
            out.extend(p.nodes())
        out.append(self)
        return out

    def sequents(self) -> list:
        return [n.conclusion for n in self.nodes()]


class RuleError(ValueError):
    pass


# ------------------------------------------------------------ axioms


def _eq(f: Formula):
    return (f.left, f.right) if isinstance(f, Atom) and f.rel == EQ else None


def _in(f: Formula):
    return (f.left, f.right) if isinstance(f, Atom) and f.rel == IN else None


def _axiom_matches(name: str, s: Sequent) -> bool:
    L, R = s.antecedent, s.succedent
    if len(R) != 1:
        return False
    r = R[0]
    if name == "identity":
        return len(L) == 1 and L[0] == r
    if name == "refl":
        e = _eq(r)
        return not L and e is not None and e[0] == e[1]
    if name in ("sym", "jcong"):
        if len(L) != 1:
            return False
        a, b = _eq(L[0]), _eq(r)
        if a is None or b is None:
            return False
        want = (a[1], a[0]) if name == "sym" else (jterm(a[0]), jterm(a[1]))
        return b == want
    if name == "trans":
        if len(L) != 2:
            return False
        a, b, c = _eq(L[0]), _eq(L[1]), _eq(r)
        return bool(a and b and c and a[1] == b[0] and c == (a[0], b[1]))
    if name == "memcong":
        if len(L) != 3:
            return False
        a, b, m, c = _eq(L[0]), _eq(L[1]), _in(L[2]), _in(r)
        return bool(a and b and m and c and m == (a[0], b[0]) and c == (a[1], b[1]))
    return False


def _near_miss(s: Sequent) -> str:
    L, R = s.antecedent, s.succedent
    if len(R) != 1:
        return "axioms have exactly one succedent formula"
    if not L:
        return "refl needs => s = s with the same term on both sides"
    if len(L) == 1:
        a, b = _eq(L[0]), _eq(R[0])
        if a and b and b == (jterm(a[1]), jterm(a[0])):
            return "jcong gives j(s) = j(t) from s = t; the sides are swapped"
        if a and b:
            return "single equation does not match sym or jcong"
        return "identity needs the same formula on both sides"
    if len(L) == 2:
        return "trans needs s0 = s1, s1 = s2 => s0 = s2"
    if len(L) == 3:
        return "memcong needs s0 = s1, t0 = t1, s0 in t0 => s1 in t1"
    return "no axiom has this many antecedent formulas"


def check_axiom(s: Sequent) -> tuple:
    """(True, axiom name) or (False, nearest-miss diagnostic)."""
    for name in AXIOMS:
        if _axiom_matches(name, s):
            return True, name
    return False, _near_miss(s)


# ------------------------------------------------------------- rules


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise RuleError(msg)


def _instance_term(body: Formula, var: int, inst: Formula):
    """The term t with body[t/var] alpha-equal to inst, or None."""
    if var not in free_vars(body):
        return Var(var) if alpha_equal(body, inst) else None
    m = match(body, inst, {var})
    if m is None or var not in m:
        return None
    t = m[var]
    if not alpha_equal(substitute_terms(body, {var: t}), inst):
        return None
    return t


def _eigen(t, conclusion: Sequent, what: str) -> None:
    _need(isinstance(t, Var), f"{what}: eigenvariable must be a variable")
    _need(t.index not in conclusion.free_vars(), f"{what}: eigenvariable v{t.index} is free in the conclusion")


def _check_rule(rule: str, c: Sequent, ps: Sequence[Sequent]) -> None:
    L, R = c.antecedent, c.succedent

    def arity(n):
        _need(len(ps) == n, f"{rule} takes {n} premise(s), got {len(ps)}")

    if rule in ("weak-l", "weak-r"):
        arity(1)
        p = ps[0]
        if rule == "weak-l":
            _need(len(L) >= 1 and L[1:] == p.antecedent and R == p.succedent, "weak-l shape")
        else:
            _need(len(R) >= 1 and R[:-1] == p.succedent and L == p.antecedent, "weak-r shape")
        return
    if rule in ("contr-l", "contr-r"):
        arity(1)
        p = ps[0]
        if rule == "contr-l":
            _need(len(p.antecedent) >= 2 and p.antecedent[0] == p.antecedent[1]
                  and L == p.antecedent[1:] and R == p.succedent, "contr-l shape")
        else:
            _need(len(p.succedent) >= 2 and p.succedent[-1] == p.succedent[-2]
                  and R == p.succedent[:-1] and L == p.antecedent, "contr-r shape")
        return
    if rule in ("exch-l", "exch-r"):
        arity(1)
        p = ps[0]
        a, b = (p.antecedent, L) if rule == "exch-l" else (p.succedent, R)
        same = R == p.succedent if rule == "exch-l" else L == p.antecedent
        _need(same and len(a) == len(b), f"{rule} shape")
        diff = [i for i in range(len(a)) if a[i] != b[i]]
        _need(len(diff) == 2 and diff[1] == diff[0] + 1
              and a[diff[0]] == b[diff[1]] and a[diff[1]] == b[diff[0]],
              f"{rule} must swap two adjacent formulas")
        return
    if rule == "cut":
        arity(2)
        p, q = ps
        _need(p.succedent and q.antecedent and p.succedent[-1] == q.antecedent[0],
              "cut formula must end the left succedent and start the right antecedent")
        _need(L == p.antecedent + q.antecedent[1:] and R == p.succedent[:-1] + q.succedent,
              "cut context")
        return
    # logical rules: principal formula first on the left, last on the right
    if rule.endswith("-l") or rule in ("and-l1", "and-l2"):
        _need(len(L) >= 1, f"{rule}: no principal formula")
        A, G, D = L[0], L[1:], R
    else:
        _need(len(R) >= 1, f"{rule}: no principal formula")
        A, G, D = R[-1], L, R[:-1]

    if rule == "not-l":
        arity(1)
        _need(isinstance(A, Not), "not-l: principal is not a negation")
        p = ps[0]
        _need(p.antecedent == G and p.succedent == D + (A.body,), "not-l shape")
    elif rule == "not-r":
        arity(1)
        _need(isinstance(A, Not), "not-r: principal is not a negation")
        p = ps[0]
        _need(p.antecedent == (A.body,) + G and p.succedent == D, "not-r shape")
    elif rule in ("and-l1", "and-l2"):
        arity(1)
        _need(isinstance(A, Bin) and A.conn == AND, f"{rule}: principal is not a conjunction")
        part = A.left if rule == "and-l1" else A.right
        p = ps[0]
        _need(p.antecedent == (part,) + G and p.succedent == D, f"{rule} shape")
    elif rule == "and-r":
        arity(2)
        _need(isinstance(A, Bin) and A.conn == AND, "and-r: principal is not a conjunction")
        for p, part in zip(ps, (A.left, A.right)):
            _need(p.antecedent == G and p.succedent == D + (part,), "and-r shape")
    elif rule == "or-l":
        arity(2)
        _need(isinstance(A, Bin) and A.conn == OR, "or-l: principal is not a disjunction")
        for p, part in zip(ps, (A.left, A.right)):
            _need(p.antecedent == (part,) + G and p.succedent == D, "or-l shape")
    elif rule in ("or-r1", "or-r2"):
        arity(1)
        _need(isinstance(A, Bin) and A.conn == OR, f"{rule}: principal is not a disjunction")
        part = A.left if rule == "or-r1" else A.right
        p = ps[0]
        _need(p.antecedent == G and p.succedent == D + (part,), f"{rule} shape")
    elif rule == "imp-l":
        arity(2)
        _need(isinstance(A, Bin) and A.conn == IMP, "imp-l: principal is not an implication")
        p, q = ps
        _need(p.succedent and p.succedent[-1] == A.left, "imp-l: left premise must end in the antecedent")
        _need(q.antecedent and q.antecedent[0] == A.right, "imp-l: right premise must start with the consequent")
        _need(G == p.antecedent + q.antecedent[1:] and D == p.succedent[:-1] + q.succedent,
              "imp-l context")
    elif rule == "imp-r":
        arity(1)
        _need(isinstance(A, Bin) and A.conn == IMP, "imp-r: principal is not an implication")
        p = ps[0]
        _need(p.antecedent == (A.left,) + G and p.succedent == D + (A.right,), "imp-r shape")
    elif rule in ("all-l", "ex-l"):
        arity(1)
        q = FORALL if rule == "all-l" else EXISTS
        _need(isinstance(A, Quant) and A.q == q, f"{rule}: wrong principal quantifier")
        p = ps[0]
        _need(p.antecedent[1:] == G and p.succedent == D and len(p.antecedent) >= 1, f"{rule} shape")
        t = _instance_term(A.body, A.var, p.antecedent[0])
        _need(t is not None, f"{rule}: premise is not an instance of the principal formula")
        if rule == "ex-l":
            _eigen(t, c, rule)
    elif rule in ("all-r", "ex-r"):
        arity(1)
        q = FORALL if rule == "all-r" else EXISTS
        _need(isinstance(A, Quant) and A.q == q, f"{rule}: wrong principal quantifier")
        p = ps[0]
        _need(p.antecedent == G and p.succedent[:-1] == D and len(p.succedent) >= 1, f"{rule} shape")
        t = _instance_term(A.body, A.var, p.succedent[-1])
        _need(t is not None, f"{rule}: premise is not an instance of the principal formula")
        if rule == "all-r":
            _eigen(t, c, rule)
    elif rule == "ball-l":
        arity(2)
        _need(isinstance(A, BQuant) and A.q == FORALL, "ball-l: principal is not a bounded universal")
        p, q = ps
        _need(p.antecedent == G and len(p.succedent) >= 1 and p.succedent[:-1] == D, "ball-l shape")
        m = _in(p.succedent[-1])
        _need(m is not None and m[1] == A.bound, "ball-l: left premise must end in s in t")
        _need(q.antecedent[1:] == G and q.succedent == D and len(q.antecedent) >= 1, "ball-l shape")
        _need(alpha_equal(substitute_terms(A.body, {A.var: m[0]}), q.antecedent[0]),
              "ball-l: right premise must start with F(s)")
    elif rule == "bex-r":
        arity(2)
        _need(isinstance(A, BQuant) and A.q == EXISTS, "bex-r: principal is not a bounded existential")
        p, q = ps
        for r in ps:
            _need(r.antecedent == G and len(r.succedent) >= 1 and r.succedent[:-1] == D, "bex-r shape")
        m = _in(p.succedent[-1])
        _need(m is not None and m[1] == A.bound, "bex-r: left premise must end in s in t")
        _need(alpha_equal(substitute_terms(A.body, {A.var: m[0]}), q.succedent[-1]),
              "bex-r: right premise must end in F(s)")
    elif rule == "ball-r":
        arity(1)
        _need(isinstance(A, BQuant) and A.q == FORALL, "ball-r: principal is not a bounded universal")
        p = ps[0]
        _need(len(p.antecedent) >= 1 and p.antecedent[1:] == G and len(p.succedent) >= 1
              and p.succedent[:-1] == D, "ball-r shape")
        m = _in(p.antecedent[0])
        _need(m is not None and m[1] == A.bound, "ball-r: premise must start with a in t")
        _eigen(m[0], c, rule)
        _need(alpha_equal(substitute_terms(A.body, {A.var: m[0]}), p.succedent[-1]),
              "ball-r: premise must end in F(a)")
    elif rule == "bex-l":
        arity(1)
        _need(isinstance(A, BQuant) and A.q == EXISTS, "bex-l: principal is not a bounded existential")
        p = ps[0]
        _need(len(p.antecedent) >= 2 and p.antecedent[2:] == G and p.succedent == D, "bex-l shape")
        m = _in(p.antecedent[0])
        _need(m is not None and m[1] == A.bound, "bex-l: premise must start with a in t")
        _eigen(m[0], c, rule)
        _need(alpha_equal(substitute_terms(A.body, {A.var: m[0]}), p.antecedent[1]),
              "bex-l: second premise formula must be F(a)")
    else:
        raise RuleError(f"unknown rule {rule!r}")


# -------------------------------------------------------- derivations


@dataclass
class ProofReport:
    ok: bool = True
    errors: list = field(default_factory=list)  # (node index, message)
    cut: bool = False
    subformula_violation: Formula | None = None

    def add(self, i: int, msg: str) -> None:
        self.ok = False
        self.errors.append((i, msg))

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"node {i}: {m}" for i, m in self.errors)


def _subformula_instance(f: Formula, pool: Iterable[Formula]) -> bool:
    for g in pool:
        if match(g, f, free_vars(g)) is not None:
            return True
    return False


def check_derivation(d: Derivation, cut_free: bool = False) -> ProofReport:
    """Check every node against the rule schemata and every leaf against the
    axioms.  With ``cut_free`` a cut is an error and the subformula property
    (every formula is a substitution instance of a subformula of the
    end-sequent) is checked as well."""
    rep = ProofReport()
    nodes = d.nodes()
    for i, n in enumerate(nodes):
        if n.rule in AXIOMS:
            if n.premises:
                rep.add(i, f"axiom {n.rule} has premises")
                continue
            if not _axiom_matches(n.rule, n.conclusion):
                ok, name = check_axiom(n.conclusion)
                rep.add(i, f"axiom is {name}, not {n.rule}" if ok else f"not an axiom: {name}")
            continue
        if not n.premises:
            rep.add(i, f"leaf uses rule {n.rule}, not an axiom")
            continue
        if n.rule == "cut":
            rep.cut = True
            if cut_free:
                rep.add(i, "cut in a cut-free derivation")
        try:
            _check_rule(n.rule, n.conclusion, [p.conclusion for p in n.premises])
        except RuleError as e:
            rep.add(i, str(e))
    if cut_free:
        pool = set()
        for f in d.conclusion.formulas():
            pool.update(subformulas(f))
        for i, n in enumerate(nodes):
            for f in n.conclusion.formulas():
                if not _subformula_instance(f, pool):
                    rep.add(i, f"subformula property fails for {to_text(f)}")
                    if rep.subformula_violation is None:
                        rep.subformula_violation = f
    return rep


# ------------------------------------------------------ instantiation


def instantiate(s: Sequent, a: Sequence[int] | Mapping[int, int] = ()) -> Sequent:
    """Replace each free variable v_i by the constant a[i]; uncovered ones by the empty set."""
    fv = s.free_vars()
    if isinstance(a, Mapping):
        val = {i: Const(a.get(i, 0)) for i in fv}
    else:
        val = {i: Const(a[i] if i < len(a) else 0) for i in fv}
    return Sequent(
        tuple(substitute_terms(f, val) for f in s.antecedent),
        tuple(substitute_terms(f, val) for f in s.succedent),
    )


@dataclass
class SweepReport:
    ok: bool
    sequents: int
    assignments: int
    index: int | None = None
    assignment: Assignment | None = None
    sequent: Sequent | None = None

    def summary(self) -> str:
        if self.ok:
            return f"ok: {self.sequents} sequents x {self.assignments} assignments"
        return f"violation at sequent {self.index} under {tuple(self.assignment)}: {self.sequent}"


def soundness_sweep(
    d: Derivation,
    u: FiniteUniverse,
    level: int = 0,
    domain: Sequence[int] | None = None,
    truth=None,
) -> SweepReport:
    """For each sequent in canonical order and each assignment of the free
    variables of d into ``domain``: the instantiated antecedent conjunction is
    false or the succedent disjunction is true under the weak-model T."""
    from .axioms import PreEvaluationError, level_class, pre_evaluate
    from .weakmodel import WeakModel

    T = truth or WeakModel(u, level)
    seqs = d.sequents()
    for s in seqs:
        for f in s.formulas():
            try:
                ok = level_class(pre_evaluate(f, level), level)
            except PreEvaluationError:
                ok = False
            if not ok:
                raise ValueError(f"formula outside the level-{level} class: {to_text(f)}")
    fv: frozenset = frozenset()
    for s in seqs:
        fv |= s.free_vars()
    dom = list(u.layer(0) if domain is None else domain)
    count = 0
    for a in assignments(sorted(fv), dom):
        count += 1
        for i, s in enumerate(seqs):
            inst = instantiate(s, a)
            if T(conj(*inst.antecedent), {}) and not T(disj(*inst.succedent), {}):
                return SweepReport(False, len(seqs), count, i, a, s)
    return SweepReport(True, len(seqs), count)


# -------------------------------------------------------------- JSON


def sequent_from_text(text: str, names: dict | None = None) -> tuple:
    """Parse "A, B => C"; returns the sequent and the updated name table."""
    names = dict(names or {})
    if "=>" not in text:
        raise ValueError("sequent needs '=>'")
    left, right = text.split("=>", 1)
    sides = []
    for part in (left, right):
        fs = []
        for chunk in _split_top(part):
            f, names = parse_with_names(chunk, names)
            fs.append(f)
        sides.append(tuple(fs))
    return Sequent(*sides), names


def _split_top(text: str) -> list:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [c.strip() for c in out if c.strip()]


def derivation_from_json(data, names: dict | None = None) -> Derivation:
    if isinstance(data, str):
        data = json.loads(data)
    table = dict(names or {})

    def go(node) -> Derivation:
        nonlocal table
        s, table = sequent_from_text(node["conclusion"], table)
        prem = tuple(go(p) for p in node.get("premises", ()))
        return Derivation(s, node["rule"], prem)

    return go(data)


def derivation_to_json(d: Derivation) -> dict:
    return {
        "conclusion": str(d.conclusion),
        "rule": d.rule,
        "premises": [derivation_to_json(p) for p in d.premises],
    }


__all__ = [
    "AXIOMS",
    "RULES",
    "Derivation",
    "ProofReport",
    "RuleError",
    "Sequent",
    "SweepReport",
    "check_axiom",
    "check_derivation",
    "derivation_from_json",
    "derivation_to_json",
    "instantiate",
    "soundness_sweep",
]
