"""Seeded formula corpora shared by the acceptance and unit tests."""

from __future__ import annotations

import random

from artifact.axioms import generate_formulas
from artifact.formula import EXISTS, FORALL, Quant, is_j_free


def alternate(q: str) -> str:
    return EXISTS if q == FORALL else FORALL


def with_prefix(matrix, n: int, first: str, start: int = 1):
    """Q1 v_start .. Qn v_{start+n-1} matrix with alternating quantifiers."""
    qs, q = [], first
    for k in range(n):
        qs.append((q, start + k))
        q = alternate(q)
    for q, v in reversed(qs):
        matrix = Quant(q, v, matrix)
    return matrix


def prenex_pairs(count_per_level: int, with_j: bool, seed: int) -> list:
    """(phi, psi, mode) with phi, psi strict Sigma_n or Pi_n in v0, n = 1..3."""
    rng = random.Random(seed)
    out = []
    for n in (1, 2, 3):
        mats = generate_formulas(3 + n, n + 1, with_j=with_j, max_vars=n + 1)
        if with_j:
            mats = [m for m in mats if not is_j_free(m)]
        for _ in range(count_per_level):
            a, b = rng.sample(mats, 2)
            first = rng.choice((FORALL, EXISTS))
            out.append((with_prefix(a, n, first), with_prefix(b, n, first), rng.choice(("and", "or"))))
    return out


def sigma_j(n: int, count: int, seed: int, size: int | None = None) -> list:
    """Sigma^j_n formulas with free variables v0, v1 (bound ones from v2)."""
    size = size or (3, 3, 4, 5)[n]
    mats = generate_formulas(size, 2 + n, with_j=True, unbounded=False, max_vars=2 + n)
    rng = random.Random(seed)
    return [with_prefix(m, n, EXISTS, start=2) for m in rng.sample(mats, count)]


def delta0_j(count: int, seed: int, size: int = 6) -> list:
    """Delta^j_0 formulas in the single free variable v0."""
    fs = generate_formulas(size, 1, with_j=True, unbounded=False)
    return random.Random(seed).sample(fs, count)
