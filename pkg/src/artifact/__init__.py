"""Finite-scale toolkit for set theory with an embedding symbol j.

Modules: ``formula`` (syntax), ``hierarchy`` (classifiers), ``normalize``
(pairing-based quantifier collapse), ``axioms`` (schema instances, iteration
formulas, pre-evaluation), ``semantics`` and ``weakmodel`` (finite universes,
evaluation, toy weak models), ``sequent`` (proof checker) and ``cli``.
"""

__version__ = "0.1.0"
