"""Enumeration oracle for mc / wmc / pmc / pwmc.

Walks every one of the 2^n assignments (vectorised in chunks) and applies the
textbook definitions directly. Slow on purpose; it is only the reference the
search counter is checked against.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np

from ..core import CnfInstance, ProblemKind
from ..exact import normalize

DEFAULT_LIMIT = 26
_CHUNK_BITS = 20


class BruteForceLimitError(ValueError):
    pass


def _clause_masks(clauses):
    masks = []
    for clause in clauses:
        pos = neg = 0
        for lit in clause:
            if lit > 0:
                pos |= 1 << (lit - 1)
            else:
                neg |= 1 << (-lit - 1)
        masks.append((np.uint64(pos), np.uint64(neg)))
    return masks


def enumerate_models(formula):
    """Yield uint64 arrays of satisfying assignments (bit v-1 = variable v)."""
    n = formula.num_vars
    if any(len(c) == 0 for c in formula.clauses):
        return
    masks = _clause_masks(formula.clauses)
    total = 1 << n
    step = 1 << min(n, _CHUNK_BITS)
    for start in range(0, total, step):
        a = np.arange(start, min(total, start + step), dtype=np.uint64)
        ok = np.ones(a.shape, dtype=bool)
        na = ~a
        for pos, neg in masks:
            ok &= ((a & pos) != 0) | ((na & neg) != 0)
        yield a[ok]


def _weighted_sum(assignments, n, numerators, denominator):
    """Σ over assignments of Π_v numerators[v][bit] / denominator^n, exactly.

    Uses split lookup tables over the low and high halves of the variables.
    """
    if len(assignments) == 0:
        return Fraction(0)
    h = n // 2

    def table(lo_var, count):
        out = [1]
        for k in range(count):
            neg, pos = numerators[lo_var + k]
            out = [x * neg for x in out] + [x * pos for x in out]
        return np.array(out, dtype=object)

    lo_table = table(1, h)
    hi_table = table(h + 1, n - h)
    lo = (assignments & np.uint64((1 << h) - 1)).astype(np.int64)
    hi = (assignments >> np.uint64(h)).astype(np.int64)
    total = int((hi_table[hi] * lo_table[lo]).sum())
    return Fraction(total, denominator**n)


def count_bruteforce(instance: CnfInstance, limit: int = DEFAULT_LIMIT):
    """Exact count by enumerating every assignment."""
    f = instance.formula
    n = f.num_vars
    if n > limit:
        raise BruteForceLimitError(f"{n} variables exceed the enumeration limit {limit}")
    kind = instance.kind
    chunks = list(enumerate_models(f))
    models = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.uint64)

    if kind.projected:
        pmask = 0
        for v in instance.projection:
            pmask |= 1 << (v - 1)
        models = np.unique(models & np.uint64(pmask))
    if not kind.weighted:
        return int(len(models))

    w = instance.weights
    shown = instance.projection if kind.projected else None
    weights = {}
    for v in range(1, n + 1):
        if shown is not None and v not in shown:
            weights[v] = (Fraction(1), Fraction(1))
        else:
            weights[v] = (w.get(-v), w.get(v))
    den = 1
    for pair in weights.values():
        den = lcm(den, pair[0].denominator, pair[1].denominator)
    numerators = {v: (int(a * den), int(b * den)) for v, (a, b) in weights.items()}
    return normalize(_weighted_sum(models, n, numerators, den))


def is_satisfiable_bruteforce(formula, limit: int = DEFAULT_LIMIT) -> bool:
    if formula.num_vars > limit:
        raise BruteForceLimitError("too many variables")
    return any(len(chunk) for chunk in enumerate_models(formula))


def count_models_direct(instance: CnfInstance):
    """Tiny-n reference straight from the definitions (sets of true variables)."""
    from itertools import product

    from ..core import evaluate, project_model, weight_of_model, weight_of_projected_model

    f = instance.formula
    universe = range(1, f.num_vars + 1)
    models = []
    for bits in product((False, True), repeat=f.num_vars):
        if evaluate(f, bits):
            models.append(frozenset(v for v, b in zip(universe, bits) if b))
    kind = instance.kind
    if kind == ProblemKind.MC:
        return len(models)
    if kind == ProblemKind.WMC:
        return normalize(sum((weight_of_model(instance.weights, m, universe) for m in models), Fraction(0)))
    projected = {project_model(m, instance.projection) for m in models}
    if kind == ProblemKind.PMC:
        return len(projected)
    return normalize(sum((weight_of_projected_model(instance.weights, nm, instance.projection)
                          for nm in projected), Fraction(0)))
