"""Component-caching search counter.

Unit propagation to fixpoint, decomposition of the residual formula into
variable-disjoint components, a memo table keyed by each component's
canonical clause encoding, and branching on the most frequent variable.
Projected kinds branch on projection variables only; a component without
projection variables contributes its satisfiability (0 or 1).

The search is written against a small algebra so the very same trace either
evaluates numbers (:class:`CountAlgebra`) or builds a Decision-DNNF
(see ``ddnnf.py``).
"""
from __future__ import annotations

import hashlib
import sys
import time
from array import array
from collections import Counter, OrderedDict
from itertools import chain
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from ..core import CnfFormula, CnfInstance, CountResult
from ..exact import normalize

DEFAULT_CACHE_BYTES = 4 * 2**30


class ResourceExhausted(RuntimeError):
    """Counting ran out of memory, node budget or time."""


@dataclass
class SearchLimits:
    cache_bytes: int = DEFAULT_CACHE_BYTES
    max_decisions: Optional[int] = None
    time_limit_s: Optional[float] = None
    use_cache: bool = True


class ComponentKey:
    """Canonical encoding of a residual component.

    Hashes with a 128-bit digest; equality always compares the full encoding,
    so a digest collision can never return a wrong count.
    """

    __slots__ = ("data", "digest")

    def __init__(self, clauses):
        flat = array("i")
        for clause in clauses:
            flat.extend(clause)
            flat.append(0)
        self.data = flat.tobytes()
        self.digest = hashlib.blake2b(self.data, digest_size=16).digest()

    @classmethod
    def of(cls, clauses) -> "ComponentKey":
        return cls(sorted(clauses))

    def __hash__(self):
        return int.from_bytes(self.digest[:8], "little")

    def __eq__(self, other):
        return isinstance(other, ComponentKey) and self.digest == other.digest and self.data == other.data

    def nbytes(self) -> int:
        return len(self.data) + 16


class ComponentCache:
    """LRU map from ComponentKey to value with an approximate byte budget."""

    # measured: key object, OrderedDict node, value tuple and int ~ 360 bytes
    ENTRY_OVERHEAD = 360

    def __init__(self, budget_bytes: int = DEFAULT_CACHE_BYTES):
        self.budget = budget_bytes
        self.used = 0
        self.hits = 0
        self.misses = 0
        self.evictions = 0
        self._table: OrderedDict = OrderedDict()

    def get(self, key: ComponentKey):
        try:
            value = self._table[key]
        except KeyError:
            self.misses += 1
            return None
        self._table.move_to_end(key)
        self.hits += 1
        return value[0]

    def put(self, key: ComponentKey, value, value_bytes: int = 32):
        if key in self._table:
            return
        size = key.nbytes() + value_bytes + self.ENTRY_OVERHEAD
        self._table[key] = (value, size)
        self.used += size
        while self.used > self.budget and self._table:
            _, (_, old_size) = self._table.popitem(last=False)
            self.used -= old_size
            self.evictions += 1

    def __len__(self):
        return len(self._table)


# --- clause-level helpers ------------------------------------------------------

def normalize_clauses(clauses: Iterable) -> Optional[list]:
    """Sort and dedupe literals, drop tautologies. None if an empty clause exists."""
    out = []
    for clause in clauses:
        lits = set(clause)
        if any(-l in lits for l in lits):
            continue
        if not lits:
            return None
        out.append(tuple(sorted(lits, key=abs)))
    return out


def assign(clauses, lits):
    """Simplify under a set of true literals. None on conflict."""
    out = []
    if len(lits) == 1:
        (lit,) = lits
        neg = -lit
        for clause in clauses:
            if lit in clause:
                continue
            if neg in clause:
                if len(clause) == 1:
                    return None
                clause = tuple(l for l in clause if l != neg)
            out.append(clause)
        return out
    if not isinstance(lits, (set, frozenset)):
        lits = set(lits)
    negs = {-l for l in lits}
    for clause in clauses:
        if not lits.isdisjoint(clause):
            continue
        if not negs.isdisjoint(clause):
            clause = tuple(l for l in clause if l not in negs)
            if not clause:
                return None
        out.append(clause)
    return out


def propagate(clauses, assigned=None):
    """Unit propagation to fixpoint.

    Returns (residual clauses, set of implied literals) or (None, None) on
    conflict.
    """
    implied = set(assigned or ())
    if implied:
        clauses = assign(clauses, implied)
        if clauses is None:
            return None, None
    while True:
        units = {c[0] for c in clauses if len(c) == 1}
        if not units:
            return clauses, implied
        if any(-l in units for l in units):
            return None, None
        implied |= units
        clauses = assign(clauses, units)
        if clauses is None:
            return None, None


def split_components(clauses):
    """Variable-connected groups as (clauses, variables) pairs, in order of
    their first clause."""
    owner = {}
    groups = []  # [first clause index, clause list, variable set] or None once merged
    for idx, clause in enumerate(clauses):
        vs = set(map(abs, clause))
        gids = set(map(owner.get, vs))
        gids.discard(None)
        if len(gids) == 1:
            g = gids.pop()
            target = groups[g]
        elif not gids:
            g = len(groups)
            target = [idx, [], set()]
            groups.append(target)
        else:
            g = max(gids, key=lambda i: len(groups[i][2]))
            target = groups[g]
            for h in gids:
                if h != g:
                    other = groups[h]
                    groups[h] = None
                    if other[0] < target[0]:
                        target[0] = other[0]
                    target[1].extend(other[1])
                    target[2] |= other[2]
                    owner.update(dict.fromkeys(other[2], g))
        target[1].append(clause)
        target[2] |= vs
        owner.update(dict.fromkeys(vs, g))
    if len(groups) == 1:
        return [(groups[0][1], groups[0][2])]
    live = sorted((grp for grp in groups if grp is not None), key=lambda grp: grp[0])
    return [(grp[1], grp[2]) for grp in live]


def components(clauses):
    """Split into variable-connected groups of clauses."""
    return [group for group, _ in split_components(clauses)]


def clause_vars(clauses) -> set:
    return set(map(abs, chain.from_iterable(clauses)))


def pick_branch_var(clauses, allowed=None) -> int:
    """Most occurrences in the clauses; ties go to the smallest index."""
    counts = Counter(map(abs, chain.from_iterable(clauses)))
    if allowed is not None:
        counts = {v: c for v, c in counts.items() if v in allowed}
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def check_sat(formula: CnfFormula, fixed=()) -> bool:
    """DPLL satisfiability check under a partial assignment.

    ``fixed`` holds literals, or a mapping var -> bool.
    """
    if isinstance(fixed, dict):
        fixed = [v if val else -v for v, val in fixed.items()]
    clauses = normalize_clauses(formula.clauses)
    if clauses is None:
        return False
    fixed = set(fixed)
    if any(-l in fixed for l in fixed):
        return False
    clauses = assign(clauses, fixed)
    if clauses is None:
        return False
    return _sat(clauses)


def _sat(clauses) -> bool:
    clauses, _ = propagate(clauses)
    if clauses is None:
        return False
    if not clauses:
        return True
    v = pick_branch_var(clauses)
    for l in (v, -v):
        sub = assign(clauses, {l})
        if sub is not None and _sat(sub):
            return True
    return False


# --- algebra -------------------------------------------------------------------

class CountAlgebra:
    """Numbers: ints for unweighted kinds, Fractions when weighted."""

    def __init__(self, instance: CnfInstance):
        kind = instance.kind
        self.weighted = kind.weighted
        self.shown = instance.projection if kind.projected else None
        self.weights = instance.weights

    def one(self):
        return 1

    def zero(self):
        return 0

    def lit(self, l):
        if not self.weighted:
            return 1
        if self.shown is not None and abs(l) not in self.shown:
            return 1
        return self.weights.get(l)

    def free(self, variables):
        if self.shown is not None:
            variables = [v for v in variables if v in self.shown]
        if not self.weighted:
            return 1 << len(variables)
        out = Fraction(1)
        for v in variables:
            out *= self.weights.get(v) + self.weights.get(-v)
        return out

    def mul(self, values):
        out = 1
        for x in values:
            if x == 0:
                return 0
            out *= x
        return out

    def decide(self, v, high, low):
        return self.lit(v) * high + self.lit(-v) * low

    def is_zero(self, x):
        return x == 0


class SearchEngine:
    def __init__(self, instance: CnfInstance, algebra, limits: Optional[SearchLimits] = None):
        self.instance = instance
        self.alg = algebra
        self.limits = limits or SearchLimits()
        self.cache = ComponentCache(self.limits.cache_bytes) if self.limits.use_cache else None
        self.shown = instance.projection if instance.kind.projected else None
        self.decisions = 0
        self._deadline = (time.monotonic() + self.limits.time_limit_s
                          if self.limits.time_limit_s is not None else None)

    def run(self):
        f = self.instance.formula
        clauses = normalize_clauses(f.clauses)
        if clauses is None:
            return self.alg.zero()
        universe = set(range(1, f.num_vars + 1))
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 10000 + 8 * f.num_vars))
        try:
            return self._count_set(clauses, universe)
        except MemoryError as exc:
            raise ResourceExhausted("out of memory while counting") from exc
        except RecursionError as exc:
            raise ResourceExhausted("search depth exceeded") from exc
        finally:
            sys.setrecursionlimit(old)

    def _tick(self):
        self.decisions += 1
        lim = self.limits
        if lim.max_decisions is not None and self.decisions > lim.max_decisions:
            raise ResourceExhausted(f"decision budget {lim.max_decisions} exhausted")
        if self._deadline is not None and (self.decisions & 63) == 0 and time.monotonic() > self._deadline:
            raise ResourceExhausted("time limit reached")

    def _count_set(self, clauses, scope):
        """Value of ``clauses`` over exactly the variables in ``scope``."""
        alg = self.alg
        residual, implied = propagate(clauses)
        if residual is None:
            return alg.zero()
        groups = split_components(residual)
        factors = [alg.lit(l) for l in sorted(implied, key=abs)]
        gap = scope.difference(map(abs, implied), *(vs for _, vs in groups))
        if gap:
            factors.append(alg.free(sorted(gap)))
        for comp, variables in groups:
            value = self._count_component(comp, variables)
            if alg.is_zero(value):
                return alg.zero()
            factors.append(value)
        return alg.mul(factors)

    def _count_component(self, comp, variables):
        key = ComponentKey.of(comp) if self.cache is not None else None
        if key is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        value = self._solve_component(comp, variables)
        if key is not None:
            self.cache.put(key, value)
        return value

    def _solve_component(self, comp, variables):
        alg = self.alg
        allowed = None
        if self.shown is not None:
            allowed = variables & self.shown
            if not allowed:
                return alg.one() if _sat(comp) else alg.zero()
        self._tick()
        v = pick_branch_var(comp, allowed)
        rest = variables - {v}
        branches = []
        for l in (v, -v):
            sub = assign(comp, {l})
            branches.append(alg.zero() if sub is None else self._count_set(sub, rest))
        return alg.decide(v, branches[0], branches[1])


def count_value(instance: CnfInstance, limits: Optional[SearchLimits] = None):
    """Exact count as an int or Fraction."""
    return normalize(SearchEngine(instance, CountAlgebra(instance), limits).run())


def count(instance: CnfInstance, limits: Optional[SearchLimits] = None) -> CountResult:
    """Exact count of any kind, wrapped as a CountResult."""
    value = count_value(instance, limits)
    if value != 0:
        satisfiable = True
    elif instance.kind.weighted:
        satisfiable = check_sat(instance.formula)
    else:
        satisfiable = False
    return CountResult.from_count(instance.kind, value, satisfiable)
