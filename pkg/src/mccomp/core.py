"""Domain types shared across the toolkit.

Literals follow DIMACS: a non-zero ``int`` whose sign is the polarity.
Models are sets of variables assigned true, always paired with the universe
``1..n`` so that weights of false variables are never dropped.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .exact import LOG10_ZERO, ExactNumber, log10_float, normalize

Clause = tuple  # tuple[int, ...]


class ProblemKind(str, enum.Enum):
    MC = "mc"
    WMC = "wmc"
    PMC = "pmc"
    PWMC = "pwmc"

    @property
    def weighted(self) -> bool:
        return self in (ProblemKind.WMC, ProblemKind.PWMC)

    @property
    def projected(self) -> bool:
        return self in (ProblemKind.PMC, ProblemKind.PWMC)

    @classmethod
    def from_features(cls, weighted: bool, projected: bool) -> "ProblemKind":
        if weighted and projected:
            return cls.PWMC
        if weighted:
            return cls.WMC
        if projected:
            return cls.PMC
        return cls.MC

    def __str__(self):
        return self.value


class WeightSource(str, enum.Enum):
    EXPLICIT = "explicit"
    COMPLEMENT = "complement-derived"
    DEFAULT = "default-one"


def negate(lit: int) -> int:
    if lit == 0:
        raise ValueError("0 is the clause terminator, not a literal")
    return -lit


def var_of(lit: int) -> int:
    return lit if lit > 0 else -lit


class WeightMap:
    """Literal weights as exact rationals.

    Only explicit weights are stored. A literal whose complement was given
    resolves to ``1 - w``; a variable with no weight at all resolves to 1 for
    both polarities. Resolution is lazy so huge headers cost nothing.
    """

    __slots__ = ("_explicit",)

    def __init__(self, explicit: Optional[Mapping[int, Fraction]] = None):
        self._explicit = {}
        for lit, w in (explicit or {}).items():
            if lit == 0:
                raise ValueError("literal 0 has no weight")
            self._explicit[int(lit)] = Fraction(w)

    @classmethod
    def uniform(cls, num_vars: int, value=Fraction(1, 2)) -> "WeightMap":
        value = Fraction(value)
        out = {}
        for v in range(1, num_vars + 1):
            out[v] = value
            out[-v] = value
        return cls(out)

    @property
    def explicit(self) -> dict:
        return dict(self._explicit)

    def get(self, lit: int) -> Fraction:
        w = self._explicit.get(lit)
        if w is not None:
            return w
        other = self._explicit.get(-lit)
        if other is not None:
            return 1 - other
        return Fraction(1)

    __getitem__ = get

    def source(self, lit: int) -> WeightSource:
        if lit in self._explicit:
            return WeightSource.EXPLICIT
        if -lit in self._explicit:
            return WeightSource.COMPLEMENT
        return WeightSource.DEFAULT

    def pair_sum(self, var: int) -> Fraction:
        return self.get(var) + self.get(-var)

    def resolved(self, num_vars: int) -> dict:
        return {lit: self.get(lit) for v in range(1, num_vars + 1) for lit in (v, -v)}

    def __eq__(self, other):
        if not isinstance(other, WeightMap):
            return NotImplemented
        return self._explicit == other._explicit

    def __hash__(self):
        return hash(frozenset(self._explicit.items()))

    def __repr__(self):
        return f"WeightMap({self._explicit!r})"


@dataclass(frozen=True)
class Provenance:
    origin: str
    description: str
    generator: Optional[str] = None

    def tokens(self):
        out = [self.origin, self.description]
        if self.generator:
            out.append(self.generator)
        return out


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def variables(self) -> set:
        return {abs(l) for c in self.clauses for l in c}


@dataclass(frozen=True)
class CnfInstance:
    formula: CnfFormula
    kind: ProblemKind = ProblemKind.MC
    weights: Optional[WeightMap] = None
    projection: Optional[frozenset] = None
    provenance: Optional[Provenance] = None

    def __post_init__(self):
        kind = ProblemKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind.weighted and self.weights is None:
            object.__setattr__(self, "weights", WeightMap())
        if kind.projected and self.projection is None:
            object.__setattr__(self, "projection", frozenset())
        if self.projection is not None:
            object.__setattr__(self, "projection", frozenset(self.projection))
            bad = [v for v in self.projection if not 1 <= v <= self.formula.num_vars]
            if bad:
                raise ValueError(f"projection variables out of range: {sorted(bad)[:5]}")

    @property
    def num_vars(self) -> int:
        return self.formula.num_vars

    def with_kind(self, kind: ProblemKind, **changes) -> "CnfInstance":
        fields_ = dict(formula=self.formula, kind=kind, weights=self.weights,
                       projection=self.projection, provenance=self.provenance)
        fields_.update(changes)
        return CnfInstance(**fields_)


class Satisfiability(str, enum.Enum):
    SAT = "SATISFIABLE"
    UNSAT = "UNSATISFIABLE"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class CountResult:
    satisfiable: Satisfiability
    kind: ProblemKind
    exact: Optional[ExactNumber] = None
    log10_estimate: object = None
    solver_type: str = "exact"
    precision: str = "arb"
    notation: str = field(default="")

    def __post_init__(self):
        if self.exact is not None:
            object.__setattr__(self, "exact", normalize(self.exact))
            if self.log10_estimate is None:
                object.__setattr__(self, "log10_estimate", log10_float(self.exact))
        if not self.notation:
            notation = "int" if isinstance(self.exact, int) or self.exact is None else "log10"
            object.__setattr__(self, "notation", notation)

    @classmethod
    def from_count(cls, kind: ProblemKind, value: ExactNumber,
                   satisfiable: Optional[bool] = None) -> "CountResult":
        if satisfiable is None:
            satisfiable = value != 0
        sat = Satisfiability.SAT if satisfiable else Satisfiability.UNSAT
        return cls(satisfiable=sat, kind=kind, exact=value)

    @property
    def is_zero(self) -> bool:
        return self.log10_estimate is LOG10_ZERO


# --- elementary semantics ---------------------------------------------------

def evaluate(formula: CnfFormula, assignment) -> bool:
    """True iff the total assignment satisfies every clause.

    ``assignment`` maps each variable 1..n to a truth value (mapping, or a
    sequence indexed from 0 for variable 1).
    """
    n = formula.num_vars
    if isinstance(assignment, Mapping):
        missing = [v for v in range(1, n + 1) if v not in assignment]
        if missing:
            raise ValueError(f"assignment not total, missing variables {missing[:5]}")
        value = lambda v: bool(assignment[v])
    else:
        if len(assignment) < n:
            raise ValueError(f"assignment covers {len(assignment)} of {n} variables")
        value = lambda v: bool(assignment[v - 1])
    for clause in formula.clauses:
        if not any(value(abs(l)) == (l > 0) for l in clause):
            return False
    return True


def weight_of_model(weights: WeightMap, model: Iterable[int], universe: Iterable[int]) -> Fraction:
    """Product of w(v) for v in model and w(-v) for the rest of the universe."""
    model = set(model)
    universe = list(universe)
    if not model <= set(universe):
        raise ValueError("model is not inside the universe")
    out = Fraction(1)
    for v in universe:
        out *= weights.get(v if v in model else -v)
    return out


def project_model(model: Iterable[int], projection: Iterable[int]) -> frozenset:
    return frozenset(model) & frozenset(projection)


def weight_of_projected_model(weights: WeightMap, projected: Iterable[int],
                              projection: Iterable[int]) -> Fraction:
    """Weight of a projected model, taken over projection literals only."""
    projection = set(projection)
    projected = set(projected)
    if not projected <= projection:
        raise ValueError("projected model must be a subset of the projection set")
    return weight_of_model(weights, projected, sorted(projection))
