"""Seeded random instances and solver stubs shared by the test modules."""
import os
import random
import sys
from fractions import Fraction

from mccomp.core import CnfFormula, CnfInstance, ProblemKind, WeightMap

DATA = os.path.join(os.path.dirname(__file__), "data")
GOLDEN = os.path.join(DATA, "golden")
KINDS = list(ProblemKind)


def random_formula(rng: random.Random, n_max=16, m_max=40, width=(1, 4)) -> CnfFormula:
    n = rng.randint(1, n_max)
    # clause/variable ratio up to ~4.5 keeps a healthy mix of sat and unsat
    m = rng.randint(0, min(m_max, int(4.5 * n)))
    clauses = []
    for _ in range(m):
        lo = width[0] if rng.random() < 0.05 else max(width[0], 2)
        k = rng.randint(min(lo, n), min(width[1], n))
        vs = rng.sample(range(1, n + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(n, tuple(clauses))


def random_weights(rng: random.Random, n: int) -> WeightMap:
    """Mix of complete pairs, one-sided (lazy complement) and missing weights."""
    explicit = {}
    for v in range(1, n + 1):
        style = rng.randrange(4)
        w = Fraction(rng.randint(0, 1000), 1000)
        if style == 0:
            explicit[v], explicit[-v] = w, 1 - w
        elif style == 1:
            explicit[v] = w
        elif style == 2:
            explicit[-v] = w
        else:
            pass
        if style == 0 and rng.random() < 0.2:
            explicit[-v] = Fraction(rng.randint(0, 99), 100)  # sum != 1
    return WeightMap(explicit)


def random_instance(rng: random.Random, kind=None, n_max=16, m_max=40) -> CnfInstance:
    kind = kind or rng.choice(KINDS)
    f = random_formula(rng, n_max, m_max)
    weights = random_weights(rng, f.num_vars) if kind.weighted else None
    proj = None
    if kind.projected:
        proj = frozenset(v for v in range(1, f.num_vars + 1) if rng.random() < 0.5)
    return CnfInstance(f, kind, weights=weights, projection=proj)


def stub_command(code: str) -> str:
    """A solver command that runs a Python snippet; {instance} is passed as argv[1]."""
    path = os.path.join(DATA, "stubs", code)
    return f"{sys.executable} {path} {{instance}}"


def synthetic_pool(size=5000, seed=0, solvers=8, sets=40):
    """Pool entries with log-uniform runtimes, unsolved and single-solver cases mixed in."""
    from mccomp.selection import PoolEntry

    rng = random.Random(seed)
    names = ["sharpsat"] + [f"s{i}" for i in range(1, solvers)]
    pool = []
    for i in range(size):
        style = rng.random()
        hardness = 10 ** rng.uniform(-1, 4)
        rts = {}
        for s in names:
            t = hardness * rng.uniform(1, 4)
            rts[s] = t if t <= 7200 else None
        if style < 0.15:
            rts = {s: None for s in names}
        elif style < 0.25:
            keep = rng.choice(names)
            rts = {s: (t if s == keep else None) for s, t in rts.items()}
            if rts[keep] is None:
                rts[keep] = 10 ** rng.uniform(-1, 3.5)
        pool.append(PoolEntry(id=f"inst{i:05d}", source_set=f"set{rng.randrange(sets):02d}", runtimes=rts,
                              baseline_runtime_s=rts["sharpsat"], satisfiable=rng.random() > 0.1))
    return pool
