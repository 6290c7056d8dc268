"""Benchmark selection: the 2021 balanced scheme, the 2022/23 random-by-set scheme,
and the odd/even private/public split.

Sampling uses ``random.Random(seed)`` (Mersenne Twister) without replacement;
pools are processed in id order so results depend only on (pool, seed).
"""
from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

TARGET = 200
UNSOLVED_LIMIT_S = 3600.0
PRECOMPUTE_TIMEOUT_S = 7200.0

# (label, low exclusive, high inclusive, quota)
BUCKETS_2021 = [
    ("(0,60]", 0.0, 60.0, 20),
    ("(60,250]", 60.0, 250.0, 20),
    ("(250,500]", 250.0, 500.0, 20),
    ("(500,900]", 500.0, 900.0, 50),
    ("(900,1800]", 900.0, 1800.0, 30),
    ("(1800,3600]", 1800.0, 3600.0, 20),
]
UNSOLVED_BUCKET = "unsolved"
UNSOLVED_QUOTA_2021 = 40
SINGLE_SOLVER_CAP = 10

BASELINE_FAST_S = 60.0
PER_SET_UNSOLVED = 3
PER_SET_SOLVED = 12
GLOBAL_SOLVED = 160
GLOBAL_UNSOLVED = 40


class SelectionError(ValueError):
    pass


@dataclass
class PoolEntry:
    id: str
    source_set: str = ""
    runtimes: Dict[str, Optional[float]] = field(default_factory=dict)
    baseline_runtime_s: Optional[float] = None
    satisfiable: Optional[bool] = None
    timeout_s: float = PRECOMPUTE_TIMEOUT_S

    @property
    def solved_by(self) -> frozenset:
        return frozenset(s for s, t in self.runtimes.items()
                         if t is not None and t <= self.timeout_s)

    @property
    def fastest_time_s(self) -> Optional[float]:
        times = [self.runtimes[s] for s in self.solved_by]
        return min(times) if times else None


@dataclass
class SelectionResult:
    ids: List[str]
    buckets: List[str]
    warnings: List[str] = field(default_factory=list)

    def numbered(self) -> List[Tuple[int, str, str]]:
        return [(k, i, b) for k, (i, b) in enumerate(zip(self.ids, self.buckets), 1)]

    def bucket_counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for b in self.buckets:
            out[b] = out.get(b, 0) + 1
        return out

    def to_csv(self) -> str:
        lines = ["number,id,bucket"]
        lines += [f"{k},{i},{b}" for k, i, b in self.numbered()]
        return "\n".join(lines) + "\n"


def bucket_2021(entry: PoolEntry) -> str:
    t = entry.fastest_time_s
    if t is None or t > UNSOLVED_LIMIT_S:
        return UNSOLVED_BUCKET
    for label, lo, hi, _ in BUCKETS_2021:
        if lo < t <= hi or (lo == 0.0 and t <= hi):
            return label
    return UNSOLVED_BUCKET


def select_balanced_2021(pool: Sequence[PoolEntry], seed: int, target: int = TARGET) -> SelectionResult:
    """40 unsolved plus runtime-interval quotas; at most 10 single-solver picks."""
    if not pool:
        raise SelectionError("empty pool")
    rng = random.Random(seed)
    entries = sorted(pool, key=lambda e: e.id)
    if len(set(e.id for e in entries)) != len(entries):
        raise SelectionError("duplicate instance ids in pool")
    if len(entries) <= target:
        ids = [e.id for e in entries]
        rng.shuffle(ids)
        by_id = {e.id: e for e in entries}
        return SelectionResult(ids, [bucket_2021(by_id[i]) for i in ids],
                               [f"pool has only {len(entries)} instances; all selected"])

    groups: Dict[str, List[PoolEntry]] = {}
    for e in entries:
        groups.setdefault(bucket_2021(e), []).append(e)
    quotas = [(UNSOLVED_BUCKET, UNSOLVED_QUOTA_2021)] + [(b[0], b[3]) for b in BUCKETS_2021]

    chosen: List[str] = []
    labels: List[str] = []
    taken = set()
    singles = 0
    warnings = []

    def take(e: PoolEntry, label: str) -> bool:
        nonlocal singles
        single = len(e.solved_by) == 1
        if single and singles >= SINGLE_SOLVER_CAP:
            return False
        singles += single
        chosen.append(e.id)
        labels.append(label)
        taken.add(e.id)
        return True

    for label, quota in quotas:
        candidates = list(groups.get(label, []))
        rng.shuffle(candidates)
        got = 0
        for e in candidates:
            if got == quota:
                break
            if take(e, label):
                got += 1
        if got < quota:
            warnings.append(f"bucket {label} filled {got}/{quota}; remainder drawn at random")

    if len(chosen) < target:
        rest = [e for e in entries if e.id not in taken]
        rng.shuffle(rest)
        for e in rest:
            if len(chosen) == target:
                break
            take(e, "random-refill:" + bucket_2021(e))
        if len(chosen) < target:
            warnings.append(f"only {len(chosen)} instances selectable under the single-solver cap")
    return SelectionResult(chosen, labels, warnings)


def _is_unsat(e: PoolEntry) -> bool:
    return e.satisfiable is False


def _fast_for_baseline(e: PoolEntry) -> bool:
    return e.baseline_runtime_s is not None and e.baseline_runtime_s <= BASELINE_FAST_S


def select_random_by_set_2022(pool: Sequence[PoolEntry], seed: int) -> SelectionResult:
    """Drop baseline-easy and UNSAT instances, stratify per set, then sample 160/40."""
    rng = random.Random(seed)
    entries = sorted(pool, key=lambda e: e.id)
    warnings = []
    kept = [e for e in entries if not _fast_for_baseline(e) and not _is_unsat(e)]
    if not kept:
        return SelectionResult([], [], ["no instance survives the baseline/UNSAT filter"])

    by_set: Dict[str, List[PoolEntry]] = {}
    for e in kept:
        by_set.setdefault(e.source_set, []).append(e)
    solved, unsolved = [], []
    for name in sorted(by_set):
        members = by_set[name]
        s = [e for e in members if e.solved_by]
        u = [e for e in members if not e.solved_by]
        solved += s if len(s) <= PER_SET_SOLVED else rng.sample(s, PER_SET_SOLVED)
        unsolved += u if len(u) <= PER_SET_UNSOLVED else rng.sample(u, PER_SET_UNSOLVED)

    def draw(items, k, label):
        if len(items) < k:
            warnings.append(f"only {len(items)} {label} instances after stratification (wanted {k}); all taken")
            picked = list(items)
            rng.shuffle(picked)
            return picked
        return rng.sample(items, k)

    pick_s = draw(solved, GLOBAL_SOLVED, "solved")
    pick_u = draw(unsolved, GLOBAL_UNSOLVED, "unsolved")
    ids = [e.id for e in pick_s] + [e.id for e in pick_u]
    labels = ["solved:" + e.source_set for e in pick_s] + ["unsolved:" + e.source_set for e in pick_u]
    return SelectionResult(ids, labels, warnings)


def split_public_private(result) -> Tuple[List[str], List[str]]:
    """Odd numbers are private, even numbers public. Returns (public, private)."""
    ids = result.ids if isinstance(result, SelectionResult) else list(result)
    public = [i for k, i in enumerate(ids, 1) if k % 2 == 0]
    private = [i for k, i in enumerate(ids, 1) if k % 2 == 1]
    return public, private


# --- pool ingest -------------------------------------------------------------

def _opt_float(x) -> Optional[float]:
    if x is None or x == "" or (isinstance(x, str) and x.lower() in ("none", "null", "nan")):
        return None
    v = float(x)
    return None if math.isnan(v) else v


def _opt_bool(x) -> Optional[bool]:
    if x is None or x == "":
        return None
    if isinstance(x, bool):
        return x
    s = str(x).strip().lower()
    if s in ("1", "true", "sat", "satisfiable", "yes"):
        return True
    if s in ("0", "false", "unsat", "unsatisfiable", "no"):
        return False
    return None


def entry_from_record(rec: dict, baseline: str = "sharpsat") -> PoolEntry:
    runtimes = {k: _opt_float(v) for k, v in (rec.get("runtimes") or {}).items()}
    base = _opt_float(rec.get("baseline_runtime_s"))
    if base is None and baseline in runtimes:
        base = runtimes[baseline]
    return PoolEntry(id=str(rec["id"]), source_set=str(rec.get("set", "")), runtimes=runtimes,
                     baseline_runtime_s=base, satisfiable=_opt_bool(rec.get("sat")))


def load_pool(path, baseline: str = "sharpsat") -> List[PoolEntry]:
    """Line-JSON records {id, set, runtimes: {solver: s|null}, sat} or a CSV with
    columns id, set, sat, baseline_runtime_s and one ``rt_<solver>`` per solver."""
    path = str(path)
    if path.endswith(".csv"):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        records = []
        for row in rows:
            rts = {k[3:]: row[k] for k in row if k.startswith("rt_")}
            records.append({"id": row["id"], "set": row.get("set", ""), "sat": row.get("sat"),
                            "baseline_runtime_s": row.get("baseline_runtime_s"), "runtimes": rts})
    else:
        with open(path) as fh:
            records = [json.loads(line) for line in fh if line.strip()]
    return [entry_from_record(r, baseline) for r in records]


def pool_to_jsonl(pool: Iterable[PoolEntry]) -> str:
    lines = []
    for e in pool:
        lines.append(json.dumps({"id": e.id, "set": e.source_set, "runtimes": e.runtimes,
                                 "baseline_runtime_s": e.baseline_runtime_s, "sat": e.satisfiable},
                                sort_keys=True))
    return "\n".join(lines) + "\n"
