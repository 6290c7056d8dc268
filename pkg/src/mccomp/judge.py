"""Scoring and ranking of solver runs.

Acceptance decisions are made in exact arithmetic whenever the observed count
is exact; log10 observations are compared with 60-digit decimals. Floats are
only used for the reported error column.
"""
from __future__ import annotations

import csv
import decimal
import enum
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from decimal import Decimal
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional

from .exact import LOG10_ZERO, ExactNumber, log10_decimal, log10_float, normalize, parse_exact
from .solver_output import SolverOutputReport


def as_fraction(x) -> Fraction:
    """Rational from int/Fraction/Decimal/str; floats go through their repr (0.001 -> 1/1000)."""
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return parse_exact(x)
    return Fraction(x)


class Mode(str, enum.Enum):
    A = "A"  # exact, arbitrary precision
    B = "B"  # exact, small precision loss
    C = "C"  # approximate
    D = "D"  # heuristic
    UNIFORM2021 = "uniform2021"

    def __str__(self):
        return self.value


TRACK_EPS_2021 = {
    "mc": Fraction(1, 1000),
    "wmc": Fraction(1, 100),
    "pmc": Fraction(1, 100),
    "mc-hard": Fraction(1, 5),
}


@dataclass(frozen=True)
class RankingConfig:
    mode: Mode
    eps_max: Optional[Fraction] = None
    alpha: Optional[Fraction] = None
    w_max: Optional[int] = None
    track: Optional[str] = None

    @classmethod
    def for_mode(cls, mode, track: str = "mc") -> "RankingConfig":
        mode = Mode(mode)
        if mode == Mode.A:
            return cls(mode, eps_max=Fraction(0), w_max=0)
        if mode == Mode.B:
            return cls(mode, eps_max=Fraction(1, 1000), w_max=20)
        if mode == Mode.C:
            return cls(mode, alpha=Fraction(4, 5), w_max=20)
        if mode == Mode.D:
            return cls(mode, eps_max=Fraction(1, 1000), w_max=None)
        return cls(mode, eps_max=TRACK_EPS_2021[track], w_max=20, track=track)

    def demoted(self) -> Optional["RankingConfig"]:
        nxt = {Mode.A: Mode.B, Mode.B: Mode.C}.get(self.mode)
        return RankingConfig.for_mode(nxt) if nxt else None


@dataclass(frozen=True)
class ExpectedCount:
    value: Optional[ExactNumber] = None

    @property
    def unknown(self) -> bool:
        return self.value is None

    def __str__(self):
        return "unk" if self.value is None else str(self.value)

    @classmethod
    def parse(cls, text: str) -> "ExpectedCount":
        text = str(text).strip()
        if text.lower() in ("unk", "unknown", ""):
            return cls(None)
        return cls(normalize(parse_exact(text)))


UNKNOWN = ExpectedCount(None)


class VerdictKind(str, enum.Enum):
    ACCEPTED = "accepted"
    APPROX_ACCEPTED = "approx_accepted"
    WRONG = "wrong"
    UNKNOWN_CLAIMED = "unknown_claimed"
    NO_ANSWER = "no_answer"
    TIMEOUT = "timeout"
    MEMOUT = "memout"
    CRASH = "crash"

    def __str__(self):
        return self.value


# Case (a): no count; such runs never score and never count as wrong
NO_COUNT = {VerdictKind.NO_ANSWER, VerdictKind.TIMEOUT, VerdictKind.MEMOUT, VerdictKind.CRASH}
SCORING = {VerdictKind.ACCEPTED, VerdictKind.APPROX_ACCEPTED, VerdictKind.UNKNOWN_CLAIMED}


@dataclass(frozen=True)
class Observation:
    """What a solver reported: an exact count, or a log10 value."""

    exact: Optional[ExactNumber] = None
    log10: object = None  # Decimal | float | LOG10_ZERO
    log10_places: Optional[int] = None
    low_precision: bool = False

    def log10_value(self):
        if self.exact is not None:
            return LOG10_ZERO if self.exact == 0 else log10_decimal(self.exact)
        return self.log10

    def as_float_log10(self) -> Optional[float]:
        v = self.log10_value()
        if v is None or v is LOG10_ZERO:
            return None
        return float(v)


def _places(text: str) -> int:
    text = text.lower().split("e")[0]
    return len(text.split(".")[1]) if "." in text else 0


def observation_from_report(report: SolverOutputReport) -> Optional[Observation]:
    """Highest-precision count in the output, or None when there is none."""
    if report.s_line == "UNKNOWN":
        return None
    exact = report.exact_value()
    if exact is not None:
        return Observation(exact=exact)
    line = report.exact_line
    if line is not None and line.is_log10 and isinstance(line.value, Decimal):
        return Observation(log10=line.value, log10_places=_places(line.raw))
    est = report.log10_estimate
    if est is not None:
        if est is LOG10_ZERO:
            return Observation(exact=0, low_precision=True)
        return Observation(log10=est, low_precision=True)
    if report.s_line == "UNSATISFIABLE":
        return Observation(exact=0)
    return None


# --- metric ------------------------------------------------------------------

def _positive(x) -> bool:
    return x is not None and x > 0


def rlpd(c_e, c_o) -> float:
    """10^(log10 c_o - log10 c_e), evaluated in log space (no overflow on huge ints)."""
    if not (_positive(c_e) and _positive(c_o)):
        raise ValueError("RLPD needs two positive counts")
    diff = log10_float(normalize(as_fraction(c_o))) - log10_float(normalize(as_fraction(c_e)))
    return 10.0**diff


def error(c_e, c_o) -> float:
    """|1 - RLPD(c_e, c_o)|, with 0 for two zeros and 1 when exactly one is zero."""
    if c_e == 0 and c_o == 0:
        return 0.0
    if c_e == 0 or c_o == 0:
        return 1.0
    return abs(1.0 - rlpd(c_e, c_o))


def exact_error(c_e, c_o) -> Fraction:
    c_e, c_o = as_fraction(c_e), as_fraction(c_o)
    if c_e == 0 and c_o == 0:
        return Fraction(0)
    if c_e == 0 or c_o == 0:
        return Fraction(1)
    return abs(c_o - c_e) / c_e


def is_accepted(c_e, c_o, eps_max) -> bool:
    eps_max = as_fraction(eps_max)
    if eps_max == 0:
        return as_fraction(c_e) == as_fraction(c_o)
    return exact_error(c_e, c_o) <= eps_max


def is_approx_accepted(c_e, c_o, alpha) -> bool:
    c_e, c_o, alpha = as_fraction(c_e), as_fraction(c_o), as_fraction(alpha)
    return c_e / (1 + alpha) <= c_o <= (1 + alpha) * c_e


def _log_error(c_e: ExactNumber, obs_log10) -> Fraction:
    """|1 - 10^(obs - log10 c_e)| from a log10 observation, 60-digit decimals."""
    if c_e == 0:
        return Fraction(0) if obs_log10 is LOG10_ZERO else Fraction(1)
    if obs_log10 is LOG10_ZERO:
        return Fraction(1)
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        diff = Decimal(obs_log10) - log10_decimal(c_e)
        ratio = Decimal(10) ** diff
        return abs(1 - Fraction(ratio))


def _observation_accepted(obs: Observation, c_e: ExactNumber, cfg: RankingConfig) -> bool:
    if cfg.mode == Mode.C:
        if obs.exact is not None:
            return is_approx_accepted(c_e, obs.exact, cfg.alpha) if c_e != 0 else obs.exact == 0
        lg = obs.log10_value()
        if c_e == 0 or lg is LOG10_ZERO:
            return c_e == 0 and lg is LOG10_ZERO
        with decimal.localcontext() as ctx:
            ctx.prec = 60
            gap = abs(Decimal(lg) - log10_decimal(c_e))
            return gap <= log10_decimal(1 + cfg.alpha)
    eps = cfg.eps_max
    if obs.exact is not None:
        return is_accepted(c_e, obs.exact, eps)
    if eps == 0:
        # log10 evidence is exact only to the digits printed
        if obs.log10_places is None or c_e == 0:
            return False
        expected = log10_decimal(c_e).quantize(Decimal(1).scaleb(-obs.log10_places),
                                               rounding=decimal.ROUND_HALF_EVEN)
        return Decimal(obs.log10) == expected
    return _log_error(c_e, obs.log10) <= eps


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    observation: Optional[Observation] = None
    expected: ExpectedCount = UNKNOWN
    error: Optional[float] = None
    solver: str = ""
    instance: str = ""
    wall_time_s: Optional[float] = None
    notes: tuple = ()

    @property
    def observed_log10(self) -> Optional[float]:
        return self.observation.as_float_log10() if self.observation else None

    @property
    def expected_log10(self) -> Optional[float]:
        v = self.expected.value
        if v is None or v == 0:
            return None
        return log10_float(v)


def _reported_error(obs: Observation, c_e) -> Optional[float]:
    if c_e is None:
        return None
    if obs.exact is not None:
        return error(c_e, obs.exact)
    return float(_log_error(c_e, obs.log10))


def judge_observation(obs: Optional[Observation], expected: ExpectedCount, cfg: RankingConfig,
                      exit_kind: Optional[VerdictKind] = None, **meta) -> Verdict:
    if exit_kind is not None and exit_kind in NO_COUNT:
        return Verdict(exit_kind, obs, expected, **meta)
    if obs is None:
        return Verdict(VerdictKind.NO_ANSWER, None, expected, **meta)
    notes = ("low-precision evidence",) if obs.low_precision else ()
    if expected.unknown:
        return Verdict(VerdictKind.UNKNOWN_CLAIMED, obs, expected, notes=notes, **meta)
    c_e = expected.value
    err = _reported_error(obs, c_e)
    if _observation_accepted(obs, c_e, cfg):
        kind = VerdictKind.APPROX_ACCEPTED if cfg.mode == Mode.C else VerdictKind.ACCEPTED
    else:
        kind = VerdictKind.WRONG
    return Verdict(kind, obs, expected, err, notes=notes, **meta)


def judge_run(report: Optional[SolverOutputReport], expected: ExpectedCount, cfg: RankingConfig,
              exit_kind: Optional[VerdictKind] = None, **meta) -> Verdict:
    """Judge one solver output against the expected count under a ranking."""
    obs = observation_from_report(report) if report is not None else None
    return judge_observation(obs, expected, cfg, exit_kind, **meta)


def rejudge(v: Verdict, cfg: RankingConfig) -> Verdict:
    if v.kind in NO_COUNT:
        return v
    meta = dict(solver=v.solver, instance=v.instance, wall_time_s=v.wall_time_s)
    return judge_observation(v.observation, v.expected, cfg, **meta)


# --- standings ---------------------------------------------------------------

@dataclass
class Standing:
    solver: str
    mode: Mode
    score: int
    place: Optional[int] = None
    wrong_count: int = 0
    demoted_from: Optional[Mode] = None
    disqualified: bool = False
    ranked: bool = True
    verdicts: Dict[str, Verdict] = field(default_factory=dict, repr=False)


def assign_places(scores: List[int]) -> List[int]:
    """Equal scores share a place; the following place(s) stay vacant."""
    return [1 + sum(1 for other in scores if other > s) for s in scores]


def score_and_rank(table: Mapping[str, Mapping[str, Verdict]], configs: Mapping[str, RankingConfig],
                   instances: Optional[Iterable[str]] = None) -> List[Standing]:
    """Score each solver, apply demotion/removal, then place within each ranking.

    ``table`` maps solver -> instance -> Verdict (any mode; verdicts are
    re-judged under the solver's effective ranking). ``instances`` restricts
    scoring, e.g. to the private half.
    """
    keep = set(instances) if instances is not None else None
    standings = []
    for solver in sorted(table):
        cfg = configs[solver]
        if not isinstance(cfg, RankingConfig):
            cfg = RankingConfig.for_mode(cfg)
        rows = {i: v for i, v in table[solver].items() if keep is None or i in keep}
        first_mode = cfg.mode
        standing = None
        while True:
            judged = {i: rejudge(v, cfg) for i, v in rows.items()}
            tally = Counter(v.kind for v in judged.values())
            wrong = tally[VerdictKind.WRONG]
            score = sum(tally[k] for k in SCORING)
            standing = Standing(solver, cfg.mode, score, wrong_count=wrong, verdicts=judged,
                                demoted_from=first_mode if cfg.mode != first_mode else None)
            if cfg.w_max is None or wrong <= cfg.w_max:
                break
            if cfg.mode == Mode.UNIFORM2021:
                standing.disqualified = True
                standing.ranked = False
                break
            nxt = cfg.demoted()
            if nxt is None:
                standing.ranked = False
                break
            cfg = nxt
        standings.append(standing)

    by_mode: Dict[Mode, List[Standing]] = {}
    for s in standings:
        if s.ranked:
            by_mode.setdefault(s.mode, []).append(s)
    for group in by_mode.values():
        for s, place in zip(group, assign_places([s.score for s in group])):
            s.place = place
    order = [m for m in Mode]
    standings.sort(key=lambda s: (order.index(s.mode), not s.ranked, s.place or 0, -s.score, s.solver))
    return standings


# --- expected counts and cross-checking --------------------------------------

@dataclass
class CrossCheck:
    instance: str
    expected: ExpectedCount
    agreeing: List[str]
    disagreeing: List[str]


def cross_validate(instance: str, reports: Mapping[str, SolverOutputReport]) -> CrossCheck:
    """Expected count from several exact solvers: the value a strict majority agrees on.

    Agreement is a necessary condition only; disagreements are listed for
    manual inspection.
    """
    values = {}
    for solver, report in reports.items():
        obs = observation_from_report(report)
        if obs is not None and obs.exact is not None and not obs.low_precision:
            values[solver] = as_fraction(obs.exact)
    if not values:
        return CrossCheck(instance, UNKNOWN, [], sorted(reports))
    tally = Counter(values.values())
    best, hits = tally.most_common(1)[0]
    if hits * 2 <= len(values):
        return CrossCheck(instance, UNKNOWN, [], sorted(values))
    agree = sorted(s for s, v in values.items() if v == best)
    disagree = sorted(s for s, v in values.items() if v != best)
    return CrossCheck(instance, ExpectedCount(normalize(best)), agree, disagree)


def unknown_claims_report(table: Mapping[str, Mapping[str, Verdict]]) -> List[dict]:
    """For instances without an expected count: which solvers agree on a value."""
    claims: Dict[str, Dict[str, object]] = {}
    for solver, rows in table.items():
        for inst, v in rows.items():
            if v.kind == VerdictKind.UNKNOWN_CLAIMED and v.observation is not None:
                key = v.observation.exact if v.observation.exact is not None else v.observed_log10
                claims.setdefault(inst, {})[solver] = key
    out = []
    for inst in sorted(claims):
        tally = Counter(str(x) for x in claims[inst].values())
        top, hits = tally.most_common(1)[0]
        out.append({"instance": inst, "solvers": sorted(claims[inst]), "majority_value": top,
                    "majority_size": hits, "unanimous": hits == len(claims[inst])})
    return out


def load_expected(path) -> Dict[str, ExpectedCount]:
    """Line-JSON {"instance": ..., "expected": "22" | "47/100000" | "unk"}."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                out[rec["instance"]] = ExpectedCount.parse(str(rec["expected"]))
    return out


def save_expected(expected: Mapping[str, ExpectedCount], path) -> None:
    with open(path, "w") as fh:
        for inst in sorted(expected):
            fh.write(json.dumps({"instance": inst, "expected": str(expected[inst])}) + "\n")


# --- exports -----------------------------------------------------------------

VERDICT_COLUMNS = ["solver", "instance", "verdict", "wall_time_s", "observed_log10", "expected_log10", "error"]


def verdict_rows(table: Mapping[str, Mapping[str, Verdict]]) -> List[dict]:
    rows = []
    for solver in sorted(table):
        for inst in sorted(table[solver]):
            v = table[solver][inst]
            rows.append({
                "solver": solver, "instance": inst, "verdict": v.kind.value,
                "wall_time_s": v.wall_time_s, "observed_log10": v.observed_log10,
                "expected_log10": v.expected_log10, "error": v.error,
            })
    return rows


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def verdicts_to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VERDICT_COLUMNS)
    for row in verdict_rows(table):
        w.writerow([_cell(row[c]) for c in VERDICT_COLUMNS])
    return buf.getvalue()


def verdicts_to_jsonl(table) -> str:
    return "".join(json.dumps(row, sort_keys=True) + "\n" for row in verdict_rows(table))


_MODE_TITLES = {
    Mode.A: "Ranking A: exact (arbitrary precision)",
    Mode.B: "Ranking B: exact (small precision loss)",
    Mode.C: "Ranking C: approximate",
    Mode.D: "Ranking D: heuristic",
    Mode.UNIFORM2021: "Uniform ranking (2021)",
}


def standings_to_markdown(standings: List[Standing]) -> str:
    """One table per ranking: place, solver, solved, wrong, notes."""
    out = []
    for mode in Mode:
        group = [s for s in standings if s.mode == mode]
        if not group:
            continue
        out.append(f"### {_MODE_TITLES[mode]}\n")
        out.append("| Place | Solver | Solved | Wrong | Notes |")
        out.append("|------:|--------|-------:|------:|-------|")
        for s in group:
            notes = []
            if s.demoted_from is not None:
                notes.append(f"demoted from {s.demoted_from}")
            if s.disqualified:
                notes.append("disqualified")
            elif not s.ranked:
                notes.append("removed from ranking")
            place = str(s.place) if s.place is not None else "-"
            out.append(f"| {place} | {s.solver} | {s.score} | {s.wrong_count} | {'; '.join(notes)} |")
        out.append("")
    return "\n".join(out)


def standings_to_json(standings: List[Standing]) -> List[dict]:
    return [{"solver": s.solver, "mode": s.mode.value, "score": s.score, "place": s.place,
             "wrong_count": s.wrong_count, "ranked": s.ranked, "disqualified": s.disqualified,
             "demoted_from": s.demoted_from.value if s.demoted_from else None} for s in standings]


def with_meta(v: Verdict, **meta) -> Verdict:
    return replace(v, **meta)
