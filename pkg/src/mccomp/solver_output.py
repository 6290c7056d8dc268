"""Competition solver output: ``s`` line, ``c s type``, ``c s log10-estimate`` and the
``c s SOLVERTYPE PRECISION NOTATION VALUE`` result line.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .cnf_io import Diagnostic, decode_input
from .core import CountResult, ProblemKind, Satisfiability
from .exact import (LOG10_ZERO, format_log10_fixed, format_log10_significant,
                    log10_float, normalize, parse_decimal, parse_exact)

S_TOKENS = {"SATISFIABLE", "UNSATISFIABLE", "UNKNOWN"}
SOLVER_TYPES = {"exact", "approx"}
PRECISIONS = {"arb", "single", "double", "quadruple", "half", "octuple",
              "decimal32", "decimal64", "decimal128", "binary16", "binary32",
              "binary64", "binary128", "binary256"}
NOTATIONS = {"int", "float", "prec-sci", "log10", "frac"}

# our own writer echoes rational counts exactly in this comment
FRACTION_ECHO = "exact-fraction"

_CALL_RE = re.compile(r"^c o (CALLS\(\d+\).*|stat CALL\d+ .*)$")


@dataclass
class ExactLine:
    solver_type: str
    precision: str
    notation: str
    raw: str
    value: object = None  # int | Fraction | Decimal (log10) | None

    @property
    def is_log10(self) -> bool:
        return self.notation == "log10"


@dataclass
class SolverOutputReport:
    s_line: Optional[str] = None
    type_line: Optional[ProblemKind] = None
    log10_estimate: object = None  # float | LOG10_ZERO | None
    exact_line: Optional[ExactLine] = None
    exact_fraction: Optional[Fraction] = None
    call_trace: List[str] = field(default_factory=list)

    def exact_value(self):
        """The count as an exact number when the output carries one."""
        if self.exact_fraction is not None:
            return normalize(self.exact_fraction)
        line = self.exact_line
        if line is not None and isinstance(line.value, (int, Fraction)):
            return normalize(line.value)
        return None

    def best_log10(self):
        """Highest-precision log10 available: exact value, log10 result line, estimate."""
        value = self.exact_value()
        if value is not None:
            return LOG10_ZERO if value == 0 else value
        line = self.exact_line
        if line is not None and line.is_log10 and line.value is not None:
            return line.value
        return self.log10_estimate

    @property
    def has_count(self) -> bool:
        return self.best_log10() is not None


def _parse_log10(token: str):
    low = token.lower()
    if low in ("-inf", "-infinity"):
        return LOG10_ZERO
    value = float(token)
    if math.isnan(value) or math.isinf(value):
        raise ValueError(token)
    return value


def _parse_value(notation: str, raw: str):
    if notation == "int":
        v = int(raw)
        if v < 0:
            raise ValueError("negative count")
        return v
    if notation in ("float", "prec-sci"):
        if raw.lower() in ("inf", "nan", "-inf"):
            raise ValueError(raw)
        return parse_decimal(raw)
    if notation == "frac":
        return parse_exact(raw)
    if notation == "log10":
        if raw.lower() in ("-inf", "-infinity"):
            return Fraction(0)
        d = Decimal(raw)
        if not d.is_finite():
            raise InvalidOperation(raw)
        return d
    # unknown notation: best effort
    try:
        return parse_exact(raw)
    except (ValueError, ZeroDivisionError):
        return None


def parse_solver_output(data: Union[bytes, str]) -> Tuple[SolverOutputReport, List[Diagnostic]]:
    text, diags = decode_input(data)
    report = SolverOutputReport()
    for i, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r").strip()
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] == "s":
            token = tokens[1] if len(tokens) > 1 else ""
            if token not in S_TOKENS or len(tokens) != 2:
                diags.append(Diagnostic("error", i, "S_LINE_INVALID", f"disallowed s-line {line[:60]!r}"))
            elif report.s_line is not None and report.s_line != token:
                diags.append(Diagnostic("error", i, "S_LINE_CONFLICT", f"{token} contradicts {report.s_line}"))
            else:
                report.s_line = token
            continue
        if tokens[0] != "c" or len(tokens) < 2:
            continue
        if tokens[1] == "o":
            if len(tokens) == 4 and tokens[2] == FRACTION_ECHO:
                try:
                    report.exact_fraction = parse_exact(tokens[3])
                except (ValueError, ZeroDivisionError):
                    diags.append(Diagnostic("warning", i, "BAD_FRACTION", f"unreadable fraction {tokens[3]!r}"))
            elif _CALL_RE.match(line):
                report.call_trace.append(line[4:])
            continue
        if tokens[1] != "s" or len(tokens) < 3:
            continue
        tag = tokens[2]
        if tag == "type":
            if len(tokens) < 4:
                diags.append(Diagnostic("warning", i, "BAD_TYPE", "type line without a kind"))
                continue
            try:
                kind = ProblemKind(tokens[3])
            except ValueError:
                diags.append(Diagnostic("warning", i, "BAD_TYPE", f"unknown kind {tokens[3]!r}"))
                continue
            if report.type_line is not None and report.type_line != kind:
                diags.append(Diagnostic("error", i, "TYPE_CONFLICT", f"type {kind} contradicts {report.type_line}"))
            else:
                report.type_line = kind
        elif tag == "log10-estimate":
            try:
                report.log10_estimate = _parse_log10(tokens[3])
            except (IndexError, ValueError):
                diags.append(Diagnostic("error", i, "BAD_ESTIMATE", f"unreadable estimate in {line[:60]!r}"))
        elif len(tokens) >= 6:
            stype, prec, notation, raw_value = tokens[2], tokens[3], tokens[4], tokens[5]
            for value, allowed, name in ((stype, SOLVER_TYPES, "SOLVERTYPE"),
                                         (prec, PRECISIONS, "PRECISION"),
                                         (notation, NOTATIONS, "NOTATION")):
                if value not in allowed:
                    diags.append(Diagnostic("warning", i, f"UNKNOWN_{name}", f"unknown {name} {value!r}"))
            try:
                parsed = _parse_value(notation, raw_value)
            except (ValueError, ArithmeticError):
                parsed = None
                diags.append(Diagnostic("error", i, "BAD_VALUE", f"cannot read {raw_value[:60]!r} as {notation}"))
            if report.exact_line is not None:
                diags.append(Diagnostic("warning", i, "MULTIPLE_RESULTS", "several result lines; last one kept"))
            report.exact_line = ExactLine(stype, prec, notation, raw_value, parsed)
        else:
            diags.append(Diagnostic("warning", i, "UNKNOWN_SOLUTION_LINE", f"unrecognised line {line[:60]!r}"))
    return report, diags


def write_solver_output(result: CountResult, comments=()) -> str:
    """Render a CountResult in the competition output format."""
    out = [f"c o {c}" for c in comments]
    out.append(f"s {result.satisfiable.value}")
    out.append(f"c s type {result.kind}")
    value = result.exact
    if value is not None:
        out.append(f"c s log10-estimate {format_log10_fixed(value, 15)}")
        if isinstance(value, int):
            out.append(f"c s {result.solver_type} {result.precision} int {value}")
        else:
            out.append(f"c s {result.solver_type} {result.precision} log10 {format_log10_significant(value, 30)}")
            out.append(f"c o {FRACTION_ECHO} {value.numerator}/{value.denominator}")
    elif result.log10_estimate is not None:
        est = result.log10_estimate
        out.append(f"c s log10-estimate {est if est is LOG10_ZERO else format(est, '.15g')}")
    return "\n".join(out) + "\n"


def result_from_report(report: SolverOutputReport, kind: Optional[ProblemKind] = None) -> CountResult:
    """Rebuild a CountResult from parsed output (used for round-trips)."""
    sat = Satisfiability(report.s_line) if report.s_line else Satisfiability.UNKNOWN
    exact = report.exact_value()
    est = report.log10_estimate
    if est is None and exact is not None:
        est = log10_float(exact)
    return CountResult(satisfiable=sat, kind=report.type_line or kind or ProblemKind.MC,
                       exact=exact, log10_estimate=est)
