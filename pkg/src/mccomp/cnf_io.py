"""Reader, writer, checker and repairer for the MC-2021 DIMACS-like instance format.

Supported directives::

    c r originUrl/doi descUrl/doi [generatorUrl/doi]
    p cnf n m
    c t mc|wmc|pmc|pwmc
    c p weight <lit> <w> 0
    c p show <v1> <v2> ... 0

Every problem is reported as a :class:`Diagnostic` with a 1-based line number;
the parser never raises on malformed input.
"""
from __future__ import annotations

import json
import lzma
import os
import re
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple, Union

from .core import CnfFormula, CnfInstance, ProblemKind, Provenance, WeightMap
from .exact import format_exact, parse_decimal

XZ_MAGIC = b"\xfd7zXZ\x00"
MAX_WEIGHT_PLACES = 9
# 32-bit floats top out near 3.4e38
MAX_SCI_EXPONENT = 38
MAX_INDEX = 2**31 - 1
SHOW_CHUNK = 20

_INT_RE = re.compile(r"^[+-]?\d+$")
_FRACTION_RE = re.compile(r"^\d+/\d+$")
_PLAIN_DECIMAL_RE = re.compile(r"^[+-]?\d+(?:\.(\d*))?$|^[+-]?\.(\d+)$")
_SCI_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)[eE]([+-]?\d+)$")


class FormatError(Exception):
    """Raised by the strict loaders when a file carries error diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        errors = [d for d in self.diagnostics if d.severity == "error"]
        super().__init__("; ".join(d.format() for d in errors[:3]) or "format error")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # error | warning | info
    line: int
    code: str
    message: str

    def format(self) -> str:
        return f"{self.severity}:{self.line}:{self.code}:{self.message}"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diagnostics)


def decode_input(data: Union[bytes, str]) -> Tuple[str, List[Diagnostic]]:
    """Bytes to text, transparently unpacking xz."""
    if isinstance(data, str):
        return data, []
    if data.startswith(XZ_MAGIC):
        try:
            data = lzma.decompress(data)
        except lzma.LZMAError as exc:
            return "", [Diagnostic("error", 1, "XZ_CORRUPT", f"cannot decompress xz stream: {exc}")]
    try:
        return data.decode("utf-8"), []
    except UnicodeDecodeError:
        return data.decode("latin-1"), [Diagnostic("warning", 1, "ENCODING", "input is not valid UTF-8")]


def read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def parse_weight_value(token: str) -> Tuple[Optional[Fraction], Optional[str], str]:
    """Returns (value, error_code, message). value is None on error."""
    if _FRACTION_RE.match(token):
        p, q = token.split("/")
        if int(q) == 0:
            return None, "WEIGHT_SYNTAX", f"zero denominator in {token!r}"
        return Fraction(int(p), int(q)), None, ""
    m = _PLAIN_DECIMAL_RE.match(token)
    if m:
        places = len(m.group(1) or m.group(2) or "")
        if places > MAX_WEIGHT_PLACES:
            return None, "WEIGHT_PRECISION", (
                f"weight {token!r} has {places} digits after the decimal point (max {MAX_WEIGHT_PLACES})")
        return parse_decimal(token), None, ""
    m = _SCI_RE.match(token)
    if m:
        if abs(int(m.group(1))) > MAX_SCI_EXPONENT:
            return None, "WEIGHT_RANGE", f"weight {token!r} exceeds 32-bit float range"
        return parse_decimal(token), None, ""
    if token.startswith("-") and _FRACTION_RE.match(token[1:]):
        return None, "WEIGHT_NEGATIVE", f"negative weight {token!r}"
    return None, "WEIGHT_SYNTAX", f"cannot read weight {token!r}"


class _Parser:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "" and len(self.lines) > 1:
            self.lines.pop()
        self.diags: List[Diagnostic] = []
        self.header = None  # (n, m, line)
        self.kind = None
        self.kind_line = None
        self.provenance = None
        self.weights = {}
        self.weight_lines = {}  # var -> first line mentioning it
        self.show = set()
        self.show_seen = False
        self.first_directive_line = None
        self.clauses = []
        self.clause_lines = []
        self.pending = []
        self.pending_line = None
        self.max_var = 0
        self.excess_reported = False

    def diag(self, severity, line, code, message):
        self.diags.append(Diagnostic(severity, line, code, message))

    @property
    def last_line(self) -> int:
        return max(1, len(self.lines))

    def run(self):
        for i, raw in enumerate(self.lines, 1):
            line = raw.rstrip("\r")
            tokens = line.split()
            if not tokens:
                continue
            head = tokens[0]
            if head == "c":
                self.comment(i, tokens)
            elif head.startswith("c") and not _INT_RE.match(head):
                continue  # "cc ..." style comment
            elif head == "p" or head.startswith("p"):
                self.header_line(i, tokens)
            else:
                self.clause_tokens(i, tokens)
        if self.pending:
            self.diag("error", self.pending_line, "UNTERMINATED_CLAUSE",
                      "last clause is not terminated by 0")
        if self.header is None:
            self.diag("error", self.last_line, "MISSING_HEADER", "no 'p cnf n m' line")
        else:
            n, m, line = self.header
            if len(self.clauses) < m:
                self.diag("warning", line, "FEWER_CLAUSES",
                          f"header announces {m} clauses, found {len(self.clauses)}")

    def comment(self, i, tokens):
        if len(tokens) < 2:
            return
        tag = tokens[1]
        if tag == "t":
            self.type_line(i, tokens)
        elif tag == "p":
            if self.first_directive_line is None:
                self.first_directive_line = i
            if len(tokens) >= 3 and tokens[2] == "weight":
                self.weight_line(i, tokens[3:])
            elif len(tokens) >= 3 and tokens[2] == "show":
                self.show_line(i, tokens[3:])
            else:
                self.diag("warning", i, "UNKNOWN_DIRECTIVE", f"unknown problem line {' '.join(tokens[:3])!r}")
        elif tag == "r":
            if len(tokens) < 4:
                self.diag("warning", i, "BAD_PROVENANCE", "'c r' needs originUrl/doi and descUrl/doi")
            else:
                if self.provenance is not None:
                    self.diag("warning", i, "DUPLICATE_PROVENANCE", "more than one 'c r' line; last one kept")
                self.provenance = Provenance(tokens[2], tokens[3], tokens[4] if len(tokens) > 4 else None)

    def type_line(self, i, tokens):
        if len(tokens) < 3:
            self.diag("error", i, "BAD_TYPE", "'c t' without a problem kind")
            return
        try:
            kind = ProblemKind(tokens[2])
        except ValueError:
            self.diag("error", i, "BAD_TYPE", f"unknown problem kind {tokens[2]!r}")
            return
        if self.kind is not None and kind != self.kind:
            self.diag("error", i, "CONFLICTING_TYPE", f"type {kind} contradicts earlier type {self.kind}")
            return
        if self.first_directive_line is not None and self.kind is None:
            self.diag("info", i, "TYPE_AFTER_DIRECTIVE", "'c t' follows problem specific lines")
        self.kind = kind
        self.kind_line = i

    def check_var(self, i, v, what) -> bool:
        if v > MAX_INDEX:
            self.diag("error", i, "VAR_OUT_OF_RANGE", f"{what} variable {v} is not a 32-bit index")
            return False
        self.max_var = max(self.max_var, v)
        if self.header is not None and v > self.header[0]:
            self.diag("error", i, "VAR_OUT_OF_RANGE", f"{what} variable {v} exceeds n={self.header[0]}")
            return False
        return True

    def weight_line(self, i, rest):
        if len(rest) < 2:
            self.diag("error", i, "WEIGHT_SYNTAX", "weight line needs a literal and a weight")
            return
        if not _INT_RE.match(rest[0]) or int(rest[0]) == 0:
            self.diag("error", i, "WEIGHT_SYNTAX", f"bad literal {rest[0]!r}")
            return
        lit = int(rest[0])
        value, code, msg = parse_weight_value(rest[1])
        if value is None:
            if code == "WEIGHT_SYNTAX" and rest[1].startswith("-"):
                try:
                    if parse_decimal(rest[1]) < 0:
                        code, msg = "WEIGHT_NEGATIVE", f"negative weight {rest[1]!r}"
                except ValueError:
                    pass
            self.diag("error", i, code, msg)
            return
        if value < 0:
            self.diag("error", i, "WEIGHT_NEGATIVE", f"negative weight {rest[1]!r}")
            return
        tail = rest[2:]
        if not tail:
            self.diag("info", i, "WEIGHT_NO_TERMINATOR", "weight line without trailing 0")
        elif tail != ["0"]:
            self.diag("error", i, "WEIGHT_SYNTAX", f"unexpected tokens after weight: {' '.join(tail)!r}")
            return
        if not self.check_var(i, abs(lit), "weight"):
            return
        old = self.weights.get(lit)
        if old is not None and old != value:
            self.diag("warning", i, "DUPLICATE_WEIGHT", f"literal {lit} redefined from {old} to {value}")
        self.weights[lit] = value
        self.weight_lines.setdefault(abs(lit), i)

    def show_line(self, i, rest):
        self.show_seen = True
        if not rest or rest[-1] != "0":
            self.diag("info", i, "SHOW_NO_TERMINATOR", "show line without trailing 0")
        else:
            rest = rest[:-1]
        for tok in rest:
            if not _INT_RE.match(tok) or int(tok) <= 0:
                self.diag("error", i, "SHOW_SYNTAX", f"bad show variable {tok!r}")
                continue
            v = int(tok)
            if self.check_var(i, v, "show"):
                self.show.add(v)

    def header_line(self, i, tokens):
        if tokens[0] != "p" or len(tokens) < 4 or tokens[1] != "cnf":
            self.diag("error", i, "BAD_HEADER", "expected 'p cnf n m'")
            return
        if self.header is not None:
            self.diag("error", i, "DUPLICATE_HEADER", "second 'p' line")
            return
        if not all(_INT_RE.match(t) and int(t) >= 0 for t in tokens[2:4]):
            self.diag("error", i, "BAD_HEADER", "n and m must be non-negative integers")
            return
        n, m = int(tokens[2]), int(tokens[3])
        if n > MAX_INDEX or m > MAX_INDEX:
            self.diag("error", i, "BAD_HEADER", "header numbers exceed 32-bit range")
            return
        if len(tokens) > 4:
            self.diag("info", i, "HEADER_EXTRA", f"ignored extra header token(s) {' '.join(tokens[4:])!r}")
        if self.clauses or self.pending:
            self.diag("error", i, "HEADER_AFTER_CLAUSES", "header follows clauses")
        self.header = (n, m, i)
        if self.max_var > n:
            self.diag("error", i, "VAR_OUT_OF_RANGE", f"variable {self.max_var} seen before header exceeds n={n}")

    def clause_tokens(self, i, tokens):
        if self.header is None and not self.clauses and not self.pending:
            self.diag("error", i, "CLAUSE_BEFORE_HEADER", "clause before 'p cnf' line")
        for tok in tokens:
            if not _INT_RE.match(tok):
                self.diag("error", i, "BAD_TOKEN", f"non-integer token {tok[:40]!r} in clause")
                self.pending = []
                return
            lit = int(tok)
            if lit == 0:
                self.end_clause(i)
                continue
            if not self.pending:
                self.pending_line = i
            if self.check_var(i, abs(lit), "clause"):
                self.pending.append(lit)
            else:
                self.pending.append(None)

    def end_clause(self, i):
        clause = self.pending
        start = self.pending_line if clause else i
        self.pending = []
        self.pending_line = None
        if None in clause:
            return
        if self.header is not None and len(self.clauses) >= self.header[1] and not self.excess_reported:
            self.excess_reported = True
            self.diag("error", start, "EXCESS_CLAUSES", f"more clauses than the {self.header[1]} announced")
        self.clauses.append(tuple(clause))
        self.clause_lines.append(start)

    def instance(self) -> CnfInstance:
        n = self.header[0] if self.header else self.max_var
        n = max(n, self.max_var)
        weighted = bool(self.weights)
        projected = self.show_seen
        kind = self.kind
        line = self.kind_line or (self.header[2] if self.header else self.last_line)
        if kind is None:
            kind = ProblemKind.from_features(weighted, projected)
            if kind != ProblemKind.MC:
                self.diag("info", line, "KIND_INFERRED", f"no 'c t' line; inferred {kind}")
        else:
            if weighted and not kind.weighted:
                self.diag("warning", line, "KIND_MISMATCH", f"weight lines present but type is {kind}")
            if projected and not kind.projected:
                self.diag("warning", line, "KIND_MISMATCH", f"show lines present but type is {kind}")
        weights = WeightMap(self.weights) if (self.weights or kind.weighted) else None
        if weights is not None:
            self.check_weight_sums(weights)
        projection = None
        if kind.projected or self.show_seen:
            projection = frozenset(v for v in self.show if v <= n)
        if kind.projected:
            if not projection:
                self.diag("info", line, "EMPTY_PROJECTION",
                          "no show variables: the problem reduces to deciding satisfiability")
            elif n and len(projection) == n:
                self.diag("info", line, "ALL_SHOWN", "all variables shown: equivalent to model counting")
        formula = CnfFormula(n, self.clauses)
        return CnfInstance(formula, kind, weights, projection, self.provenance)

    def check_weight_sums(self, weights: WeightMap):
        for v in sorted(self.weight_lines):
            pos, neg = weights.get(v), weights.get(-v)
            line = self.weight_lines[v]
            if pos == 1 and neg == 1:
                continue
            if pos > 1 or neg > 1:
                self.diag("warning", line, "WEIGHT_SUM", f"variable {v}: weight above 1")
            elif pos + neg != 1:
                self.diag("warning", line, "WEIGHT_SUM",
                          f"variable {v}: sum of positive and negative literal weights is {pos + neg}, not 1")


def parse_instance(data: Union[bytes, str]) -> Tuple[CnfInstance, List[Diagnostic]]:
    """Parse instance text (or bytes, optionally xz-compressed).

    Always returns an instance; check the diagnostics for errors before
    trusting it.
    """
    text, diags = decode_input(data)
    p = _Parser(text)
    p.diags.extend(diags)
    p.run()
    inst = p.instance()
    return inst, _sorted(p.diags)


def _sorted(diags):
    return sorted(diags, key=lambda d: d.line)


def validate(data: Union[bytes, str]) -> List[Diagnostic]:
    return parse_instance(data)[1]


def load_instance(path) -> CnfInstance:
    """Strict loader: raises FormatError when the file has errors."""
    inst, diags = parse_instance(read_bytes(path))
    if has_errors(diags):
        raise FormatError(diags)
    return inst


def write_instance(instance: CnfInstance) -> str:
    """Canonical text: provenance, header, type, weights, shows, clauses."""
    out = []
    if instance.provenance is not None:
        out.append("c r " + " ".join(instance.provenance.tokens()))
    f = instance.formula
    out.append(f"p cnf {f.num_vars} {f.num_clauses}")
    out.append(f"c t {instance.kind}")
    if instance.weights is not None:
        explicit = instance.weights.explicit
        for lit in sorted(explicit, key=lambda l: (abs(l), l < 0)):
            out.append(f"c p weight {lit} {format_exact(explicit[lit], MAX_WEIGHT_PLACES)} 0")
    if instance.projection:
        shown = sorted(instance.projection)
        for k in range(0, len(shown), SHOW_CHUNK):
            out.append("c p show " + " ".join(map(str, shown[k:k + SHOW_CHUNK])) + " 0")
    for clause in f.clauses:
        out.append(" ".join(map(str, clause)) + (" 0" if clause else "0"))
    return "\n".join(out) + "\n"


def save_instance(instance: CnfInstance, path) -> None:
    text = write_instance(instance)
    if str(path).endswith(".xz"):
        with lzma.open(path, "wt") as fh:
            fh.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def same_instance(a: CnfInstance, b: CnfInstance) -> bool:
    """Semantic equality: formula, kind, resolved weights with provenance, projection."""
    if a.formula != b.formula or a.kind != b.kind:
        return False
    if (a.projection or frozenset()) != (b.projection or frozenset()):
        return False
    wa, wb = a.weights or WeightMap(), b.weights or WeightMap()
    return wa == wb


# --- repair ------------------------------------------------------------------

def repair(data: Union[bytes, str]) -> Tuple[str, List[Diagnostic]]:
    """Rewrite an instance into a form that validates.

    Merges clause lines lacking a terminating 0, rebuilds a contradicting or
    missing header, adds missing weight/show terminators and corrects or
    inserts the type line from the weight/show evidence.
    """
    text, diags = decode_input(data)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    body = []  # (kind, payload, source line)
    header = None
    type_line = None
    weighted = projected = False
    pending, pending_line = [], None
    max_var = 0
    n_clauses = 0

    def note_var(v):
        nonlocal max_var
        max_var = max(max_var, v)

    for i, raw in enumerate(lines, 1):
        line = raw.rstrip("\r")
        tokens = line.split()
        if not tokens:
            body.append(("raw", line, i))
            continue
        head = tokens[0]
        if head == "c" and len(tokens) >= 3 and tokens[1] == "p" and tokens[2] in ("weight", "show"):
            if tokens[2] == "weight":
                weighted = True
                if len(tokens) == 5:
                    diags.append(Diagnostic("info", i, "WEIGHT_NO_TERMINATOR", "added trailing 0"))
                    tokens = tokens + ["0"]
                if len(tokens) >= 4 and _INT_RE.match(tokens[3]):
                    note_var(abs(int(tokens[3])))
            else:
                projected = True
                if tokens[-1] != "0":
                    diags.append(Diagnostic("info", i, "SHOW_NO_TERMINATOR", "added trailing 0"))
                    tokens = tokens + ["0"]
                for t in tokens[3:]:
                    if _INT_RE.match(t):
                        note_var(abs(int(t)))
            body.append(("raw", " ".join(tokens), i))
        elif head == "c" and len(tokens) >= 2 and tokens[1] == "t":
            if type_line is None:
                type_line = (tokens[2] if len(tokens) > 2 else "", i)
                body.append(("type", None, i))
            else:
                diags.append(Diagnostic("info", i, "DUPLICATE_TYPE", "dropped repeated 'c t' line"))
        elif head.startswith("c") and not _INT_RE.match(head):
            body.append(("raw", line, i))
        elif head.startswith("p"):
            if header is None and len(tokens) >= 4 and tokens[1] == "cnf" \
                    and all(_INT_RE.match(t) for t in tokens[2:4]):
                header = (int(tokens[2]), int(tokens[3]), i, len(tokens) > 4)
                body.append(("header", None, i))
            else:
                diags.append(Diagnostic("warning", i, "BAD_HEADER", "dropped unusable or repeated 'p' line"))
        else:
            bad = [t for t in tokens if not _INT_RE.match(t)]
            if bad:
                diags.append(Diagnostic("error", i, "IRRECOVERABLE",
                                        f"non-integer clause token {bad[0][:40]!r}"))
                body.append(("raw", line, i))
                continue
            for t in tokens:
                lit = int(t)
                if lit == 0:
                    if pending_line is not None and pending_line != i:
                        diags.append(Diagnostic("info", pending_line, "MERGED_LINES",
                                                f"clause spanning lines {pending_line}-{i} merged"))
                    body.append(("clause", tuple(pending), pending_line or i))
                    n_clauses += 1
                    pending, pending_line = [], None
                else:
                    if pending_line is None:
                        pending_line = i
                    pending.append(lit)
                    note_var(abs(lit))
    if pending:
        diags.append(Diagnostic("warning", pending_line, "UNTERMINATED_CLAUSE",
                                "terminated the final clause with 0"))
        body.append(("clause", tuple(pending), pending_line))
        n_clauses += 1

    evidence = ProblemKind.from_features(weighted, projected)
    if type_line is None:
        kind = evidence
        where = header[2] if header else 1
        diags.append(Diagnostic("info", where, "TYPE_INSERTED", f"inserted 'c t {kind}'"))
    else:
        token, where = type_line
        try:
            declared = ProblemKind(token)
        except ValueError:
            declared = None
        if declared is None:
            kind = evidence
            diags.append(Diagnostic("warning", where, "TYPE_CORRECTED", f"unknown type {token!r} replaced by {kind}"))
        else:
            kind = ProblemKind.from_features(declared.weighted or weighted, declared.projected or projected)
            if kind != declared:
                diags.append(Diagnostic("warning", where, "TYPE_CORRECTED",
                                        f"type {declared} contradicts weight/show lines; now {kind}"))

    if header is None:
        n, m = max_var, n_clauses
        diags.append(Diagnostic("info", 1, "HEADER_INSERTED", f"inserted 'p cnf {n} {m}'"))
    else:
        n, m, where, extra = header
        new_n = max(n, max_var)
        if (new_n, n_clauses) != (n, m):
            diags.append(Diagnostic("info", where, "HEADER_REBUILT",
                                    f"header 'p cnf {n} {m}' rewritten as 'p cnf {new_n} {n_clauses}'"))
        elif extra:
            diags.append(Diagnostic("info", where, "HEADER_EXTRA", "dropped extra header tokens"))
        n, m = new_n, n_clauses

    out = []
    emitted_header = False

    def emit_header():
        nonlocal emitted_header
        out.append(f"p cnf {n} {m}")
        out.append(f"c t {kind}")
        emitted_header = True

    for what, payload, _ in body:
        if what in ("header", "type"):
            if not emitted_header:
                emit_header()
        elif what == "clause":
            if not emitted_header:
                emit_header()
            out.append(" ".join(map(str, payload)) + (" 0" if payload else "0"))
        else:
            is_directive = payload.startswith("c p ")
            if is_directive and not emitted_header:
                emit_header()
            out.append(payload)
    if not emitted_header:
        emit_header()
    return "\n".join(out) + "\n", _sorted(diags)


def write_diagnostics(diags: Iterable[Diagnostic], path=None, stream=None) -> None:
    """Write diagnostics as JSON lines to a file and/or text lines to a stream."""
    diags = list(diags)
    if stream is not None:
        for d in diags:
            print(d.format(), file=stream)
    if path is not None:
        with open(path, "w") as fh:
            for d in diags:
                fh.write(d.to_json() + "\n")


def instance_name(path) -> str:
    name = os.path.basename(str(path))
    for suffix in (".xz", ".cnf", ".dimacs"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return name
