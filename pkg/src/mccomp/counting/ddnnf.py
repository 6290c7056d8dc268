"""Decision-DNNF compilation and counting-graph evaluation.

``compile_ddnnf`` records the trace of the search counter: every decision
becomes a decision node, every component split a conjunction, implied
literals become literal leaves. Free variables are left implicit and put
back by gap accounting in :func:`count_on_ddnnf`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from ..core import CnfInstance, ProblemKind, WeightMap
from ..exact import normalize
from .search import SearchEngine, SearchLimits

TRUE, FALSE, LIT, DECISION, AND = "true", "false", "lit", "decision", "and"


class DdnnfError(ValueError):
    pass


@dataclass
class DecisionDnnf:
    """Node table; children always have smaller ids than their parents."""

    nodes: List[tuple] = field(default_factory=list)
    root: int = 0
    num_vars: int = 0

    def __len__(self):
        return len(self.nodes)

    def scopes(self) -> list:
        out = []
        for i, node in enumerate(self.nodes):
            kind = node[0]
            if kind in (TRUE, FALSE):
                out.append(frozenset())
            elif kind == LIT:
                out.append(frozenset((abs(node[1]),)))
            elif kind == DECISION:
                _, v, hi, lo = node
                self._check_child(i, hi)
                self._check_child(i, lo)
                out.append(out[hi] | out[lo] | {v})
            elif kind == AND:
                acc = frozenset()
                for c in node[1]:
                    self._check_child(i, c)
                    acc |= out[c]
                out.append(acc)
            else:
                raise DdnnfError(f"node {i}: unknown kind {kind!r}")
        return out

    def _check_child(self, parent, child):
        if not isinstance(child, int) or not 0 <= child < parent:
            raise DdnnfError(f"node {parent}: child {child!r} breaks topological order")

    def check(self) -> None:
        """Raise DdnnfError unless acyclic, decomposable and deterministic."""
        if not self.nodes or not 0 <= self.root < len(self.nodes):
            raise DdnnfError("missing root")
        scopes = self.scopes()
        for i, node in enumerate(self.nodes):
            if node[0] == AND:
                seen = set()
                for c in node[1]:
                    if seen & scopes[c]:
                        raise DdnnfError(f"node {i}: conjunction children share variables")
                    seen |= scopes[c]
            elif node[0] == DECISION:
                _, v, hi, lo = node
                if v in scopes[hi] or v in scopes[lo]:
                    raise DdnnfError(f"node {i}: variable {v} tested again below its decision")

    def to_nnf(self) -> str:
        """c2d-style ``nnf v e n`` text; decisions expand to or-of-ands."""
        lines = []
        edges = 0
        ids = {}

        def emit(text, n_edges=0):
            nonlocal edges
            lines.append(text)
            edges += n_edges
            return len(lines) - 1

        for i, node in enumerate(self.nodes):
            kind = node[0]
            if kind == TRUE:
                ids[i] = emit("A 0")
            elif kind == FALSE:
                ids[i] = emit("O 0 0")
            elif kind == LIT:
                ids[i] = emit(f"L {node[1]}")
            elif kind == AND:
                kids = [ids[c] for c in node[1]]
                ids[i] = emit(f"A {len(kids)} " + " ".join(map(str, kids)), len(kids))
            else:
                _, v, hi, lo = node
                pos = emit(f"L {v}")
                neg = emit(f"L {-v}")
                a_hi = emit(f"A 2 {pos} {ids[hi]}", 2)
                a_lo = emit(f"A 2 {neg} {ids[lo]}", 2)
                ids[i] = emit(f"O {v} 2 {a_hi} {a_lo}", 2)
        # the root must be the last line
        if ids[self.root] != len(lines) - 1:
            ids[self.root] = emit(f"A 1 {ids[self.root]}", 1)
        return f"nnf {len(lines)} {edges} {self.num_vars}\n" + "\n".join(lines) + "\n"


class DdnnfBuilder:
    """Search algebra whose values are node ids of a growing DecisionDnnf."""

    def __init__(self, num_vars):
        self.d = DecisionDnnf(num_vars=num_vars)
        self._unique = {}
        self.true = self._node((TRUE,))
        self.false = self._node((FALSE,))

    def _node(self, node):
        nid = self._unique.get(node)
        if nid is None:
            nid = len(self.d.nodes)
            self.d.nodes.append(node)
            self._unique[node] = nid
        return nid

    def one(self):
        return self.true

    def zero(self):
        return self.false

    def lit(self, l):
        return self._node((LIT, l))

    def free(self, variables):
        return self.true

    def mul(self, values):
        kids = []
        for x in values:
            if x == self.false:
                return self.false
            if x != self.true:
                kids.append(x)
        if not kids:
            return self.true
        if len(kids) == 1:
            return kids[0]
        return self._node((AND, tuple(sorted(kids))))

    def decide(self, v, high, low):
        if high == self.false and low == self.false:
            return self.false
        return self._node((DECISION, v, high, low))

    def is_zero(self, x):
        return x == self.false


def compile_ddnnf(instance: CnfInstance, limits: Optional[SearchLimits] = None) -> DecisionDnnf:
    """Compile an mc/wmc instance; raises ResourceExhausted past the limits."""
    if instance.kind.projected:
        raise ValueError("Decision-DNNF compilation supports mc and wmc only")
    builder = DdnnfBuilder(instance.num_vars)
    plain = instance.with_kind(ProblemKind.MC)
    root = SearchEngine(plain, builder, limits).run()
    builder.d.root = root
    return builder.d


def count_on_ddnnf(d: DecisionDnnf, universe_size: int, weights: Optional[WeightMap] = None):
    """Evaluate the counting graph bottom-up over variables 1..universe_size."""
    d.check()
    scopes = d.scopes()
    if scopes[d.root] and max(scopes[d.root]) > universe_size:
        raise DdnnfError("graph mentions variables outside the universe")

    if weights is None:
        def lw(l):
            return 1

        def gap(variables):
            return 1 << len(variables)
    else:
        def lw(l):
            return weights.get(l)

        def gap(variables):
            out = Fraction(1)
            for v in variables:
                out *= weights.get(v) + weights.get(-v)
            return out

    values = []
    for i, node in enumerate(d.nodes):
        kind = node[0]
        if kind == TRUE:
            values.append(1)
        elif kind == FALSE:
            values.append(0)
        elif kind == LIT:
            values.append(lw(node[1]))
        elif kind == AND:
            out = 1
            for c in node[1]:
                out *= values[c]
            values.append(out)
        else:
            _, v, hi, lo = node
            rest = scopes[i] - {v}
            values.append(lw(v) * values[hi] * gap(rest - scopes[hi])
                          + lw(-v) * values[lo] * gap(rest - scopes[lo]))
    missing = set(range(1, universe_size + 1)) - scopes[d.root]
    return normalize(Fraction(values[d.root] * gap(missing)))
