"""Weighted and projected instance generators built on top of mc instances.

All randomness comes from ``random.Random(seed)`` (Mersenne Twister), so the
output depends only on the input instance and the config.
"""
from __future__ import annotations

import json
import os
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .cnf_io import instance_name, load_instance, save_instance
from .core import CnfInstance, ProblemKind, WeightMap
from .counting import ResourceExhausted, SearchLimits, compile_ddnnf, count_on_ddnnf
from .exact import LOG10_ZERO, log10_float


@dataclass
class GeneratorConfig:
    seed: int = 0
    weight_digits: int = 3
    projection_ratio: Fraction = Fraction(1, 2)
    target_log10_band: Tuple[float, float] = (-6.0, -0.3)
    max_resample: int = 50
    # compilation budget before falling back to purely random weights
    max_decisions: Optional[int] = 200_000

    def __post_init__(self):
        self.projection_ratio = Fraction(self.projection_ratio)
        if not 1 <= self.weight_digits <= 9:
            raise ValueError("weight_digits must be within 1..9")
        if not 0 < self.projection_ratio <= 1:
            raise ValueError("projection_ratio must be in (0, 1]")
        lo, hi = self.target_log10_band
        if not lo < hi:
            raise ValueError("target band lower bound must be below the upper bound")
        if self.max_resample < 1:
            raise ValueError("max_resample must be positive")


@dataclass
class GenerationReport:
    generator: str
    seed: int
    attempts: int = 0
    log10_wmc: Optional[float] = None
    in_band: Optional[bool] = None
    fallback: bool = False
    warnings: List[str] = field(default_factory=list)


def _draw_weight(rng: random.Random, digits: int) -> Fraction:
    scale = 10**digits
    return Fraction(rng.randint(1, scale - 1), scale)


def _pairs_to_map(pos: dict) -> WeightMap:
    explicit = {}
    for v, w in pos.items():
        explicit[v] = w
        explicit[-v] = 1 - w
    return WeightMap(explicit)


def gen_weights_random(instance: CnfInstance, cfg: GeneratorConfig) -> CnfInstance:
    """Uniform weights k/10^d (0 < k < 10^d) per variable, complement 1 - w."""
    if instance.kind != ProblemKind.MC:
        raise ValueError(f"expected an mc instance, got {instance.kind}")
    rng = random.Random(cfg.seed)
    pos = {v: _draw_weight(rng, cfg.weight_digits) for v in range(1, instance.num_vars + 1)}
    return instance.with_kind(ProblemKind.WMC, weights=_pairs_to_map(pos), projection=None)


def gen_projection(instance: CnfInstance, cfg: GeneratorConfig) -> CnfInstance:
    """Each variable joins the projection set with probability projection_ratio."""
    if instance.kind not in (ProblemKind.MC, ProblemKind.WMC):
        raise ValueError(f"expected an mc or wmc instance, got {instance.kind}")
    rng = random.Random(cfg.seed)
    n = instance.num_vars
    ratio = cfg.projection_ratio
    chosen = set()
    for v in range(1, n + 1):
        # exact comparison against the ratio on a 2^53 grid
        if Fraction(rng.getrandbits(53), 2**53) < ratio:
            chosen.add(v)
    if not chosen and n:
        chosen.add(rng.randint(1, n))
    kind = ProblemKind.PWMC if instance.kind == ProblemKind.WMC else ProblemKind.PMC
    return instance.with_kind(kind, projection=frozenset(chosen))


def _marginals(d, n) -> dict:
    """Fraction of models with each variable true, read off the counting graph."""
    total = count_on_ddnnf(d, n)
    out = {}
    for v in range(1, n + 1):
        forced = WeightMap({v: Fraction(1), -v: Fraction(0)})
        out[v] = Fraction(count_on_ddnnf(d, n, forced)) / total
    return out


def gen_weights_via_counting_graph(instance: CnfInstance, cfg: GeneratorConfig
                                   ) -> Tuple[CnfInstance, GenerationReport]:
    """Guess normalised weights on the counting graph until log10(wmc) is in band.

    Each resample blends a fresh uniform draw with the per-variable model
    marginals; the blend leans further towards the marginals while the count
    is too small and back towards uniform while it is too large.
    """
    report = GenerationReport("counting-graph", cfg.seed)
    if instance.kind != ProblemKind.MC:
        raise ValueError(f"expected an mc instance, got {instance.kind}")
    n = instance.num_vars
    try:
        d = compile_ddnnf(instance, SearchLimits(max_decisions=cfg.max_decisions))
    except ResourceExhausted as exc:
        report.fallback = True
        report.warnings.append(f"no counting graph ({exc}); weights drawn at random")
        return gen_weights_random(instance, cfg), report

    if count_on_ddnnf(d, n) == 0:
        report.fallback = True
        report.warnings.append("unsatisfiable instance: weighted count is 0 for any weights")
        return gen_weights_random(instance, cfg), report

    rng = random.Random(cfg.seed)
    lo, hi = cfg.target_log10_band
    scale = 10**cfg.weight_digits
    smallest = Fraction(1, scale)
    marg = _marginals(d, n)
    blend = Fraction(0)
    step = Fraction(1, max(2, cfg.max_resample // 2))
    weights = None
    for attempt in range(1, cfg.max_resample + 1):
        pos = {}
        for v in range(1, n + 1):
            u = _draw_weight(rng, cfg.weight_digits)
            w = (1 - blend) * u + blend * marg[v]
            w = Fraction(round(w * scale), scale)
            pos[v] = min(max(w, smallest), 1 - smallest)
        weights = _pairs_to_map(pos)
        value = count_on_ddnnf(d, n, weights)
        lg = log10_float(value)
        report.attempts = attempt
        report.log10_wmc = None if lg is LOG10_ZERO else lg
        if lg is not LOG10_ZERO and lo <= lg <= hi:
            report.in_band = True
            break
        if lg is LOG10_ZERO or lg < lo:
            blend = min(Fraction(1), blend + step)
        else:
            blend = max(Fraction(0), blend - step)
    else:
        report.in_band = False
        report.warnings.append(
            f"log10 wmc {report.log10_wmc} outside [{lo}, {hi}] after {cfg.max_resample} draws; kept last draw")
    return instance.with_kind(ProblemKind.WMC, weights=weights, projection=None), report


def generate_directory(src_dir, dst_dir, generator: str, cfg: GeneratorConfig,
                       manifest_name: str = "manifest.jsonl") -> List[dict]:
    """Batch mode: every instance file in src_dir to dst_dir, plus a manifest."""
    os.makedirs(dst_dir, exist_ok=True)
    rows = []
    names = sorted(f for f in os.listdir(src_dir) if not f.startswith("."))
    for name in names:
        path = os.path.join(src_dir, name)
        if not os.path.isfile(path):
            continue
        inst = load_instance(path)
        report = GenerationReport(generator, cfg.seed)
        if generator == "random":
            out = gen_weights_random(inst, cfg)
        elif generator == "projection":
            out = gen_projection(inst, cfg)
        elif generator == "counting-graph":
            out, report = gen_weights_via_counting_graph(inst, cfg)
        else:
            raise ValueError(f"unknown generator {generator!r}")
        target = os.path.join(dst_dir, instance_name(name) + ".cnf")
        save_instance(out, target)
        row = {"instance": instance_name(name), **asdict(report)}
        rows.append(row)
    with open(os.path.join(dst_dir, manifest_name), "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return rows

