"""Run external counters on instances under wall-clock and memory limits,
store every run, judge the outputs and export standings/CDF data.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import shlex
import shutil
import signal
import subprocess
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import psutil
import yaml

from .judge import (SCORING, ExpectedCount, RankingConfig, Verdict, VerdictKind, judge_run,
                    load_expected, UNKNOWN)
from .solver_output import parse_solver_output

log = logging.getLogger(__name__)

GiB = 2**30
# exit codes that mean "finished normally" (SAT-solver convention 10/20 included)
OK_EXIT_CODES = {0, 10, 20}


@dataclass
class SolverSpec:
    id: str
    command: str
    declared_mode: str = "A"
    env: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.command.count("{instance}") != 1:
            raise ValueError(f"solver {self.id}: command must reference {{instance}} exactly once")

    def argv(self, instance: str, tmpdir: str) -> List[str]:
        cmd = self.command.format(instance=shlex.quote(instance), tmpdir=shlex.quote(tmpdir))
        return shlex.split(cmd)


@dataclass
class Limits:
    wall_s: float = 3600.0
    mem_bytes: int = 32 * GiB
    tmp_quota_bytes: Optional[int] = None
    grace_s: float = 5.0
    stdout_cap: int = 64 * 2**20
    stderr_cap: int = 2**20
    poll_s: float = 0.05

    def __post_init__(self):
        if self.wall_s <= 0 or self.mem_bytes <= 0:
            raise ValueError("limits must be positive")


@dataclass
class RunRecord:
    solver: str
    instance: str
    wall_time_s: float
    peak_mem_bytes: int
    exit: str  # ok | timeout | memout | crash
    exit_code: Optional[int] = None
    signal: Optional[int] = None
    stdout: str = ""
    stderr: str = ""
    stdout_truncated: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))

    @property
    def exit_kind(self) -> Optional[VerdictKind]:
        return {"timeout": VerdictKind.TIMEOUT, "memout": VerdictKind.MEMOUT,
                "crash": VerdictKind.CRASH}.get(self.exit)


def _tree_rss(proc: psutil.Process) -> int:
    total = 0
    try:
        procs = [proc] + proc.children(recursive=True)
    except psutil.Error:
        return 0
    for p in procs:
        try:
            total += p.memory_info().rss
        except psutil.Error:
            pass
    return total


def _dir_size(path: str) -> int:
    total = 0
    for root, _, files in os.walk(path):
        for f in files:
            try:
                total += os.lstat(os.path.join(root, f)).st_size
            except OSError:
                pass
    return total


def _kill_tree(popen: subprocess.Popen, grace_s: float) -> None:
    try:
        pgid = os.getpgid(popen.pid)
    except ProcessLookupError:
        return
    for sig, wait in ((signal.SIGTERM, grace_s), (signal.SIGKILL, None)):
        try:
            os.killpg(pgid, sig)
        except ProcessLookupError:
            return
        try:
            popen.wait(timeout=wait)
            if sig == signal.SIGTERM:
                # leftover group members
                try:
                    os.killpg(pgid, signal.SIGKILL)
                except ProcessLookupError:
                    pass
            return
        except subprocess.TimeoutExpired:
            continue


def _read_capped(fh, cap: int) -> Tuple[str, bool]:
    fh.seek(0, os.SEEK_END)
    size = fh.tell()
    fh.seek(0)
    data = fh.read(cap)
    return data.decode("utf-8", errors="replace"), size > cap


def run_solver(spec: SolverSpec, instance_path: str, limits: Limits,
               instance_id: Optional[str] = None) -> RunRecord:
    """Run one solver on one instance in its own process group and temp dir."""
    instance_id = instance_id or os.path.basename(instance_path)
    tmpdir = tempfile.mkdtemp(prefix=f"mccomp-{spec.id}-")
    env = dict(os.environ)
    env.update(spec.env)
    env["TMPDIR"] = tmpdir
    out_fh = tempfile.TemporaryFile()
    err_fh = tempfile.TemporaryFile()
    start = time.monotonic()
    try:
        try:
            popen = subprocess.Popen(spec.argv(instance_path, tmpdir), stdout=out_fh, stderr=err_fh,
                                     stdin=subprocess.DEVNULL, cwd=tmpdir, env=env, start_new_session=True)
        except (OSError, ValueError) as exc:
            return RunRecord(spec.id, instance_id, 0.0, 0, "crash", stderr=f"spawn failed: {exc}")
        try:
            ps = psutil.Process(popen.pid)
        except psutil.Error:
            ps = None
        peak = 0
        status = None
        while True:
            if popen.poll() is not None:
                break
            elapsed = time.monotonic() - start
            if ps is not None:
                peak = max(peak, _tree_rss(ps))
            if peak > limits.mem_bytes:
                status = "memout"
            elif elapsed >= limits.wall_s:
                status = "timeout"
            elif limits.tmp_quota_bytes is not None and _dir_size(tmpdir) > limits.tmp_quota_bytes:
                status = "crash"
            if status is not None:
                _kill_tree(popen, limits.grace_s)
                break
            time.sleep(limits.poll_s)
        wall = time.monotonic() - start
        if status == "timeout":
            wall = max(wall, limits.wall_s)
        code = popen.returncode
        sig = None
        if status is None:
            if code is not None and code < 0:
                status, sig = "crash", -code
            elif code in OK_EXIT_CODES:
                status = "ok"
            else:
                status = "crash"
        stdout, truncated = _read_capped(out_fh, limits.stdout_cap)
        stderr, _ = _read_capped(err_fh, limits.stderr_cap)
        return RunRecord(spec.id, instance_id, wall, peak, status, code, sig, stdout, stderr, truncated)
    finally:
        out_fh.close()
        err_fh.close()
        shutil.rmtree(tmpdir, ignore_errors=True)


# --- record store ------------------------------------------------------------

class RecordStore:
    """Append-only line-JSON file; one complete record per write."""

    def __init__(self, path):
        self.path = str(path)
        self._lock = threading.Lock()

    def load(self) -> Dict[Tuple[str, str], RunRecord]:
        out = {}
        if not os.path.exists(self.path):
            return out
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = RunRecord.from_json(line)
                except (ValueError, TypeError):
                    log.warning("skipping damaged record line in %s", self.path)
                    continue
                out[(rec.solver, rec.instance)] = rec
        return out

    def append(self, rec: RunRecord) -> None:
        line = rec.to_json() + "\n"
        with self._lock:
            with open(self.path, "a") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())


@dataclass
class CampaignResult:
    verdicts: Dict[str, Dict[str, Verdict]]
    records: Dict[Tuple[str, str], RunRecord]
    new_runs: int = 0


def judge_records(records: Mapping[Tuple[str, str], RunRecord], specs: Sequence[SolverSpec],
                  expected: Mapping[str, ExpectedCount]) -> Dict[str, Dict[str, Verdict]]:
    """Pure post-pass: RunRecords to verdicts in each solver's declared ranking."""
    modes = {s.id: RankingConfig.for_mode(s.declared_mode) for s in specs}
    table: Dict[str, Dict[str, Verdict]] = {s.id: {} for s in specs}
    for (solver, inst) in sorted(records):
        if solver not in modes:
            continue
        rec = records[(solver, inst)]
        report = parse_solver_output(rec.stdout)[0] if rec.exit == "ok" or rec.exit == "crash" else None
        table[solver][inst] = judge_run(report, expected.get(inst, UNKNOWN), modes[solver],
                                        exit_kind=rec.exit_kind, solver=solver, instance=inst,
                                        wall_time_s=round(rec.wall_time_s, 6))
    return table


def evaluate_campaign(specs: Sequence[SolverSpec], instances: Mapping[str, str],
                      expected: Mapping[str, ExpectedCount], limits: Limits, store_path,
                      parallelism: int = 1, max_new_runs: Optional[int] = None) -> CampaignResult:
    """Run every missing (solver, instance) pair, then judge them all.

    Completed pairs already in the store are not re-run, so an interrupted
    campaign resumes where it stopped. ``max_new_runs`` stops early (used to
    emulate an interruption).
    """
    store = RecordStore(store_path)
    records = store.load()
    todo = [(s, inst) for s in specs for inst in sorted(instances) if (s.id, inst) not in records]
    if max_new_runs is not None:
        todo = todo[:max_new_runs]

    def work(item):
        spec, inst = item
        rec = run_solver(spec, instances[inst], limits, instance_id=inst)
        store.append(rec)
        return rec

    if parallelism <= 1:
        fresh = [work(item) for item in todo]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            fresh = list(pool.map(work, todo))
    for rec in fresh:
        records[(rec.solver, rec.instance)] = rec
    return CampaignResult(judge_records(records, specs, expected), records, len(fresh))


def records_summary_csv(records: Mapping[Tuple[str, str], RunRecord],
                        verdicts: Mapping[str, Mapping[str, Verdict]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["solver", "instance", "verdict", "wall_time_s", "peak_mem_mib", "exit"])
    for key in sorted(records):
        rec = records[key]
        v = verdicts.get(rec.solver, {}).get(rec.instance)
        w.writerow([rec.solver, rec.instance, v.kind.value if v else "", f"{rec.wall_time_s:.3f}",
                    f"{rec.peak_mem_bytes / 2**20:.1f}", rec.exit])
    return buf.getvalue()


# --- CDF -----------------------------------------------------------------------

def export_cdf(verdicts: Mapping[str, Mapping[str, Verdict]],
               times: Optional[Mapping[Tuple[str, str], float]] = None) -> Dict[str, List[Tuple[float, int]]]:
    """Per solver: (time of k-th fastest accepted instance, k)."""
    out = {}
    for solver in sorted(verdicts):
        ts = []
        for inst, v in verdicts[solver].items():
            if v.kind not in SCORING:
                continue
            t = times[(solver, inst)] if times is not None else v.wall_time_s
            if t is not None:
                ts.append(t)
        out[solver] = [(t, k) for k, t in enumerate(sorted(ts), 1)]
    return out


def cdf_to_csv(series: Mapping[str, List[Tuple[float, int]]]) -> str:
    lines = ["solver,time_s,solved"]
    for solver in sorted(series):
        lines += [f"{solver},{t!r},{k}" for t, k in series[solver]]
    return "\n".join(lines) + "\n"


# --- campaign config -----------------------------------------------------------

@dataclass
class CampaignConfig:
    solvers: List[SolverSpec]
    instances: Dict[str, str]
    expected: Dict[str, ExpectedCount]
    limits: Limits
    store: str
    parallelism: int = 1
    seed: int = 0


def _collect_instances(directory: str) -> Dict[str, str]:
    from .cnf_io import instance_name

    out = {}
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        if os.path.isfile(path) and (".cnf" in name or name.endswith(".dimacs")):
            out[instance_name(name)] = path
    return out


def load_campaign_config(path) -> CampaignConfig:
    """YAML file::

        solvers:
          - {id: ref, command: "mccomp count {instance}", mode: A}
        instances: benchmarks/          # directory, relative to this file
        expected: expected.jsonl        # optional
        limits: {wall_s: 3600, mem_bytes: 34359738368, grace_s: 5}
        parallelism: 1
        store: runs.jsonl
        seed: 0
    """
    base = os.path.dirname(os.path.abspath(str(path)))
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}

    def rel(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    specs = [SolverSpec(s["id"], s["command"], str(s.get("mode", "A")), dict(s.get("env") or {}))
             for s in raw.get("solvers", [])]
    inst = raw.get("instances", ".")
    instances = _collect_instances(rel(inst)) if isinstance(inst, str) else {k: rel(v) for k, v in inst.items()}
    expected = load_expected(rel(raw["expected"])) if raw.get("expected") else {}
    limits = Limits(**(raw.get("limits") or {}))
    return CampaignConfig(specs, instances, expected, limits, rel(raw.get("store", "runs.jsonl")),
                          int(raw.get("parallelism", 1)), int(raw.get("seed", 0)))
