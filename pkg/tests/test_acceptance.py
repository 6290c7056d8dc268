"""Acceptance suite: seven end-to-end criteria at their stated tolerances.

Run with pytest (one test per criterion, summary lines at the end) or
directly: ``python tests/test_acceptance.py`` prints one PASS/FAIL line each.
"""
import os
import random
import sys
import tempfile
import time
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from helpers import DATA, GOLDEN, random_formula, random_instance, stub_command, synthetic_pool  # noqa: E402
from mccomp.cnf_io import load_instance, parse_instance, read_bytes, repair, same_instance, write_instance  # noqa: E402
from mccomp.core import CnfInstance, ProblemKind, WeightMap  # noqa: E402
from mccomp.counting import check_sat, compile_ddnnf, count, count_bruteforce, count_on_ddnnf, count_value  # noqa: E402
from mccomp.harness import Limits, SolverSpec, evaluate_campaign, export_cdf, run_solver  # noqa: E402
from mccomp.judge import (SCORING, Mode, RankingConfig, Verdict, VerdictKind, ExpectedCount, assign_places,  # noqa: E402
                          is_accepted, is_approx_accepted, judge_run, load_expected, score_and_rank)
from mccomp.selection import (BUCKETS_2021, UNSOLVED_BUCKET, select_balanced_2021,  # noqa: E402
                              select_random_by_set_2022, split_public_private)
from mccomp.solver_output import parse_solver_output, write_solver_output  # noqa: E402

RESULTS = []


def _sig(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def _timed(limit_s, fn):
    t0 = time.perf_counter()
    fn()
    elapsed = time.perf_counter() - t0
    if limit_s is not None:
        assert elapsed < limit_s, f"took {elapsed:.2f}s, limit {limit_s}s"
    return elapsed


# --- 1 ---------------------------------------------------------------------------

EXPECTED = {
    "six_var_mc": 22, "six_var_wmc": Fraction(173, 500), "three_var_wmc": Fraction(47, 100000), "six_var_pmc": 3,
    "ab_cd_mc": 9, "ab_cd_wmc": Fraction(759, 1000), "ab_cd_pmc": 4, "ab_cd_pwmc": 1,
}


def criterion_1():
    def body():
        for name, want in EXPECTED.items():
            inst = load_instance(os.path.join(GOLDEN, name + ".cnf"))
            res = count(inst)
            assert res.exact == want, (name, res.exact, want)
            rep, _ = parse_solver_output(write_solver_output(res))
            assert rep.exact_value() == want
            est = float(rep.log10_estimate)
            if name == "six_var_wmc":
                assert _sig(est, 6) == _sig(-0.460924, 6), est
            if name == "three_var_wmc":
                assert _sig(est, 15) == _sig(-3.327902142064282, 15), est
    return _timed(1.0, body)


# --- 2 ---------------------------------------------------------------------------

def criterion_2():
    def body():
        rng = random.Random(20210)
        kinds = list(ProblemKind)
        compiled = 0
        for i in range(500):
            inst = random_instance(rng, kind=kinds[i % 4], n_max=16, m_max=40)
            value = count_value(inst)
            oracle = count_bruteforce(inst)
            assert value == oracle, (i, inst.kind, value, oracle)
            if not inst.kind.projected:
                w = inst.weights if inst.kind.weighted else None
                assert count_on_ddnnf(compile_ddnnf(inst), inst.num_vars, w) == value, i
                compiled += 1
        assert compiled == 250
    return _timed(120.0, body)


# --- 3 ---------------------------------------------------------------------------

def criterion_3():
    rng = random.Random(2101)
    for _ in range(100):
        f = random_formula(rng, n_max=16, m_max=40)
        n = f.num_vars
        mc = count_value(CnfInstance(f, ProblemKind.MC))
        ones = WeightMap({l: Fraction(1) for v in range(1, n + 1) for l in (v, -v)})
        assert count_value(CnfInstance(f, ProblemKind.WMC, weights=ones)) == mc
        halves = WeightMap({l: Fraction(1, 2) for v in range(1, n + 1) for l in (v, -v)})
        assert count_value(CnfInstance(f, ProblemKind.WMC, weights=halves)) * 2**n == mc
        everything = frozenset(range(1, n + 1))
        assert count_value(CnfInstance(f, ProblemKind.PMC, projection=everything)) == mc
        sat = 1 if check_sat(f) else 0
        assert count_value(CnfInstance(f, ProblemKind.PMC, projection=frozenset())) == sat
        assert sat == (1 if mc > 0 else 0)


# --- 4 ---------------------------------------------------------------------------

def _wrong_table(solver, n):
    rep = parse_solver_output("s SATISFIABLE\nc s exact arb int 300\n")[0]
    return {f"i{k}": judge_run(rep, ExpectedCount(100), RankingConfig.for_mode("B"), solver=solver, instance=f"i{k}")
            for k in range(n)}


def criterion_4():
    assert is_accepted(1000, 999, Fraction(1, 1000))
    assert not is_accepted(1000, 999, 0)
    rep = parse_solver_output("s SATISFIABLE\nc s exact arb int 999\n")[0]
    assert judge_run(rep, ExpectedCount(1000), RankingConfig.for_mode("A")).kind == VerdictKind.WRONG
    assert judge_run(rep, ExpectedCount(1000), RankingConfig.for_mode("B")).kind == VerdictKind.ACCEPTED
    a = Fraction(4, 5)
    assert is_approx_accepted(90, 50, a) and is_approx_accepted(90, 162, a)
    assert not is_approx_accepted(90, 49, a) and not is_approx_accepted(90, 163, a)
    assert assign_places([10, 8, 8, 5]) == [1, 2, 2, 4]
    st = {s.solver: s for s in score_and_rank({"w20": _wrong_table("w20", 20), "w21": _wrong_table("w21", 21)},
                                              {"w20": "B", "w21": "B"})}
    assert st["w20"].mode == Mode.B and st["w20"].demoted_from is None
    assert st["w21"].demoted_from == Mode.B and st["w21"].mode == Mode.C


# --- 5 ---------------------------------------------------------------------------

def _corpus_texts():
    texts = []
    for d in (GOLDEN, os.path.join(DATA, "corpus")):
        for name in sorted(os.listdir(d)):
            if name.endswith(".cnf"):
                texts.append((name, read_bytes(os.path.join(d, name))))
    return texts


def _mutate(rng, data: bytes) -> bytes:
    b = bytearray(data)
    for _ in range(rng.randint(1, 4)):
        op = rng.randrange(7)
        if op == 0 and b:
            b[rng.randrange(len(b))] = rng.randrange(256)
        elif op == 1 and b:
            i = rng.randrange(len(b))
            del b[i:i + rng.randint(1, 20)]
        elif op == 2:
            pos = rng.randrange(len(b) + 1)
            b[pos:pos] = rng.choice([b" 0", b"\n", b"-", b"c p weight ", b"c t pwmc\n", b"p cnf 3 ", b"9999999999999",
                                     b"1e-40", b"c p show ", b"\x00", b"0.5", b" \t", b"\xff\xfe"])
        elif op == 3:
            lines = bytes(b).split(b"\n")
            if len(lines) > 1:
                i = rng.randrange(len(lines))
                lines.insert(rng.randrange(len(lines)), lines[i])
                b = bytearray(b"\n".join(lines))
        elif op == 4:
            lines = bytes(b).split(b"\n")
            if lines:
                del lines[rng.randrange(len(lines))]
                b = bytearray(b"\n".join(lines))
        elif op == 5 and b:
            b = b[: rng.randrange(len(b))]
        else:
            b = bytearray(bytes(b).replace(b" ", b"", 1))
    return bytes(b)


def criterion_5(n_fuzz=100_000):
    texts = _corpus_texts()
    assert len(texts) == 208, len(texts)  # 8 worked examples + 200 generated
    for name, data in texts:
        inst, diags = parse_instance(data)
        assert not [d for d in diags if d.is_error], name
        again, _ = parse_instance(write_instance(inst))
        assert same_instance(inst, again), name
        assert write_instance(again) == write_instance(inst), name
    inst, diags = parse_instance(read_bytes(os.path.join(GOLDEN, "six_var_pmc.cnf")))
    assert any(d.code == "HEADER_EXTRA" and d.severity == "info" for d in diags)
    assert not [d for d in diags if d.is_error]

    rng = random.Random(5)
    aborts = []
    for k in range(n_fuzz):
        data = _mutate(rng, texts[rng.randrange(len(texts))][1])
        try:
            parse_instance(data)
            if k % 10 == 0:
                repair(data)
        except Exception as exc:  # any escape is an abort
            aborts.append((k, repr(exc)))
    assert not aborts, aborts[:5]


# --- 6 ---------------------------------------------------------------------------

def criterion_6():
    pool = synthetic_pool(5000, seed=1)

    def body():
        by_id = {e.id: e for e in pool}
        res = select_balanced_2021(pool, seed=21)
        want = {UNSOLVED_BUCKET: 40, **{b[0]: b[3] for b in BUCKETS_2021}}
        assert res.bucket_counts() == want, res.bucket_counts()
        assert [want[k] for k in [UNSOLVED_BUCKET] + [b[0] for b in BUCKETS_2021]] == [40, 20, 20, 20, 50, 30, 20]
        assert sum(len(by_id[i].solved_by) == 1 for i in res.ids) <= 10
        assert res.to_csv() == select_balanced_2021(pool, seed=21).to_csv()

        res22 = select_random_by_set_2022(pool, seed=22)
        for i in res22.ids:
            e = by_id[i]
            assert e.satisfiable is not False
            assert e.baseline_runtime_s is None or e.baseline_runtime_s > 60.0
        assert res22.to_csv() == select_random_by_set_2022(pool, seed=22).to_csv()

        public, private = split_public_private(res)
        assert len(public) == len(private) == 100
        assert set(public) | set(private) == set(res.ids) and not set(public) & set(private)
    return _timed(5.0, body)


# --- 7 ---------------------------------------------------------------------------

def criterion_7():
    a3 = os.path.join(GOLDEN, "six_var_mc.cnf")
    rec = run_solver(SolverSpec("sleep", stub_command("sleep_forever.py")), a3, Limits(wall_s=1, grace_s=1))
    assert rec.exit == "timeout", rec
    mem = Limits(wall_s=20, mem_bytes=64 * 2**20, grace_s=1)
    rec = run_solver(SolverSpec("alloc", stub_command("alloc.py"), env={"MCCOMP_STUB_BYTES": str(2 * mem.mem_bytes)}),
                     a3, mem)
    assert rec.exit == "memout", rec

    h20 = os.path.join(DATA, "harness20")
    instances = {n[:-4]: os.path.join(h20, n) for n in sorted(os.listdir(h20)) if n.endswith(".cnf")}
    assert len(instances) == 20
    expected = load_expected(os.path.join(h20, "expected.jsonl"))
    own = SolverSpec("own", f"{sys.executable} -m mccomp count {{instance}}", "A")
    wrong = SolverSpec("wrong", stub_command("wrong_answer.py"), "A")
    limits = Limits(wall_s=60, grace_s=1)
    with tempfile.TemporaryDirectory() as tmp:
        store = os.path.join(tmp, "runs.jsonl")
        three = dict(list(instances.items())[:3])
        part = evaluate_campaign([own, wrong], three, expected, limits, store, max_new_runs=4)
        assert part.new_runs == 4
        rest = evaluate_campaign([own, wrong], three, expected, limits, store)
        assert rest.new_runs == 2 and len(rest.records) == 6
        assert all(v.kind == VerdictKind.WRONG for v in rest.verdicts["wrong"].values())

        full = evaluate_campaign([own], instances, expected, limits, os.path.join(tmp, "own.jsonl"))
        (standing,) = score_and_rank(full.verdicts, {"own": "A"})
        assert standing.mode == Mode.A and standing.score == 20 and standing.wrong_count == 0, standing
        series = export_cdf(full.verdicts)["own"]
        assert [k for _, k in series] == list(range(1, 21))
        assert all(a[0] <= b[0] for a, b in zip(series, series[1:]))

    fixed = {"s": {"i1": Verdict(VerdictKind.ACCEPTED, wall_time_s=5), "i2": Verdict(VerdictKind.ACCEPTED, wall_time_s=2),
                   "i3": Verdict(VerdictKind.ACCEPTED, wall_time_s=9), "i4": Verdict(VerdictKind.TIMEOUT, wall_time_s=3600)}}
    assert export_cdf(fixed)["s"] == [(2, 1), (5, 2), (9, 3)]


CRITERIA = [
    (1, "golden counts", criterion_1),
    (2, "oracle equivalence (500 instances)", criterion_2),
    (3, "counting identities (100 instances)", criterion_3),
    (4, "judge boundaries, ties, demotion", criterion_4),
    (5, "format round-trip and fuzz", criterion_5),
    (6, "benchmark selection", criterion_6),
    (7, "harness classification, resume, CDF, self-score", criterion_7),
]


def _run(num, label, fn):
    t0 = time.perf_counter()
    try:
        fn()
    except Exception as exc:
        line = f"criterion {num} ({label}): FAIL after {time.perf_counter() - t0:.2f}s: {exc!r}"[:400]
        RESULTS.append(line)
        print(line)
        raise
    line = f"criterion {num} ({label}): PASS in {time.perf_counter() - t0:.2f}s"
    RESULTS.append(line)
    print(line)


def test_criterion_1_golden_counts():
    _run(*CRITERIA[0])


def test_criterion_2_oracle_equivalence():
    _run(*CRITERIA[1])


def test_criterion_3_identities():
    _run(*CRITERIA[2])


def test_criterion_4_judge():
    _run(*CRITERIA[3])


def test_criterion_5_format_robustness():
    _run(*CRITERIA[4])


def test_criterion_6_selection():
    _run(*CRITERIA[5])


def test_criterion_7_harness():
    _run(*CRITERIA[6])


if __name__ == "__main__":
    failed = 0
    for num, label, fn in CRITERIA:
        try:
            _run(num, label, fn)
        except Exception:
            failed += 1
    sys.exit(1 if failed else 0)
