import json
import os
import random
import subprocess
import sys

import pytest

from helpers import GOLDEN, synthetic_pool
from mccomp.cli import main
from mccomp.cnf_io import save_instance
from mccomp.core import CnfFormula, CnfInstance, ProblemKind
from mccomp.selection import pool_to_jsonl
from mccomp.solver_output import parse_solver_output


def golden(name):
    return os.path.join(GOLDEN, name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_count_six_var_mc(capsys):
    code, out, err = run(capsys, "count", golden("six_var_mc.cnf"))
    assert code == 0
    assert "c s exact arb int 22" in out.splitlines()
    rep, diags = parse_solver_output(out)
    assert rep.exact_value() == 22 and not [d for d in diags if d.is_error]


def test_count_brute_matches(capsys):
    for name in ("ab_cd_mc", "ab_cd_wmc", "ab_cd_pmc", "ab_cd_pwmc"):
        _, a, _ = run(capsys, "count", golden(name + ".cnf"))
        _, b, _ = run(capsys, "count", "--brute", golden(name + ".cnf"))
        assert parse_solver_output(a)[0].exact_value() == parse_solver_output(b)[0].exact_value()


def test_check_excess_clauses(tmp_path, capsys):
    p = tmp_path / "broken.cnf"
    p.write_text("p cnf 1 1\n1 0\n1 0\n")
    code, out, err = run(capsys, "check", str(p))
    assert code == 1 and "EXCESS_CLAUSES" in err
    code, _, _ = run(capsys, "check", golden("six_var_pmc.cnf"))
    assert code == 0


def test_usage_errors(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["count", "--no-such-flag", golden("six_var_mc.cnf")]) == 2
    assert main([]) == 2


def test_version():
    out = subprocess.run([sys.executable, "-m", "mccomp", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "MC-2021 format" in out.stdout


def test_resource_exhaustion_exit(tmp_path, capsys):
    rng = random.Random(5)
    clauses = tuple(tuple(rng.choice([-1, 1]) * v for v in rng.sample(range(1, 41), 3)) for _ in range(100))
    p = tmp_path / "hard.cnf"
    save_instance(CnfInstance(CnfFormula(40, clauses), ProblemKind.MC), p)
    code, out, err = run(capsys, "count", "--max-decisions", "2", str(p))
    assert code == 10 and out.startswith("s UNKNOWN")
    code, _, _ = run(capsys, "count", "--brute", str(p))
    assert code == 10


def test_count_json_and_ddnnf(tmp_path, capsys):
    nnf = tmp_path / "g.nnf"
    code, out, _ = run(capsys, "count", "--json", "--ddnnf", str(nnf), golden("six_var_wmc.cnf"))
    assert code == 0
    payload = json.loads(out)
    assert payload["exact"] == "173/500" and payload["type"] == "wmc"
    assert nnf.read_text().startswith("nnf ")


def test_repair_and_convert(tmp_path, capsys):
    p = tmp_path / "r.cnf"
    p.write_text("p cnf 2 5\nc t mc\n1\n2 0\n")
    code, out, err = run(capsys, "repair", str(p))
    assert code == 0 and "p cnf 2 1" in out and "1 2 0" in out
    code, out, _ = run(capsys, "convert", golden("three_var_wmc.cnf"))
    assert code == 0 and out.startswith("p cnf 3 4\nc t wmc\n")


def test_generators_seeded(tmp_path, capsys):
    a = run(capsys, "gen-weights", "--seed", "4", golden("six_var_mc.cnf"))[1]
    b = run(capsys, "gen-weights", "--seed", "4", golden("six_var_mc.cnf"))[1]
    c = run(capsys, "gen-weights", "--seed", "5", golden("six_var_mc.cnf"))[1]
    assert a == b != c and "c t wmc" in a
    code, out, _ = run(capsys, "gen-weights", "--counting-graph", golden("six_var_mc.cnf"))
    assert code == 0 and "c p weight" in out
    code, out, _ = run(capsys, "gen-projection", "--ratio", "1", golden("ab_cd_mc.cnf"))
    assert "c t pmc" in out and "c p show 1 2 3 4 0" in out
    code, _, err = run(capsys, "gen-weights", golden("six_var_wmc.cnf"))
    assert code == 2


def test_judge(capsys, tmp_path):
    code, out, _ = run(capsys, "judge", "--json", golden("six_var_mc.out"), "--expected", "22")
    assert code == 0 and json.loads(out)["verdict"] == "accepted"
    code, out, _ = run(capsys, "judge", golden("six_var_mc.out"), "--expected", "23", "--mode", "A")
    assert out.startswith("wrong")


def test_select_and_split(tmp_path, capsys):
    pool = tmp_path / "pool.jsonl"
    pool.write_text(pool_to_jsonl(synthetic_pool(1500, seed=2)))
    sel = tmp_path / "sel.csv"
    assert main(["select", str(pool), "--scheme", "2021", "--seed", "1", "-o", str(sel)]) == 0
    capsys.readouterr()
    assert len(sel.read_text().splitlines()) == 201
    code, out, _ = run(capsys, "split", "--json", str(sel))
    parts = json.loads(out)
    assert len(parts["public"]) == len(parts["private"]) == 100
    code, out, _ = run(capsys, "select", "--json", str(pool), "--scheme", "2022", "--seed", "1")
    assert code == 0 and json.loads(out)


def test_run_score_cdf(tmp_path, capsys):
    inst = tmp_path / "inst"
    inst.mkdir()
    for name in ("six_var_mc", "ab_cd_mc"):
        (inst / f"{name}.cnf").write_text(open(golden(name + ".cnf")).read())
    (tmp_path / "expected.jsonl").write_text(
        '{"instance": "six_var_mc", "expected": "22"}\n{"instance": "ab_cd_mc", "expected": "9"}\n')
    cfg = tmp_path / "campaign.yaml"
    cfg.write_text(f"solvers:\n  - {{id: own, command: '{sys.executable} -m mccomp count {{instance}}', mode: A}}\n"
                   "instances: inst\nexpected: expected.jsonl\nlimits: {wall_s: 30, grace_s: 1}\n"
                   "store: runs.jsonl\n")
    code, out, err = run(capsys, "run", str(cfg))
    assert code == 0 and "| 1 | own | 2 | 0 |" in out
    assert (tmp_path / "runs-summary.csv").exists()
    code, out, _ = run(capsys, "score", "--json", str(cfg))
    assert json.loads(out)[0]["score"] == 2
    code, out, _ = run(capsys, "cdf", str(cfg))
    assert out.splitlines()[0] == "solver,time_s,solved" and len(out.splitlines()) == 3
