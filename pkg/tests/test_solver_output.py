import os
from decimal import Decimal
from fractions import Fraction

from helpers import GOLDEN
from mccomp.core import CountResult, ProblemKind
from mccomp.solver_output import parse_solver_output, result_from_report, write_solver_output


def read(name):
    with open(os.path.join(GOLDEN, name)) as fh:
        return fh.read()


def test_six_var_mc_solution():
    rep, diags = parse_solver_output(read("six_var_mc.out"))
    assert not [d for d in diags if d.is_error]
    assert rep.s_line == "SATISFIABLE"
    assert rep.type_line == ProblemKind.MC
    assert float(rep.log10_estimate) == 1.342422680822206
    assert rep.exact_line.notation == "int" and rep.exact_value() == 22


def test_three_var_wmc_solution_log10_value():
    rep, diags = parse_solver_output(read("three_var_wmc.out"))
    assert rep.exact_line.notation == "log10"
    assert rep.exact_line.value == Decimal("-3.3279021420642824863435269891")
    # the sample output misspells the status word
    assert "S_LINE_INVALID" in [d.code for d in diags]


def test_six_var_wmc_float_value():
    rep, _ = parse_solver_output(read("six_var_wmc.out"))
    assert rep.exact_line.precision == "double"
    assert rep.exact_value() == Fraction(173, 500)


def test_unsat_only():
    rep, diags = parse_solver_output("s UNSATISFIABLE\n")
    assert rep.s_line == "UNSATISFIABLE"
    assert rep.exact_line is None and rep.log10_estimate is None
    assert not [d for d in diags if d.is_error]


def test_write_mc():
    text = write_solver_output(CountResult.from_count(ProblemKind.MC, 22))
    lines = text.splitlines()
    for want in ("s SATISFIABLE", "c s type mc", "c s exact arb int 22", "c s log10-estimate 1.342422680822206"):
        assert want in lines


def test_write_zero():
    lines = write_solver_output(CountResult.from_count(ProblemKind.MC, 0)).splitlines()
    assert "s UNSATISFIABLE" in lines and "c s exact arb int 0" in lines
    assert "c s log10-estimate -inf" in lines


def test_write_wmc_fraction_round_trip():
    value = Fraction(47, 100000)
    text = write_solver_output(CountResult.from_count(ProblemKind.WMC, value))
    assert "c s log10-estimate -3.32790214206428" in text
    rep, diags = parse_solver_output(text)
    assert not [d for d in diags if d.is_error]
    assert rep.exact_value() == value
    assert result_from_report(rep).exact == value
