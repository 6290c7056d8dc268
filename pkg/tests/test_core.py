import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mccomp.core import (CnfFormula, CnfInstance, CountResult, ProblemKind, Satisfiability, WeightMap,
                         WeightSource, evaluate, negate, project_model, var_of, weight_of_model,
                         weight_of_projected_model)
from mccomp.exact import (LOG10_ZERO, format_exact, format_log10_fixed, format_log10_significant,
                          log10_decimal, log10_float, parse_decimal, parse_exact)

ABCD = CnfFormula(4, ((1, 2), (3, 4)))
ABCD_W = WeightMap({1: Fraction(3, 4), -1: Fraction(1, 4), 2: Fraction(3, 10), -2: Fraction(7, 10),
                   3: Fraction(4, 5), -3: Fraction(1, 5), 4: Fraction(3, 5), -4: Fraction(2, 5)})


def test_negate():
    assert negate(3) == -3
    assert negate(-3) == 3
    rng = random.Random(1)
    for _ in range(100):
        lit = rng.choice([-1, 1]) * rng.randint(1, 10**6)
        assert negate(negate(lit)) == lit
        assert var_of(lit) == abs(lit)
    with pytest.raises(ValueError):
        negate(0)


def test_evaluate_two_clauses():
    assert evaluate(ABCD, {1: True, 2: True, 3: True, 4: True})
    assert not evaluate(ABCD, [False] * 4)
    assert evaluate(CnfFormula(0, ()), {})
    assert evaluate(CnfFormula(3, ()), [True, False, True])


def test_evaluate_rejects_partial_assignment():
    with pytest.raises(ValueError):
        evaluate(ABCD, {1: True})


def test_weight_of_model():
    assert weight_of_model(ABCD_W, {1, 2, 3, 4}, range(1, 5)) == Fraction(27, 250)
    assert weight_of_model(ABCD_W, {1, 2, 3}, range(1, 5)) == Fraction(9, 125)
    assert weight_of_model(WeightMap(), {1, 3}, range(1, 5)) == 1


def test_projection_helpers():
    assert project_model({1, 2, 3, 4}, {1, 4}) == {1, 4}
    assert project_model({1, 2}, set()) == frozenset()
    assert project_model({1, 3}, {1, 2, 3, 4}) == {1, 3}
    P = {1, 4}
    total = sum(weight_of_projected_model(ABCD_W, N, P) for N in [set(), {1}, {4}, {1, 4}])
    assert total == 1
    assert weight_of_projected_model(ABCD_W, set(), set()) == 1
    assert weight_of_projected_model(ABCD_W, {1}, P) == Fraction(3, 10)


def test_weight_map_lazy_complement():
    w = WeightMap({1: Fraction(3, 10), -2: Fraction(1, 4)})
    assert w[1] == Fraction(3, 10) and w[-1] == Fraction(7, 10)
    assert w[2] == Fraction(3, 4) and w[-2] == Fraction(1, 4)
    assert w[3] == 1 and w[-3] == 1
    assert w.source(1) == WeightSource.EXPLICIT
    assert w.source(-1) != WeightSource.EXPLICIT


def test_instance_defaults_and_errors():
    inst = CnfInstance(ABCD, ProblemKind.WMC)
    assert isinstance(inst.weights, WeightMap)
    pinst = CnfInstance(ABCD, ProblemKind.PMC)
    assert pinst.projection == frozenset()
    with pytest.raises(ValueError):
        CnfInstance(ABCD, ProblemKind.PMC, projection=frozenset({5}))


def test_count_result_defaults():
    r = CountResult.from_count(ProblemKind.MC, 22)
    assert r.satisfiable == Satisfiability.SAT and r.notation == "int"
    assert r.log10_estimate == pytest.approx(1.342422680822206)
    z = CountResult.from_count(ProblemKind.MC, 0)
    assert z.satisfiable == Satisfiability.UNSAT and z.is_zero


def test_exact_parsing():
    assert parse_decimal("0.0235") == Fraction(47, 2000)
    assert parse_decimal("1e-3") == Fraction(1, 1000)
    assert parse_decimal("2.5E2") == 250
    assert parse_exact("47/100000") == Fraction(47, 100000)
    assert format_exact(Fraction(173, 500)) == "0.346"
    assert format_exact(Fraction(1, 3)) == "1/3"


def test_log10_big_and_zero():
    big = 10**5000
    assert log10_float(big) == pytest.approx(5000.0)
    assert log10_float(0) is LOG10_ZERO
    assert format_log10_fixed(22) == "1.342422680822206"
    assert format_log10_significant(Fraction(47, 100000)).startswith("-3.32790214206428")
    assert str(log10_decimal(Fraction(173, 500)))[:9] == "-0.460923"


@given(st.integers(min_value=1, max_value=10**200), st.integers(min_value=1, max_value=10**50))
def test_log10_float_matches_decimal(p, q):
    x = Fraction(p, q)
    assert log10_float(x) == pytest.approx(float(log10_decimal(x)), abs=1e-9)
