import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from skewfd.lattice import Lattice
from skewfd.stencil import (
    arakawa,
    arakawa_quarter,
    central,
    p2d1,
    richardson,
    third_derivative,
    to_tensor,
)
from skewfd.verify import (
    DiffOp,
    RankDeficientBasis,
    SmoothFunction,
    conservation_residual,
    cyclic_jacobian_op,
    derivative_op,
    fit_leading_operator,
    fit_slope,
    h_levels,
    jacobian_op,
    leading_power,
    make_tests,
    order_estimate,
    p2d1_basis,
    random_rational,
    taylor_coefficients,
)


def test_smooth_function_derivatives():
    f = SmoothFunction("sin(x0)*x1**2", 2)
    assert f.deriv((1, 1))(0.0, 3.0) == pytest.approx(6.0)
    assert f([math.pi / 2, 2.0]) == pytest.approx(4.0)


def test_diffop_evaluation():
    J = jacobian_op()
    v = SmoothFunction("x0", 2)
    w = SmoothFunction("x1", 2)
    assert J([v, w], [0.3, 0.1]) == pytest.approx(1.0)
    assert J([w, v], [0.3, 0.1]) == pytest.approx(-1.0)


def test_cyclic_jacobian_definition():
    C = cyclic_jacobian_op()
    one = SmoothFunction("1", 2)
    v = SmoothFunction("x0**2", 2)
    w = SmoothFunction("x0*x1", 2)
    # with v^1 = 1 only the first term survives
    assert C([one, v, w], [0.5, 0.2]) == pytest.approx(jacobian_op()([v, w], [0.5, 0.2]))


def test_fit_slope_exact_power_law():
    hs = h_levels(0.1, 5)
    s, r = fit_slope(hs, [3 * h ** 2 for h in hs])
    assert s == pytest.approx(2.0) and r < 1e-12


@pytest.mark.parametrize("st,op,order", [
    (central(), derivative_op(1), 2.0),
    (richardson(), derivative_op(1), 4.0),
    (third_derivative(), derivative_op(3), 2.0),
    (arakawa(), jacobian_op(), 2.0),
])
def test_order_estimates(st, op, order):
    study = order_estimate(st, op)
    assert study.passes(order), study.report()


def test_unsymmetrized_jacobian_is_inconsistent_or_first_order():
    study = order_estimate(arakawa_quarter(), jacobian_op())
    assert study.slope < 1.5
    assert not study.passes(2.0)


def test_too_few_tests_rejected():
    with pytest.raises(ValueError):
        order_estimate(central(), derivative_op(1), tests=make_tests(1, 1, count=2))


def test_taylor_oracle_central():
    n, c = leading_power(central())
    assert n == 1 and c == {((1,),): 2}
    assert taylor_coefficients(central(), 2) == {}


def test_fit_p2d1():
    fit = fit_leading_operator(p2d1(), p2d1_basis())
    assert fit.h_power == 3
    assert fit.exact == [3, 2]
    assert np.allclose(fit.as_floats(), [3, 2], atol=1e-6)


def test_fit_central():
    fit = fit_leading_operator(central(), [derivative_op(1)])
    assert fit.exact == [2] and fit.h_power == 1
    assert abs(fit.as_floats()[0] - 2) < 1e-6


def test_fit_arakawa_normalization():
    fit = fit_leading_operator(arakawa(), [jacobian_op()])
    assert fit.h_power == 2 and fit.exact == [12]


def test_rank_deficient_basis():
    b = p2d1_basis()
    with pytest.raises(RankDeficientBasis):
        fit_leading_operator(p2d1(), [b[0], b[0].scaled(2)])


def test_conservation_exact_and_float():
    lat = Lattice("square2d", (8, 8))
    st = arakawa()
    rng = np.random.default_rng(0)
    g = [random_rational((8, 8, 1), rng) for _ in range(2)]
    rep = conservation_residual(st, g, lat)
    assert rep.exact and rep.residual == 0
    gf = [rng.standard_normal((8, 8, 1)) for _ in range(2)]
    rep = conservation_residual(to_tensor(st, lat), gf)
    assert not rep.exact and rep.ok(1e-12)
    rep = conservation_residual(st, gf, lat)
    assert rep.ok(1e-12)


def test_conservation_detects_corruption():
    from skewfd.skewtensor import GeneralTensor

    lat = Lattice("line1d", (8,))
    bad = GeneralTensor(3, dict(to_tensor(p2d1(), lat).full_entries()), lat)
    bad.add(next(iter(bad.entries)), 1)
    rng = np.random.default_rng(1)
    g = [random_rational((8, 1), rng) for _ in range(2)]
    assert conservation_residual(bad, g).residual > 0
    gf = [rng.standard_normal((8, 1)) for _ in range(2)]
    assert not conservation_residual(bad, gf).ok(1e-12)


def test_study_csv(tmp_path):
    study = order_estimate(central(), derivative_op(1))
    path = tmp_path / "study.csv"
    study.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "h,error" and len(lines) == 6
