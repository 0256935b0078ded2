import math

import numpy as np
import pytest

from fracvar import powerfn, varprob
from fracvar.fracnum import Grid, SampledFunction
from fracvar.powerfn import PowerSum
from fracvar.varprob import (
    ControlProblem,
    PrimitiveCandidate,
    VariationalProblem,
    Weight,
    check_constraint,
    check_control_system,
    control_cost,
    evaluate,
    prop1_solution,
    prop2_constants,
    prop2_solution,
    prop3_solution,
)
from oracles import integral_quad

ALPHAS = [0.25, 0.5, 0.75, 1.0]
ONE_PLUS_X = PowerSum.polynomial([1.0, 1.0])


def base_monomial(alpha):
    return 1.0 / (alpha * math.gamma(alpha))


# {{{ problem construction


def test_order_range():
    for alpha in (0.0, -0.2, 1.2, math.nan):
        with pytest.raises(ValueError):
            VariationalProblem.p1(alpha, 1.0)
    with pytest.raises(ValueError):
        ControlProblem(1.0)


def test_vanishing_weight_rejected():
    with pytest.raises(ValueError):
        VariationalProblem.p2(0.5, 0.0, PowerSum.polynomial([-0.5, 1.0]))
    with pytest.raises(ValueError):
        prop2_solution(PowerSum.polynomial([-0.5, 1.0]), 0.0, 0.5)


def test_weight_sources():
    g = Weight.from_powersum(ONE_PLUS_X)
    assert g.is_exact and g.derivative_source == "exact"
    assert g.endpoints() == (1.0, 2.0)

    grid = Grid(0.0, 1.0, 65)
    samples = SampledFunction.sample(lambda x: 1.0 + x**2, grid)
    w = Weight.from_samples(samples)
    assert not w.is_exact and w.derivative_source == "central-difference"
    _, dg = w.on_grid(grid)
    np.testing.assert_allclose(dg, 2 * grid.x, atol=1e-12)
    assert Weight.from_samples(samples, 2 * grid.x).derivative_source == "supplied"


# }}}


# {{{ evaluation


@pytest.mark.parametrize("alpha", ALPHAS)
def test_p1_value_at_minimizer(alpha):
    c = 2.0
    problem = VariationalProblem.p1(alpha, c)
    y = prop1_solution(c, alpha)
    assert evaluate(problem, y) == pytest.approx(c**2, abs=1e-12)
    assert check_constraint(problem, y) <= 1e-15


def test_p1_zero_candidate():
    problem = VariationalProblem.p1(0.5, 3.0)
    assert evaluate(problem, PowerSum()) == 0.0
    assert check_constraint(problem, PowerSum()) == 3.0


def test_p1_against_quadrature():
    # independent value: integrate the squared derivative by adaptive quadrature
    alpha = 0.5
    y = PowerSum(((1.0, 0.5), (0.3, 1.5), (-2.0, 2.0)))
    dy = powerfn.rl_derivative(y, alpha)
    expected = integral_quad(lambda x: dy(x) ** 2, 0.0, 1.0)
    assert evaluate(VariationalProblem.p1(alpha, 0.0), y) == pytest.approx(expected, rel=1e-12)


def test_p2_constant_weight():
    xi, alpha = 0.3, 0.5
    problem = VariationalProblem.p2(alpha, xi, PowerSum.constant(1.0))
    y = prop2_solution(PowerSum.constant(1.0), xi, alpha)
    expected = PowerSum.monomial(xi / math.gamma(alpha + 1.0), alpha)
    assert powerfn.max_coefficient_error(y, expected) <= 1e-15
    assert evaluate(problem, y) == pytest.approx(xi**2, abs=1e-12)
    assert check_constraint(problem, y) <= 1e-12


def test_p2_identity_weight_trivial_solution():
    y = prop2_solution(ONE_PLUS_X, 0.0, 0.5)
    problem = VariationalProblem.p2(0.5, 0.0, ONE_PLUS_X)
    x = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(y.v(x), 0.0, atol=1e-15)
    assert evaluate(problem, y) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("xi", [0.0, 0.3, -0.5])
@pytest.mark.parametrize("g", [PowerSum.constant(1.0), ONE_PLUS_X, PowerSum.polynomial([1.0, 1.0, 1.0])])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_p2_value_is_A_squared(g, xi, alpha):
    problem = VariationalProblem.p2(alpha, xi, g)
    A, C = prop2_constants(problem.g, xi)
    y = prop2_solution(g, xi, alpha)
    assert evaluate(problem, y) == pytest.approx(A**2, abs=1e-12)
    assert check_constraint(problem, y) <= 1e-12


def test_p2_constants():
    g = Weight.from_powersum(ONE_PLUS_X)
    assert prop2_constants(g, 0.0) == (1.0, 1.0)
    assert prop2_constants(g, 0.3) == pytest.approx((1.6, 1.0))


def test_p2_general_weight_is_primitive_candidate():
    y = prop2_solution(ONE_PLUS_X, 0.3, 0.5)
    assert isinstance(y, PrimitiveCandidate)
    samples = prop2_solution(ONE_PLUS_X, 0.3, 0.5, n=513, representation="samples")
    assert isinstance(samples, SampledFunction) and samples.grid.n == 513


@pytest.mark.parametrize("g", [PowerSum.constant(2.0), ONE_PLUS_X])
def test_p2_classical_limit(g):
    xi = 0.3
    y = prop2_solution(g, xi, 1.0)
    w = Weight.from_powersum(g)
    A, C = prop2_constants(w, xi)
    x = np.linspace(0.0, 1.0, 9)
    values = y(x) if isinstance(y, PowerSum) else y.v(x)
    np.testing.assert_allclose(values, (A * x + C) / g(x) - 1.0, atol=1e-15)


def test_p2_sampled_weight_numeric_path():
    n = 4097
    grid = Grid(0.0, 1.0, n)
    g = Weight.from_samples(SampledFunction.sample(lambda x: 1.0 + x + x**2, grid), 1.0 + 2.0 * grid.x)
    xi = 0.3
    problem = VariationalProblem.p2(0.5, xi, g)
    y = prop2_solution(g, xi, 0.5)
    assert isinstance(y, SampledFunction)
    A, _ = prop2_constants(g, xi)
    assert evaluate(problem, y) == pytest.approx(A**2, rel=2e-2)
    assert check_constraint(problem, y) <= 1e-3


def test_exact_and_numeric_paths_agree():
    for alpha in (0.25, 0.5, 0.75):
        for problem, y in (
            (VariationalProblem.p1(alpha, 2.0), prop1_solution(2.0, alpha)),
            (VariationalProblem.p2(alpha, 0.3, PowerSum.constant(1.0)), prop2_solution(PowerSum.constant(1.0), 0.3, alpha)),
            (VariationalProblem.p2(alpha, 0.3, ONE_PLUS_X), prop2_solution(ONE_PLUS_X, 0.3, alpha)),
        ):
            exact = evaluate(problem, y, path="exact")
            numeric = evaluate(problem, y, 4097, path="numeric")
            assert numeric == pytest.approx(exact, rel=2e-2)


def test_divergent_functional():
    # D^0.5 of x^0.2 behaves like x^-0.3; its square is still integrable
    problem = VariationalProblem.p1(0.5, 0.0)
    assert math.isfinite(evaluate(problem, PowerSum.monomial(1.0, 0.2)))
    # D^0.5 of x^-0.2 behaves like x^-0.7; the square is not
    assert evaluate(problem, PowerSum.monomial(1.0, -0.2)) == math.inf


# }}}


# {{{ catalog


@pytest.mark.parametrize("alpha", ALPHAS)
def test_prop1_solution(alpha):
    y = prop1_solution(2.0, alpha)
    assert y.terms == ((2.0 * base_monomial(alpha), alpha),)
    assert prop1_solution(0.0, alpha).is_zero


def test_prop1_classical_limit():
    assert prop1_solution(1.0, 1.0).terms == ((1.0, 1.0),)


def test_prop3_solution():
    sol = prop3_solution(0.5)
    b = base_monomial(0.5)
    assert sol.controls[0].is_zero and sol.controls[1].terms == ((1.0, 0.0),)
    assert sol.states[0].terms == ((2.0 * b, 0.5),)
    assert sol.states[1].terms == ((b, 0.5),)
    assert control_cost(sol.controls) == pytest.approx(1.0, abs=1e-15)

    classical = prop3_solution(1.0)
    assert classical.states[0].terms == ((2.0, 1.0),)
    assert classical.states[1].terms == ((1.0, 1.0),)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_control_residuals_at_solution(alpha):
    sol = prop3_solution(alpha)
    res = check_control_system(ControlProblem(alpha), sol.controls, sol.states)
    assert max(res.dynamics) <= 1e-14
    assert max(res.boundary) <= 1e-15


def test_control_residuals_with_shifted_u2():
    alpha = 0.5
    u2 = PowerSum.constant(1.1)
    y2 = powerfn.rl_integral(u2, alpha)
    y1 = powerfn.rl_integral(PowerSum.constant(2.1), alpha)
    res = check_control_system(ControlProblem(alpha), (PowerSum(), u2), (y1, y2))
    assert max(res.dynamics) <= 1e-15
    assert res.boundary[1] == pytest.approx(0.1, abs=1e-14)


def test_control_residuals_of_zero():
    res = check_control_system(ControlProblem(0.5), (PowerSum(), PowerSum()), (PowerSum(), PowerSum()))
    assert res.dynamics[0] == 1.0
    assert res.boundary == (2.0, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_control_boundary_is_plain_integral(seed):
    rng = np.random.default_rng(seed)
    u2 = PowerSum.polynomial(rng.uniform(-2.0, 2.0, 4))
    alpha = float(rng.uniform(0.1, 0.9))
    y2 = powerfn.rl_integral(u2, alpha)
    terminal = varprob.fractional_primitive(y2, alpha)(1.0)
    assert terminal == pytest.approx(powerfn.definite_integral(u2, 0.0, 1.0), rel=1e-12, abs=1e-14)


def test_control_residuals_numeric_states():
    alpha, n = 0.5, 4097
    sol = prop3_solution(alpha)
    grid = Grid(0.0, 1.0, n)
    states = tuple(SampledFunction.sample(y.__call__, grid) for y in sol.states)
    res = check_control_system(ControlProblem(alpha), sol.controls, states, n)
    assert max(res.dynamics) <= 1e-4
    assert max(res.boundary) <= 1e-5


# }}}
