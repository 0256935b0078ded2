import math

import numpy as np
import pytest

from fracvar import powerfn, varprob
from fracvar.harness import (
    DEFAULT_EPSILONS,
    SWEEP_COLUMNS,
    alpha_sweep,
    control_minimality_scan,
    make_perturbation,
    minimality_scan,
    remark2_boundary_probe,
)
from fracvar.fracnum import Grid, SampledFunction
from fracvar.powerfn import PowerSum
from fracvar.varprob import VariationalProblem, Weight, evaluate
from oracles import integral_quad, rl_integral_quad_terms

ALPHAS = [0.25, 0.5, 0.75, 1.0]


def deltas(problem, y_star, k, eps, path="exact", n=4097):
    eta = make_perturbation(problem.alpha, k).eta
    J0 = evaluate(problem, y_star, n, path)
    return np.array([evaluate(problem, y_star + e * eta, n, path) - J0 for e in eps])


# {{{ perturbation families


def test_perturbation_example():
    fam = make_perturbation(0.5, 1)
    (c0, b0), (c1, b1) = fam.eta.terms
    assert (b0, b1) == (0.5, 1.5)
    assert c0 == pytest.approx(-0.75, rel=1e-15) and c1 == 1.0
    assert fam.constraint_residual <= 1e-15


def test_classical_perturbation():
    fam = make_perturbation(1.0, 1)
    assert fam.eta.terms == ((-1.0, 1.0), (1.0, 2.0))
    assert fam.eta(0.0) == 0.0 and fam.eta(1.0) == 0.0


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("k", range(1, 7))
def test_perturbations_keep_constraint(alpha, k):
    fam = make_perturbation(alpha, k)
    assert len(fam.eta.terms) == 2
    assert fam.constraint_residual <= 1e-12
    # independent check of the terminal primitive by singular quadrature
    if alpha < 1.0:
        assert abs(rl_integral_quad_terms(fam.eta.terms, 1.0 - alpha, 1.0)) <= 1e-11


def test_perturbation_index():
    with pytest.raises(ValueError):
        make_perturbation(0.5, 0)


# }}}


# {{{ minimality scans


def test_p1_second_variation_value():
    alpha, c = 0.5, 2.0
    problem = VariationalProblem.p1(alpha, c)
    d = deltas(problem, varprob.prop1_solution(c, alpha), 1, [0.1])[0]
    assert d == pytest.approx(0.01 * math.gamma(2.5) ** 2 / 12.0, rel=1e-12)
    assert d == pytest.approx(1.4726e-3, abs=1e-7)

    # brute force: D^alpha eta_1 by differencing the quadrature value of I^(1 - alpha) eta_1
    eta = make_perturbation(alpha, 1).eta

    def d_eta(x, h=1e-6):
        v = lambda t: rl_integral_quad_terms(eta.terms, 1.0 - alpha, t)  # noqa: E731
        return (v(x + h) - v(x - h)) / (2 * h)

    brute = integral_quad(lambda x: d_eta(x) ** 2, 2e-6, 1.0)
    assert 0.01 * brute == pytest.approx(d, rel=1e-5)


def test_zero_step():
    problem = VariationalProblem.p1(0.5, 2.0)
    assert deltas(problem, varprob.prop1_solution(2.0, 0.5), 1, [0.0])[0] == 0.0
    with pytest.raises(ValueError):
        minimality_scan(problem, varprob.prop1_solution(2.0, 0.5), epsilons=[0.0, 0.1])


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("c", [-1.0, 0.5, 2.0])
def test_p1_scan(alpha, c):
    problem = VariationalProblem.p1(alpha, c)
    report = minimality_scan(problem, varprob.prop1_solution(c, alpha))
    assert report.passed, report.summary()
    drops = [d["delta"] for d in report.details if "delta" in d]
    assert len(drops) == 36 and min(drops) >= -1e-10


@pytest.mark.parametrize("g", [PowerSum.constant(1.0), PowerSum.polynomial([1.0, 1.0])])
@pytest.mark.parametrize("xi", [0.0, 0.3, -0.5])
def test_p2_scan(g, xi):
    alpha = 0.5
    problem = VariationalProblem.p2(alpha, xi, g)
    report = minimality_scan(problem, varprob.prop2_solution(g, xi, alpha))
    assert report.passed, report.summary()


def test_p2_increment_independent_of_constraint():
    alpha = 0.5
    g = PowerSum.constant(1.0)
    base = None
    for xi in (0.0, 0.3, -0.5):
        problem = VariationalProblem.p2(alpha, xi, g)
        d = deltas(problem, varprob.prop2_solution(g, xi, alpha), 2, [0.1, -0.5])
        eta_d = powerfn.rl_derivative(make_perturbation(alpha, 2).eta, alpha)
        second = powerfn.definite_integral(powerfn.square(eta_d), 0.0, 1.0)
        np.testing.assert_allclose(d, np.array([0.01, 0.25]) * second, rtol=1e-10)
        base = d if base is None else base
        np.testing.assert_allclose(d, base, rtol=1e-10)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_quadratic_scaling_and_symmetry(alpha):
    problem = VariationalProblem.p1(alpha, 2.0)
    y = varprob.prop1_solution(2.0, alpha)
    for k in range(1, 7):
        d = deltas(problem, y, k, [0.1, 0.2, -0.1])
        assert d[1] / d[0] == pytest.approx(4.0, abs=1e-6)
        assert d[2] == pytest.approx(d[0], rel=1e-9)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_cross_path_agreement(alpha):
    # the numeric increment carries an O(h) term linear in eps; averaging
    # over +eps and -eps leaves the second variation, compared here
    problem = VariationalProblem.p1(alpha, 2.0)
    y = varprob.prop1_solution(2.0, alpha)
    for k in (1, 3, 6):
        for e in (0.1, 0.5):
            exact = deltas(problem, y, k, [e])[0]
            num = deltas(problem, y, k, [e, -e], path="numeric")
            assert num.mean() == pytest.approx(exact, rel=5e-2)


def test_cross_path_raw_increment_at_large_step():
    problem = VariationalProblem.p1(0.5, 2.0)
    y = varprob.prop1_solution(2.0, 0.5)
    exact = deltas(problem, y, 1, [0.5])[0]
    num = deltas(problem, y, 1, [0.5], path="numeric")[0]
    assert num == pytest.approx(exact, rel=5e-2)


def test_numeric_scan_on_sampled_weight():
    grid = Grid(0.0, 1.0, 2049)
    g = Weight.from_samples(SampledFunction.sample(lambda x: 1.0 + x + x**2, grid), 1.0 + 2.0 * grid.x)
    problem = VariationalProblem.p2(0.5, 0.3, g)
    y = varprob.prop2_solution(g, 0.3, 0.5)
    report = minimality_scan(problem, y, K=3, n=2049, tol=1e-2, linear_tol=1e-2)
    assert report.passed, report.summary()


# }}}


# {{{ control


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_control_scan(alpha):
    report = control_minimality_scan(alpha)
    assert report.passed, report.summary()
    u2 = [d for d in report.details if d.get("control") == "u2"]
    for d in u2:
        assert d["delta_cost"] == pytest.approx(d["eps"] ** 2 / 12.0, abs=1e-10)
    u1 = [d for d in report.details if d.get("control") == "u1"]
    assert len(u1) == len(DEFAULT_EPSILONS)
    assert min(d["delta_cost"] for d in u1) >= -1e-8


def test_control_scan_values():
    report = control_minimality_scan(0.5, epsilons=[0.1])
    head = report.details[0]
    assert head["J_star"] == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(head["boundary_values"], [2.0, 1.0], atol=1e-15)
    u2 = next(d for d in report.details if d.get("control") == "u2")
    assert u2["delta_cost"] == pytest.approx(8.333e-4, abs=1e-7)


def test_control_scan_root_failure_reported():
    # a huge step pushes the offset outside its bracket; reported, not raised
    report = control_minimality_scan(0.5, epsilons=[25.0])
    u1 = next(d for d in report.details if d.get("control") == "u1")
    assert not report.passed and "error" in u1


def test_control_scan_rejects_biased_direction():
    with pytest.raises(ValueError):
        control_minimality_scan(0.5, m=PowerSum.monomial(1.0, 1.0))


# }}}


# {{{ boundary probe and sweeps


def test_remark2_probe():
    assert remark2_boundary_probe(0.0, 0.5).details[0]["y_at_1"] == 0.0
    r = remark2_boundary_probe(2.0, 0.5)
    assert r.passed and r.details[0]["y_at_1"] == pytest.approx(2.25676, abs=1e-5)
    assert remark2_boundary_probe(1.0, 1.0).details[0]["y_at_1"] == 1.0


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("c", [0.0, -1.0, 0.5, 2.0])
def test_remark2_probe_iff(alpha, c):
    r = remark2_boundary_probe(c, alpha)
    assert r.passed
    assert r.details[0]["vanishes"] == (c == 0.0)


def test_sweep_p1():
    rows = alpha_sweep({"problem": "p1", "c": 1.0}, ALPHAS, [129, 257, 513])
    assert len(rows) == 12
    assert all(r["status"] == "ok" for r in rows)
    assert set(SWEEP_COLUMNS) <= set(rows[0])
    np.testing.assert_allclose([r["J_exact"] for r in rows], 1.0, atol=1e-12)


def test_sweep_empty():
    assert alpha_sweep({"problem": "p1", "c": 1.0}, [], [129]) == []


def test_sweep_p3():
    rows = alpha_sweep({"problem": "p3"}, [0.5], [129, 257, 513])
    np.testing.assert_allclose([r["J_exact"] for r in rows], 1.0, atol=1e-12)
    np.testing.assert_allclose([r["J_numeric"] for r in rows], 1.0, atol=1e-12)


def test_sweep_order():
    rows = alpha_sweep({"problem": "p1", "c": 1.0}, [0.5], [129, 257, 513, 1025, 2049, 4097])
    assert rows[0]["order"] >= 1.3


def test_sweep_failed_cell():
    rows = alpha_sweep({"problem": "p3"}, [1.0], [129])
    assert rows[0]["status"].startswith("failed")


def test_sweep_deterministic():
    cfg = {"problem": "p2", "xi": 0.3, "g": {"a": 0.0, "terms": [[1.0, 0.0], [1.0, 1.0]]}}
    assert alpha_sweep(cfg, [0.5], [129, 257, 513]) == alpha_sweep(cfg, [0.5], [129, 257, 513])


# }}}
