r"""Checks of Leitmann's equivalence for additive coordinate changes.

For a shift :math:`y = \tilde y + f` and a gauge :math:`H(x, v)` with
:math:`v = I^{1-\alpha}\tilde y(x)`, the equivalence holds when

.. math::

    F(x, y, D^\alpha y) - F(x, \tilde y, D^\alpha \tilde y) = \frac{d}{dx} H(x, v(x)),

so that :math:`J(y) - J(\tilde y) = H(b, v(b)) - H(a, v(a))` is the same for
every admissible candidate and minimizers of the two problems correspond.
Gauges are supplied in closed form together with their partial derivatives,
which makes the exact-path check a pointwise identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from fracvar import powerfn, varprob
from fracvar.fracnum import SampledFunction, central_difference, rl_integral_num
from fracvar.powerfn import PowerSum
from fracvar.report import VerificationReport
from fracvar.varprob import (
    Candidate,
    ControlProblem,
    ControlSolution,
    PrimitiveCandidate,
    VariationalProblem,
)

__all__ = [
    "ControlTransformation",
    "Gauge",
    "Transformation",
    "control_candidate",
    "minimizer_indices",
    "prop1_transformation",
    "prop2_transformation",
    "prop3_transformation",
    "verify_constant_difference",
    "verify_exact_differential",
]

EXACT_TOL = 1e-11
CONSTRAINT_TOL = 1e-10
#: Numeric gaps are accepted up to ``NUMERIC_GAP_FACTOR * h``.
NUMERIC_GAP_FACTOR = 10.0

Function2 = Callable[[Any, Any], Any]


@dataclass(frozen=True, eq=False)
class Gauge:
    """Closed-form :math:`H(x, v)` with its partial derivatives."""

    value: Function2
    dx: Function2
    dv: Function2
    label: str = ""

    @classmethod
    def affine(cls, slope: Callable[[Any], Any], dslope: Callable[[Any], Any], offset: float, label: str = "") -> Gauge:
        """:math:`H(x, v) = s(x) v + \\text{offset} \\cdot x`."""
        return cls(
            value=lambda x, v: slope(x) * v + offset * x,
            dx=lambda x, v: dslope(x) * v + offset,
            dv=lambda x, v: slope(x) * np.ones_like(v),
            label=label,
        )

    @classmethod
    def zero(cls) -> Gauge:
        return cls(lambda x, v: 0.0 * v, lambda x, v: 0.0 * v, lambda x, v: 0.0 * v, "0")

    def total_derivative(self, x: Any, v: Any, dv: Any) -> Any:
        return self.dx(x, v) + self.dv(x, v) * dv


@dataclass(frozen=True, eq=False)
class Transformation:
    r"""Additive change of variables :math:`y = \tilde y + f` with gauge ``H``."""

    shift: Candidate
    gauge: Gauge

    def forward(self, y: Candidate) -> Candidate:
        if isinstance(y, SampledFunction) and not isinstance(self.shift, SampledFunction):
            return y - _sample_like(self.shift, y)
        return y - self.shift

    def inverse(self, y_tilde: Candidate) -> Candidate:
        if isinstance(y_tilde, SampledFunction) and not isinstance(self.shift, SampledFunction):
            return y_tilde + _sample_like(self.shift, y_tilde)
        return y_tilde + self.shift

    def tilde_target(self, problem: VariationalProblem) -> float:
        """Terminal value prescribed for the transformed candidates."""
        return problem.y_b - varprob.terminal_primitive(problem, self.shift)


def _sample_like(f: Candidate, like: SampledFunction) -> SampledFunction:
    if isinstance(f, PowerSum):
        return SampledFunction.sample(f.__call__, like.grid)
    return f.to_samples(like.grid)


# {{{ catalog transformations


def prop1_transformation(problem: VariationalProblem) -> Transformation:
    """Shift by the power with constant derivative ``K = c``; ``H = 2 K v + K^2 x``."""
    if problem.kind != "p1":
        raise ValueError("expected problem p1")
    K = problem.y_b
    f = varprob.prop1_solution(K, problem.alpha)
    return Transformation(f, Gauge.affine(lambda x: 2.0 * K + 0.0 * x, lambda x: 0.0 * x, K**2, "2Kv + K^2 x"))


def prop2_transformation(problem: VariationalProblem, offset: float | None = None) -> Transformation:
    r"""Shift by :math:`f = D^{1-\alpha}((A x + B)/g)`, by default with :math:`B = g(0) - 1`.

    The gauge is :math:`H = 2 A (v + 1) g(x) + A^2 x` for every ``B``. With
    ``B != 0`` the shift contains the singular power :math:`x^{\alpha - 1}`,
    so sampled candidates should use ``offset=0``.
    """
    if problem.kind != "p2" or not problem.g.is_exact:
        raise ValueError("expected problem p2 with an exactly known weight")
    g = problem.g
    A, C = varprob.prop2_constants(g, problem.y_b)
    B = C - 1.0 if offset is None else float(offset)
    alpha = problem.alpha

    g_const = g.constant_value
    if g_const is not None:
        phi = PowerSum(((B / g_const, 0.0), (A / g_const, 1.0)))
        shift: Candidate = phi if alpha == 1.0 else powerfn.rl_derivative(phi, 1.0 - alpha)
    else:
        shift = PrimitiveCandidate(
            alpha,
            lambda x: (A * x + B) / g.value(x),
            lambda x: (A * g.value(x) - (A * x + B) * g.derivative(x)) / g.value(x) ** 2,
        )

    gauge = Gauge(
        value=lambda x, v: 2.0 * A * (v + 1.0) * g.value(x) + A**2 * x,
        dx=lambda x, v: 2.0 * A * (v + 1.0) * g.derivative(x) + A**2,
        dv=lambda x, v: 2.0 * A * g.value(x) * np.ones_like(v),
        label="2A(v + 1)g + A^2 x",
    )
    return Transformation(shift, gauge)


@dataclass(frozen=True, eq=False)
class ControlTransformation:
    r"""Shift of the control problem: :math:`\tilde u = u - (0, 1)`, :math:`\tilde y = y - I^\alpha 1`.

    The gauge :math:`H = -2 v + x` acts on :math:`v = I^{1-\alpha} y_2` of the
    original state, so that :math:`L(\tilde u) - L(u) = dH/dx`.
    """

    alpha: float
    control_shift: tuple[float, float] = (0.0, 1.0)
    gauge: Gauge = Gauge.affine(lambda x: -2.0 + 0.0 * x, lambda x: 0.0 * x, 1.0, "-2v + x")

    @property
    def state_shift(self) -> PowerSum:
        return powerfn.rl_integral(PowerSum.constant(1.0), self.alpha)

    def forward(self, candidate: ControlSolution) -> ControlSolution:
        (u1, u2), (y1, y2) = candidate.controls, candidate.states
        s = self.state_shift
        return ControlSolution((u1 - self.control_shift[0], u2 - self.control_shift[1]), (y1 - s, y2 - s))

    def inverse(self, candidate: ControlSolution) -> ControlSolution:
        (u1, u2), (y1, y2) = candidate.controls, candidate.states
        s = self.state_shift
        return ControlSolution((u1 + self.control_shift[0], u2 + self.control_shift[1]), (y1 + s, y2 + s))


def prop3_transformation(problem: ControlProblem) -> ControlTransformation:
    return ControlTransformation(problem.alpha)


def control_candidate(alpha: float, u1: PowerSum, u2: PowerSum) -> ControlSolution:
    r"""Power-sum controls with states :math:`y_i = I^\alpha(\text{rhs}_i)`.

    ``u1`` must be identically zero so that :math:`e^{u_1}` stays a power sum.
    """
    if not u1.is_zero:
        raise ValueError("power-sum control candidates need u1 = 0")
    rhs1 = PowerSum.constant(1.0) + u1 + u2
    I = powerfn.rl_integral
    return ControlSolution((u1, u2), (I(rhs1, alpha), I(u2, alpha)))


# }}}


# {{{ checks


def _interior(problem: VariationalProblem | ControlProblem, n: int) -> np.ndarray:
    return problem.grid(n).x[1:-1]


def verify_exact_differential(
    problem: VariationalProblem | ControlProblem,
    transform: Transformation | ControlTransformation,
    y: Candidate | ControlSolution,
    n: int = varprob.DEFAULT_N,
    tol: float | None = None,
) -> VerificationReport:
    """Compare the Lagrangian difference with the total derivative of the gauge.

    Exactly represented candidates are compared pointwise at the interior
    nodes with tolerance ``1e-11``. Sampled candidates use the grid operators
    and a finite-difference derivative of ``H``, restricted to ``x >= 0.1``,
    with tolerance ``10 h``.
    """
    if isinstance(problem, ControlProblem):
        return _verify_control_exact_differential(problem, transform, y, n, tol)

    if isinstance(transform, ControlTransformation) or isinstance(y, ControlSolution):
        raise TypeError("control transformation used with a variational problem")

    y_tilde = transform.forward(y)
    details: list[dict[str, Any]] = [{"gauge": transform.gauge.label}]

    if isinstance(y, SampledFunction):
        grid = y.grid
        h = grid.h
        tol = NUMERIC_GAP_FACTOR * h if tol is None else tol
        lhs = varprob.lagrangian_samples(problem, y).values - varprob.lagrangian_samples(problem, y_tilde).values
        v = varprob.fractional_primitive_num(y_tilde, problem.alpha).values
        x = grid.x
        rhs = central_difference(transform.gauge.value(x, v), h)
        mask = x >= varprob.RESIDUAL_XMIN
        mask[-1] = False
        gap = float(np.max(np.abs(lhs - rhs)[mask]))
        details.append({"path": "numeric", "xmin": varprob.RESIDUAL_XMIN})
    else:
        tol = EXACT_TOL if tol is None else tol
        x = _interior(problem, n)
        v, dv = varprob.primitive_pair(y_tilde, problem.alpha)
        lhs = varprob.lagrangian_values(problem, y, x) - varprob.lagrangian_values(problem, y_tilde, x)
        rhs = transform.gauge.total_derivative(x, v(x), dv(x))
        gap = float(np.max(np.abs(lhs - rhs)))
        details.append({"path": "exact"})

    return VerificationReport("exact_differential", gap <= tol, gap, tol, n, details)


def _verify_control_exact_differential(
    problem: ControlProblem,
    transform: ControlTransformation,
    candidate: ControlSolution,
    n: int,
    tol: float | None,
) -> VerificationReport:
    tol = EXACT_TOL if tol is None else tol
    tilde = transform.forward(candidate)
    x = _interior(problem, n)

    def lagrangian(sol: ControlSolution) -> np.ndarray:
        u1, u2 = (varprob._pointwise(u, x) for u in sol.controls)
        return u1**2 + u2**2

    y2 = candidate.states[1]
    v = varprob.fractional_primitive(y2, problem.alpha)
    dv = powerfn.rl_derivative(y2, problem.alpha)
    lhs = lagrangian(tilde) - lagrangian(candidate)
    rhs = transform.gauge.total_derivative(x, v(x), dv(x))
    gap = float(np.max(np.abs(lhs - rhs)))
    return VerificationReport(
        "exact_differential", gap <= tol, gap, tol, n, [{"gauge": transform.gauge.label, "path": "exact"}]
    )


def verify_constant_difference(
    problem: VariationalProblem | ControlProblem,
    transform: Transformation | ControlTransformation,
    candidates: Sequence[Candidate] | Sequence[ControlSolution],
    n: int = varprob.DEFAULT_N,
    tol: float = EXACT_TOL,
    constraint_tol: float = CONSTRAINT_TOL,
) -> VerificationReport:
    r"""Check that :math:`J(y) - J(\tilde y)` is one constant over the candidates.

    The constant must equal :math:`H(b, v(b)) - H(a, v(a))`. Candidates that
    violate their terminal condition (or whose transform violates the
    transformed one) are rejected and fail the check.
    """
    if isinstance(problem, ControlProblem):
        return _verify_control_constant_difference(problem, transform, candidates, tol, constraint_tol)

    target_tilde = transform.tilde_target(problem)
    H = transform.gauge.value
    details: list[dict[str, Any]] = []
    diffs, values, tilde_values = [], [], []
    rejected = False

    for i, y in enumerate(candidates):
        y_tilde = transform.forward(y)
        r1 = varprob.check_constraint(problem, y, n)
        r2 = abs(varprob.terminal_primitive(problem, y_tilde, n) - target_tilde)
        entry: dict[str, Any] = {"index": i, "constraint_residual": r1, "tilde_constraint_residual": r2}
        if r1 > constraint_tol or r2 > constraint_tol:
            entry["rejected"] = True
            rejected = True
            details.append(entry)
            continue

        J, Jt = varprob.evaluate(problem, y, n), varprob.evaluate(problem, y_tilde, n)
        va = _initial_primitive(problem, y_tilde, n)
        vb = varprob.terminal_primitive(problem, y_tilde, n)
        expected = float(H(problem.b, vb) - H(problem.a, va))
        entry.update({"J": J, "J_tilde": Jt, "difference": J - Jt, "expected": expected})
        diffs.append((J - Jt, expected))
        values.append(J)
        tilde_values.append(Jt)
        details.append(entry)

    if diffs:
        d = np.array([di for di, _ in diffs])
        spread = float(d.max() - d.min())
        mismatch = float(max(abs(di - e) for di, e in diffs))
    else:
        spread = mismatch = 0.0

    gap = max(spread, mismatch)
    if values:
        details.append(
            {
                "spread": spread,
                "expected_mismatch": mismatch,
                "argmin": int(np.argmin(values)),
                "argmin_tilde": int(np.argmin(tilde_values)),
            }
        )
    passed = not rejected and gap <= tol
    return VerificationReport("constant_difference", passed, gap, tol, n, details)


def _initial_primitive(problem: VariationalProblem, y: Candidate, n: int) -> float:
    r""":math:`I^{1-\alpha} y` at the left end point (zero for continuous ``y``)."""
    if isinstance(y, SampledFunction):
        return float(varprob.fractional_primitive_num(y, problem.alpha).values[0])
    v, _ = varprob.primitive_pair(y, problem.alpha)
    return float(v(problem.a))


def _verify_control_constant_difference(
    problem: ControlProblem,
    transform: ControlTransformation,
    candidates: Sequence[ControlSolution],
    tol: float,
    constraint_tol: float,
) -> VerificationReport:
    H = transform.gauge.value
    details: list[dict[str, Any]] = []
    diffs = []
    rejected = False

    for i, cand in enumerate(candidates):
        res = varprob.check_control_system(problem, cand.controls, cand.states)
        entry: dict[str, Any] = {"index": i, "boundary_residual": list(res.boundary)}
        if max(res.boundary) > constraint_tol:
            entry["rejected"] = True
            rejected = True
            details.append(entry)
            continue

        tilde = transform.forward(cand)
        J, Jt = varprob.control_cost(cand.controls), varprob.control_cost(tilde.controls)
        vb = varprob.fractional_primitive(cand.states[1], problem.alpha)(1.0)
        expected = float(H(1.0, vb) - H(0.0, 0.0))
        entry.update({"J": J, "J_tilde": Jt, "difference": Jt - J, "expected": expected})
        diffs.append((Jt - J, expected))
        details.append(entry)

    if diffs:
        d = np.array([di for di, _ in diffs])
        spread = float(d.max() - d.min())
        mismatch = float(max(abs(di - e) for di, e in diffs))
    else:
        spread = mismatch = 0.0
    gap = max(spread, mismatch)
    details.append({"spread": spread, "expected_mismatch": mismatch})
    return VerificationReport("constant_difference", not rejected and gap <= tol, gap, tol, None, details)


def minimizer_indices(
    problem: VariationalProblem, transform: Transformation, candidates: Sequence[Candidate], n: int = varprob.DEFAULT_N
) -> tuple[int, int]:
    """Index of the best candidate before and after the transformation."""
    J = [varprob.evaluate(problem, y, n) for y in candidates]
    Jt = [varprob.evaluate(problem, transform.forward(y), n) for y in candidates]
    return int(np.argmin(J)), int(np.argmin(Jt))


# }}}
