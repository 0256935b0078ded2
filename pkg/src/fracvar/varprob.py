r"""Catalog of fractional variational and optimal control problems.

Every functional in the catalog depends on a candidate :math:`y` only through

.. math::

    v = I^{1 - \alpha} y, \qquad v' = D^\alpha y,

the second identity being the definition of the Riemann-Liouville derivative
for :math:`0 < \alpha < 1` (at :math:`\alpha = 1` both reduce to ``y`` and
``y'``). Candidates come in three representations:

* :class:`~fracvar.powerfn.PowerSum` -- evaluated exactly with the power rule;
* :class:`PrimitiveCandidate` -- ``y`` given through closed forms of ``v`` and
  ``v'``, integrated with adaptive quadrature;
* :class:`~fracvar.fracnum.SampledFunction` -- nodal values, evaluated with the
  grid operators.

The two problems of the calculus of variations are

* ``p1``: :math:`\int_0^1 (D^\alpha y)^2 \,dx` subject to :math:`I^{1-\alpha} y(1) = c`;
* ``p2``: :math:`\int_0^1 [D^\alpha y \, g + (I^{1-\alpha} y + 1) g']^2 \,dx`
  subject to :math:`I^{1-\alpha} y(1) = \xi`,

and the control problem minimizes :math:`\int_0^1 u_1^2 + u_2^2 \,dx` subject to
:math:`D^\alpha y_1 = e^{u_1} + u_1 + u_2`, :math:`D^\alpha y_2 = u_2` and
:math:`I^{1-\alpha} y(1) = (2, 1)`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Union

import numpy as np
from scipy import integrate

from fracvar import powerfn
from fracvar.fracnum import (
    Grid,
    SampledFunction,
    central_difference,
    functional_quadrature,
    rl_derivative_num,
    rl_integral_num,
)
from fracvar.powerfn import PowerSum
from fracvar.specfun import gamma

__all__ = [
    "Candidate",
    "ControlProblem",
    "ControlResiduals",
    "ControlSolution",
    "PrimitiveCandidate",
    "VariationalProblem",
    "Weight",
    "check_constraint",
    "check_control_system",
    "control_cost",
    "evaluate",
    "prop1_solution",
    "prop2_constants",
    "prop2_solution",
    "prop3_solution",
]

Function = Callable[[Any], Any]

#: Nodes closer to the origin than this are skipped in pointwise residuals.
RESIDUAL_XMIN = 0.1

#: Default node count of the numeric path.
DEFAULT_N = 4097

_QUAD_OPTS = {"epsabs": 1e-14, "epsrel": 1e-13, "limit": 200}


def check_order(alpha: float, *, allow_one: bool = True) -> float:
    alpha = float(alpha)
    ok = 0.0 < alpha <= 1.0 if allow_one else 0.0 < alpha < 1.0
    if not ok:
        interval = "(0, 1]" if allow_one else "(0, 1)"
        raise ValueError(f"order alpha must lie in {interval}, got {alpha!r}")
    return alpha


def _integrate(f: Function, a: float, b: float) -> float:
    value, _ = integrate.quad(f, a, b, **_QUAD_OPTS)
    return float(value)


# {{{ weight function g


@dataclass(frozen=True, eq=False)
class Weight:
    """The weight function :math:`g` of problem ``p2`` and its derivative.

    Built from a :class:`PowerSum`, from callables, or from samples (with an
    optional derivative column; central differences are used otherwise).
    """

    powersum: PowerSum | None = None
    func: Function | None = None
    dfunc: Function | None = None
    samples: SampledFunction | None = None
    dsamples: np.ndarray | None = None

    @classmethod
    def from_powersum(cls, p: PowerSum) -> Weight:
        if p.min_exponent < 0.0 and not p.is_zero:
            raise ValueError("weight must be C^1 on [0, 1]")
        dp = powerfn.derivative(p)
        return cls(powersum=p, func=p.__call__, dfunc=dp.__call__)

    @classmethod
    def from_callables(cls, g: Function, dg: Function) -> Weight:
        return cls(func=g, dfunc=dg)

    @classmethod
    def from_samples(cls, samples: SampledFunction, derivative: np.ndarray | None = None) -> Weight:
        if derivative is not None:
            derivative = np.asarray(derivative, dtype=float)
            if derivative.shape != samples.values.shape:
                raise ValueError("derivative samples must match the value samples")
        return cls(samples=samples, dsamples=derivative)

    @classmethod
    def constant(cls, value: float) -> Weight:
        return cls.from_powersum(PowerSum.constant(value))

    @property
    def is_exact(self) -> bool:
        return self.func is not None

    @property
    def derivative_source(self) -> str:
        if self.is_exact:
            return "exact"
        return "supplied" if self.dsamples is not None else "central-difference"

    @property
    def constant_value(self) -> float | None:
        p = self.powersum
        if p is None:
            return None
        if p.is_zero:
            return 0.0
        if p.exponents == (0.0,):
            return p.coefficients[0]
        return None

    def value(self, x: Any) -> Any:
        if self.func is None:
            raise ValueError("sampled weight has no pointwise values")
        return self.func(x)

    def derivative(self, x: Any) -> Any:
        if self.dfunc is None:
            raise ValueError("sampled weight has no pointwise derivative")
        return self.dfunc(x)

    def endpoints(self) -> tuple[float, float]:
        if self.samples is not None:
            return float(self.samples.values[0]), float(self.samples.values[-1])
        return float(self.value(0.0)), float(self.value(1.0))

    def on_grid(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        """Values and derivatives at the grid nodes."""
        if self.samples is None:
            x = grid.x
            return (
                np.broadcast_to(np.asarray(self.value(x), dtype=float), x.shape),
                np.broadcast_to(np.asarray(self.derivative(x), dtype=float), x.shape),
            )
        if self.samples.grid != grid:
            raise ValueError(f"weight sampled on {self.samples.grid}, requested {grid}")
        values = self.samples.values
        if self.dsamples is not None:
            return values, self.dsamples
        return values, central_difference(values, grid.h)

    def min_abs(self, n: int = 1025) -> float:
        if self.samples is not None:
            return float(np.min(np.abs(self.samples.values)))
        x = np.linspace(0.0, 1.0, n)
        return float(np.min(np.abs(np.broadcast_to(self.value(x), x.shape))))


# }}}


# {{{ candidates


@dataclass(frozen=True, eq=False)
class PrimitiveCandidate:
    r"""A candidate :math:`y = D^{1-\alpha} v` given through :math:`v` and :math:`v'`."""

    alpha: float
    v: Function
    dv: Function

    @classmethod
    def from_powersum(cls, p: PowerSum, alpha: float) -> PrimitiveCandidate:
        v, dv = fractional_primitive(p, alpha), powerfn.rl_derivative(p, alpha)
        return cls(alpha, v.__call__, dv.__call__)

    def __add__(self, other: Any) -> PrimitiveCandidate:
        if isinstance(other, PowerSum):
            other = PrimitiveCandidate.from_powersum(other, self.alpha)
        if not isinstance(other, PrimitiveCandidate):
            return NotImplemented
        if other.alpha != self.alpha:
            raise ValueError("candidates of different orders")
        v1, dv1, v2, dv2 = self.v, self.dv, other.v, other.dv
        return PrimitiveCandidate(self.alpha, lambda x: v1(x) + v2(x), lambda x: dv1(x) + dv2(x))

    __radd__ = __add__

    def __neg__(self) -> PrimitiveCandidate:
        v, dv = self.v, self.dv
        return PrimitiveCandidate(self.alpha, lambda x: -v(x), lambda x: -dv(x))

    def __sub__(self, other: Any) -> PrimitiveCandidate:
        if isinstance(other, (PowerSum, PrimitiveCandidate)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other: Any) -> PrimitiveCandidate:
        return (-self) + other

    def to_samples(self, grid: Grid) -> SampledFunction:
        """Nodal values of ``y`` recovered with the L1 derivative of ``v``."""
        v = SampledFunction.sample(self.v, grid)
        if self.alpha == 1.0:
            return v
        return rl_derivative_num(v, 1.0 - self.alpha)


Candidate = Union[PowerSum, PrimitiveCandidate, SampledFunction]


def fractional_primitive(p: PowerSum, alpha: float) -> PowerSum:
    r""":math:`I^{1 - \alpha} p`, the identity at :math:`\alpha = 1`."""
    return p if alpha == 1.0 else powerfn.rl_integral(p, 1.0 - alpha)


def fractional_primitive_num(y: SampledFunction, alpha: float) -> SampledFunction:
    return y if alpha == 1.0 else rl_integral_num(y, 1.0 - alpha)


def fractional_derivative_num(y: SampledFunction, alpha: float) -> SampledFunction:
    if alpha == 1.0:
        return y.with_values(central_difference(y.values, y.grid.h))
    return rl_derivative_num(y, alpha)


def primitive_pair(y: PowerSum | PrimitiveCandidate, alpha: float) -> tuple[Function, Function]:
    """Pointwise callables for ``I^{1-alpha} y`` and ``D^alpha y``."""
    if isinstance(y, PowerSum):
        return fractional_primitive(y, alpha).__call__, powerfn.rl_derivative(y, alpha).__call__
    if isinstance(y, PrimitiveCandidate):
        if y.alpha != alpha:
            raise ValueError(f"candidate built for order {y.alpha!r}, problem has {alpha!r}")
        return y.v, y.dv
    raise TypeError(f"no exact representation for {type(y).__name__}")


# }}}


# {{{ variational problems


@dataclass(frozen=True, eq=False)
class VariationalProblem:
    """One of the catalog problems ``p1`` or ``p2`` on ``[0, 1]``."""

    kind: str
    alpha: float
    y_b: float
    g: Weight | None = None
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self) -> None:
        check_order(self.alpha)
        if self.kind not in ("p1", "p2"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if (self.a, self.b) != (0.0, 1.0):
            raise ValueError("catalog problems are posed on [0, 1]")
        if self.kind == "p2":
            if self.g is None:
                raise ValueError("problem p2 needs a weight g")
            if not self.g.min_abs() > 0.0:
                raise ValueError("weight g must not vanish on [0, 1]")

    @classmethod
    def p1(cls, alpha: float, c: float) -> VariationalProblem:
        return cls("p1", alpha, float(c))

    @classmethod
    def p2(cls, alpha: float, xi: float, g: Weight | PowerSum) -> VariationalProblem:
        if isinstance(g, PowerSum):
            g = Weight.from_powersum(g)
        return cls("p2", alpha, float(xi), g)

    @property
    def exact_weight(self) -> bool:
        return self.kind == "p1" or self.g.is_exact

    def grid(self, n: int) -> Grid:
        return Grid(self.a, self.b, n)


def lagrangian_base(problem: VariationalProblem, y: PowerSum) -> PowerSum | None:
    """The quantity squared by the Lagrangian, as a power sum when possible."""
    dy = powerfn.rl_derivative(y, problem.alpha)
    if problem.kind == "p1":
        return dy
    g = problem.g.powersum
    if g is None:
        return None
    v = fractional_primitive(y, problem.alpha)
    return dy * g + (v + 1.0) * powerfn.derivative(g)


def lagrangian_values(problem: VariationalProblem, y: PowerSum | PrimitiveCandidate, x: Any) -> Any:
    """Pointwise values of the Lagrangian along an exactly represented candidate."""
    v, dv = primitive_pair(y, problem.alpha)
    if problem.kind == "p1":
        return dv(x) ** 2
    return (dv(x) * problem.g.value(x) + (v(x) + 1.0) * problem.g.derivative(x)) ** 2


def lagrangian_samples(problem: VariationalProblem, y: SampledFunction) -> SampledFunction:
    """Nodal values of the Lagrangian along a sampled candidate.

    For ``p2`` the integrand is formed as the squared finite-difference
    derivative of :math:`(I^{1-\\alpha} y + 1) g`, which needs no derivative of
    ``y`` itself.
    """
    if problem.kind == "p1":
        dy = fractional_derivative_num(y, problem.alpha)
        return dy.with_values(dy.values**2)

    v = fractional_primitive_num(y, problem.alpha)
    g, _ = problem.g.on_grid(y.grid)
    w = (v.values + 1.0) * g
    return SampledFunction(y.grid, central_difference(w, y.grid.h) ** 2)


def _as_samples(y: Candidate, grid: Grid) -> SampledFunction:
    if isinstance(y, SampledFunction):
        if y.grid != grid:
            raise ValueError(f"candidate sampled on {y.grid}, requested {grid}")
        return y
    if isinstance(y, PowerSum):
        return SampledFunction.sample(y.__call__, grid)
    return y.to_samples(grid)


def _use_numeric(problem: VariationalProblem, y: Candidate, path: str) -> bool:
    if path not in ("auto", "exact", "numeric"):
        raise ValueError(f"unknown evaluation path {path!r}")
    exact_possible = not isinstance(y, SampledFunction) and problem.exact_weight
    if path == "exact" and not exact_possible:
        raise ValueError("exact path needs an exactly represented candidate and weight")
    return path == "numeric" or not exact_possible


def evaluate(problem: VariationalProblem, y: Candidate, n: int = DEFAULT_N, path: str = "auto") -> float:
    """Value of the functional at the candidate ``y``.

    Returns ``inf`` on the exact path when the Lagrangian is not integrable
    near the origin.
    """
    if _use_numeric(problem, y, path):
        samples = _as_samples(y, problem.grid(n))
        return functional_quadrature(lagrangian_samples(problem, samples))

    if isinstance(y, PowerSum):
        base = lagrangian_base(problem, y)
        if base is not None:
            if 2.0 * base.min_exponent <= -1.0:
                return math.inf
            return powerfn.definite_integral(powerfn.square(base), problem.a, problem.b)

    return _integrate(lambda x: lagrangian_values(problem, y, x), problem.a, problem.b)


def terminal_primitive(problem: VariationalProblem, y: Candidate, n: int = DEFAULT_N, path: str = "auto") -> float:
    r""":math:`I^{1-\alpha} y` at the right end point."""
    if path == "numeric" or isinstance(y, SampledFunction):
        samples = _as_samples(y, problem.grid(n))
        return float(fractional_primitive_num(samples, problem.alpha).values[-1])
    v, _ = primitive_pair(y, problem.alpha)
    return float(v(problem.b))


def check_constraint(problem: VariationalProblem, y: Candidate, n: int = DEFAULT_N, path: str = "auto") -> float:
    r"""Residual :math:`|I^{1-\alpha} y(b) - y_b|`."""
    return abs(terminal_primitive(problem, y, n, path) - problem.y_b)


def prop1_solution(c: float, alpha: float) -> PowerSum:
    r"""Minimizer :math:`c x^\alpha / (\alpha \Gamma(\alpha))` of problem ``p1``."""
    alpha = check_order(alpha)
    return PowerSum.monomial(c / (alpha * gamma(alpha)), alpha)


def prop2_constants(g: Weight, xi: float) -> tuple[float, float]:
    """The constants ``A = g(1)(xi + 1) - g(0)`` and ``C = g(0)``."""
    g0, g1 = g.endpoints()
    return g1 * (xi + 1.0) - g0, g0


def prop2_solution(
    g: Weight | PowerSum,
    xi: float,
    alpha: float,
    n: int = DEFAULT_N,
    representation: str = "auto",
) -> Candidate:
    r"""Minimizer :math:`D^{1-\alpha}\left((A x + C)/g - 1\right)` of problem ``p2``.

    With ``representation="auto"`` the result is a :class:`PowerSum` for
    constant ``g``, a :class:`PrimitiveCandidate` for other exactly known
    ``g`` and a :class:`SampledFunction` for sampled ``g``. Pass
    ``representation="samples"`` to force nodal values on an ``n``-node grid.
    """
    alpha = check_order(alpha)
    if isinstance(g, PowerSum):
        g = Weight.from_powersum(g)
    if not g.min_abs() > 0.0:
        raise ValueError("weight g must not vanish on [0, 1]")
    if representation not in ("auto", "samples"):
        raise ValueError(f"unknown representation {representation!r}")

    A, C = prop2_constants(g, xi)

    g_const = g.constant_value
    if representation == "auto" and g_const is not None:
        phi = PowerSum(((C / g_const - 1.0, 0.0), (A / g_const, 1.0)))
        return phi if alpha == 1.0 else powerfn.rl_derivative(phi, 1.0 - alpha)

    if representation == "auto" and g.is_exact:

        def phi(x: Any) -> Any:
            return (A * x + C) / g.value(x) - 1.0

        def dphi(x: Any) -> Any:
            gx = g.value(x)
            return (A * gx - (A * x + C) * g.derivative(x)) / gx**2

        return PrimitiveCandidate(alpha, phi, dphi)

    grid = g.samples.grid if g.samples is not None else Grid(0.0, 1.0, n)
    gv, _ = g.on_grid(grid)
    phi_samples = SampledFunction(grid, (A * grid.x + C) / gv - 1.0)
    if alpha == 1.0:
        return phi_samples
    return rl_derivative_num(phi_samples, 1.0 - alpha)


# }}}


# {{{ control problem


@dataclass(frozen=True)
class ControlProblem:
    """The two-state fractional control problem with boundary values ``(2, 1)``."""

    alpha: float
    boundary: tuple[float, float] = (2.0, 1.0)

    def __post_init__(self) -> None:
        check_order(self.alpha, allow_one=False)

    def grid(self, n: int) -> Grid:
        return Grid(0.0, 1.0, n)


@dataclass(frozen=True, eq=False)
class ControlSolution:
    controls: tuple[Any, Any]
    states: tuple[Any, Any]


@dataclass(frozen=True)
class ControlResiduals:
    #: Max-norm residuals of the two state equations over nodes ``x >= 0.1``.
    dynamics: tuple[float, float]
    #: Residuals of the two terminal conditions.
    boundary: tuple[float, float]

    @property
    def max_residual(self) -> float:
        return max(*self.dynamics, *self.boundary)


def prop3_solution(alpha: float) -> ControlSolution:
    r"""Controls :math:`(0, 1)` and states :math:`(2, 1) x^\alpha / (\alpha\Gamma(\alpha))`."""
    alpha = check_order(alpha)
    base = 1.0 / (alpha * gamma(alpha))
    return ControlSolution(
        controls=(PowerSum(), PowerSum.constant(1.0)),
        states=(PowerSum.monomial(2.0 * base, alpha), PowerSum.monomial(base, alpha)),
    )


def _pointwise(f: Any, x: np.ndarray) -> np.ndarray:
    if isinstance(f, SampledFunction):
        if f.values.shape != x.shape:
            raise ValueError("sampled control does not match the grid")
        return f.values
    if isinstance(f, (int, float)):
        return np.full_like(x, float(f))
    return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)


def control_cost(controls: tuple[Any, Any], n: int = DEFAULT_N) -> float:
    r"""Cost :math:`\int_0^1 u_1^2 + u_2^2 \,dx`; exact for power-sum controls."""
    u1, u2 = controls
    if isinstance(u1, PowerSum) and isinstance(u2, PowerSum):
        return powerfn.definite_integral(powerfn.square(u1) + powerfn.square(u2), 0.0, 1.0)
    if any(isinstance(u, SampledFunction) for u in controls):
        grid = next(u.grid for u in controls if isinstance(u, SampledFunction))
        x = grid.x
        return functional_quadrature(SampledFunction(grid, _pointwise(u1, x) ** 2 + _pointwise(u2, x) ** 2))
    return _integrate(lambda x: float(_pointwise(u1, np.asarray(x)) ** 2 + _pointwise(u2, np.asarray(x)) ** 2), 0.0, 1.0)


def check_control_system(
    problem: ControlProblem | float,
    controls: tuple[Any, Any],
    states: tuple[Any, Any],
    n: int = DEFAULT_N,
) -> ControlResiduals:
    """Residuals of the state equations and terminal conditions.

    Power-sum states are differentiated exactly; sampled states go through the
    L1 scheme and product trapezoidal rule.
    """
    if not isinstance(problem, ControlProblem):
        problem = ControlProblem(problem)
    alpha = problem.alpha
    grid = problem.grid(n)
    x = grid.x
    mask = x >= RESIDUAL_XMIN

    u1, u2 = (_pointwise(u, x) for u in controls)
    rhs = (np.exp(u1) + u1 + u2, u2)

    dynamics, boundary = [], []
    for state, target, value in zip(states, rhs, problem.boundary):
        if isinstance(state, PowerSum):
            dy = powerfn.rl_derivative(state, alpha)(x)
            terminal = fractional_primitive(state, alpha)(1.0)
        else:
            samples = _as_samples(state, grid)
            dy = rl_derivative_num(samples, alpha).values
            terminal = rl_integral_num(samples, 1.0 - alpha).values[-1]
        dy = np.broadcast_to(dy, x.shape)
        dynamics.append(float(np.max(np.abs(dy - target)[mask])))
        boundary.append(float(abs(terminal - value)))

    return ControlResiduals(tuple(dynamics), tuple(boundary))


# }}}
