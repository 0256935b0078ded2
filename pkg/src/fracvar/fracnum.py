r"""Grid-based Riemann-Liouville operators on uniform meshes.

The fractional integral uses the product trapezoidal rule, which integrates
the kernel :math:`(x - t)^{\alpha - 1}` exactly against the piecewise linear
interpolant of the samples. The fractional derivative uses the L1 scheme for
the Caputo part plus the analytic initial-value term

.. math::

    D^\alpha f(x) = D_C^\alpha f(x) + \frac{f(a)}{\Gamma(1 - \alpha)} (x - a)^{-\alpha}.

Both operators are discrete convolutions with Toeplitz weights, evaluated
directly in :math:`O(n^2)`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from fracvar.specfun import gamma

__all__ = [
    "Grid",
    "SampledFunction",
    "estimate_convergence_order",
    "functional_quadrature",
    "rl_derivative_num",
    "rl_integral_num",
]


@dataclass(frozen=True)
class Grid:
    """Uniform mesh :math:`x_j = a + j h` with ``n`` nodes on ``[a, b]``."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError(f"grid needs b > a, got [{self.a!r}, {self.b!r}]")
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 nodes, got {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Nodal values of a function on a :class:`Grid`.

    ``valid`` flags nodes where the stored value is a meaningful approximation;
    operators with a singular kernel clear the flag at the first node and
    store 0 there so that all values stay finite.
    """

    grid: Grid
    values: np.ndarray
    valid: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        valid = np.ones(self.grid.n, dtype=bool) if self.valid is None else np.array(self.valid, dtype=bool)
        valid.setflags(write=False)
        object.__setattr__(self, "valid", valid)

    @classmethod
    def sample(cls, f: Callable[[np.ndarray], Any], grid: Grid) -> SampledFunction:
        values = np.broadcast_to(np.asarray(f(grid.x), dtype=float), (grid.n,))
        return cls(grid, values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def with_values(self, values: np.ndarray, valid: np.ndarray | None = None) -> SampledFunction:
        return SampledFunction(self.grid, values, self.valid if valid is None else valid)

    def __add__(self, other: Any) -> SampledFunction:
        if isinstance(other, SampledFunction):
            _check_same_grid(self, other)
            return SampledFunction(self.grid, self.values + other.values, self.valid & other.valid)
        return self.with_values(self.values + np.asarray(other, dtype=float))

    __radd__ = __add__

    def __sub__(self, other: Any) -> SampledFunction:
        return self + (-other)

    def __neg__(self) -> SampledFunction:
        return self.with_values(-self.values)

    def __mul__(self, other: Any) -> SampledFunction:
        if isinstance(other, SampledFunction):
            _check_same_grid(self, other)
            return SampledFunction(self.grid, self.values * other.values, self.valid & other.valid)
        return self.with_values(np.asarray(other, dtype=float) * self.values)

    __rmul__ = __mul__

    # {{{ serialization

    def to_json(self) -> dict[str, Any]:
        return {
            "grid": {"a": self.grid.a, "b": self.grid.b, "n": self.grid.n},
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any] | str) -> SampledFunction:
        if isinstance(data, str):
            data = json.loads(data)
        g = data["grid"]
        return cls(Grid(float(g["a"]), float(g["b"]), int(g["n"])), np.asarray(data["values"]))

    def to_csv(self, extra: dict[str, np.ndarray] | None = None) -> str:
        """Render ``x,value[,extra...]`` columns with 17 significant digits."""
        extra = extra or {}
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value", *extra])
        columns = [self.x, self.values, *extra.values()]
        for row in zip(*columns):
            writer.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> tuple[SampledFunction, dict[str, np.ndarray]]:
        """Parse CSV produced by :meth:`to_csv`; extra columns are returned separately."""
        rows = list(csv.reader(io.StringIO(text)))
        if len(rows) < 4:
            raise ValueError("CSV needs a header and at least 3 rows")
        header = [h.strip() for h in rows[0]]
        if header[:2] != ["x", "value"]:
            raise ValueError(f"CSV header must start with 'x,value', got {header!r}")
        data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)

        x = data[:, 0]
        grid = Grid(float(x[0]), float(x[-1]), len(x))
        if not np.allclose(x, grid.x, rtol=0.0, atol=1e-12 * max(1.0, abs(grid.b))):
            raise ValueError("CSV nodes are not uniformly spaced")

        extra = {name: data[:, i] for i, name in enumerate(header[2:], start=2)}
        return cls(grid, data[:, 1]), extra

    # }}}


def _check_same_grid(f: SampledFunction, g: SampledFunction) -> None:
    if f.grid != g.grid:
        raise ValueError("sampled functions live on different grids")


def product_trapezoid_weights(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    r"""Weights of the product trapezoidal rule.

    Returns ``(c, w0)`` such that, up to the factor :math:`h^\alpha / \Gamma(\alpha + 2)`,
    node ``j >= 1`` receives ``sum_{k=1}^{j} c[j - k] f_k + w0[j] f_0``.
    """
    m = np.arange(n, dtype=float)
    c = np.empty(n)
    c[0] = 1.0
    c[1:] = (m[1:] + 1) ** (alpha + 1) - 2 * m[1:] ** (alpha + 1) + (m[1:] - 1) ** (alpha + 1)

    w0 = np.zeros(n)
    w0[1:] = (m[1:] - 1) ** (alpha + 1) - m[1:] ** alpha * (m[1:] - alpha - 1)
    return c, w0


def rl_integral_num(f: SampledFunction, alpha: float) -> SampledFunction:
    """Product-trapezoidal approximation of the order ``alpha`` integral."""
    if not alpha > 0.0:
        raise ValueError(f"integral order must be positive, got {alpha!r}")

    n, h = f.grid.n, f.grid.h
    c, w0 = product_trapezoid_weights(n, alpha)

    fk = f.values.copy()
    f0 = fk[0]
    fk[0] = 0.0
    result = np.convolve(c, fk)[:n] + w0 * f0
    result[0] = 0.0

    return SampledFunction(f.grid, h**alpha / gamma(alpha + 2.0) * result)


def l1_weights(n: int, alpha: float) -> np.ndarray:
    k = np.arange(n, dtype=float)
    return (k + 1) ** (1 - alpha) - k ** (1 - alpha)


def rl_derivative_num(f: SampledFunction, alpha: float) -> SampledFunction:
    """L1 approximation of the order ``alpha`` derivative, ``0 < alpha < 1``.

    The first node is always flagged invalid and stored as 0: the kernel is
    singular there (and the value is unbounded when ``f(a) != 0``).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"derivative order must be in (0, 1), got {alpha!r}")

    n, h = f.grid.n, f.grid.h
    b = l1_weights(n - 1, alpha)
    df = np.diff(f.values)

    result = np.zeros(n)
    result[1:] = h ** (-alpha) / gamma(2.0 - alpha) * np.convolve(b, df)[: n - 1]

    f0 = f.values[0]
    if f0 != 0.0:
        t = f.x[1:] - f.grid.a
        result[1:] += f0 * t ** (-alpha) / gamma(1.0 - alpha)

    valid = np.ones(n, dtype=bool)
    valid[0] = False
    return SampledFunction(f.grid, result, valid)


def functional_quadrature(integrand: SampledFunction, extrapolate_origin: bool | None = None) -> float:
    """Composite trapezoid value of the sampled integrand.

    If the first node is flagged invalid (or ``extrapolate_origin`` is set), its
    value is replaced by linear extrapolation from the next two nodes.
    """
    values = np.array(integrand.values)
    if extrapolate_origin is None:
        extrapolate_origin = not bool(integrand.valid[0])
    if extrapolate_origin:
        values[0] = 2.0 * values[1] - values[2]

    return float(np.trapezoid(values, dx=integrand.grid.h))


def estimate_convergence_order(errors: Sequence[tuple[float, float]], exact_tol: float = 0.0) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``.

    Returns ``inf`` when every error is at most ``exact_tol`` (the scheme is
    exact up to rounding for that input).
    """
    if len(errors) < 3:
        raise ValueError(f"need at least 3 grid levels, got {len(errors)}")

    hs = np.array([h for h, _ in errors], dtype=float)
    es = np.array([e for _, e in errors], dtype=float)
    if np.all(es <= exact_tol):
        return math.inf
    if np.any(es <= 0.0) or np.any(hs <= 0.0):
        raise ValueError("errors and step sizes must be positive")

    slope, _ = np.polyfit(np.log(hs), np.log(es), 1)
    return float(slope)


def central_difference(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order finite differences, one-sided at the ends."""
    return np.gradient(np.asarray(values, dtype=float), h, edge_order=2)
