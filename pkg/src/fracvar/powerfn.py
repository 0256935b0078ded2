r"""Exact power sums closed under Riemann-Liouville operators.

A :class:`PowerSum` represents

.. math::

    p(x) = \sum_i c_i (x - a)^{\beta_i}, \qquad \beta_i > -1,

and the fractional operators act on it term by term through the power rule

.. math::

    I^\alpha (x - a)^\beta = \frac{\Gamma(\beta + 1)}{\Gamma(\beta + 1 + \alpha)} (x - a)^{\beta + \alpha},
    \qquad
    D^\alpha (x - a)^\beta = \frac{\Gamma(\beta + 1)}{\Gamma(\beta + 1 - \alpha)} (x - a)^{\beta - \alpha}.

Because no quadrature is involved, these values serve as the reference for
the grid-based operators in :mod:`fracvar.fracnum`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from fracvar.specfun import gamma, gamma_ratio, rgamma

__all__ = [
    "EXPONENT_TOL",
    "PowerSum",
    "add",
    "definite_integral",
    "eval",
    "rl_derivative",
    "rl_integral",
    "scale",
    "square",
    "sub",
]

#: Exponents closer than this are considered equal and merged.
EXPONENT_TOL = 1e-12


def _canonical(terms: Iterable[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    items = []
    for c, beta in terms:
        c, beta = float(c), float(beta)
        if not (math.isfinite(c) and math.isfinite(beta)):
            raise ValueError(f"non-finite term ({c!r}, {beta!r})")
        nearest = round(beta)
        if abs(beta - nearest) <= EXPONENT_TOL:
            beta = float(nearest)
        if beta <= -1.0:
            raise ValueError(f"exponent {beta!r} is not > -1")
        items.append((beta, c))

    items.sort()
    merged: list[list[float]] = []
    for beta, c in items:
        if merged and beta - merged[-1][0] <= EXPONENT_TOL:
            merged[-1][1] += c
        else:
            merged.append([beta, c])

    return tuple((c, beta) for beta, c in merged if c != 0.0)


@dataclass(frozen=True)
class PowerSum:
    """A finite sum of (shifted) real powers in canonical form."""

    #: Pairs ``(coefficient, exponent)`` sorted by increasing exponent.
    terms: tuple[tuple[float, float], ...] = ()
    #: Base point of the powers, i.e. the lower limit of the operators.
    a: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", _canonical(self.terms))
        object.__setattr__(self, "a", float(self.a))

    # {{{ constructors

    @classmethod
    def constant(cls, c: float, a: float = 0.0) -> PowerSum:
        return cls(((c, 0.0),), a)

    @classmethod
    def monomial(cls, c: float, beta: float, a: float = 0.0) -> PowerSum:
        return cls(((c, beta),), a)

    @classmethod
    def polynomial(cls, coefficients: Sequence[float], a: float = 0.0) -> PowerSum:
        """Build ``sum_k coefficients[k] * (x - a)**k``."""
        return cls(tuple((c, float(k)) for k, c in enumerate(coefficients)), a)

    # }}}

    # {{{ properties

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def coefficients(self) -> tuple[float, ...]:
        return tuple(c for c, _ in self.terms)

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(beta for _, beta in self.terms)

    @property
    def min_exponent(self) -> float:
        return self.terms[0][1] if self.terms else math.inf

    def is_polynomial(self) -> bool:
        return all(beta == int(beta) for beta in self.exponents)

    # }}}

    def __call__(self, x: Any) -> Any:
        return eval(self, x)

    def __add__(self, other: Any) -> PowerSum:
        if isinstance(other, (int, float)):
            other = PowerSum.constant(other, self.a)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> PowerSum:
        if isinstance(other, (int, float)):
            other = PowerSum.constant(other, self.a)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return sub(self, other)

    def __rsub__(self, other: Any) -> PowerSum:
        return (-self) + other

    def __neg__(self) -> PowerSum:
        return scale(self, -1.0)

    def __mul__(self, other: Any) -> PowerSum:
        if isinstance(other, (int, float)):
            return scale(self, other)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return multiply(self, other)

    __rmul__ = __mul__

    def to_json(self) -> dict[str, Any]:
        return {"a": self.a, "terms": [[c, beta] for c, beta in self.terms]}

    @classmethod
    def from_json(cls, data: dict[str, Any] | str) -> PowerSum:
        if isinstance(data, str):
            data = json.loads(data)
        try:
            terms = [(c, beta) for c, beta in data["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed PowerSum JSON: {data!r}") from exc
        return cls(tuple(terms), data.get("a", 0.0))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        var = "x" if self.a == 0.0 else f"(x - {self.a!r})"
        return " + ".join(f"{c!r}*{var}^{beta!r}" for c, beta in self.terms)


def _same_base(p: PowerSum, q: PowerSum) -> None:
    if p.a != q.a:
        raise ValueError(f"mismatched base points: {p.a!r} != {q.a!r}")


def eval(p: PowerSum, x: Any) -> Any:  # noqa: A001
    """Evaluate *p* at the point(s) *x* (scalar or array)."""
    x_arr = np.asarray(x, dtype=float)
    t = x_arr - p.a
    if np.any(t < 0.0):
        raise ValueError(f"evaluation point below the base point {p.a!r}")
    if p.terms and p.min_exponent < 0.0 and np.any(t == 0.0):
        raise ValueError("negative exponent is singular at the base point")

    result = np.zeros_like(t)
    for c, beta in p.terms:
        result = result + c * t**beta

    return float(result) if result.ndim == 0 else result


def add(p: PowerSum, q: PowerSum) -> PowerSum:
    _same_base(p, q)
    return PowerSum(p.terms + q.terms, p.a)


def sub(p: PowerSum, q: PowerSum) -> PowerSum:
    _same_base(p, q)
    return PowerSum(p.terms + tuple((-c, beta) for c, beta in q.terms), p.a)


def scale(p: PowerSum, s: float) -> PowerSum:
    return PowerSum(tuple((s * c, beta) for c, beta in p.terms), p.a)


def multiply(p: PowerSum, q: PowerSum) -> PowerSum:
    """Exact product; raises if a resulting exponent is not > -1."""
    _same_base(p, q)
    return PowerSum(
        tuple((c * d, beta + gamma_) for c, beta in p.terms for d, gamma_ in q.terms),
        p.a,
    )


def square(p: PowerSum) -> PowerSum:
    return multiply(p, p)


def rl_integral(p: PowerSum, alpha: float) -> PowerSum:
    """Left Riemann-Liouville integral of order ``alpha > 0``, based at ``p.a``."""
    if not alpha > 0.0:
        raise ValueError(f"integral order must be positive, got {alpha!r}")

    return PowerSum(
        tuple(
            (c * gamma_ratio(beta + 1.0, beta + 1.0 + alpha), beta + alpha)
            for c, beta in p.terms
        ),
        p.a,
    )


def rl_derivative(p: PowerSum, alpha: float) -> PowerSum:
    """Left Riemann-Liouville derivative of order ``alpha`` in :math:`[0, 1]`.

    Terms whose coefficient hits a pole of the denominator Gamma (for example
    constants when ``alpha = 1``) are annihilated.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"derivative order must be in [0, 1], got {alpha!r}")
    if alpha == 0.0:
        return p

    terms = []
    for c, beta in p.terms:
        if rgamma(beta + 1.0 - alpha) == 0.0:
            continue
        if beta - alpha <= -1.0:
            raise ValueError(
                f"D^{alpha!r} of (x - a)^{beta!r} has non-integrable exponent {beta - alpha!r}"
            )
        terms.append((c * gamma(beta + 1.0) * rgamma(beta + 1.0 - alpha), beta - alpha))

    return PowerSum(tuple(terms), p.a)


def derivative(p: PowerSum) -> PowerSum:
    """Ordinary first derivative."""
    return rl_derivative(p, 1.0)


def definite_integral(p: PowerSum, lo: float, hi: float) -> float:
    """Exact integral of *p* over ``[lo, hi]`` with ``p.a <= lo <= hi``."""
    if lo < p.a or hi < lo:
        raise ValueError(f"interval [{lo!r}, {hi!r}] must satisfy {p.a!r} <= lo <= hi")

    tlo, thi = lo - p.a, hi - p.a
    return math.fsum(
        c / (beta + 1.0) * (thi ** (beta + 1.0) - tlo ** (beta + 1.0)) for c, beta in p.terms
    )


def max_coefficient_error(p: PowerSum, q: PowerSum) -> float:
    """Largest relative coefficient mismatch between two power sums.

    Returns ``inf`` when the exponent sets differ.
    """
    _same_base(p, q)
    if len(p.terms) != len(q.terms):
        return math.inf

    err = 0.0
    for (c, beta), (d, gamma_) in zip(p.terms, q.terms):
        if abs(beta - gamma_) > EXPONENT_TOL:
            return math.inf
        err = max(err, abs(c - d) / max(abs(c), abs(d)))

    return err
