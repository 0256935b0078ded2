"""Gamma function helpers restricted to positive real arguments."""

import math

__all__ = ["gamma", "ln_gamma", "rgamma", "gamma_ratio"]

# Arguments closer than this to a non-positive integer are treated as poles.
_POLE_TOL = 1e-12


def _check_positive(z: float) -> float:
    z = float(z)
    if not math.isfinite(z) or z <= 0.0:
        raise ValueError(f"Gamma argument must be a positive real, got {z!r}")
    return z


def gamma(z: float) -> float:
    r"""Evaluate :math:`\Gamma(z)` for :math:`z > 0`.

    Raises :class:`ValueError` for non-positive arguments and
    :class:`OverflowError` once the result exceeds the float range (``z > 171.6``).
    """
    return math.gamma(_check_positive(z))


def ln_gamma(z: float) -> float:
    r"""Evaluate :math:`\log\Gamma(z)` for :math:`z > 0`."""
    return math.lgamma(_check_positive(z))


def _is_pole(z: float) -> bool:
    return z <= _POLE_TOL and abs(z - round(z)) <= _POLE_TOL


def rgamma(z: float) -> float:
    r"""Reciprocal Gamma :math:`1/\Gamma(z)`, an entire function.

    Unlike :func:`gamma` this accepts any real argument; it returns exactly 0 at
    the poles :math:`z = 0, -1, -2, \dots` so that power-rule coefficients of
    annihilated terms vanish cleanly.
    """
    z = float(z)
    if _is_pole(z):
        return 0.0
    if z > 171.0:
        return 0.0 if z > 180.0 else math.exp(-math.lgamma(z))
    return 1.0 / math.gamma(z)


def gamma_ratio(num: float, den: float) -> float:
    r"""Compute :math:`\Gamma(num) / \Gamma(den)` without intermediate overflow.

    ``num`` must be positive; ``den`` may be any real (poles of the denominator
    give 0).
    """
    _check_positive(num)
    if _is_pole(den):
        return 0.0
    if num < 170.0 and den < 170.0:
        return math.gamma(num) * rgamma(den)
    if den <= 0.0:
        raise OverflowError("Gamma ratio overflows for large numerator and negative denominator")
    return math.exp(math.lgamma(num) - math.lgamma(den))
