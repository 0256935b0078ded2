"""Riemann-Liouville fractional operators and exact minimizers of fractional
variational problems obtained by Leitmann's direct method."""

from fracvar.fracnum import Grid, SampledFunction
from fracvar.powerfn import PowerSum
from fracvar.report import VerificationReport
from fracvar.specfun import gamma, ln_gamma

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "PowerSum",
    "SampledFunction",
    "VerificationReport",
    "gamma",
    "ln_gamma",
]
