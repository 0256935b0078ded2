"""Exact fractional calculus on power sums, checked against the numeric schemes."""

import numpy as np

from fracvar import powerfn
from fracvar.fracnum import Grid, SampledFunction, rl_derivative_num, rl_integral_num
from fracvar.powerfn import PowerSum

alpha = 0.5
p = PowerSum(((1.0, 0.5), (-2.0, 2.0)))
print("f         =", p)
print("I^a f     =", powerfn.rl_integral(p, alpha))
print("D^a f     =", powerfn.rl_derivative(p, alpha))
print("D^a I^a f =", powerfn.rl_derivative(powerfn.rl_integral(p, alpha), alpha))

# the same operators on a grid
for n in (129, 513, 2049):
    grid = Grid(0.0, 1.0, n)
    f = SampledFunction.sample(p.__call__, grid)
    mask = grid.x >= 0.1
    e_int = np.max(np.abs(rl_integral_num(f, alpha).values - powerfn.rl_integral(p, alpha)(grid.x)))
    e_der = np.max(np.abs(rl_derivative_num(f, alpha).values[mask] - powerfn.rl_derivative(p, alpha)(grid.x[mask])))
    print(f"n={n:5d}  integral err {e_int:.2e}  derivative err (x >= 0.1) {e_der:.2e}")
