"""Closed-form minimizers of the three model problems and their minimality scans."""

from fracvar import varprob
from fracvar.harness import control_minimality_scan, minimality_scan
from fracvar.powerfn import PowerSum
from fracvar.varprob import VariationalProblem

alpha = 0.5

c = 2.0
p1 = VariationalProblem.p1(alpha, c)
y1 = varprob.prop1_solution(c, alpha)
print("p1  y* =", y1, " J =", varprob.evaluate(p1, y1))
print("   ", minimality_scan(p1, y1).summary())

g, xi = PowerSum.polynomial([1.0, 1.0]), 0.3
p2 = VariationalProblem.p2(alpha, xi, g)
y2 = varprob.prop2_solution(g, xi, alpha)
A, _ = varprob.prop2_constants(p2.g, xi)
print("p2  J =", varprob.evaluate(p2, y2), " A^2 =", A**2)
print("   ", minimality_scan(p2, y2).summary())

sol = varprob.prop3_solution(alpha)
print("p3  cost =", varprob.control_cost(sol.controls))
print("   ", control_minimality_scan(alpha).summary())
