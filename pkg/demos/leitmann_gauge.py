"""Leitmann's direct method: the transformed functional differs by a constant."""

from fracvar import varprob
from fracvar.harness import make_perturbation
from fracvar.leitmann import prop1_transformation, verify_constant_difference, verify_exact_differential
from fracvar.varprob import VariationalProblem

alpha, c = 0.75, -1.0
problem = VariationalProblem.p1(alpha, c)
T = prop1_transformation(problem)
y_star = varprob.prop1_solution(c, alpha)

cands = [y_star] + [y_star + e * make_perturbation(alpha, k).eta for k, e in enumerate((0.5, -0.3, 0.1, 0.7), 1)]
for y in cands:
    J, Jt = varprob.evaluate(problem, y), varprob.evaluate(problem, T.forward(y))
    print(f"J = {J:.12f}   J(transformed) = {Jt:.12f}   J - J~ = {J - Jt:.12f}")

print(verify_exact_differential(problem, T, cands[1]).summary())
print(verify_constant_difference(problem, T, cands).summary())
