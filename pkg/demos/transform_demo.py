"""Euler-type transform of the rank-one seed, evaluated three ways.

Prints the Jackson transform at a few points next to the closed 2phi1 form
and the residual of the stacked transform in the convolved system.
"""
import numpy as np

from qmc import system as sysm
from qmc.qseries import KernelSpec
from qmc.solutions import SeedSolution, closed_form_qhg, convolve_solution, seed_tuple

q, mu, lam, alpha, beta = 0.4, 0.7, 0.3, 1.0, 1.5
seed = SeedSolution(mu, (alpha,), (beta,), q)
t = seed_tuple(seed)
kernel = KernelSpec("K1", lam)
conv = sysm.q_convolution(t, lam)

print(f"{'x':>22} {'Jackson sum':>40} {'closed form':>40} {'rel. gap':>9}")
for x in (0.3 + 0.2j, 2.0 + 0j, -1.1 + 0.4j):
    jackson = convolve_solution(t, seed, kernel, x, xi=1 / alpha)[0]
    closed = closed_form_qhg("y0al", q, mu, lam, alpha, beta, x, 1)
    print(f"{x!s:>22} {jackson:>40.14g} {closed:>40.14g} {abs(jackson - closed) / abs(closed):9.1e}")

Y = lambda x: convolve_solution(t, seed, kernel, x, xi=1 / alpha)
res = max(sysm.residual(conv, Y, (0.37 + 0.21j) * q**n) for n in range(10))
print(f"\nresidual of the stacked transform in the convolved {conv.m}x{conv.m} system: {res:.1e}")

mc = sysm.middle_convolution(t, lam)
print("middle convolution dimensions:", mc.dims())
print("reduced residues:")
for B in mc.reduced.matrices:
    print(np.round(B, 6))
