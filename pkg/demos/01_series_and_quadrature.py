# Small-h expansions of the orbit integrals, checked against quadrature.

from fractions import Fraction

import numpy as np

from melkit.melnikov_core import Basis, MelnikovCombination, expand, rewrite_I
from melkit.quadrature import quad_I, quad_J

# The closed-orbit integral of y dx is the area inside the orbit.
# Near the centre the orbit is a circle of radius sqrt(2h), so the area starts at 2*pi*h.

s = expand(Basis("I", 0, 1), 4)
print(s)

for h in [0.01, 0.1, 0.5]:
    q = quad_I(0, 1, h)
    print(f"h={h:<5} quad={q.value:.15f}  series={s(h):.15f}  err est={q.abs_error_estimate:.1e}")

# Upper-arc integrals with even powers of y start at half-integer powers of h.

sj = expand(Basis("J", 1, 2), 3)
print(sj)
print(quad_J(1, 2, 0.05).value, sj(0.05))

# Integration by parts links the families. One step of the relation:

rel = rewrite_I(0, 0, 0)
print(rel)
print("exact residual is zero:", rel.series_residual(20).is_zero())
print("quadrature residual at h=0.5:", rel.quad_residual(0.5))

# A tail term of the canonical form and its leading coefficient
L = Basis("L", 1, 1)
print(L, "=", MelnikovCombination("generic", tuple(L.expanded().items())))
print(expand(L, 3))

# How fast the 25-term series converges, over a grid
hs = np.geomspace(0.005, 0.3, 8)
s25 = expand(Basis("I", 2, 5), 25)
for h in hs:
    q = quad_I(2, 5, float(h), tol=1e-13).value
    print(f"{h:.4f}  rel err {abs(s25(float(h)) - q) / q:.2e}")
