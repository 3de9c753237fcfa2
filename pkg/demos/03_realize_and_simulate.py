# Build a perturbation with three small limit cycles and watch them in the flow.

import numpy as np

from melkit.io import perturbation_to_json
from melkit.pendulum_sim import SystemSpec, find_cycles, melnikov_agreement
from melkit.quadrature import quad_melnikov
from melkit.zero_analysis import BoundQuery, realize_zeros

q = BoundQuery("smooth", 1, m=2)
real = realize_zeros(q, [0.02, 0.06, 0.12])
print("verified:", real.verified)
print("zeros of M:", real.verified_zeros)
print(perturbation_to_json(real.perturbation))

# M(h) along a grid
for h in np.geomspace(0.01, 0.2, 10):
    print(f"h={h:.4f}  M={quad_melnikov(real.perturbation, float(h)).value:+.3e}")

# The flow with eps = 1e-4: the energy change over one turn, divided by eps, tracks M.
spec = SystemSpec(1e-4, real.perturbation)
rep = melnikov_agreement(spec, np.geomspace(0.005, 0.24, 12).tolist())
for r in rep.rows:
    print(f"h={r['h']:.4f}  d/eps={r['d_over_eps']:+.6e}  M={r['melnikov']:+.6e}")
print("signs agree:", rep.signs_agree)

# Fixed points of the return map; they alternate in stability.
cycles = find_cycles(spec, (0.01, 0.2), grid=32)
for c in cycles.cycles:
    print(f"cycle at h={c.h_star:.6f} ({'attracting' if c.stability < 0 else 'repelling'})")
print(cycles.diagnostics)
