# Rewriting a Melnikov function in canonical form, then counting its free parameters.

from fractions import Fraction

from melkit.melnikov_core import assemble, expand, reduce_to_canonical
from melkit.perturbation import SmoothPerturbation
from melkit.zero_analysis import BoundQuery, jacobian_rank, max_zero_bound, rank_D_smooth

# Q(x, y) = (1 + cos x) y + (2 - cos x) y^2 + cos(x)^2 y^3, degree n = 2 in cos x.
# The y^2 column drops out of M(h) because the orbit is symmetric in y.

p = SmoothPerturbation(2, 1, 3, a=[[1, 2, 0], [1, -1, 0], [0, 0, 1]])
M = assemble(p)
print("M =", M)

form = reduce_to_canonical(M)
blk = form.block("I")
for b, a in zip(blk.basis, blk.A):
    print(f"  {str(b):10s} {a}")

# The reduction is exact: both forms have the same expansion.
print(expand(M, 6) == expand(form, 6))
print(expand(form, 4))

# The coefficient map is onto, so the canonical coefficients are free parameters.
print("map rank", blk.map_rank(), "of", len(blk.basis))

# Jacobian of the expansion coefficients w.r.t. those parameters
rep = jacobian_rank("smooth", 2, 2)
print(rep.label, "rank", rep.rank)
for row in rep.entries:
    print("  ", row)

# Hence at most n + 2m - 2 small zeros.
print("bound:", max_zero_bound(BoundQuery("smooth", 2, m=2)))

# Longer ladders need the tail matrix D to have full rank.
for m in range(2, 7):
    r = rank_D_smooth(2, m, 0)
    print(f"m={m}: rank {r.rank} of {m - 1}, recursion agrees: {r.checks['recursion_rank_agrees']}")
