"""The sqrt-2 doubling floor for torsion-free groups, computed exactly.

Sums of n fair +-1 signs have doubling constant tending to sqrt 2 from
below-ish; torsion groups break the floor (a coset-uniform law has doubling
exactly 1).  Everything here is exact binomial arithmetic.
"""

import math

from entsum import (
    Dist,
    binomial_entropy_gap,
    doubling_constant,
    doubling_experiment,
    entxx_explore,
)
from entsum.groups import GroupSpec

print("== doubling ladder via X_n + X'_n ≡ X_2n ==")
for n in (2, 8, 32, 128, 512, 2048):
    print(f"  n = {n:5d}: sigma = {doubling_experiment(n):.6f}")
print(f"  sqrt(2)    = {math.sqrt(2):.6f}")

print("\n== entropy vs the lattice-gaussian reference ==")
for n in (16, 64, 256, 1024):
    print(f"  n = {n:5d}: gap = {binomial_entropy_gap(n):+.2e}")

print("\n== torsion contrast ==")
u2 = Dist.uniform(GroupSpec([2]), [(0,), (1,)])
print(f"  uniform on Z/2: sigma = {doubling_constant(u2):.6f} < sqrt 2")

print("\n== higher sums (exploratory, not asserted) ==")
for k in (1, 2, 3):
    print(f"  k = {k}: Ent(S_(k+1)) - Ent(S_k) - log sqrt((k+1)/k) = {entxx_explore(512, k):+.2e}")
