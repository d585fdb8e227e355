"""Differential entropy, the discrete bridge, and exact density convolution."""

from fractions import Fraction as F

from entsum import Dist, PiecewiseDensity, abbn_check, bridge_entropy, continuous_entropy, entropy
from entsum.torsionfree import convolve_densities
from entsum.groups import GroupSpec

Z = GroupSpec([0])

print("== closed-form differential entropies ==")
print(f"uniform [0,1]: {continuous_entropy(PiecewiseDensity.uniform(0, 1)):.6f}")
print(f"uniform [0,2]: {continuous_entropy(PiecewiseDensity.uniform(0, 2)):.6f}")
tri = PiecewiseDensity([0, 1, 2], [(0, 1), (2, -1)])
print(f"triangle on [0,2]: {continuous_entropy(tri):.6f} (exactly 1/2)")

print("\n== the bridge: Ent_R(X + U) = Ent(X) ==")
p = Dist(Z, {(0,): F(1, 2), (3,): F(1, 4), (4,): F(1, 4)})
dens, ent = bridge_entropy(p)
print(f"discrete {entropy(p):.9f} vs continuous {ent:.9f}")

print("\n== exact convolution of densities ==")
u = PiecewiseDensity.uniform(0, 1)
conv = convolve_densities(u, u)
print("uniform * uniform pieces:", [tuple(str(c) for c in poly) for poly in conv.polys])
print(f"entropy of the triangle law: {conv.entropy():.6f}")

print("\n== the half-log-2 gain under independent sums ==")
rep = abbn_check(u, u)
print(f"Ent(S+T) = {rep.rhs:.6f} >= (Ent S + Ent T)/2 + (log 2)/2 = {rep.lhs:.6f}")
rep = abbn_check(tri, u)
print(f"triangle + uniform: slack {rep.slack:+.6f}")
