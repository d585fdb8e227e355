"""Exact distributions and entropy on abelian groups.

Walks through the core objects: group specs, rational-mass distributions,
convolution, joints, and conditional entropy.
"""

import math
from fractions import Fraction as F

from entsum import Dist, JointDist, conditional_entropy, convolve, entropy
from entsum.groups import GroupSpec

Z = GroupSpec([0])        # the integers
Z8 = GroupSpec([8])       # Z/8Z
grid = GroupSpec([4, 0])  # Z/4Z x Z

print("== entropy of simple laws ==")
u4 = Dist.uniform(Z, [(i,) for i in range(4)])
print(f"uniform on 4 points: {entropy(u4):.6f}  (log 4 = {math.log(4):.6f})")
print(f"point mass:          {entropy(Dist.point(Z8, (3,))):.6f}")
p = Dist(Z, {(0,): F(1, 2), (1,): F(1, 4), (2,): F(1, 4)})
print(f"(1/2, 1/4, 1/4):     {entropy(p):.6f}  (1.5 log 2 = {1.5 * math.log(2):.6f})")

print("\n== convolution is the law of an independent sum ==")
bit = Dist.uniform(Z, [(0,), (1,)])
two = convolve(bit, bit, "+")
print("bit + bit:", {e[0]: str(v) for e, v in two.mass.items()})
print("subgroup closure on Z/2:", convolve(
    Dist.uniform(GroupSpec([2]), [(0,), (1,)]),
    Dist.uniform(GroupSpec([2]), [(0,), (1,)]), "+").mass)

print("\n== joints and the chain rule ==")
j = JointDist([Z, Z], {
    ((0,), (0,)): F(1, 2), ((0,), (1,)): F(1, 4), ((1,), (1,)): F(1, 4),
})
h_xy = j.entropy()
h_y = j.dist(1).entropy()
h_x_given_y = conditional_entropy(j, [0], [1])
print(f"Ent(X,Y) = {h_xy:.6f}, Ent(Y) = {h_y:.6f}")
print(f"Ent(X|Y) = {h_x_given_y:.6f} = Ent(X,Y) - Ent(Y) = {h_xy - h_y:.6f}")
