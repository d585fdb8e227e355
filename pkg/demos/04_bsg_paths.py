"""The path-joint construction for weakly dependent pairs.

From (X, Y), draw two conditionally independent X-trials given Y, then an
independent Y-trial given the first X-copy.  The resulting (X1, X2, Y, Y')
behaves like a uniformly random path of length three in a bipartite graph,
and its conditional entropies obey explicit bounds in the dependence defect.
"""

from fractions import Fraction as F

from entsum import BsgInstance, Dist, JointDist, build_path_joint, verify_bsg
from entsum.dists import independent_joint
from entsum.groups import GroupSpec

Z2 = GroupSpec([2])
bit = Dist.uniform(Z2, [(0,), (1,)])

print("== independent pair: defect 0, every bound tight ==")
inst = BsgInstance.from_joint(independent_joint(bit, bit))
print(f"log K = {inst.log_k:.6f}")
path = build_path_joint(inst)
print(f"path joint: {len(path)} equally likely paths")
for rep in verify_bsg(inst):
    print(f"  {rep.name:24} slack {rep.slack:+.6f}")

print("\n== correlated pair ==")
j = JointDist([Z2, Z2], {
    ((0,), (0,)): F(3, 8), ((0,), (1,)): F(1, 8),
    ((1,), (0,)): F(1, 8), ((1,), (1,)): F(3, 8),
})
inst = BsgInstance.from_joint(j)
print(f"log K = {inst.log_k:.6f}")
for rep in verify_bsg(inst):
    print(f"  {rep.name:24} lhs {rep.lhs:7.4f}  rhs {rep.rhs:7.4f}  slack {rep.slack:+.4f}")
