"""Ruzsa distance, doubling constants, and the sumset inequality suite.

The doubling constant exp(Ent(X1+X2) - Ent(X)) is the entropy analogue of
|A+A|/|A|; it equals 1 exactly on coset-uniform laws and is Lipschitz along
the transport metric.
"""

import math
import random

from entsum import Dist, check_ese_suite, doubling_constant, ruzsa_distance
from entsum.fuzz import random_dist
from entsum.groups import GroupSpec

Z = GroupSpec([0])
Z4 = GroupSpec([4])

print("== doubling constants ==")
coset = Dist.uniform(Z4, [(1,), (3,)])
print(f"uniform on a coset:  sigma = {doubling_constant(coset):.6f}")
bit = Dist.uniform(Z, [(0,), (1,)])
print(f"uniform on {{0,1}}:    sigma = {doubling_constant(bit):.6f}  (sqrt 2 = {math.sqrt(2):.6f})")
interval = Dist.uniform(Z, [(i,) for i in range(10)])
print(f"uniform on [0,10):   sigma = {doubling_constant(interval):.6f}  (long APs approach 2)")

print("\n== Ruzsa distance ==")
print(f"d_R(bit, bit)      = {ruzsa_distance(bit, bit):.6f}  (> 0 even for X = Y)")
print(f"d_R(delta, delta') = {ruzsa_distance(Dist.point(Z, (0,)), Dist.point(Z, (9,))):.6f}")

print("\n== the inequality suite on one random instance ==")
rng = random.Random(0)
p = random_dist(rng, Z4, 4, 32)
q = random_dist(rng, Z4, 4, 32)
r = random_dist(rng, Z4, 4, 32)
for rep in check_ese_suite(p, q, r, n=2):
    tag = "measured" if rep.kind == "measured" else f"slack {rep.slack:+.6f}"
    print(f"  {rep.name:24} lhs {rep.lhs:8.4f}  rhs {rep.rhs:8.4f}  {tag}")
