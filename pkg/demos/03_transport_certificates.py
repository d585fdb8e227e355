"""Entropy transport: exact couplings, splitting, and uniformisation.

The transport cost from X to Y is the least entropy of a Z (possibly
dependent on X) with X + Z distributed as Y.  The exact oracle enumerates
coupling-polytope vertices; constructive pipelines emit certificates whose
validity is an exact rational identity, with the realized cost reported.
"""

import math
from fractions import Fraction as F

from entsum import (
    Dist,
    entropy,
    flatten,
    independent_noise_certificate,
    reverse_certificate,
    transport_exact,
    uniformise_coset_progression,
    uniformise_group,
)
from entsum.groups import GroupSpec
from entsum.progressions import CosetProgression, uniform_on

Z = GroupSpec([0])
Z2 = GroupSpec([2])

print("== the exact oracle at tiny scale ==")
biased = Dist(Z2, {(0,): F(3, 4), (1,): F(1, 4)})
uniform = Dist.uniform(Z2, [(0,), (1,)])
cert = transport_exact(biased, uniform)
print(f"trans((3/4,1/4) -> uniform) = {cert.cost:.6f}")
print("optimal coupling:", {(x[0], z[0]): str(v) for (x, z), v in cert.coupling.mass.items()})
back = reverse_certificate(cert)
print(f"reversed certificate cost  = {back.cost:.6f} (transport is symmetric)")

print("\n== translates are free; collapses are not ==")
bit = Dist.uniform(Z, [(0,), (1,)])
print(f"trans(bit -> bit+7) = {transport_exact(bit, bit.translate((7,))).cost:.6f}")
print(f"trans(bit -> point) = {transport_exact(bit, Dist.point(Z, (0,))).cost:.6f}")

print("\n== flattening toward uniform ==")
p = Dist(GroupSpec([8]), {(0,): F(1, 2), (1,): F(1, 4), (2,): F(1, 4)})
flat, trace, fcert = flatten(p, 4)
print("per-round l2 distance to uniform:", [f"{n:.4f}" for n in trace.norms])
print(f"certificate cost {fcert.cost:.4f} <= 4 log 2 = {4 * math.log(2):.4f}")

print("\n== uniformisation certificates ==")
g = GroupSpec([16])
q = Dist(g, {(i,): (F(3, 32) if i < 8 else F(1, 32)) for i in range(16)})
ucert = uniformise_group(q, 10)
ucert.validate(q)
deficit = math.log(16) - entropy(q)
print(f"entropy deficit log K = {deficit:.4f}; certificate cost = {ucert.cost:.4f}")

cp = CosetProgression(Z, [(0,)], (0,), [(1,)], [8])
evens = Dist.uniform(Z, [(0,), (2,), (4,), (6,)])
pcert = uniformise_coset_progression(evens, cp)
print(f"evens of [0,8) -> uniform [0,8): cost = {pcert.cost:.6f} (log 2 = {math.log(2):.6f})")

print("\n== splitting: add an independent fair bit ==")
noise = independent_noise_certificate(evens, bit)
print(f"evens + bit ≡ uniform [0,8): {noise.target == uniform_on(cp)}, cost {noise.cost:.6f}")
