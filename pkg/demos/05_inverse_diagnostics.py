"""Structure of small-doubling laws: coset detection and core diagnostics."""

from fractions import Fraction as F

from entsum import (
    Dist,
    additive_energy,
    detect_coset_uniform,
    verify_inverse_fixtures,
)
from entsum.inverse import effective_support_search
from entsum.groups import GroupSpec
from entsum.torsionfree import binomial_dist

Z = GroupSpec([0])
Z12 = GroupSpec([12])

print("== doubling 1 exactly characterises coset-uniform laws ==")
for p, label in [
    (Dist.uniform(Z12, [(1,), (4,), (7,), (10,)]), "uniform on 1 + {0,3,6,9}"),
    (Dist(Z12, {(0,): F(1, 2), (3,): F(1, 2)}), "uniform on {0,3} (not a coset)"),
    (Dist.uniform(Z, [(0,), (1,)]), "uniform on {0,1} in Z"),
]:
    rep = detect_coset_uniform(p)
    print(f"  {label:34} sigma = {rep.doubling:.6f}  accepted = {rep.is_coset_uniform}")

print("\n== effective support of a gaussian-like walk ==")
walk = binomial_dist(24)
core = effective_support_search(walk, 2.0)
print(f"window C = {core.c_value}, |A| = {len(core.core_set)}, mass = {float(core.mass):.3f}")
print(f"log|A| - Ent = {core.log_size_gap:+.4f}, additive energy ratio = {core.energy_ratio:.3f}")

print("\n== additive energy ==")
interval = {(i,) for i in range(20)}
print(f"E([0,20)) = {additive_energy(interval, Z)}  (~(2/3)n^3 = {2 / 3 * 20**3:.0f})")
coset = {(i,) for i in range(0, 12, 3)}
print(f"E(subgroup of order 4) = {additive_energy(coset, Z12)} = 4^3")

print("\n== structural fixtures ==")
u32 = Dist.uniform(Z, [(i,) for i in range(32)])
bit = Dist.uniform(Z, [(0,), (1,)])
results = verify_inverse_fixtures([
    {"name": "interval + bit noise", "kind": "factorised", "uniform": u32, "noise": bit},
    {"name": "self pair", "kind": "paired", "x": walk, "y": walk},
])
for r in results:
    print(f"  {r.name:22} ok = {r.ok}  {r.details}")
