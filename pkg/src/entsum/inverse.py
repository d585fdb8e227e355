"""Inverse-theorem diagnostics: exact coset detection, effective supports,
additive energy, and the curated fixture checks for the structural results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .dists import Dist, entropy
from .errors import CapExceededError
from .groups import Element, GroupSpec, is_subgroup
from .metrics import doubling_constant, ruzsa_distance
from .transport import independent_noise_certificate, reverse_certificate


@dataclass
class CosetReport:
    is_coset_uniform: bool
    subgroup: frozenset | None
    base: Element | None
    doubling: float


def detect_coset_uniform(p: Dist) -> CosetReport:
    """Exact detector: accepts iff p is uniform on a coset of a finite subgroup.

    Uses the characterisation through the difference set of the support: the
    support minus itself must be a subgroup, the support must be one coset of
    it, and all masses must be equal (tested as exact rationals).
    """
    g = p.group
    supp = p.support()
    diffs = frozenset(g.sub(a, b) for a in supp for b in supp)
    doubling = doubling_constant(p)
    if not is_subgroup(g, diffs):
        return CosetReport(False, None, None, doubling)
    base = supp[0]
    coset = {g.add(base, d) for d in diffs}
    if set(supp) != coset:
        return CosetReport(False, None, None, doubling)
    masses = set(p.mass.values())
    if len(masses) != 1:
        return CosetReport(False, None, None, doubling)
    return CosetReport(True, diffs, base, doubling)


@dataclass
class CoreReport:
    core_set: tuple[Element, ...]
    mass: Fraction
    log_size_gap: float
    energy_ratio: float
    c_value: float
    c_too_small: bool = field(default=False)


def effective_support(p: Dist, c: float = 2.0) -> CoreReport:
    """Density window around exp(-Ent): A = {x: e^-H / C <= p(x) <= C e^-H}.

    When the window captures less than half the mass the report flags C as
    too small; callers typically double C and retry (see
    effective_support_search).
    """
    if c < 1:
        raise ValueError("C must be >= 1")
    h = entropy(p)
    lo, hi = math.exp(-h) / c, math.exp(-h) * c
    core = tuple(x for x, v in p.mass.items() if lo <= float(v) <= hi)
    mass = sum((p.mass[x] for x in core), Fraction(0))
    if core:
        gap = math.log(len(core)) - h
        ratio = additive_energy(set(core), p.group) / len(core) ** 3
    else:
        gap = -h
        ratio = 0.0
    return CoreReport(core, mass, gap, ratio, c, c_too_small=mass < Fraction(1, 2))


def effective_support_search(
    p: Dist, c0: float = 2.0, max_doublings: int = 40
) -> CoreReport:
    """Geometric search for the smallest tried C whose window holds half the mass."""
    c = c0
    for _ in range(max_doublings):
        rep = effective_support(p, c)
        if not rep.c_too_small:
            return rep
        c *= 2.0
    return effective_support(p, c)


def additive_energy(a_set: Iterable[Element], group: GroupSpec, cap: int = 2000) -> int:
    """Number of quadruples with a1 + a2 = a3 + a4, as sum of squared sum-counts."""
    els = list(a_set)
    if len(els) > cap:
        raise CapExceededError(f"additive energy cap {cap} exceeded: {len(els)}")
    counts: dict[Element, int] = {}
    for x in els:
        for y in els:
            s = group.add(x, y)
            counts[s] = counts.get(s, 0) + 1
    return sum(r * r for r in counts.values())


# ---------------------------------------------------------------------------
# curated fixtures for the structural conclusions


@dataclass
class FixtureResult:
    name: str
    kind: str
    ok: bool
    details: dict


def verify_inverse_fixtures(corpus: Sequence[dict]) -> list[FixtureResult]:
    """Check structural conclusions on a curated fixture corpus.

    Two fixture kinds:
      * "factorised": {"uniform": Dist, "noise": Dist} with X = U + Z built by
        independent convolution; exhibits an explicit transport certificate
        from X back to U by reversing the noise coupling and records its cost.
      * "paired": {"x": Dist, "y": Dist}; checks the doubling bound
        log sigma[X] <= 4 d_R(X, Y) that follows from the metric suite.
    """
    results = []
    for fx in corpus:
        name = fx.get("name", "fixture")
        kind = fx["kind"]
        if kind == "factorised":
            u: Dist = fx["uniform"]
            z: Dist = fx["noise"]
            fwd = independent_noise_certificate(u, z)  # U -> X = U + Z
            x = fwd.target
            back = reverse_certificate(fwd)  # X -> U
            back.validate(x)
            ok = back.target == u
            results.append(
                FixtureResult(
                    name,
                    kind,
                    ok,
                    {
                        "transport_cost": back.cost,
                        "noise_entropy": entropy(z),
                        "x_entropy": entropy(x),
                        "uniform_entropy": entropy(u),
                    },
                )
            )
        elif kind == "paired":
            x: Dist = fx["x"]
            y: Dist = fx["y"]
            log_sigma = math.log(doubling_constant(x))
            bound = 4.0 * ruzsa_distance(x, y)
            results.append(
                FixtureResult(
                    name,
                    kind,
                    log_sigma <= bound + 1e-9,
                    {"log_sigma": log_sigma, "four_ruzsa": bound},
                )
            )
        else:
            raise ValueError(f"unknown fixture kind {kind!r}")
    return results
