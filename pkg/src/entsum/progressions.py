"""Coset progressions: enumeration, properness, uniform laws, box embeddings."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .dists import Dist
from .errors import CapExceededError, NonProperError, PreconditionError
from .groups import Element, GroupSpec, is_subgroup

ENUM_CAP = 100_000


@dataclass(frozen=True)
class CosetProgression:
    """H + P with H a finite subgroup and P a generalised progression.

    P = {base + n1 r1 + ... + nd rd : 0 <= ni < Ni}; d is the rank.
    """

    group: GroupSpec
    subgroup: tuple[Element, ...]
    base: Element
    steps: tuple[Element, ...]
    lengths: tuple[int, ...]

    def __init__(self, group, subgroup, base, steps=(), lengths=()):
        subgroup = tuple(sorted(group.reduce(h) for h in subgroup))
        base = group.reduce(base)
        steps = tuple(group.reduce(s) for s in steps)
        lengths = tuple(int(n) for n in lengths)
        if len(steps) != len(lengths):
            raise ValueError("steps and lengths must have equal rank")
        if any(n < 1 for n in lengths):
            raise ValueError("progression lengths must be positive")
        if not is_subgroup(group, subgroup):
            raise ValueError("subgroup set fails the subgroup check")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "subgroup", subgroup)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "lengths", lengths)

    @property
    def rank(self) -> int:
        return len(self.steps)

    def nominal_size(self) -> int:
        return len(self.subgroup) * math.prod(self.lengths)

    def _element(self, h: Element, ns: tuple[int, ...]) -> Element:
        g = self.group
        out = g.add(h, self.base)
        for n, r in zip(ns, self.steps):
            out = g.add(out, g.scalar(n, r))
        return out

    def enumerate(self, cap: int = ENUM_CAP) -> frozenset[Element]:
        """Exact element set, with collisions collapsed."""
        if self.nominal_size() > cap:
            raise CapExceededError(
                f"progression size {self.nominal_size()} exceeds cap {cap}"
            )
        out = set()
        for h in self.subgroup:
            for ns in itertools.product(*(range(n) for n in self.lengths)):
                out.add(self._element(h, ns))
        return frozenset(out)

    def is_proper(self, cap: int = ENUM_CAP) -> bool:
        return is_t_proper(self, 1, cap)


def _count_below(t: Fraction, n: int) -> int:
    """Number of integers in [0, t*n)."""
    tn = t * n
    if tn.denominator == 1:
        return int(tn)
    return int(math.ceil(tn))


def is_t_proper(cp: CosetProgression, t, cap: int = ENUM_CAP) -> bool:
    """True iff all sums with ni in [0, t*Ni) are pairwise distinct."""
    t = Fraction(t)
    if t <= 0:
        raise ValueError("t must be positive")
    counts = [_count_below(t, n) for n in cp.lengths]
    total = len(cp.subgroup) * math.prod(counts)
    if total > cap:
        raise CapExceededError(f"t-proper check needs {total} sums, cap {cap}")
    seen = set()
    for h in cp.subgroup:
        for ns in itertools.product(*(range(c) for c in counts)):
            el = cp._element(h, ns)
            if el in seen:
                return False
            seen.add(el)
    return True


def uniform_on(cp: CosetProgression, cap: int = ENUM_CAP) -> Dist:
    return Dist.uniform(cp.group, cp.enumerate(cap))


@dataclass(frozen=True)
class BoxEmbedding:
    """Bijection tables between a proper H+P and the box H x prod [0, Ni).

    Box points are pairs (h, ns); the guard against wraparound lives in the
    transport pushforward, which only ever needs differences inside B - B.
    """

    progression: CosetProgression
    forward: dict  # (h, ns) -> group element
    backward: dict  # group element -> (h, ns)

    def pull(self, p: Dist) -> dict:
        """Mass map of p re-indexed by box points; support must lie in H+P."""
        out = {}
        for e, v in p.mass.items():
            if e not in self.backward:
                raise PreconditionError(
                    f"support element {e} lies outside the progression"
                )
            out[self.backward[e]] = v
        return out

    def push_shift(self, dh: Element, dns: tuple[int, ...]) -> Element:
        """Ambient image of a box difference (dh, dns) with dns in prod (-Ni, Ni)."""
        cp = self.progression
        g = cp.group
        out = dh
        for n, r in zip(dns, cp.steps):
            out = g.add(out, g.scalar(n, r))
        return out


def box_embedding(cp: CosetProgression, proper_required: bool = True) -> BoxEmbedding:
    if proper_required and not cp.is_proper():
        raise NonProperError("progression is not proper; embedding refused")
    forward = {}
    backward = {}
    for h in cp.subgroup:
        for ns in itertools.product(*(range(n) for n in cp.lengths)):
            el = cp._element(h, ns)
            key = (h, ns)
            forward[key] = el
            if el in backward and proper_required:
                raise NonProperError(f"collision at {el} despite properness check")
            backward[el] = key
    return BoxEmbedding(cp, forward, backward)
