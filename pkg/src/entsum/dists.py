"""Exact finitely supported distributions over abelian groups.

Masses are exact rationals and every structural identity (normalisation,
marginals, conditioning, convolution) is checked or computed in exact
arithmetic; only entropies are floating point.  Entropy sums use math.fsum,
so the result is independent of summation order.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .errors import IncompatibleGroupError, PreconditionError
from .groups import Element, GroupSpec

# ---------------------------------------------------------------------------
# the scalar building block F(x) = x log(1/x) and friends


def f_nats(p) -> float:
    """F(p) = p log(1/p) in nats, safe for rationals with huge numerators."""
    if p == 0:
        return 0.0
    if isinstance(p, Fraction):
        num, den = p.numerator, p.denominator
        # log of big ints is exact enough; num/den is correctly rounded and
        # may harmlessly underflow to 0.0 for masses below float resolution.
        return -(num / den) * (math.log(num) - math.log(den))
    x = float(p)
    if x <= 0.0:
        return 0.0
    return -x * math.log(x)


def f_prime(x: float) -> float:
    """F'(x) = log(1/x) - 1 for x > 0."""
    return -math.log(x) - 1.0


def log_plus(t: float) -> float:
    return max(math.log(t), 0.0) if t > 0 else 0.0


def _log_frac(p: Fraction) -> float:
    return math.log(p.numerator) - math.log(p.denominator)


# ---------------------------------------------------------------------------
# distributions


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"mass must be an exact rational, got {type(v).__name__}")


class Dist:
    """Finitely supported probability distribution with exact rational masses.

    Atoms are stored sorted by element so iteration order, and therefore
    every compensated sum, is deterministic.
    """

    __slots__ = ("group", "mass")

    def __init__(self, group: GroupSpec, mass: Mapping[Element, Fraction]):
        atoms = {}
        total = Fraction(0)
        for el, v in mass.items():
            v = _as_fraction(v)
            if v == 0:
                continue
            if v < 0:
                raise ValueError(f"negative mass {v} at {el}")
            el = group.reduce(el)
            atoms[el] = atoms.get(el, Fraction(0)) + v
            total += v
        if total != 1:
            raise ValueError(f"masses sum to {total}, expected exactly 1")
        self.group = group
        self.mass = {el: atoms[el] for el in sorted(atoms)}

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def uniform(group: GroupSpec, elements: Iterable[Element]) -> "Dist":
        els = sorted({group.reduce(e) for e in elements})
        if not els:
            raise ValueError("uniform distribution needs a non-empty set")
        w = Fraction(1, len(els))
        return Dist(group, {e: w for e in els})

    @staticmethod
    def point(group: GroupSpec, el: Element) -> "Dist":
        return Dist(group, {el: Fraction(1)})

    # -- basics ----------------------------------------------------------------

    def support(self) -> tuple[Element, ...]:
        return tuple(self.mass)

    def __getitem__(self, el: Element) -> Fraction:
        return self.mass.get(self.group.reduce(el), Fraction(0))

    def __iter__(self):
        return iter(self.mass.items())

    def __len__(self) -> int:
        return len(self.mass)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dist)
            and self.group == other.group
            and self.mass == other.mass
        )

    def __hash__(self):
        return hash((self.group, tuple(self.mass.items())))

    def __repr__(self) -> str:
        inner = ", ".join(f"{e}: {v}" for e, v in list(self.mass.items())[:6])
        more = ", ..." if len(self.mass) > 6 else ""
        return f"Dist({self.group.moduli}, {{{inner}{more}}})"

    def translate(self, c: Element) -> "Dist":
        g = self.group
        return Dist(g, {g.add(e, c): v for e, v in self.mass.items()})

    def negate(self) -> "Dist":
        g = self.group
        return Dist(g, {g.neg(e): v for e, v in self.mass.items()})

    def entropy(self) -> float:
        return entropy(self)

    def condition(self, predicate: Callable[[Element], bool]) -> "Dist":
        kept = {e: v for e, v in self.mass.items() if predicate(e)}
        total = sum(kept.values(), Fraction(0))
        if total == 0:
            raise PreconditionError("conditioning event has zero probability")
        return Dist(self.group, {e: v / total for e, v in kept.items()})


def entropy(p: Dist) -> float:
    """Shannon entropy in nats: sum of F over the masses."""
    return math.fsum(f_nats(v) for v in p.mass.values())


def _common_denominator(p: Dist) -> tuple[int, dict[Element, int]]:
    den = 1
    for v in p.mass.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den, {e: v.numerator * (den // v.denominator) for e, v in p.mass.items()}


def convolve(p: Dist, q: Dist, sign: str = "+") -> Dist:
    """Exact law of X ± Y for independent X ~ p, Y ~ q on the same group."""
    if p.group != q.group:
        raise IncompatibleGroupError("convolution needs a common ambient group")
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    g = p.group
    dp, np_ = _common_denominator(p)
    dq, nq = _common_denominator(q)
    if sign == "-":
        nq = {g.neg(e): n for e, n in nq.items()}
    acc: dict[Element, int] = {}
    for ex, nx in np_.items():
        for ey, ny in nq.items():
            s = g.add(ex, ey)
            acc[s] = acc.get(s, 0) + nx * ny
    den = dp * dq
    return Dist(g, {e: Fraction(n, den) for e, n in acc.items()})


def iterated_convolve(p: Dist, k: int, support_cap: int = 200_000) -> Dist:
    """k-fold convolution power of p (k >= 1) with a loud size cap."""
    from .errors import CapExceededError

    if k < 1:
        raise ValueError("k must be >= 1")
    out = p
    for _ in range(k - 1):
        out = convolve(out, p, "+")
        if len(out) > support_cap:
            raise CapExceededError(
                f"convolution support {len(out)} exceeds cap {support_cap}"
            )
    return out


def tv_distance(p: Dist, q: Dist) -> float:
    """Unnormalised total variation: sum of |p(x) - q(x)| (range [0, 2])."""
    if p.group != q.group:
        raise IncompatibleGroupError("total variation needs a common group")
    keys = set(p.mass) | set(q.mass)
    exact = sum(abs(p.mass.get(k, Fraction(0)) - q.mass.get(k, Fraction(0)))
                for k in keys)
    return float(exact)


class DistComparison(NamedTuple):
    equal: bool
    compatible: bool


def dist_equal(p: Dist, q: Dist) -> bool:
    """Exact distribution identity (X ≡ Y); False when the groups differ."""
    return p.group == q.group and p.mass == q.mass


def compare_dists(p: Dist, q: Dist) -> DistComparison:
    if p.group != q.group:
        return DistComparison(False, False)
    return DistComparison(p.mass == q.mass, True)


# ---------------------------------------------------------------------------
# joints

Atom = tuple[Element, ...]


class JointDist:
    """Finitely supported joint law over a tuple of group-valued coordinates."""

    __slots__ = ("groups", "mass")

    def __init__(self, groups: Sequence[GroupSpec], mass: Mapping[Atom, Fraction]):
        groups = tuple(groups)
        if not groups:
            raise ValueError("a joint needs at least one coordinate")
        atoms: dict[Atom, Fraction] = {}
        total = Fraction(0)
        for atom, v in mass.items():
            v = _as_fraction(v)
            if v == 0:
                continue
            if v < 0:
                raise ValueError(f"negative mass {v} at {atom}")
            if len(atom) != len(groups):
                raise ValueError(
                    f"atom {atom} has {len(atom)} coordinates, expected {len(groups)}"
                )
            atom = tuple(g.reduce(x) for g, x in zip(groups, atom))
            atoms[atom] = atoms.get(atom, Fraction(0)) + v
            total += v
        if total != 1:
            raise ValueError(f"masses sum to {total}, expected exactly 1")
        self.groups = groups
        self.mass = {a: atoms[a] for a in sorted(atoms)}

    @property
    def k(self) -> int:
        return len(self.groups)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JointDist)
            and self.groups == other.groups
            and self.mass == other.mass
        )

    def __hash__(self):
        return hash((self.groups, tuple(self.mass.items())))

    def __iter__(self):
        return iter(self.mass.items())

    def __len__(self) -> int:
        return len(self.mass)

    def _check_coords(self, coords: Sequence[int]) -> tuple[int, ...]:
        coords = tuple(coords)
        if not coords:
            raise ValueError("coordinate subset must be non-empty")
        if len(set(coords)) != len(coords):
            raise ValueError("coordinate subset has duplicates")
        for c in coords:
            if not 0 <= c < self.k:
                raise ValueError(f"coordinate {c} out of range for k={self.k}")
        return coords

    def marginal(self, coords: Sequence[int]) -> "JointDist":
        coords = self._check_coords(coords)
        acc: dict[Atom, Fraction] = {}
        for atom, v in self.mass.items():
            key = tuple(atom[c] for c in coords)
            acc[key] = acc.get(key, Fraction(0)) + v
        return JointDist([self.groups[c] for c in coords], acc)

    def dist(self, coord: int) -> Dist:
        m = self.marginal([coord])
        return Dist(self.groups[coord], {a[0]: v for a, v in m.mass.items()})

    def entropy(self) -> float:
        return math.fsum(f_nats(v) for v in self.mass.values())

    def push(
        self,
        fn: Callable[[Atom], Atom],
        groups: Sequence[GroupSpec],
    ) -> "JointDist":
        """Pushforward under an atom-wise map into new coordinates."""
        acc: dict[Atom, Fraction] = {}
        for atom, v in self.mass.items():
            key = fn(atom)
            acc[key] = acc.get(key, Fraction(0)) + v
        return JointDist(groups, acc)

    def sum_dist(self, coords: Sequence[int], signs: Sequence[int] | None = None) -> Dist:
        """Law of the signed sum of the selected coordinates (dependence kept)."""
        coords = self._check_coords(coords)
        g = self.groups[coords[0]]
        for c in coords:
            if self.groups[c] != g:
                raise IncompatibleGroupError("summed coordinates must share a group")
        if signs is None:
            signs = [1] * len(coords)
        acc: dict[Element, Fraction] = {}
        for atom, v in self.mass.items():
            s = g.zero()
            for c, sg in zip(coords, signs):
                t = atom[c] if sg > 0 else g.neg(atom[c])
                s = g.add(s, t)
            acc[s] = acc.get(s, Fraction(0)) + v
        return Dist(g, acc)

    def condition(self, coord: int, predicate: Callable[[Element], bool]) -> "JointDist":
        (coord,) = self._check_coords([coord])
        kept = {a: v for a, v in self.mass.items() if predicate(a[coord])}
        total = sum(kept.values(), Fraction(0))
        if total == 0:
            raise PreconditionError("conditioning event has zero probability")
        return JointDist(self.groups, {a: v / total for a, v in kept.items()})


def independent_joint(*dists: Dist) -> JointDist:
    """Product joint of independent marginals."""
    if not dists:
        raise ValueError("need at least one marginal")
    atoms: dict[Atom, Fraction] = {(): Fraction(1)}  # type: ignore[dict-item]
    for d in dists:
        nxt: dict[Atom, Fraction] = {}
        for prefix, v in atoms.items():
            for e, w in d.mass.items():
                nxt[prefix + (e,)] = v * w
        atoms = nxt
    return JointDist([d.group for d in dists], atoms)


def joint_entropy(j: JointDist, coords: Sequence[int]) -> float:
    """Entropy of the marginal on the given non-empty coordinate subset."""
    return j.marginal(coords).entropy()


def conditional_entropy(
    j: JointDist, target: Sequence[int], given: Sequence[int] = ()
) -> float:
    """Ent(target | given) as the p-weighted average of fibre entropies."""
    target = j._check_coords(target)
    given = tuple(given)
    if set(target) & set(given):
        raise ValueError("target and given coordinate sets overlap")
    if not given:
        return joint_entropy(j, target)
    # group atoms by the conditioning value, then average exact fibre entropies
    fibres: dict[Atom, dict[Atom, Fraction]] = {}
    weights: dict[Atom, Fraction] = {}
    for atom, v in j.mass.items():
        gkey = tuple(atom[c] for c in given)
        tkey = tuple(atom[c] for c in target)
        fib = fibres.setdefault(gkey, {})
        fib[tkey] = fib.get(tkey, Fraction(0)) + v
        weights[gkey] = weights.get(gkey, Fraction(0)) + v
    terms = []
    for gkey in sorted(fibres):
        w = weights[gkey]
        fib = fibres[gkey]
        ent = math.fsum(f_nats(v / w) for _, v in sorted(fib.items()))
        terms.append(float(w) * ent)
    return math.fsum(terms)


def condition_on_event(
    j: JointDist, coord: int, predicate: Callable[[Element], bool]
) -> JointDist:
    """Exact renormalised restriction to an event on one coordinate."""
    return j.condition(coord, predicate)


def ci_trials(j: JointDist, pivot: int) -> JointDist:
    """Two conditionally independent trials of the non-pivot block given the pivot.

    For a joint over (X, Y) with pivot Y this returns the law of (X1, X2, Y)
    with mass p(x1, y) p(x2, y) / p_Y(y); the non-pivot block may span several
    coordinates, which are replicated in order.
    """
    (pivot,) = j._check_coords([pivot])
    rest = [c for c in range(j.k) if c != pivot]
    if not rest:
        raise ValueError("joint needs at least one non-pivot coordinate")
    blocks: dict[Element, dict[Atom, Fraction]] = {}
    pivot_mass: dict[Element, Fraction] = {}
    for atom, v in j.mass.items():
        y = atom[pivot]
        x = tuple(atom[c] for c in rest)
        blk = blocks.setdefault(y, {})
        blk[x] = blk.get(x, Fraction(0)) + v
        pivot_mass[y] = pivot_mass.get(y, Fraction(0)) + v
    out: dict[Atom, Fraction] = {}
    for y, blk in blocks.items():
        py = pivot_mass[y]
        for x1, v1 in blk.items():
            for x2, v2 in blk.items():
                out[x1 + x2 + (y,)] = out.get(x1 + x2 + (y,), Fraction(0)) + v1 * v2 / py
    groups = [j.groups[c] for c in rest] * 2 + [j.groups[pivot]]
    return JointDist(groups, out)


def is_independent(j: JointDist, coords_a: Sequence[int], coords_b: Sequence[int]) -> bool:
    """Exact rational test that two coordinate blocks are independent."""
    a = j.marginal(coords_a)
    b = j.marginal(coords_b)
    ab = j.marginal(tuple(coords_a) + tuple(coords_b))
    ka = len(tuple(coords_a))
    for atom, v in ab.mass.items():
        va = a.mass.get(atom[:ka], Fraction(0))
        vb = b.mass.get(atom[ka:], Fraction(0))
        if v != va * vb:
            return False
    # absent atoms must have zero product mass
    for xa, va in a.mass.items():
        for xb, vb in b.mass.items():
            if xa + xb not in ab.mass and va * vb != 0:
                return False
    return True
