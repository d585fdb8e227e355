"""Entropy transport: exact oracle at tiny scale plus constructive certificates.

The transport cost from p to q is the infimum of Ent(Z) over couplings with
X + Z distributed exactly as q.  The oracle minimises the (concave) entropy
of the Z-marginal over the coupling polytope by enumerating its vertices
(acyclic supports of the bipartite row/column graph); the constructive side
builds certificates by flattening with two-point shifts, density-level
splitting, and sigma-splits, all in exact rational arithmetic.  Certificate
validity is always exact; only costs are floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .dists import Dist, JointDist, convolve, entropy, f_nats
from .errors import (
    CapExceededError,
    CertificateError,
    IncompatibleGroupError,
    PreconditionError,
    WraparoundError,
)
from .groups import Element, GroupSpec
from .metrics import density_level
from .progressions import CosetProgression, box_embedding

SIGMA_MIN = Fraction(1, 2**20)
_MAX_FLATTEN_ROUNDS = 400


# ---------------------------------------------------------------------------
# certificates


class TransportCertificate:
    """Exact coupling witnessing source + Z ≡ target, with realized Ent(Z)."""

    __slots__ = ("coupling", "target")

    def __init__(self, coupling: JointDist, target: Dist):
        if coupling.k != 2 or coupling.groups[0] != coupling.groups[1]:
            raise CertificateError("coupling must be a joint over (X, Z) in one group")
        if coupling.groups[0] != target.group:
            raise CertificateError("coupling and target live in different groups")
        self.coupling = coupling
        self.target = target

    def source(self) -> Dist:
        return self.coupling.dist(0)

    def noise(self) -> Dist:
        return self.coupling.dist(1)

    @property
    def cost(self) -> float:
        return entropy(self.noise())

    def pushforward(self) -> Dist:
        return self.coupling.sum_dist([0, 1])

    def validate(self, source: Dist | None = None) -> None:
        """Exact marginal and pushforward checks; raises on any mismatch."""
        if self.pushforward() != self.target:
            raise CertificateError("pushforward of coupling differs from target")
        if source is not None and self.source() != source:
            raise CertificateError("X-marginal of coupling differs from source")

    def to_json(self) -> dict:
        return {
            "group": list(self.target.group.moduli),
            "cost": self.cost,
            "coupling": [
                {"x": list(x), "z": list(z), "num": v.numerator, "den": v.denominator}
                for (x, z), v in self.coupling.mass.items()
            ],
            "target": [
                {"x": list(e), "num": v.numerator, "den": v.denominator}
                for e, v in self.target.mass.items()
            ],
        }


def identity_certificate(p: Dist, shift: Element | None = None) -> TransportCertificate:
    """Deterministic shift certificate; cost 0."""
    g = p.group
    c = g.zero() if shift is None else g.reduce(shift)
    coupling = JointDist([g, g], {(x, c): v for x, v in p.mass.items()})
    return TransportCertificate(coupling, p.translate(c))


def independent_noise_certificate(p: Dist, z: Dist) -> TransportCertificate:
    """Certificate p -> p * z with Z independent of X."""
    if p.group != z.group:
        raise IncompatibleGroupError("noise must live in the same group")
    g = p.group
    atoms = {}
    for x, vx in p.mass.items():
        for zz, vz in z.mass.items():
            atoms[(x, zz)] = vx * vz
    return TransportCertificate(JointDist([g, g], atoms), convolve(p, z, "+"))


def independent_pair_certificate(p: Dist, q: Dist) -> TransportCertificate:
    """Always-feasible certificate p -> q from the product coupling of (X, Y)."""
    if p.group != q.group:
        raise IncompatibleGroupError("endpoints must share a group")
    g = p.group
    atoms: dict = {}
    for x, vx in p.mass.items():
        for y, vy in q.mass.items():
            key = (x, g.sub(y, x))
            atoms[key] = atoms.get(key, Fraction(0)) + vx * vy
    return TransportCertificate(JointDist([g, g], atoms), q)


def reverse_certificate(c: TransportCertificate) -> TransportCertificate:
    """Explicit reversal: atoms ((x, z), m) become ((x+z, -z), m).

    The result transports the old target back to the old source at equal cost
    (negation permutes the Z-support), and is re-checkable exactly.
    """
    g = c.target.group
    atoms: dict = {}
    for (x, z), v in c.coupling.mass.items():
        key = (g.add(x, z), g.neg(z))
        atoms[key] = atoms.get(key, Fraction(0)) + v
    return TransportCertificate(JointDist([g, g], atoms), c.source())


def compose_certificates(
    c1: TransportCertificate, c2: TransportCertificate
) -> TransportCertificate:
    """Glue X -> W and W -> Y into X -> Y with Z = Z1 + Z2.

    Z2 is drawn conditionally on W = X + Z1 from the second coupling, so the
    composed coupling is exact whenever c2's source equals c1's target.
    """
    if c2.source() != c1.target:
        raise CertificateError("second certificate does not start at the first's target")
    g = c1.target.group
    w_mass = c1.target.mass
    by_w: dict = {}
    for (w, z2), v in c2.coupling.mass.items():
        by_w.setdefault(w, []).append((z2, v))
    atoms: dict = {}
    for (x, z1), v1 in c1.coupling.mass.items():
        w = g.add(x, z1)
        pw = w_mass[w]
        for z2, v2 in by_w[w]:
            key = (x, g.add(z1, z2))
            atoms[key] = atoms.get(key, Fraction(0)) + v1 * v2 / pw
    return TransportCertificate(JointDist([g, g], atoms), c2.target)


def transport_split(
    pieces: Sequence[tuple[Fraction, TransportCertificate]],
    selector_entropy: float,
) -> TransportCertificate:
    """Glue per-fibre certificates into one mixture certificate.

    The glued cost never exceeds selector_entropy + weighted piece costs
    (grouping bound); that is asserted, with a small float tolerance.
    """
    if not pieces:
        raise ValueError("need at least one piece")
    weights = [Fraction(w) for w, _ in pieces]
    if sum(weights, Fraction(0)) != 1:
        raise CertificateError("piece weights must sum to exactly 1")
    g = pieces[0][1].target.group
    atoms: dict = {}
    tgt: dict = {}
    bound = selector_entropy
    for w, cert in pieces:
        if cert.target.group != g:
            raise CertificateError("pieces live in different groups")
        if w == 0:
            continue
        bound += float(w) * cert.cost
        for key, v in cert.coupling.mass.items():
            atoms[key] = atoms.get(key, Fraction(0)) + w * v
        for e, v in cert.target.mass.items():
            tgt[e] = tgt.get(e, Fraction(0)) + w * v
    out = TransportCertificate(JointDist([g, g], atoms), Dist(g, tgt))
    if out.cost > bound + 1e-9:
        raise CertificateError(
            f"glued cost {out.cost} exceeds split bound {bound}"
        )
    return out


# ---------------------------------------------------------------------------
# exact oracle


def transport_exact(p: Dist, q: Dist, cap: int = 24) -> TransportCertificate:
    """Global minimum of Ent(Z) over the coupling polytope, by vertex search.

    The objective is concave in the coupling, so the minimum is attained at a
    vertex; vertices are exactly the feasible points whose bipartite support
    graph is acyclic.  Refuses instances with more than `cap` coupling
    variables (|supp p| * |difference set|).
    """
    if p.group != q.group:
        raise IncompatibleGroupError("endpoints must share a group")
    g = p.group
    xs = list(p.support())
    ys = list(q.support())
    zset = {g.sub(y, x) for y in ys for x in xs}
    nvars = len(xs) * len(zset)
    if nvars > cap:
        raise CapExceededError(
            f"exact oracle refused: {nvars} coupling variables exceed cap {cap}; "
            "use the constructive bounds instead"
        )
    pm = [p.mass[x] for x in xs]
    qm = [q.mass[y] for y in ys]
    a, b = len(xs), len(ys)
    zs = [[g.sub(y, x) for y in ys] for x in xs]

    best_ent = math.inf
    best_edges: list[tuple[int, int, Fraction]] | None = None

    col_masks = [1 << j for j in range(b)]
    full_cover = (1 << b) - 1

    def bits(mask: int) -> list[int]:
        out = []
        while mask:
            out.append((mask & -mask).bit_length() - 1)
            mask &= mask - 1
        return out

    def subsets_ok(comp: list[int]) -> Iterable[int]:
        # nonempty column subsets with at most one column per current component
        for mask in range(1, 1 << b):
            seen = set()
            ok = True
            for j in bits(mask):
                cj = comp[j]
                if cj in seen:
                    ok = False
                    break
                seen.add(cj)
            if ok:
                yield mask

    def last_row_masks(comp: list[int], covered: int, budget: int) -> Iterable[int]:
        # the final row must pick up every uncovered column, plus at most
        # `budget` extra columns from pairwise-distinct covered components
        uncovered = full_cover & ~covered
        ucols = bits(uncovered)
        used = set()
        for j in ucols:
            if comp[j] in used:
                return
            used.add(comp[j])
        if budget < 0:
            return
        groups: dict[int, list[int]] = {}
        for j in bits(covered):
            if comp[j] not in used:
                groups.setdefault(comp[j], []).append(j)
        group_list = list(groups.values())

        def grow(gi: int, mask: int, left: int):
            if gi == len(group_list):
                if mask:
                    yield mask
                return
            yield from grow(gi + 1, mask, left)
            if left > 0:
                for j in group_list[gi]:
                    yield from grow(gi + 1, mask | col_masks[j], left - 1)

        yield from grow(0, uncovered, budget)

    def solve(edges: list[tuple[int, int]]) -> list[tuple[int, int, Fraction]] | None:
        # unique mass assignment on a forest support via leaf elimination
        n_nodes = a + b
        deg = [0] * n_nodes
        adj: list[list[int]] = [[] for _ in range(n_nodes)]
        for e_idx, (i, j) in enumerate(edges):
            deg[i] += 1
            deg[a + j] += 1
            adj[i].append(e_idx)
            adj[a + j].append(e_idx)
        rem = [Fraction(v) for v in pm] + [Fraction(v) for v in qm]
        val: list[Fraction | None] = [None] * len(edges)
        stack = [v for v in range(n_nodes) if deg[v] == 1]
        while stack:
            v = stack.pop()
            if deg[v] != 1:
                continue
            e_idx = next(e for e in adj[v] if val[e] is None)
            i, j = edges[e_idx]
            u = a + j if v == i else i
            m = rem[v]
            if m < 0:
                return None
            val[e_idx] = m
            rem[v] = Fraction(0)
            rem[u] -= m
            deg[v] -= 1
            deg[u] -= 1
            if deg[u] == 1:
                stack.append(u)
            elif deg[u] == 0 and rem[u] != 0:
                return None
        if any(v is None for v in val) or any(r != 0 for r in rem):
            return None
        return [(i, j, m) for (i, j), m in zip(edges, val) if m is not None]

    def consider(edges: list[tuple[int, int]]) -> None:
        nonlocal best_ent, best_edges
        sol = solve(edges)
        if sol is None:
            return
        zmass: dict[Element, Fraction] = {}
        for i, j, m in sol:
            if m == 0:
                continue
            z = zs[i][j]
            zmass[z] = zmass.get(z, Fraction(0)) + m
        ent = math.fsum(f_nats(v) for _, v in sorted(zmass.items()))
        if ent < best_ent:
            best_ent = ent
            best_edges = sol

    max_edges = a + b - 1

    def rec(i: int, comp: list[int], covered: int, edges: list[tuple[int, int]]):
        if i == a:
            consider(edges)
            return
        rows_left = a - i - 1
        if rows_left == 0:
            uncovered_count = b - bin(covered).count("1")
            budget = max_edges - len(edges) - uncovered_count
            masks: Iterable[int] = last_row_masks(comp, covered, budget)
        else:
            masks = subsets_ok(comp)
        for mask in masks:
            n_new = bin(mask).count("1")
            if len(edges) + n_new > max_edges:
                continue
            uncovered_after = b - bin(covered | mask).count("1")
            if len(edges) + n_new + max(uncovered_after, rows_left) > max_edges:
                continue
            new_comp = comp[:]
            # merge all touched components into one id
            touched = {comp[j] for j in range(b) if mask & col_masks[j]}
            rep = min(touched)
            for j in range(b):
                if new_comp[j] in touched:
                    new_comp[j] = rep
            new_edges = edges + [(i, j) for j in range(b) if mask & col_masks[j]]
            rec(i + 1, new_comp, covered | mask, new_edges)

    rec(0, list(range(b)), 0, [])
    if best_edges is None:
        raise CertificateError("coupling polytope unexpectedly empty")
    atoms = {(xs[i], zs[i][j]): m for i, j, m in best_edges if m != 0}
    cert = TransportCertificate(JointDist([g, g], atoms), q)
    cert.validate(p)
    return cert


def is_translate(p: Dist, q: Dist) -> bool:
    """True iff q is exactly a translate of p."""
    if p.group != q.group or len(p) != len(q):
        return False
    c = p.group.sub(q.support()[0], p.support()[0])
    return q == p.translate(c)


# ---------------------------------------------------------------------------
# finite-group adapters for the constructive pipeline
#
# Flattening and uniformisation need a concrete finite group that is not
# always a plain product of cyclic factors (the coset-progression pipeline
# works inside H x prod Z/2NiZ with H an arbitrary finite subgroup), so the
# raw machinery runs on mass dicts over a small group adapter.


class _SpecAdapter:
    def __init__(self, g: GroupSpec):
        self.g = g
        self.elems = sorted(g.elements())
        self.size = len(self.elems)
        self.zero = g.zero()

    def add(self, a, b):
        return self.g.add(a, b)

    def neg(self, a):
        return self.g.neg(a)

    def sub(self, a, b):
        return self.g.sub(a, b)


class _SubgroupBoxAdapter:
    """Direct product of a finite subgroup H (ambient elements) with cyclic boxes."""

    def __init__(self, ambient: GroupSpec, subgroup: Sequence[Element], mods: Sequence[int]):
        self.ambient = ambient
        self.subgroup = tuple(sorted(subgroup))
        self.mods = tuple(int(m) for m in mods)
        self.elems = [
            (h, ns)
            for h in self.subgroup
            for ns in itertools.product(*(range(m) for m in self.mods))
        ]
        self.elems.sort()
        self.size = len(self.elems)
        self.zero = (ambient.zero(), (0,) * len(self.mods))

    def add(self, a, b):
        return (
            self.ambient.add(a[0], b[0]),
            tuple((x + y) % m for x, y, m in zip(a[1], b[1], self.mods)),
        )

    def neg(self, a):
        return (
            self.ambient.neg(a[0]),
            tuple((-x) % m for x, m in zip(a[1], self.mods)),
        )

    def sub(self, a, b):
        return self.add(a, self.neg(b))


@dataclass
class _RawCert:
    coupling: dict  # (x, z) -> Fraction
    target: dict  # x -> Fraction


def _raw_source(c: _RawCert) -> dict:
    out: dict = {}
    for (x, _), v in c.coupling.items():
        out[x] = out.get(x, Fraction(0)) + v
    return out


def _raw_zmass(c: _RawCert) -> dict:
    out: dict = {}
    for (_, z), v in c.coupling.items():
        out[z] = out.get(z, Fraction(0)) + v
    return out


def _raw_validate(ad, c: _RawCert, source: dict | None = None) -> None:
    push: dict = {}
    for (x, z), v in c.coupling.items():
        y = ad.add(x, z)
        push[y] = push.get(y, Fraction(0)) + v
    if push != c.target:
        raise CertificateError("raw pushforward mismatch")
    if source is not None and _raw_source(c) != source:
        raise CertificateError("raw source mismatch")


def _raw_identity(ad, q: dict) -> _RawCert:
    return _RawCert({(x, ad.zero): v for x, v in q.items()}, dict(q))


def _raw_independent_pair(ad, qp: dict, qm: dict) -> _RawCert:
    atoms: dict = {}
    for x, vx in qp.items():
        for y, vy in qm.items():
            key = (x, ad.sub(y, x))
            atoms[key] = atoms.get(key, Fraction(0)) + vx * vy
    return _RawCert(atoms, dict(qm))


def _raw_noise(ad, q: dict, z: dict) -> _RawCert:
    atoms: dict = {}
    tgt: dict = {}
    for x, vx in q.items():
        for zz, vz in z.items():
            atoms[(x, zz)] = atoms.get((x, zz), Fraction(0)) + vx * vz
            y = ad.add(x, zz)
            tgt[y] = tgt.get(y, Fraction(0)) + vx * vz
    return _RawCert(atoms, tgt)


def _raw_reverse(ad, c: _RawCert) -> _RawCert:
    atoms: dict = {}
    for (x, z), v in c.coupling.items():
        key = (ad.add(x, z), ad.neg(z))
        atoms[key] = atoms.get(key, Fraction(0)) + v
    return _RawCert(atoms, _raw_source(c))


def _raw_compose(ad, c1: _RawCert, c2: _RawCert) -> _RawCert:
    w_mass = c1.target
    if _raw_source(c2) != w_mass:
        raise CertificateError("raw composition endpoints disagree")
    by_w: dict = {}
    for (w, z2), v in c2.coupling.items():
        by_w.setdefault(w, []).append((z2, v))
    atoms: dict = {}
    for (x, z1), v1 in c1.coupling.items():
        w = ad.add(x, z1)
        pw = w_mass[w]
        for z2, v2 in by_w[w]:
            key = (x, ad.add(z1, z2))
            atoms[key] = atoms.get(key, Fraction(0)) + v1 * v2 / pw
    return _RawCert(atoms, dict(c2.target))


def _raw_mix(pieces: Sequence[tuple[Fraction, _RawCert]]) -> _RawCert:
    atoms: dict = {}
    tgt: dict = {}
    for w, cert in pieces:
        if w == 0:
            continue
        for key, v in cert.coupling.items():
            atoms[key] = atoms.get(key, Fraction(0)) + w * v
        for e, v in cert.target.items():
            tgt[e] = tgt.get(e, Fraction(0)) + w * v
    return _RawCert(atoms, tgt)


# -- flattening rounds -------------------------------------------------------


def _sq_to_uniform(ad, mass: dict) -> Fraction:
    u = Fraction(1, ad.size)
    off = ad.size - len(mass)
    return sum(((v - u) ** 2 for v in mass.values()), Fraction(0)) + off * u * u


def _sub_table(ad) -> np.ndarray:
    tbl = getattr(ad, "_sub_table", None)
    if tbl is None:
        idx = {e: i for i, e in enumerate(ad.elems)}
        n = ad.size
        tbl = np.empty((n, n), dtype=np.int64)
        for i, x in enumerate(ad.elems):
            for j, h in enumerate(ad.elems):
                tbl[i, j] = idx[ad.sub(x, h)]
        ad._sub_table = tbl
    return tbl


def _pick_shift(ad, mass: dict) -> Element:
    """Shift h minimizing the post-average squared distance to uniform.

    Scans with floats for speed; the caller re-verifies the halving invariant
    exactly and falls back to an exact scan if rounding misled the choice.
    """
    u = 1.0 / ad.size
    d = np.array([float(mass.get(e, 0)) - u for e in ad.elems])
    tbl = _sub_table(ad)
    autocorr = (d[:, None] * d[tbl]).sum(axis=0)
    return ad.elems[int(np.argmin(autocorr))]


def _pick_shift_exact(ad, mass: dict) -> Element:
    u = Fraction(1, ad.size)
    d = {e: mass.get(e, Fraction(0)) - u for e in ad.elems}
    best_h = None
    best = None
    for h in ad.elems:
        s = sum((d[x] * d[ad.sub(x, h)] for x in ad.elems), Fraction(0))
        if best is None or s < best:
            best, best_h = s, h
    return best_h


def _shift_mix(ad, mass: dict, h: Element) -> dict:
    out: dict = {}
    half = Fraction(1, 2)
    for x, v in mass.items():
        out[x] = out.get(x, Fraction(0)) + half * v
        y = ad.add(x, h)
        out[y] = out.get(y, Fraction(0)) + half * v
    return {k: v for k, v in out.items() if v != 0}


def _raw_flatten(
    ad,
    mass: dict,
    max_rounds: int,
    stop: Callable[[dict, Fraction], bool],
) -> tuple[dict, list[Element], list[Fraction]]:
    """Run mixing rounds until `stop(mass, sq)` or the round budget ends.

    Returns (final mass, chosen shifts, squared distances incl. initial).
    Each executed round exactly halves (or better) the squared distance.
    """
    cur = dict(mass)
    sq = _sq_to_uniform(ad, cur)
    shifts: list[Element] = []
    sqs = [sq]
    for _ in range(max_rounds):
        if sq == 0 or stop(cur, sq):
            break
        h = _pick_shift(ad, cur)
        nxt = _shift_mix(ad, cur, h)
        nsq = _sq_to_uniform(ad, nxt)
        if 2 * nsq > sq:
            h = _pick_shift_exact(ad, cur)
            nxt = _shift_mix(ad, cur, h)
            nsq = _sq_to_uniform(ad, nxt)
            if 2 * nsq > sq:
                raise AssertionError("flattening failed to halve the squared norm")
        cur, sq = nxt, nsq
        shifts.append(h)
        sqs.append(sq)
    return cur, shifts, sqs


def _shift_noise(ad, shifts: Sequence[Element]) -> dict:
    z = {ad.zero: Fraction(1)}
    half = Fraction(1, 2)
    for h in shifts:
        nxt: dict = {}
        for x, v in z.items():
            nxt[x] = nxt.get(x, Fraction(0)) + half * v
            y = ad.add(x, h)
            nxt[y] = nxt.get(y, Fraction(0)) + half * v
        z = nxt
    return z


def _sigma_excess(ad, mass: dict) -> Fraction:
    u = Fraction(1, ad.size)
    return sum((v - u for v in mass.values() if v > u), Fraction(0))


@dataclass
class FlattenTrace:
    """Shifts chosen per round and the squared distances they achieved."""

    shifts: list[Element]
    sq_dists: list[Fraction]  # length = rounds + 1, initial value first

    @property
    def norms(self) -> list[float]:
        return [math.sqrt(float(s)) for s in self.sq_dists]

    def verify(self) -> None:
        for prev, new in zip(self.sq_dists, self.sq_dists[1:]):
            if 2 * new > prev:
                raise AssertionError("flatten round missed the halving guarantee")


def flatten(p: Dist, k: int) -> tuple[Dist, FlattenTrace, TransportCertificate]:
    """k mixing rounds toward uniform on a finite group.

    Each round convolves with a fair two-point shift chosen by exhaustive
    scan, halving the squared l2 distance to uniform; rounds are skipped once
    the distance is exactly zero.  The certificate couples X with the
    independent sum of the chosen shift variables, so its cost is at most
    k log 2.
    """
    if not p.group.is_finite():
        raise PreconditionError("flattening needs a finite group")
    if k < 0:
        raise ValueError("k must be >= 0")
    ad = _SpecAdapter(p.group)
    final, shifts, sqs = _raw_flatten(ad, dict(p.mass), k, lambda m, s: False)
    out = Dist(p.group, final)
    trace = FlattenTrace(shifts, sqs)
    trace.verify()
    if shifts:
        z = Dist(p.group, _shift_noise(ad, shifts))
        cert = independent_noise_certificate(p, z)
    else:
        cert = identity_certificate(p)
    cert.validate(p)
    if cert.target != out:
        raise CertificateError("flatten certificate does not reach the flattened law")
    return out, trace, cert


# -- uniformisation ----------------------------------------------------------


def _raw_flatten_cert(ad, q: dict, stop) -> tuple[dict, _RawCert]:
    final, shifts, _ = _raw_flatten(ad, q, _MAX_FLATTEN_ROUNDS, stop)
    if not shifts:
        return final, _raw_identity(ad, q)
    cert = _raw_noise(ad, q, _shift_noise(ad, shifts))
    if cert.target != final:
        raise CertificateError("raw flatten target mismatch")
    return final, cert


def _uniform_mass(ad) -> dict:
    u = Fraction(1, ad.size)
    return {e: u for e in ad.elems}


def _raw_to_uniform(ad, q: dict, depth: int = 0) -> _RawCert:
    """Iterated sigma-split: flatten, peel the positive excess, recurse.

    The sigma target tightens with depth and bottoms out at SIGMA_MIN, where
    the remaining excess is moved by the independent coupling at cost at most
    sigma_min * log|G|.
    """
    u = _uniform_mass(ad)
    target_sigma = max(SIGMA_MIN, Fraction(1, 2 ** (10 * (depth + 1))))
    cur, flat_cert = _raw_flatten_cert(
        ad, q, lambda m, s: _sigma_excess(ad, m) <= target_sigma
    )
    if cur == u:
        return flat_cert
    uu = Fraction(1, ad.size)
    sigma = _sigma_excess(ad, cur)
    q_plus = {e: (v - uu) / sigma for e, v in cur.items() if v > uu}
    q_minus = {
        e: (uu - cur.get(e, Fraction(0))) / sigma
        for e in ad.elems
        if cur.get(e, Fraction(0)) < uu
    }
    mu = {
        e: (min(cur.get(e, Fraction(0)), uu)) / (1 - sigma)
        for e in ad.elems
        if min(cur.get(e, Fraction(0)), uu) > 0
    }
    if sigma <= SIGMA_MIN:
        piece = _raw_independent_pair(ad, q_plus, q_minus)
    else:
        up = _raw_to_uniform(ad, q_plus, depth + 1)
        um = _raw_to_uniform(ad, q_minus, depth + 1)
        piece = _raw_compose(ad, up, _raw_reverse(ad, um))
    split = _raw_mix([(sigma, piece), (1 - sigma, _raw_identity(ad, mu))])
    return _raw_compose(ad, flat_cert, split)


def _raw_uniformise(ad, q: dict) -> _RawCert:
    """Full pipeline: density-level partition, per-level flattening, sigma-splits."""
    u = _uniform_mass(ad)
    if q == u:
        return _raw_identity(ad, q)
    size = ad.size
    levels: dict[int, dict] = {}
    weights: dict[int, Fraction] = {}
    for e, v in q.items():
        k = density_level(v * size)
        levels.setdefault(k, {})[e] = v
        weights[k] = weights.get(k, Fraction(0)) + v
    pieces: list[tuple[Fraction, _RawCert]] = []
    sq_bound = Fraction(1, size)  # matches ||q_k - u||_2 <= 1/sqrt|G|
    for k in sorted(levels):
        w = weights[k]
        cond = {e: v / w for e, v in levels[k].items()}
        if k == 0:
            pieces.append((w, _raw_identity(ad, cond)))
        else:
            _, cert = _raw_flatten_cert(ad, cond, lambda m, s: s <= sq_bound)
            pieces.append((w, cert))
    glued = _raw_mix(pieces)
    tail = _raw_to_uniform(ad, glued.target, depth=0)
    out = _raw_compose(ad, glued, tail)
    if out.target != u:
        raise CertificateError("uniformisation failed to reach the uniform law")
    return out


def uniformise_group(p: Dist, k_bound: float) -> TransportCertificate:
    """Exact certificate transporting p to the uniform law on its finite group.

    Requires Ent(p) >= log|G| - log K; values of K below 10 are accepted and
    treated as 10.  The certificate is exact; its cost is reported, not
    bounded a priori.
    """
    if not p.group.is_finite():
        raise PreconditionError("uniformisation needs a finite group")
    k_bound = max(float(k_bound), 10.0)
    size = p.group.order()
    deficit = math.log(size) - entropy(p)
    if deficit > math.log(k_bound) + 1e-9:
        raise PreconditionError(
            f"entropy deficit {deficit:.6f} exceeds log K = {math.log(k_bound):.6f}"
        )
    ad = _SpecAdapter(p.group)
    raw = _raw_uniformise(ad, dict(p.mass))
    _raw_validate(ad, raw, dict(p.mass))
    cert = TransportCertificate(
        JointDist([p.group, p.group], raw.coupling),
        Dist(p.group, raw.target),
    )
    cert.validate(p)
    return cert


def uniformise_coset_progression(
    p: Dist, cp: CosetProgression, k_bound: float | None = None
) -> TransportCertificate:
    """Certificate transporting p to the uniform law on a proper H + P.

    Pulls p back to the box H x prod [0, Ni), embeds it in H x prod Z/2NiZ,
    uniformises there, and pushes the composed transport forward; every shift
    used must come from a box difference (no wraparound), which is checked.
    """
    emb = box_embedding(cp, proper_required=True)
    g = cp.group
    hp = frozenset(emb.backward)
    target = Dist.uniform(g, hp)
    if k_bound is not None:
        deficit = math.log(len(hp)) - entropy(p)
        if deficit > math.log(max(float(k_bound), 10.0)) + 1e-9:
            raise PreconditionError("entropy deficit exceeds log K")
    if p == target:
        return identity_certificate(p)
    box_mass = emb.pull(p)  # raises if support leaves H+P
    lengths = cp.lengths
    ad = _SubgroupBoxAdapter(g, cp.subgroup, tuple(2 * n for n in lengths))
    box_uniform = {
        (h, ns): Fraction(1, len(hp))
        for h in cp.subgroup
        for ns in itertools.product(*(range(n) for n in lengths))
    }
    c1 = _raw_uniformise(ad, box_mass)
    c2 = _raw_uniformise(ad, box_uniform)
    raw = _raw_compose(ad, c1, _raw_reverse(ad, c2))
    _raw_validate(ad, raw, box_mass)

    atoms: dict = {}
    for (x, z), v in raw.coupling.items():
        y = ad.add(x, z)
        if y not in raw.target:
            raise WraparoundError(f"composed atom leaves the box at {y}")
        dns = []
        for xi, yi, n in zip(x[1], y[1], lengths):
            di = yi - xi
            if not -n < di < n:
                raise WraparoundError(f"shift coordinate {di} outside (-{n}, {n})")
            dns.append(di)
        dh = g.sub(y[0], x[0])
        shift = emb.push_shift(dh, tuple(dns))
        key = (emb.forward[x], shift)
        atoms[key] = atoms.get(key, Fraction(0)) + v
    cert = TransportCertificate(JointDist([g, g], atoms), target)
    cert.validate(p)
    return cert
