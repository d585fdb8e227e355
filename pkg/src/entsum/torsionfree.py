"""Torsion-free experiments: binomial entropy asymptotics, the discrete to
continuous entropy bridge, exact piecewise-density convolution, and the
Fourier search for smooth shift directions.

Densities are piecewise affine with exact rational coefficients; convolving
two of them is computed exactly as a piecewise polynomial (degree at most
deg f + deg g + 1) by sampling and Lagrange interpolation over Q.  Entropy of
affine pieces has a closed form; higher-degree pieces fall back to certified
adaptive quadrature.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .dists import Dist, convolve, entropy, f_nats, tv_distance
from .errors import CapExceededError, PreconditionError, SearchExhaustedError
from .groups import GroupSpec
from .metrics import MetricReport

BINOMIAL_CAP = 4096


# ---------------------------------------------------------------------------
# binomial walks


def _binomial_atoms(n: int) -> dict:
    den = 2**n
    return {(2 * k - n,): Fraction(math.comb(n, k), den) for k in range(n + 1)}


def binomial_dist(n: int) -> Dist:
    """Law of the sum of n independent fair +-1 signs, on Z with spacing 2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > BINOMIAL_CAP:
        raise CapExceededError(f"binomial cap {BINOMIAL_CAP} exceeded: n={n}")
    return Dist(GroupSpec([0]), _binomial_atoms(n))


def _binomial_entropy(n: int) -> float:
    return math.fsum(f_nats(v) for v in _binomial_atoms(n).values())


def binomial_entropy_gap(n: int) -> float:
    """Entropy of the n-step sign walk minus its Gaussian lattice reference.

    The walk is a bijective relabeling of a Binomial(n, 1/2) count, so the
    reference is the entropy of a unit-lattice Gaussian with the matching
    variance n/4, i.e. (1/2) log(2 pi e n / 4).  The gap tends to 0 like
    O(1/n).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if n > BINOMIAL_CAP:
        raise CapExceededError(f"binomial cap {BINOMIAL_CAP} exceeded: n={n}")
    reference = 0.5 * math.log(2.0 * math.pi * math.e * n / 4.0)
    return _binomial_entropy(n) - reference


def doubling_experiment(n: int) -> float:
    """Doubling constant of the n-step walk via the identity X_n + X'_n ≡ X_2n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 2048:
        raise CapExceededError(f"doubling experiment cap 2048 exceeded: n={n}")
    return math.exp(_binomial_entropy(2 * n) - _binomial_entropy(n))


def entxx_explore(n: int, k: int) -> float:
    """Exploratory gap Ent(S_{k+1}) - Ent(S_k) - log sqrt((k+1)/k) for sums of
    k copies of the n-step walk; reported, never asserted."""
    if k < 1 or k > 8:
        raise PreconditionError("k must be in 1..8")
    if n * k > 8192:
        raise PreconditionError(f"n*k = {n * k} exceeds cap 8192")
    return (
        _binomial_entropy(n * (k + 1))
        - _binomial_entropy(n * k)
        - 0.5 * math.log((k + 1) / k)
    )


def mod_fiber_decomposition(p: Dist, m: int) -> tuple[Dist, dict[int, Dist]]:
    """Fiber a Z-valued law by W = X mod m; fibres are (X - w)/m laws.

    The chain rule Ent(X) = Ent(W) + sum_w p_W(w) Ent(X_w) holds exactly
    because (W, X_w) determines X bijectively.
    """
    if p.group.moduli != (0,):
        raise PreconditionError("fibering needs a rank-1 Z-valued law")
    if m < 1:
        raise ValueError("m must be >= 1")
    z = GroupSpec([0])
    zm = GroupSpec([m])
    w_mass: dict = {}
    fibres: dict[int, dict] = {}
    for (x,), v in p.mass.items():
        w = x % m
        w_mass[(w,)] = w_mass.get((w,), Fraction(0)) + v
        fibres.setdefault(w, {})[((x - w) // m,)] = v
    w_dist = Dist(zm, w_mass)
    out = {
        w: Dist(z, {e: v / w_mass[(w,)] for e, v in atoms.items()})
        for w, atoms in fibres.items()
    }
    return w_dist, out


# ---------------------------------------------------------------------------
# piecewise densities

Poly = tuple[Fraction, ...]  # coefficients, lowest degree first


def _poly_eval(poly: Poly, t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * t + c
    return acc


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return tuple(out)


def _poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return tuple(
        (a[i] if i < len(a) else Fraction(0)) + (b[i] if i < len(b) else Fraction(0))
        for i in range(n)
    )


def _poly_integral(poly: Poly, lo: Fraction, hi: Fraction) -> Fraction:
    acc = Fraction(0)
    for i, c in enumerate(poly):
        acc += c * (hi ** (i + 1) - lo ** (i + 1)) / (i + 1)
    return acc


def _lagrange(points: Sequence[tuple[Fraction, Fraction]]) -> Poly:
    poly: Poly = (Fraction(0),)
    for i, (xi, yi) in enumerate(points):
        term: Poly = (yi,)
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            term = _poly_mul(term, (-xj / (xi - xj), Fraction(1) / (xi - xj)))
        poly = _poly_add(poly, term)
    return poly


class PiecewiseDensity:
    """Probability density that is affine on each piece of a rational partition.

    Pieces are (a, b) meaning density a + b*t on [breakpoints[i],
    breakpoints[i+1]); the density is zero outside.  Non-negativity and unit
    total integral are checked exactly.
    """

    __slots__ = ("breakpoints", "pieces")

    def __init__(self, breakpoints, pieces):
        bps = tuple(Fraction(b) for b in breakpoints)
        pcs = tuple((Fraction(a), Fraction(b)) for a, b in pieces)
        if len(bps) != len(pcs) + 1:
            raise ValueError("need exactly one more breakpoint than pieces")
        if any(t1 <= t0 for t0, t1 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        total = Fraction(0)
        for (a, b), t0, t1 in zip(pcs, bps, bps[1:]):
            if a + b * t0 < 0 or a + b * t1 < 0:
                raise ValueError("density must be non-negative")
            total += a * (t1 - t0) + b * (t1 * t1 - t0 * t0) / 2
        if total != 1:
            raise ValueError(f"total integral is {total}, expected exactly 1")
        self.breakpoints = bps
        self.pieces = pcs

    @staticmethod
    def uniform(lo, hi) -> "PiecewiseDensity":
        lo, hi = Fraction(lo), Fraction(hi)
        return PiecewiseDensity([lo, hi], [(Fraction(1, 1) / (hi - lo), 0)])

    @staticmethod
    def step(breakpoints, heights) -> "PiecewiseDensity":
        return PiecewiseDensity(breakpoints, [(h, 0) for h in heights])

    def translate(self, c) -> "PiecewiseDensity":
        c = Fraction(c)
        return PiecewiseDensity(
            [t + c for t in self.breakpoints],
            [(a - b * c, b) for a, b in self.pieces],
        )

    def __eq__(self, other):
        return (
            isinstance(other, PiecewiseDensity)
            and self.breakpoints == other.breakpoints
            and self.pieces == other.pieces
        )

    def _polys(self) -> list[Poly]:
        return [(a, b) if b != 0 else (a,) for a, b in self.pieces]


def _entropy_affine_piece(a: Fraction, b: Fraction, t0: Fraction, t1: Fraction) -> float:
    """Closed-form integral of F(a + b t) over [t0, t1]."""

    def anti(u: float) -> float:
        # antiderivative of -u log u
        if u <= 0.0:
            return 0.0
        return u * u * 0.25 - 0.5 * u * u * math.log(u)

    if b == 0:
        return float(t1 - t0) * f_nats(a)
    u0 = float(a + b * t0)
    u1 = float(a + b * t1)
    return (anti(u1) - anti(u0)) / float(b)


def continuous_entropy(f: PiecewiseDensity) -> float:
    """Differential entropy of a piecewise-affine density, in closed form."""
    return math.fsum(
        _entropy_affine_piece(a, b, t0, t1)
        for (a, b), t0, t1 in zip(f.pieces, f.breakpoints, f.breakpoints[1:])
    )


@dataclass
class _PiecewisePoly:
    breakpoints: tuple[Fraction, ...]
    polys: tuple[Poly, ...]

    def integral(self) -> Fraction:
        return sum(
            (_poly_integral(p, t0, t1)
             for p, t0, t1 in zip(self.polys, self.breakpoints, self.breakpoints[1:])),
            Fraction(0),
        )

    def entropy(self, quad_tol: float = 1e-9) -> float:
        """Entropy with closed forms for degree <= 1, quadrature above.

        Degree >= 2 pieces use tanh-sinh quadrature, which absorbs the
        logarithmic endpoint singularities where the density vanishes; the
        run aborts if the summed error estimates exceed the tolerance.
        """
        terms = []
        err_total = 0.0
        for poly, t0, t1 in zip(self.polys, self.breakpoints, self.breakpoints[1:]):
            poly = tuple(poly)
            while len(poly) > 1 and poly[-1] == 0:
                poly = poly[:-1]
            if len(poly) <= 2:
                a = poly[0]
                b = poly[1] if len(poly) == 2 else Fraction(0)
                terms.append(_entropy_affine_piece(a, b, t0, t1))
                continue
            coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in poly]

            def integrand(t, coeffs=coeffs):
                u = mpmath.mpf(0)
                for c in reversed(coeffs):
                    u = u * t + c
                return -u * mpmath.log(u) if u > 0 else mpmath.mpf(0)

            val, err = mpmath.quad(
                integrand, [mpmath.mpf(t0.numerator) / t0.denominator,
                            mpmath.mpf(t1.numerator) / t1.denominator],
                error=True,
            )
            err_total += float(err)
            terms.append(float(val))
        if err_total > quad_tol:
            raise ArithmeticError(
                f"quadrature error estimate {err_total} exceeds tolerance {quad_tol}"
            )
        return math.fsum(terms)


def convolve_densities(f: PiecewiseDensity, g: PiecewiseDensity) -> _PiecewisePoly:
    """Exact convolution density of two independent piecewise-affine laws.

    Per piece pair the contribution is polynomial between the four breakpoint
    sums; each polynomial is recovered exactly from rational samples.
    """
    contribs: list[tuple[Fraction, Fraction, Poly]] = []
    fpolys = f._polys()
    gpolys = g._polys()

    def conv_at(fp: Poly, gp: Poly, p0, p1, q0, q1, t: Fraction) -> Fraction:
        lo = max(p0, t - q1)
        hi = min(p1, t - q0)
        if hi <= lo:
            return Fraction(0)
        # integrand fp(s) * gp(t - s) as a polynomial in s
        gshift: Poly = (Fraction(0),)
        pw: Poly = (Fraction(1),)
        for c in gp:
            gshift = _poly_add(gshift, tuple(c * x for x in pw))
            pw = _poly_mul(pw, (t, Fraction(-1)))
        return _poly_integral(_poly_mul(fp, gshift), lo, hi)

    for (fp, p0, p1) in zip(fpolys, f.breakpoints, f.breakpoints[1:]):
        for (gp, q0, q1) in zip(gpolys, g.breakpoints, g.breakpoints[1:]):
            corners = sorted({p0 + q0, p0 + q1, p1 + q0, p1 + q1})
            deg = (len(fp) - 1) + (len(gp) - 1) + 1
            for lo, hi in zip(corners, corners[1:]):
                # sample deg+1 interior points and interpolate exactly
                pts = []
                for i in range(deg + 1):
                    t = lo + (hi - lo) * Fraction(2 * i + 1, 2 * (deg + 1))
                    pts.append((t, conv_at(fp, gp, p0, p1, q0, q1, t)))
                poly = _lagrange(pts)
                if any(c != 0 for c in poly):
                    contribs.append((lo, hi, poly))

    if not contribs:
        raise ArithmeticError("empty convolution")
    breaks = sorted({b for lo, hi, _ in contribs for b in (lo, hi)})
    polys = []
    for lo, hi in zip(breaks, breaks[1:]):
        acc: Poly = (Fraction(0),)
        for clo, chi, poly in contribs:
            if clo <= lo and hi <= chi:
                acc = _poly_add(acc, poly)
        polys.append(acc)
    out = _PiecewisePoly(tuple(breaks), tuple(polys))
    if out.integral() != 1:
        raise ArithmeticError(f"convolution integral is {out.integral()}, expected 1")
    return out


def abbn_check(f: PiecewiseDensity, g: PiecewiseDensity, quad_tol: float = 1e-9) -> MetricReport:
    """Ent(S + T) >= (Ent(S) + Ent(T))/2 + (log 2)/2 for independent densities."""
    conv = convolve_densities(f, g)
    lhs = 0.5 * (continuous_entropy(f) + continuous_entropy(g)) + 0.5 * math.log(2)
    rhs = conv.entropy(quad_tol)
    return MetricReport(
        "continuous_sum_lower_bound",
        lhs,
        rhs,
        {
            "f": {"breaks": [str(b) for b in f.breakpoints],
                  "pieces": [[str(a), str(b)] for a, b in f.pieces]},
            "g": {"breaks": [str(b) for b in g.breakpoints],
                  "pieces": [[str(a), str(b)] for a, b in g.pieces]},
        },
    )


def bridge_entropy(p: Dist) -> tuple[PiecewiseDensity, float]:
    """Step density of X + U for U uniform on [0,1); its differential entropy
    equals the discrete entropy of X exactly (checked to 1e-9)."""
    if p.group.moduli != (0,):
        raise PreconditionError("bridge needs a rank-1 Z-valued law")
    xs = [x for (x,) in p.mass]
    lo, hi = min(xs), max(xs)
    breaks = [Fraction(t) for t in range(lo, hi + 2)]
    heights = [p.mass.get((t,), Fraction(0)) for t in range(lo, hi + 1)]
    # merge away nothing: zero-height pieces are legal
    dens = PiecewiseDensity(breaks, [(h, 0) for h in heights])
    ent = continuous_entropy(dens)
    if abs(ent - entropy(p)) > 1e-9:
        raise AssertionError("bridge identity failed beyond tolerance")
    return dens, ent


# ---------------------------------------------------------------------------
# Fourier smoothness search


@dataclass
class SpectrumReport:
    """Large spectrum of a box-supported law and the shift it certifies."""

    mu: float
    dims: tuple[int, ...]  # cyclic embedding sizes (3 Ni)
    coeffs: np.ndarray  # full character-sum table
    spectrum: tuple[tuple[int, ...], ...]  # frequencies with |p-hat| >= mu
    shift: tuple[int, ...]
    max_char_dist: float  # max over the spectrum of |chi(shift) - 1|
    relaxed: bool  # True when no shift met the strict mu^2 threshold
    realized_tv: float
    parseval_lhs: float
    parseval_rhs: float


def smooth_shift_search(
    p: Dist, mu: float, box: Sequence[int] | None = None, group_cap: int = 300_000
) -> SpectrumReport:
    """Search the box for a shift r that the large spectrum barely sees.

    The law is embedded in the product of Z/3NiZ, the full character table is
    computed (a DFT over the product of cyclic groups), and candidate shifts
    are scanned in increasing max-norm.  A shift qualifies strictly when
    |chi(r) - 1| <= mu^2 for every large-spectrum character; if none does
    within the radius, the best approximant is returned flagged as relaxed.
    The realized total variation of the r-shift of p*p is always reported.

    `box` fixes the side lengths Ni; by default they are inferred from the
    support after translating its minimum to the origin.
    """
    if not 0 < mu < 1:
        raise ValueError("mu must be in (0, 1)")
    if not p.group.torsion_free() or p.group.dim < 1:
        raise PreconditionError("search needs a law on a torsion-free box")
    d = p.group.dim
    mins = [min(x[i] for x in p.mass) for i in range(d)]
    p0 = p.translate(tuple(-m for m in mins))
    sizes = [max(x[i] for x in p0.mass) + 1 for i in range(d)]
    if box is not None:
        box = [int(n) for n in box]
        if len(box) != d or any(b < s for b, s in zip(box, sizes)):
            raise PreconditionError(f"box {box} does not contain the support")
        sizes = box
    dims = tuple(3 * n for n in sizes)
    total = math.prod(dims)
    if total > group_cap:
        raise CapExceededError(f"embedding group size {total} exceeds cap {group_cap}")

    arr = np.zeros(dims, dtype=float)
    for x, v in p0.mass.items():
        arr[x] = float(v)
    coeffs = np.fft.fftn(arr)
    parseval_lhs = float(np.sum(np.abs(coeffs) ** 2))
    parseval_rhs = total * float(sum(float(v) ** 2 for v in p0.mass.values()))

    mags = np.abs(coeffs)
    spectrum = tuple(
        tuple(int(c) for c in idx) for idx in np.argwhere(mags >= mu)
    )
    if not spectrum or len(spectrum) * mu * mu > parseval_lhs + 1e-9:
        raise AssertionError("spectrum size bound violated")

    def char_dist(r: Sequence[int]) -> float:
        worst = 0.0
        for t in spectrum:
            theta = 2.0 * math.pi * math.fsum(
                (t[i] * r[i]) / dims[i] for i in range(d)
            )
            dist = 2.0 * abs(math.sin(theta / 2.0))
            if dist > worst:
                worst = dist
        return worst

    radius = min(max(s - 1 for s in sizes), math.ceil(d * mu**-3))
    best_r: tuple[int, ...] | None = None
    best_m = math.inf
    chosen: tuple[int, ...] | None = None
    chosen_m = math.inf
    for rho in range(1, radius + 1):
        for r in itertools.product(*(range(min(n, rho + 1)) for n in sizes)):
            if max(r) != rho:
                continue
            m = char_dist(r)
            if m < best_m:
                best_m, best_r = m, r
            if m <= mu * mu:
                chosen, chosen_m = r, m
                break
        if chosen is not None:
            break

    if chosen is None:
        if best_r is None:
            raise SearchExhaustedError(
                f"no nonzero shift exists within radius {radius}", spectrum
            )
        chosen, chosen_m, relaxed = best_r, best_m, True
    else:
        relaxed = False

    conv = convolve(p0, p0, "+")
    realized_tv = tv_distance(conv, conv.translate(chosen))
    return SpectrumReport(
        mu=mu,
        dims=dims,
        coeffs=coeffs,
        spectrum=spectrum,
        shift=chosen,
        max_char_dist=chosen_m,
        relaxed=relaxed,
        realized_tv=realized_tv,
        parseval_lhs=parseval_lhs,
        parseval_rhs=parseval_rhs,
    )
