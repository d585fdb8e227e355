"""Ruzsa distance, doubling constant, and the sumset inequality suite.

Every check returns a MetricReport carrying both sides of the inequality and
the witness inputs, so a fuzz run can persist violations for replay.  Slack
is rhs - lhs; a report violates at tolerance tol when slack < -tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .dists import Dist, convolve, entropy, iterated_convolve
from .errors import IncompatibleGroupError, PreconditionError
from .groups import Element

DEFAULT_TOL = 1e-9


@dataclass
class MetricReport:
    """One inequality evaluation: lhs <= rhs expected, slack = rhs - lhs."""

    name: str
    lhs: float
    rhs: float
    witness: dict = field(default_factory=dict)
    kind: str = "bound"  # "bound" reports can violate; "measured" never do

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def violated(self, tol: float = DEFAULT_TOL) -> bool:
        return self.kind == "bound" and self.slack < -tol

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "kind": self.kind,
            "witness": self.witness,
        }


def dist_witness(p: Dist) -> dict:
    return {
        "group": list(p.group.moduli),
        "atoms": [
            {"x": list(e), "num": v.numerator, "den": v.denominator}
            for e, v in p.mass.items()
        ],
    }


def ruzsa_distance(p: Dist, q: Dist) -> float:
    """Ent(X' - Y') - Ent(X')/2 - Ent(Y')/2 for independent copies."""
    if p.group != q.group:
        raise IncompatibleGroupError("Ruzsa distance needs a common group")
    return entropy(convolve(p, q, "-")) - 0.5 * entropy(p) - 0.5 * entropy(q)


def doubling_constant(p: Dist) -> float:
    """exp(Ent(X1 + X2) - Ent(X)) for independent copies; always >= 1."""
    return math.exp(entropy(convolve(p, p, "+")) - entropy(p))


def check_ese_suite(
    p: Dist, q: Dist, r: Dist, n: int, support_cap: int = 200_000
) -> list[MetricReport]:
    """Sumset estimate suite on a triple of independent distributions.

    Reports: the Ruzsa triangle inequality on (p, q, r); the 3x negation bound
    and the sum-vs-difference bound on (p, q); the (2n+1)-fold iterated sum
    bound; and the doubling-chain bound Ent(p^{*(2n+2)}) <= Ent(p) +
    (2n+1) log sigma[p].  A "measured" report records the realized iterated
    constant without ever counting as a violation.
    """
    if not (p.group == q.group == r.group):
        raise IncompatibleGroupError("suite needs a common group")
    if n < 1 or n > 4:
        raise PreconditionError("n must be in 1..4 (convolution blow-up cap)")
    w = {"p": dist_witness(p), "q": dist_witness(q), "r": dist_witness(r), "n": n}

    hp, hq = entropy(p), entropy(q)
    reports = [
        MetricReport(
            "ruzsa_triangle",
            ruzsa_distance(p, r),
            ruzsa_distance(p, q) + ruzsa_distance(q, r),
            w,
        ),
        MetricReport(
            "ruzsa_negation_3x",
            ruzsa_distance(p, q.negate()),
            3.0 * ruzsa_distance(p, q),
            w,
        ),
    ]
    pq_sum = convolve(p, q, "+")
    pq_diff = convolve(p, q, "-")
    reports.append(
        MetricReport(
            "sum_vs_difference",
            entropy(pq_sum),
            3.0 * entropy(pq_diff) - hp - hq,
            w,
        )
    )
    h_sum = entropy(pq_sum)
    iterated = iterated_convolve(pq_sum, n + 1, support_cap)
    reports.append(
        MetricReport(
            "iterated_sum_bound",
            entropy(iterated),
            (2 * n + 1) * h_sum - n * (hp + hq),
            w,
        )
    )
    log_sigma = entropy(convolve(p, p, "+")) - hp
    chain = iterated_convolve(p, 2 * n + 2, support_cap)
    h_chain = entropy(chain)
    reports.append(
        MetricReport(
            "doubling_chain_bound",
            h_chain,
            hp + (2 * n + 1) * log_sigma,
            w,
        )
    )
    if log_sigma > 1e-12:
        # realized constant for the (n+m)-fold estimate; informational only
        reports.append(
            MetricReport(
                "doubling_chain_ratio",
                0.0,
                (h_chain - hp) / ((2 * n + 1) * log_sigma),
                w,
                kind="measured",
            )
        )
    return reports


def check_lipschitz(
    p_x: Dist,
    p_x2: Dist,
    p_y: Dist,
    p_y2: Dist,
    oracle_transport: Callable[[Dist, Dist], object] | None = None,
) -> list[MetricReport]:
    """Transport-Lipschitz bounds for the Ruzsa distance and doubling constant.

    The transports are certified by the exact oracle, so the supports must be
    small enough for vertex enumeration.
    """
    if oracle_transport is None:
        from .transport import transport_exact

        oracle_transport = transport_exact
    t_x = oracle_transport(p_x, p_x2).cost
    t_y = oracle_transport(p_y, p_y2).cost
    w = {
        "p_x": dist_witness(p_x),
        "p_x2": dist_witness(p_x2),
        "p_y": dist_witness(p_y),
        "p_y2": dist_witness(p_y2),
    }
    reports = [
        MetricReport(
            "ruzsa_transport_lipschitz",
            abs(ruzsa_distance(p_x2, p_y2) - ruzsa_distance(p_x, p_y)),
            1.5 * (t_x + t_y),
            w,
        ),
        MetricReport(
            "doubling_transport_lipschitz",
            abs(
                math.log(doubling_constant(p_x))
                - math.log(doubling_constant(p_x2))
            ),
            3.0 * t_x,
            w,
        ),
        # identity: log sigma[X] equals the Ruzsa distance from X to -X
        MetricReport(
            "doubling_negation_identity",
            abs(math.log(doubling_constant(p_x)) - ruzsa_distance(p_x, p_x.negate())),
            0.0,
            w,
        ),
    ]
    return reports


def sumset_increase_lhs(p: Dist, q: Dist) -> float:
    """Truncated-log transport sum approximating Ent(X+Y) - Ent(X).

    Returns L = sum_y q(y) sum_z p(z-y) log_+(p(z-y) / (p*q)(z)); the gap
    |L - (Ent(p*q) - Ent(p))| is at most 1 (in fact at most 1/e).
    """
    if p.group != q.group:
        raise IncompatibleGroupError("needs a common group")
    g = p.group
    s = convolve(p, q, "+")
    terms = []
    for y, qy in q.mass.items():
        for x, px in p.mass.items():
            z = g.add(x, y)
            ratio = px / s.mass[z]
            if ratio > 1:
                terms.append(float(qy) * float(px) * math.log(ratio))
    return math.fsum(terms)


def sumset_increase_report(p: Dist, q: Dist) -> MetricReport:
    lhs = sumset_increase_lhs(p, q)
    gap = entropy(convolve(p, q, "+")) - entropy(p)
    return MetricReport(
        "sumset_increase_formula",
        abs(lhs - gap),
        1.0,
        {"p": dist_witness(p), "q": dist_witness(q), "L": lhs, "gap": gap},
    )


@dataclass
class LevelSetReport:
    """Doubly exponential density levels of a near-uniform distribution."""

    levels: dict[int, tuple[Element, ...]]
    weighted_sum: float          # sharpened exact bound, must be <= log_k
    classic_weighted_sum: float  # sum of 2^k P(A_k), reported only
    log_k: float


def density_level(p_times_a: Fraction) -> int:
    """Level index k >= 1 with 2^(2^(k-1)) <= p|A| < 2^(2^k); 0 below."""
    if p_times_a < 2:
        return 0
    k = 1
    while p_times_a >= 2 ** (2**k):
        k += 1
    return k


def jensen_level_sets(
    p: Dist, ambient: Iterable[Element], k_bound: float
) -> LevelSetReport:
    """Partition the ambient box by density level and bound the excess mass.

    Requires Ent(p) >= log|A| - log K.  The sharpened form
    sum_k max(2^(k-1) log 2 - 1, 0) P(A_k) <= log K is exact and is verified
    here; the classic 2^k-weighted sum is reported without assertion.
    """
    ambient_set = {p.group.reduce(e) for e in ambient}
    if not set(p.mass) <= ambient_set:
        raise PreconditionError("distribution must be supported inside the ambient set")
    size = len(ambient_set)
    log_k = math.log(k_bound)
    ent = entropy(p)
    if ent < math.log(size) - log_k - 1e-12:
        raise PreconditionError(
            f"entropy {ent:.6f} below log|A| - log K = {math.log(size) - log_k:.6f}"
        )
    levels: dict[int, list[Element]] = {}
    level_mass: dict[int, Fraction] = {}
    for e, v in p.mass.items():
        k = density_level(v * size)
        if k >= 1:
            levels.setdefault(k, []).append(e)
            level_mass[k] = level_mass.get(k, Fraction(0)) + v
    weighted = math.fsum(
        max(2 ** (k - 1) * math.log(2) - 1.0, 0.0) * float(m)
        for k, m in sorted(level_mass.items())
    )
    classic = math.fsum(2**k * float(m) for k, m in sorted(level_mass.items()))
    if weighted > log_k + 1e-9:
        raise AssertionError(
            f"level-set bound violated: {weighted} > log K = {log_k}"
        )
    return LevelSetReport(
        levels={k: tuple(v) for k, v in sorted(levels.items())},
        weighted_sum=weighted,
        classic_weighted_sum=classic,
        log_k=log_k,
    )


def jensen_level_report(p: Dist, ambient: Sequence[Element], k_bound: float) -> MetricReport:
    rep = jensen_level_sets(p, ambient, k_bound)
    return MetricReport(
        "jensen_level_sets",
        rep.weighted_sum,
        rep.log_k,
        {"p": dist_witness(p), "ambient_size": len(tuple(ambient)), "K": k_bound},
    )


def three_sum_bound(x: Dist, y: Dist, z: Dist) -> MetricReport:
    """Ent(X+Y+Z) <= (Ent(X+Y) + Ent(Y+Z) + Ent(Z+X)) / 2 for independent triples."""
    lhs = entropy(convolve(convolve(x, y, "+"), z, "+"))
    rhs = 0.5 * (
        entropy(convolve(x, y, "+"))
        + entropy(convolve(y, z, "+"))
        + entropy(convolve(z, x, "+"))
    )
    return MetricReport(
        "three_sum_bound",
        lhs,
        rhs,
        {"x": dist_witness(x), "y": dist_witness(y), "z": dist_witness(z)},
    )
