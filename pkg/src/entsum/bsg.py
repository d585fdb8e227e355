"""Entropy Balog-Szemeredi-Gowers construction and verification.

From a weakly dependent pair (X, Y) the construction draws two conditionally
independent trials of X given Y and then a conditionally independent trial
of Y given the first X-copy, yielding a path joint (X1, X2, Y, Y') whose
conditional entropies satisfy explicit bounds in terms of the dependence
defect log K.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .dists import JointDist, conditional_entropy, joint_entropy
from .errors import CapExceededError, PreconditionError
from .metrics import MetricReport

# coordinate order of the path joint
X1, X2, Y, YP = 0, 1, 2, 3


@dataclass
class BsgInstance:
    """A two-coordinate joint (X, Y) with its dependence defect log K.

    log K is the larger of the mutual-information defect
    Ent(X) + Ent(Y) - Ent(X, Y) and the sum-compression defect
    Ent(X+Y) - Ent(X)/2 - Ent(Y)/2, clamped at 0 so K >= 1.
    """

    joint: JointDist
    log_k: float

    @staticmethod
    def from_joint(j: JointDist) -> "BsgInstance":
        if j.k != 2:
            raise PreconditionError("instance needs a joint over exactly (X, Y)")
        if j.groups[0] != j.groups[1]:
            raise PreconditionError("X and Y must share a group")
        hx = joint_entropy(j, [0])
        hy = joint_entropy(j, [1])
        hxy = j.entropy()
        hsum = j.sum_dist([0, 1]).entropy()
        log_k = max(hx + hy - hxy, hsum - 0.5 * hx - 0.5 * hy, 0.0)
        return BsgInstance(j, log_k)


def build_path_joint(inst: BsgInstance) -> JointDist:
    """Joint law of (X1, X2, Y, Y') with mass p(x1,y) p(x2,y) / p_Y(y) * p(x1,y') / p_X(x1).

    X1, X2 are conditionally independent trials of X given Y, and Y' is a
    conditionally independent trial of Y given X1; hence X2 and Y' are
    conditionally independent given (X1, Y), which is an exact rational
    identity of the constructed masses.
    """
    j = inst.joint
    g = j.groups[0]
    px: dict = {}
    py: dict = {}
    for (x, y), v in j.mass.items():
        px[x] = px.get(x, Fraction(0)) + v
        py[y] = py.get(y, Fraction(0)) + v
    by_y: dict = {}
    by_x: dict = {}
    for (x, y), v in j.mass.items():
        by_y.setdefault(y, []).append((x, v))
        by_x.setdefault(x, []).append((y, v))
    atoms: dict = {}
    for y, col in by_y.items():
        pyv = py[y]
        for x1, v1 in col:
            for x2, v2 in col:
                base = v1 * v2 / pyv
                for yp, v3 in by_x[x1]:
                    atoms[(x1, x2, y, yp)] = base * v3 / px[x1]
    return JointDist([g, g, g, g], atoms)


def factorization_exact(path: JointDist) -> bool:
    """Exact check that X2 and Y' are conditionally independent given (X1, Y)."""
    cond: dict = {}
    for (x1, x2, y, yp), v in path.mass.items():
        cell = cond.setdefault((x1, y), {"w": Fraction(0), "x2": {}, "yp": {}, "atoms": {}})
        cell["w"] += v
        cell["x2"][x2] = cell["x2"].get(x2, Fraction(0)) + v
        cell["yp"][yp] = cell["yp"].get(yp, Fraction(0)) + v
        cell["atoms"][(x2, yp)] = cell["atoms"].get((x2, yp), Fraction(0)) + v
    for cell in cond.values():
        w = cell["w"]
        for (x2, yp), v in cell["atoms"].items():
            if v * w != cell["x2"][x2] * cell["yp"][yp]:
                return False
        for x2, vx in cell["x2"].items():
            for yp, vy in cell["yp"].items():
                if (x2, yp) not in cell["atoms"] and vx * vy != 0:
                    return False
    return True


def verify_bsg(inst: BsgInstance, support_cap: int = 10_000) -> list[MetricReport]:
    """Evaluate the path-joint entropy bounds at the instance's log K.

    Reports, in order: Ent(X2 | X1, Y) >= Ent(X) - log K; the same for Y';
    the weak bound Ent(X1 - X2 | Y) <= Ent(X) + 4 log K; and the main bound
    Ent(X2 + Y' | X1, Y) <= Ent(X)/2 + Ent(Y)/2 + 7 log K.
    """
    j = inst.joint
    path = build_path_joint(inst)
    if len(path) > support_cap:
        raise CapExceededError(
            f"path joint has {len(path)} atoms, cap {support_cap}"
        )
    if not factorization_exact(path):
        raise AssertionError("conditional-independence factorization failed")
    g = j.groups[0]
    hx = joint_entropy(j, [0])
    hy = joint_entropy(j, [1])
    logk = inst.log_k
    w = {
        "joint": {
            "groups": [list(gr.moduli) for gr in j.groups],
            "atoms": [
                {"xs": [list(c) for c in atom], "num": v.numerator, "den": v.denominator}
                for atom, v in j.mass.items()
            ],
        },
        "log_k": logk,
    }

    h_x2_given = conditional_entropy(path, [X2], [X1, Y])
    h_yp_given = conditional_entropy(path, [YP], [X1, Y])

    diff_joint = path.push(
        lambda a: (g.sub(a[X1], a[X2]), a[Y]), [g, g]
    )
    h_diff_given_y = conditional_entropy(diff_joint, [0], [1])

    sum_joint = path.push(
        lambda a: (g.add(a[X2], a[YP]), a[X1], a[Y]), [g, g, g]
    )
    h_sum_given = conditional_entropy(sum_joint, [0], [1, 2])

    return [
        MetricReport("bsg_first_trial_lower", hx - logk, h_x2_given, w),
        MetricReport("bsg_second_trial_lower", hy - logk, h_yp_given, w),
        MetricReport("bsg_weak_difference", h_diff_given_y, hx + 4.0 * logk, w),
        MetricReport("bsg_independent_sum", h_sum_given, 0.5 * hx + 0.5 * hy + 7.0 * logk, w),
    ]
