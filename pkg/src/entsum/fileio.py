"""JSON file formats for distributions, joints, progressions, certificates.

Masses are exact rationals (num/den pairs); loaders reject anything that does
not sum to exactly 1, so files round-trip without renormalisation surprises.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .dists import Dist, JointDist
from .errors import SchemaError
from .groups import GroupSpec
from .progressions import CosetProgression


def _read(path_or_obj):
    if isinstance(path_or_obj, (str, Path)):
        with open(path_or_obj) as fh:
            return json.load(fh)
    return path_or_obj


def _group(obj) -> GroupSpec:
    if not isinstance(obj, list) or not all(isinstance(m, int) and m >= 0 for m in obj):
        raise SchemaError(f"group must be a list of non-negative ints, got {obj!r}")
    return GroupSpec(obj)


def _fraction(atom) -> Fraction:
    try:
        num, den = atom["num"], atom["den"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"atom {atom!r} lacks exact num/den fields") from exc
    if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
        raise SchemaError(f"atom {atom!r} must carry integer num and positive den")
    return Fraction(num, den)


def load_dist(path_or_obj) -> Dist:
    obj = _read(path_or_obj)
    try:
        group = _group(obj["group"])
        atoms = obj["atoms"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("distribution file needs 'group' and 'atoms'") from exc
    mass = {}
    for atom in atoms:
        el = tuple(atom.get("x", ()))
        if len(el) != group.dim or not all(isinstance(c, int) for c in el):
            raise SchemaError(f"atom coordinates {atom!r} do not match the group")
        key = group.reduce(el)
        mass[key] = mass.get(key, Fraction(0)) + _fraction(atom)
    total = sum(mass.values(), Fraction(0))
    if total != 1:
        raise SchemaError(f"masses sum to {total}, exact 1 required")
    return Dist(group, mass)


def dump_dist(p: Dist) -> dict:
    return {
        "group": list(p.group.moduli),
        "atoms": [
            {"x": list(e), "num": v.numerator, "den": v.denominator}
            for e, v in p.mass.items()
        ],
    }


def load_joint(path_or_obj) -> JointDist:
    obj = _read(path_or_obj)
    try:
        groups = [_group(g) for g in obj["groups"]]
        atoms = obj["atoms"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("joint file needs 'groups' and 'atoms'") from exc
    mass = {}
    for atom in atoms:
        xs = atom.get("xs")
        if not isinstance(xs, list) or len(xs) != len(groups):
            raise SchemaError(f"atom {atom!r} does not match the coordinate count")
        key = tuple(g.reduce(tuple(x)) for g, x in zip(groups, xs))
        mass[key] = mass.get(key, Fraction(0)) + _fraction(atom)
    total = sum(mass.values(), Fraction(0))
    if total != 1:
        raise SchemaError(f"masses sum to {total}, exact 1 required")
    return JointDist(groups, mass)


def dump_joint(j: JointDist) -> dict:
    return {
        "groups": [list(g.moduli) for g in j.groups],
        "atoms": [
            {"xs": [list(x) for x in atom], "num": v.numerator, "den": v.denominator}
            for atom, v in j.mass.items()
        ],
    }


def load_progression(path_or_obj) -> CosetProgression:
    obj = _read(path_or_obj)
    try:
        group = _group(obj["group"])
        subgroup = [tuple(h) for h in obj["H"]]
        base = tuple(obj["base"])
        steps = [tuple(s) for s in obj.get("steps", [])]
        lengths = obj.get("lengths", [])
    except (KeyError, TypeError) as exc:
        raise SchemaError(
            "progression file needs 'group', 'H', 'base', 'steps', 'lengths'"
        ) from exc
    try:
        return CosetProgression(group, subgroup, base, steps, lengths)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def save_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")
