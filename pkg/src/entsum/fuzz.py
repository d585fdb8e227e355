"""Property-based fuzz orchestration with a replayable counterexample corpus.

Every registered inequality gets seeded exact-rational instances; violations
are persisted one file per event, named by content hash, and can be replayed
bit-for-bit because instance generation depends only on (seed, check, index).
Identical configs produce byte-identical reports across runs and worker
counts: results are merged with a deterministic sort before serialisation.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import bsg as bsg_mod
from .dists import (
    Dist,
    JointDist,
    conditional_entropy,
    convolve,
    entropy,
    independent_joint,
    is_independent,
    joint_entropy,
)
from .errors import CapExceededError, PremiseError, SchemaError
from .groups import GroupSpec
from .metrics import (
    MetricReport,
    check_ese_suite,
    check_lipschitz,
    jensen_level_report,
    ruzsa_distance,
    sumset_increase_report,
    three_sum_bound,
)
from .torsionfree import PiecewiseDensity, abbn_check

VERSION = "0.1.0"
TOL = 1e-9

DEFAULT_CHECKS = (
    "eident",
    "ento",
    "triv",
    "ese",
    "submodularity",
    "xysim",
    "jensen",
    "bsg",
    "mmt",
    "lipschitz",
    "abbn",
)


@dataclass
class FuzzConfig:
    seed: int = 0
    instance_count: int = 100
    support_cap: int = 6
    denominator_cap: int = 64
    groups: list = field(default_factory=lambda: [[0], [8]])
    inequality_set: list = field(default_factory=lambda: list(DEFAULT_CHECKS))
    workers: int = 1

    @staticmethod
    def from_json(obj) -> "FuzzConfig":
        if isinstance(obj, (str, Path)):
            with open(obj) as fh:
                obj = json.load(fh)
        known = {f for f in FuzzConfig.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise SchemaError(f"unknown config keys: {sorted(extra)}")
        return FuzzConfig(**obj)


@dataclass
class Counterexample:
    check: str
    name: str
    index: int
    child_seed: int
    slack: float
    version: str
    witness: dict


def _child_seed(seed: int, check: str, index: int) -> int:
    h = hashlib.blake2b(
        f"{seed}:{check}:{index}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(h, "big")


# ---------------------------------------------------------------------------
# seeded exact-rational generators


def _composition(rng: random.Random, total: int, parts: int) -> list[int]:
    """Positive integers summing to `total` via sorted distinct cut points."""
    if parts == 1:
        return [total]
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    edges = [0] + cuts + [total]
    return [b - a for a, b in zip(edges, edges[1:])]


def _rand_elements(rng: random.Random, g: GroupSpec, count: int) -> list:
    seen = set()
    tries = 0
    while len(seen) < count and tries < 400:
        coord = tuple(
            rng.randrange(m) if m > 0 else rng.randrange(-8, 9) for m in g.moduli
        )
        seen.add(coord)
        tries += 1
    return sorted(seen)


def random_dist(rng: random.Random, g: GroupSpec, support_cap: int, den_cap: int) -> Dist:
    size = rng.randrange(1, support_cap + 1)
    els = _rand_elements(rng, g, size)
    size = len(els)
    den = rng.randrange(size, max(den_cap, size) + 1)
    parts = _composition(rng, den, size)
    return Dist(g, {e: Fraction(n, den) for e, n in zip(els, parts)})


def random_joint(
    rng: random.Random, g: GroupSpec, support_cap: int, den_cap: int, coords: int = 2
) -> JointDist:
    size = rng.randrange(1, support_cap + 1)
    atoms = set()
    tries = 0
    while len(atoms) < size and tries < 400:
        atom = tuple(
            tuple(rng.randrange(m) if m > 0 else rng.randrange(-4, 5) for m in g.moduli)
            for _ in range(coords)
        )
        atoms.add(atom)
        tries += 1
    atoms = sorted(atoms)
    den = rng.randrange(len(atoms), max(den_cap, len(atoms)) + 1)
    parts = _composition(rng, den, len(atoms))
    return JointDist([g] * coords, {a: Fraction(n, den) for a, n in zip(atoms, parts)})


def _pick_group(rng: random.Random, cfg: FuzzConfig) -> GroupSpec:
    return GroupSpec(cfg.groups[rng.randrange(len(cfg.groups))])


# ---------------------------------------------------------------------------
# registered checks; each returns a list of MetricReports


def _check_eident(rng, cfg):
    j = random_joint(rng, _pick_group(rng, cfg), cfg.support_cap, cfg.denominator_cap)
    lhs = abs(conditional_entropy(j, [0], [1]) - (j.entropy() - joint_entropy(j, [1])))
    return [MetricReport("conditional_entropy_identity", lhs, 0.0,
                         {"joint_atoms": len(j)})]


def _check_ento(rng, cfg):
    g = _pick_group(rng, cfg)
    independent = rng.randrange(2) == 0
    if independent:
        p = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
        q = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
        j = independent_joint(p, q)
    else:
        j = random_joint(rng, g, cfg.support_cap, cfg.denominator_cap)
    hx = joint_entropy(j, [0])
    hxy = conditional_entropy(j, [0], [1])
    reports = [MetricReport("conditioning_reduces_entropy", hxy, hx, {})]
    near_equal = abs(hx - hxy) <= TOL
    exact_indep = is_independent(j, [0], [1])
    ok = near_equal == exact_indep
    reports.append(
        MetricReport(
            "independence_iff_conditional_equality",
            0.0 if ok else 1.0,
            0.0,
            {"near_equal": near_equal, "independent": exact_indep},
        )
    )
    return reports


def _check_triv(rng, cfg):
    g = _pick_group(rng, cfg)
    p = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    q = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    reports = [MetricReport("ruzsa_nonnegative", 0.0, ruzsa_distance(p, q), {})]
    s = convolve(p, q, "+")
    reports.append(
        MetricReport("independent_sum_lower", max(entropy(p), entropy(q)), entropy(s), {})
    )
    reports.append(
        MetricReport("sum_upper", entropy(s), entropy(p) + entropy(q), {})
    )
    return reports


def _check_ese(rng, cfg):
    g = _pick_group(rng, cfg)
    p = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    q = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    r = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    n = 1 + rng.randrange(3)
    return check_ese_suite(p, q, r, n)


def _check_submodularity(rng, cfg):
    # deterministic-closure fixture: X1=(A,B), X2=(B,C), X0=B, X12=(A,B,C)
    g = GroupSpec([4])
    base = random_joint(rng, g, cfg.support_cap, cfg.denominator_cap, coords=3)
    j = base.push(
        lambda a: (a[1], a[0] + a[1], a[1] + a[2], a[0] + a[1] + a[2]),
        [g, GroupSpec([4, 4]), GroupSpec([4, 4]), GroupSpec([4, 4, 4])],
    )

    def determinations(atom):
        x0, x1, x2, x12 = atom
        return x1[1:] == x0 and x2[:1] == x0 and x12 == x1 + x2[1:]

    return [submodularity_check(j, determinations)]


def _check_xysim(rng, cfg):
    g = _pick_group(rng, cfg)
    p = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    q = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    return [sumset_increase_report(p, q)]


def _check_jensen(rng, cfg):
    size = [8, 16, 32][rng.randrange(3)]
    g = GroupSpec([size])
    ambient = [(i,) for i in range(size)]
    p = random_dist(rng, g, min(cfg.support_cap, size), cfg.denominator_cap)
    deficit = math.log(size) - entropy(p)
    return [jensen_level_report(p, ambient, math.exp(deficit) * (1 + 1e-9))]


def _check_bsg(rng, cfg):
    g = _pick_group(rng, cfg)
    j = random_joint(rng, g, cfg.support_cap, cfg.denominator_cap)
    inst = bsg_mod.BsgInstance.from_joint(j)
    return bsg_mod.verify_bsg(inst)


def _check_mmt(rng, cfg):
    g = _pick_group(rng, cfg)
    x = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    y = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    z = random_dist(rng, g, cfg.support_cap, cfg.denominator_cap)
    return [three_sum_bound(x, y, z)]


def _check_lipschitz(rng, cfg):
    g = GroupSpec([4]) if rng.randrange(2) == 0 else GroupSpec([6])
    p_x = random_dist(rng, g, 3, cfg.denominator_cap)
    p_x2 = random_dist(rng, g, 3, cfg.denominator_cap)
    p_y = random_dist(rng, g, 3, cfg.denominator_cap)
    p_y2 = random_dist(rng, g, 3, cfg.denominator_cap)
    return check_lipschitz(p_x, p_x2, p_y, p_y2)


def _check_abbn(rng, cfg):
    def rand_step():
        pieces = rng.randrange(1, 7)
        den = rng.randrange(pieces, 64 + pieces)
        parts = _composition(rng, den, pieces)
        lo = rng.randrange(-4, 5)
        breaks = list(range(lo, lo + pieces + 1))
        return PiecewiseDensity(breaks, [(Fraction(n, den), 0) for n in parts])

    return [abbn_check(rand_step(), rand_step())]


CHECKS = {
    "eident": _check_eident,
    "ento": _check_ento,
    "triv": _check_triv,
    "ese": _check_ese,
    "submodularity": _check_submodularity,
    "xysim": _check_xysim,
    "jensen": _check_jensen,
    "bsg": _check_bsg,
    "mmt": _check_mmt,
    "lipschitz": _check_lipschitz,
    "abbn": _check_abbn,
}


def submodularity_check(j: JointDist, determinations=None) -> MetricReport:
    """Ent(X12) + Ent(X0) <= Ent(X1) + Ent(X2) for a joint (X0, X1, X2, X12).

    The determination premise (X1 and X2 each determine X0, and (X1, X2)
    determines X12) is verified from the joint support before the bound is
    evaluated; a violated premise is an input error, not a counterexample.
    An optional per-atom predicate adds an explicit functional check.
    """
    if j.k != 4:
        raise PremiseError("joint must carry (X0, X1, X2, X12)")
    maps_10: dict = {}
    maps_20: dict = {}
    maps_12: dict = {}
    for atom in j.mass:
        x0, x1, x2, x12 = atom
        if maps_10.setdefault(x1, x0) != x0:
            raise PremiseError("X1 does not determine X0")
        if maps_20.setdefault(x2, x0) != x0:
            raise PremiseError("X2 does not determine X0")
        if maps_12.setdefault((x1, x2), x12) != x12:
            raise PremiseError("(X1, X2) does not determine X12")
        if determinations is not None and not determinations(atom):
            raise PremiseError("explicit determination tables violated")
    lhs = joint_entropy(j, [3]) + joint_entropy(j, [0])
    rhs = joint_entropy(j, [1]) + joint_entropy(j, [2])
    return MetricReport("submodularity", lhs, rhs, {"atoms": len(j)})


# ---------------------------------------------------------------------------
# orchestration


def _run_instances(cfg: FuzzConfig, check: str, lo: int, hi: int) -> dict:
    fn = CHECKS[check]
    rows = []
    skipped = 0
    for index in range(lo, hi):
        child = _child_seed(cfg.seed, check, index)
        rng = random.Random(child)
        try:
            reports = fn(rng, cfg)
        except CapExceededError:
            skipped += 1
            continue
        for rep in reports:
            rows.append(
                {
                    "check": check,
                    "index": index,
                    "child_seed": child,
                    "name": rep.name,
                    "lhs": rep.lhs,
                    "rhs": rep.rhs,
                    "slack": rep.slack,
                    "kind": rep.kind,
                    "witness": rep.witness,
                }
            )
    return {"rows": rows, "skipped": skipped}


def _chunk_worker(args):
    cfg_dict, check, lo, hi = args
    return _run_instances(FuzzConfig(**cfg_dict), check, lo, hi)


def fuzz_run(cfg: FuzzConfig, out_dir) -> dict:
    """Run the configured inequality set; write results and counterexamples.

    Returns a summary dict with per-name statistics; the caller maps a
    positive violation count to a nonzero exit code.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "counterexamples").mkdir(exist_ok=True)
    unknown = [c for c in cfg.inequality_set if c not in CHECKS]
    if unknown:
        raise SchemaError(f"unknown inequality names: {unknown}")

    tasks = []
    workers = max(1, cfg.workers)
    for check in cfg.inequality_set:
        n = cfg.instance_count
        step = max(1, math.ceil(n / workers))
        for lo in range(0, n, step):
            tasks.append((asdict(cfg), check, lo, min(n, lo + step)))

    if workers == 1 or len(tasks) <= 1:
        chunks = [_chunk_worker(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_chunk_worker, tasks))

    rows = [row for chunk in chunks for row in chunk["rows"]]
    skipped = sum(chunk["skipped"] for chunk in chunks)
    rows.sort(key=lambda r: (r["check"], r["index"], r["name"]))

    violations = 0
    per_name: dict[str, dict] = {}
    for row in rows:
        stats = per_name.setdefault(
            row["name"],
            {"count": 0, "min_slack": math.inf, "argmin": None, "violations": 0,
             "kind": row["kind"]},
        )
        stats["count"] += 1
        if row["slack"] < stats["min_slack"]:
            stats["min_slack"] = row["slack"]
            stats["argmin"] = {"check": row["check"], "index": row["index"],
                               "child_seed": row["child_seed"]}
        violated = row["kind"] == "bound" and row["slack"] < -TOL
        if violated:
            stats["violations"] += 1
            violations += 1
            ce = Counterexample(
                check=row["check"],
                name=row["name"],
                index=row["index"],
                child_seed=row["child_seed"],
                slack=row["slack"],
                version=VERSION,
                witness=row["witness"],
            )
            payload = json.dumps(asdict(ce), sort_keys=True)
            digest = hashlib.sha256(payload.encode()).hexdigest()[:16]
            path = out / "counterexamples" / f"{row['name']}-{digest}.json"
            path.write_text(payload + "\n")
            row["witness_path"] = str(path)
        else:
            row["witness_path"] = None

    lines = []
    for row in rows:
        slim = {k: row[k] for k in
                ("check", "index", "name", "lhs", "rhs", "slack", "kind",
                 "witness_path")}
        lines.append(json.dumps(slim, sort_keys=True))
    (out / "results.jsonl").write_text("\n".join(lines) + ("\n" if lines else ""))

    summary = {
        "version": VERSION,
        "seed": cfg.seed,
        "instances": cfg.instance_count,
        "violations": violations,
        "skipped": skipped,
        "per_name": {k: per_name[k] for k in sorted(per_name)},
    }
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")
    return summary


def replay(path, cfg: FuzzConfig | None = None) -> dict:
    """Recompute a stored counterexample and compare its slack.

    The stored instance is regenerated from its child seed, so any tampering
    with the recorded slack (or a version drift that changes generation)
    shows up as a non-reproducing replay.
    """
    with open(path) as fh:
        ce = json.load(fh)
    for key in ("check", "name", "child_seed", "slack", "version"):
        if key not in ce:
            raise SchemaError(f"counterexample file lacks {key!r}")
    if ce["check"] not in CHECKS:
        raise SchemaError(f"unknown check {ce['check']!r}")
    cfg = cfg or FuzzConfig()
    rng = random.Random(ce["child_seed"])
    reports = CHECKS[ce["check"]](rng, cfg)
    matching = [r for r in reports if r.name == ce["name"]]
    if not matching:
        return {"reproduced": False, "reason": "report name absent", "stored": ce}
    new_slack = matching[0].slack
    reproduced = abs(new_slack - ce["slack"]) <= 1e-12
    out = {
        "reproduced": reproduced,
        "stored_slack": ce["slack"],
        "recomputed_slack": new_slack,
        "name": ce["name"],
        "check": ce["check"],
    }
    if ce["version"] != VERSION:
        out["version_warning"] = f"stored {ce['version']}, current {VERSION}"
    return out


def report_render(rows) -> tuple[str, dict]:
    """Human-readable per-inequality table plus a machine summary."""
    per_name: dict[str, dict] = {}
    for row in rows:
        stats = per_name.setdefault(
            row["name"], {"count": 0, "min_slack": math.inf, "argmin_witness": None}
        )
        stats["count"] += 1
        if row["slack"] < stats["min_slack"]:
            stats["min_slack"] = row["slack"]
            stats["argmin_witness"] = row.get("witness_path")
    header = f"{'inequality':34} {'count':>7} {'min slack':>14}  argmin witness"
    lines = [header, "-" * len(header)]
    for name in sorted(per_name):
        s = per_name[name]
        wit = s["argmin_witness"] or "-"
        lines.append(f"{name:34} {s['count']:>7} {s['min_slack']:>14.6e}  {wit}")
    return "\n".join(lines), {k: per_name[k] for k in sorted(per_name)}
