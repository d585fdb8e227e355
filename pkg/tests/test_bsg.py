"""The path-joint construction and its entropy bounds."""

import itertools
import math
import random
from fractions import Fraction as F

import pytest

from entsum.bsg import BsgInstance, build_path_joint, factorization_exact, verify_bsg
from entsum.dists import (
    Dist,
    JointDist,
    conditional_entropy,
    independent_joint,
    joint_entropy,
)
from entsum.fuzz import random_joint
from entsum.groups import GroupSpec

Z2 = GroupSpec([2])
Z4 = GroupSpec([4])
Z = GroupSpec([0])
LOG2 = math.log(2)


def fair_bit():
    return Dist.uniform(Z2, [(0,), (1,)])


def test_instance_defect_clamped():
    inst = BsgInstance.from_joint(independent_joint(fair_bit(), fair_bit()))
    assert inst.log_k == 0.0


def test_path_joint_independent_bits():
    inst = BsgInstance.from_joint(independent_joint(fair_bit(), fair_bit()))
    path = build_path_joint(inst)
    # 16 equally likely paths; entropy = chain-rule value 4 log 2
    assert len(path) == 16
    assert set(path.mass.values()) == {F(1, 16)}
    j = inst.joint
    expect = 2 * j.entropy() - joint_entropy(j, [1]) + j.entropy() - joint_entropy(j, [0])
    assert path.entropy() == pytest.approx(expect, abs=1e-9)


def test_path_joint_degenerate_equal_variables():
    j = JointDist([Z2, Z2], {((0,), (0,)): F(1, 2), ((1,), (1,)): F(1, 2)})
    inst = BsgInstance.from_joint(j)
    path = build_path_joint(inst)
    # X1 = X2 = Y = Y': two atoms, entropy log 2
    assert len(path) == 2
    assert path.entropy() == pytest.approx(LOG2, abs=1e-12)


def test_path_joint_matches_path_counting_oracle():
    # uniform law on the complete bipartite edge set over two bits: the path
    # joint must be the uniform law on all length-3 paths (y' - x1 - y - x2)
    edges = [((a,), (b,)) for a in range(2) for b in range(2)]
    j = JointDist([Z2, Z2], {e: F(1, 4) for e in edges})
    inst = BsgInstance.from_joint(j)
    path = build_path_joint(inst)
    edge_set = set(edges)
    paths = [
        (x1, x2, y, yp)
        for x1, x2, y, yp in itertools.product([(0,), (1,)], repeat=4)
        if (x1, y) in edge_set and (x2, y) in edge_set and (x1, yp) in edge_set
    ]
    oracle = JointDist([Z2] * 4, {p: F(1, len(paths)) for p in paths})
    assert path == oracle


def test_factorization_is_exact_rational():
    rng = random.Random(3)
    for _ in range(40):
        j = random_joint(rng, Z4, 6, 64)
        path = build_path_joint(BsgInstance.from_joint(j))
        assert factorization_exact(path)


def test_trial_entropies_match_conditionals():
    rng = random.Random(7)
    for _ in range(40):
        j = random_joint(rng, Z4, 6, 64)
        path = build_path_joint(BsgInstance.from_joint(j))
        assert conditional_entropy(path, [1], [0, 2]) == pytest.approx(
            conditional_entropy(j, [0], [1]), abs=1e-9
        )
        assert conditional_entropy(path, [3], [0, 2]) == pytest.approx(
            conditional_entropy(j, [1], [0]), abs=1e-9
        )


def test_verify_bsg_independent_bits_equality():
    inst = BsgInstance.from_joint(independent_joint(fair_bit(), fair_bit()))
    reports = {r.name: r for r in verify_bsg(inst)}
    assert reports["bsg_independent_sum"].lhs == pytest.approx(LOG2, abs=1e-9)
    assert reports["bsg_independent_sum"].slack == pytest.approx(0.0, abs=1e-9)


def test_verify_bsg_degenerate():
    j = JointDist([Z2, Z2], {((0,), (0,)): F(1, 2), ((1,), (1,)): F(1, 2)})
    inst = BsgInstance.from_joint(j)
    assert inst.log_k == pytest.approx(LOG2, abs=1e-12)
    for rep in verify_bsg(inst):
        assert not rep.violated(), rep.name


def test_verify_bsg_fuzz():
    rng = random.Random(2028)
    for _ in range(120):
        g = Z4 if rng.randrange(2) else Z
        j = random_joint(rng, g, 6, 64)
        for rep in verify_bsg(BsgInstance.from_joint(j)):
            assert not rep.violated(), rep.name
