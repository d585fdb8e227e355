"""Coset progressions: enumeration, properness, uniform laws, embeddings."""

import math
import random
from fractions import Fraction as F

import pytest

from entsum.dists import Dist, entropy
from entsum.errors import CapExceededError, NonProperError
from entsum.groups import GroupSpec
from entsum.metrics import doubling_constant
from entsum.progressions import (
    CosetProgression,
    box_embedding,
    is_t_proper,
    uniform_on,
)

Z = GroupSpec([0])
Z4 = GroupSpec([4])
Z8 = GroupSpec([8])
ZZ = GroupSpec([0, 0])


def test_enumerate_interval():
    cp = CosetProgression(Z, [(0,)], (0,), [(1,)], [5])
    assert cp.enumerate() == frozenset({(0,), (1,), (2,), (3,), (4,)})


def test_enumerate_pure_coset():
    cp = CosetProgression(Z4, [(0,), (2,)], (1,))
    assert cp.enumerate() == frozenset({(1,), (3,)})
    assert cp.rank == 0


def test_enumerate_with_collision():
    cp = CosetProgression(Z4, [(0,)], (0,), [(2,)], [3])
    assert cp.enumerate() == frozenset({(0,), (2,)})


def test_t_proper_examples():
    assert is_t_proper(CosetProgression(Z, [(0,)], (0,), [(1,)], [5]), 2)
    assert not is_t_proper(CosetProgression(Z4, [(0,)], (0,), [(2,)], [3]), 1)
    cp = CosetProgression(Z8, [(0,)], (0,), [(1,)], [3])
    assert is_t_proper(cp, 2)
    assert not is_t_proper(cp, 3)


def test_t_proper_monotone():
    rng = random.Random(4)
    for _ in range(40):
        m = rng.randrange(4, 12)
        g = GroupSpec([m])
        cp = CosetProgression(
            g, [(0,)], (rng.randrange(m),), [(rng.randrange(1, m),)], [rng.randrange(1, 5)]
        )
        t = 1 + rng.randrange(1, 4)
        if is_t_proper(cp, t):
            assert is_t_proper(cp, 1)


def test_uniform_on_examples():
    cp = CosetProgression(Z, [(0,)], (0,), [(1,)], [5])
    assert entropy(uniform_on(cp)) == pytest.approx(math.log(5), abs=1e-12)
    collide = CosetProgression(Z4, [(0,)], (0,), [(2,)], [3])
    assert entropy(uniform_on(collide)) == pytest.approx(math.log(2), abs=1e-12)
    coset = CosetProgression(Z4, [(0,), (2,)], (1,))
    assert doubling_constant(uniform_on(coset)) == pytest.approx(1.0, abs=1e-12)


def test_box_embedding_interval():
    cp = CosetProgression(Z, [(0,)], (0,), [(1,)], [5])
    emb = box_embedding(cp)
    assert len(emb.forward) == 5
    assert emb.forward[((0,), (2,))] == (2,)


def test_box_embedding_rank2_sums_distinct():
    cp = CosetProgression(ZZ, [(0, 0)], (0, 0), [(1, 0), (0, 1)], [4, 4])
    emb = box_embedding(cp)
    assert len(emb.forward) == 16
    # doubled-box sums stay distinct in a torsion-free group
    keys = list(emb.forward.values())
    sums = {ZZ.add(a, b) for a in keys for b in keys}
    assert len(sums) == 49  # (2*4-1)^2


def test_box_embedding_rejects_nonproper():
    cp = CosetProgression(Z4, [(0,)], (0,), [(2,)], [3])
    with pytest.raises(NonProperError):
        box_embedding(cp, proper_required=True)


def test_pull_mass():
    cp = CosetProgression(Z, [(0,)], (0,), [(1,)], [4])
    emb = box_embedding(cp)
    p = Dist(Z, {(0,): F(1, 2), (3,): F(1, 2)})
    box = emb.pull(p)
    assert box == {((0,), (0,)): F(1, 2), ((0,), (3,)): F(1, 2)}


def test_doubling_at_most_two_per_rank():
    fixtures = [
        CosetProgression(Z, [(0,)], (0,), [(1,)], [7]),
        CosetProgression(Z, [(0,)], (3,), [(2,)], [5]),
        CosetProgression(ZZ, [(0, 0)], (0, 0), [(1, 0), (0, 1)], [3, 4]),
        CosetProgression(ZZ, [(0, 0)], (1, 2), [(1, 1), (2, -1)], [4, 3]),
        CosetProgression(GroupSpec([0, 0, 0]), [(0, 0, 0)], (0, 0, 0),
                         [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [3, 3, 3]),
        CosetProgression(GroupSpec([8]), [(0,), (4,)], (1,), [(1,)], [2]),
    ]
    for cp in fixtures:
        d = len(cp.steps)
        sigma = doubling_constant(uniform_on(cp))
        assert sigma <= 2**d + 1e-9


def test_enumeration_cap():
    cp = CosetProgression(Z, [(0,)], (0,), [(1,)], [10])
    with pytest.raises(CapExceededError):
        cp.enumerate(cap=5)
