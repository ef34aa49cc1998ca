import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from polywell.exact import RationalMatrix, rank
from polywell.reductions import (
    InfeasibleError,
    L0Instance,
    PartitionInstance,
    brute_force_l0,
    brute_force_partition,
    least_norm_solution,
    partition_to_instance,
    path_potential,
    reduce_l0,
    tv_partition_instance,
)
from polywell.wellposed import Status, ill_posedness_number, well_posedness

F = Fraction


def test_l0_examples():
    inst = L0Instance([[1, 1]], (1,))
    assert brute_force_l0(inst) == 1
    assert ill_posedness_number(reduce_l0(inst)) == 1
    inst = L0Instance([[1, 0], [0, 1]], (1, 1))
    assert brute_force_l0(inst) == 2
    assert ill_posedness_number(reduce_l0(inst)) == 2


def test_least_norm():
    v = least_norm_solution(RationalMatrix([[1, 1]]), (2,))
    assert v == (1, 1)
    with pytest.raises(InfeasibleError):
        least_norm_solution(RationalMatrix([[1, 1], [2, 2]]), (1, 3))


def test_l0_infeasible():
    with pytest.raises(InfeasibleError):
        reduce_l0(L0Instance([[1, 1], [1, 1]], (1, 2)))
    with pytest.raises(InfeasibleError):
        brute_force_l0(L0Instance([[1, 1]], (-1,), nonneg=True))


def test_partition_examples():
    for w, exists in (((1, 2, 3), True), ((1, 1, 1), False), ((2, 2), True)):
        p = PartitionInstance(w)
        assert brute_force_partition(p) is exists
        expected = Status.ILL_POSED if exists else Status.WELL_POSED
        assert well_posedness(partition_to_instance(p)).status is expected
        assert well_posedness(tv_partition_instance(p)).status is expected
    assert well_posedness(tv_partition_instance(PartitionInstance((2, 2)), nonneg=True)).status is Status.ILL_POSED


def test_partition_validation():
    with pytest.raises(ValueError):
        PartitionInstance(())
    with pytest.raises(ValueError):
        PartitionInstance((1, -2))
    with pytest.raises(ValueError):
        partition_to_instance(PartitionInstance((3,)))


def test_path_potential():
    assert path_potential((1, 2, 3)) == (0, -1, -3, -6)


def test_reduced_matrix_shape():
    inst = reduce_l0(L0Instance([[1, 2, 0, 1], [0, 1, 1, 1]], (1, 1)))
    assert inst.A.shape == (2, 4) and inst.nullity == 2
    assert all(a.denominator == 1 for row in inst.A.rows for a in row)


@settings(max_examples=15)
@given(st.lists(st.integers(1, 6), min_size=2, max_size=6))
def test_encodings_agree(weights):
    p = PartitionInstance(weights)
    exists = brute_force_partition(p)
    assert (well_posedness(partition_to_instance(p), certify=False).status is Status.ILL_POSED) == exists
    assert (well_posedness(tv_partition_instance(p), certify=False).status is Status.ILL_POSED) == exists


@settings(max_examples=10)
@given(st.randoms(use_true_random=False), st.booleans())
def test_l0_equivalence_random(rng, nonneg):
    B = [[F(rng.randint(-2, 2)) for _ in range(4)] for _ in range(2)]
    z0 = [F(rng.choice([0, 0, 1, 2])) for _ in range(4)]
    y = tuple(sum(b * z for b, z in zip(row, z0)) for row in B)
    inst = L0Instance(B, y, nonneg)
    assert brute_force_l0(inst) == ill_posedness_number(reduce_l0(inst))
