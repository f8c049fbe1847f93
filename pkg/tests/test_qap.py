import itertools
from math import factorial

import numpy as np
import pytest

from qaplon.errors import ContractError
from qaplon.qap import (
    Permutation,
    QapInstance,
    cost,
    cost_block,
    neighbors,
    rank,
    rank_block,
    swap,
    swap_delta,
    swap_delta_block,
    swap_pairs,
    unrank,
    unrank_block,
    unrank_many,
)


def small_instance() -> QapInstance:
    a = [[0, 1], [1, 0]]
    b = [[0, 3], [3, 0]]
    return QapInstance(n=2, a=np.array(a), b=np.array(b))


def random_instance(n: int, seed: int) -> QapInstance:
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 50, (n, n))
    b = rng.integers(0, 50, (n, n))
    np.fill_diagonal(a, 0)
    np.fill_diagonal(b, 0)
    return QapInstance(n=n, a=a, b=b)


def test_cost_hand_value():
    # identity on the 2x2 instance: a01*b01 + a10*b10 = 3 + 3
    assert cost(small_instance(), Permutation.identity(2)) == 6


def test_cost_matches_triple_loop():
    inst = random_instance(5, 0)
    p = Permutation((2, 0, 4, 1, 3))
    expected = sum(
        int(inst.a[i, j]) * int(inst.b[p.items[i], p.items[j]])
        for i in range(5)
        for j in range(5)
    )
    assert cost(inst, p) == expected


def test_permutation_validation():
    with pytest.raises(ContractError):
        Permutation((0, 0, 1))
    with pytest.raises(ContractError):
        Permutation((1, 2, 3))
    with pytest.raises(ContractError):
        Permutation(())


def test_instance_validation():
    with pytest.raises(ContractError):
        QapInstance(n=2, a=np.zeros((2, 3), dtype=int), b=np.zeros((2, 2), dtype=int))
    with pytest.raises(ContractError):
        QapInstance(n=2, a=np.array([[0, -1], [1, 0]]), b=np.zeros((2, 2), dtype=int))
    with pytest.raises(ContractError):
        QapInstance(n=0, a=np.zeros((0, 0), dtype=int), b=np.zeros((0, 0), dtype=int))
    # n = 1 is a legal, if degenerate, instance
    QapInstance(n=1, a=np.zeros((1, 1), dtype=int), b=np.zeros((1, 1), dtype=int))


def test_rank_unrank_roundtrip():
    for n in (2, 3, 4, 5):
        seen = set()
        for r in range(factorial(n)):
            p = unrank(n, r)
            assert rank(p) == r
            seen.add(p.items)
        assert len(seen) == factorial(n)


def test_rank_is_lexicographic():
    perms = [p.items for p in (unrank(4, r) for r in range(24))]
    assert perms == sorted(perms)
    assert rank(Permutation((1, 2, 0))) == 3


def test_swap_pairs_order():
    assert swap_pairs(3) == [(0, 1), (0, 2), (1, 2)]
    assert swap_pairs(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_neighbors_order_and_content():
    p = Permutation((0, 1, 2))
    got = [q.items for q in neighbors(p)]
    assert got == [(1, 0, 2), (2, 1, 0), (0, 2, 1)]
    for n in (3, 4, 5):
        p = unrank(n, factorial(n) // 2)
        nb = neighbors(p)
        assert len(nb) == n * (n - 1) // 2
        assert len({q.items for q in nb}) == len(nb)


def test_swap_delta_equals_cost_difference():
    for seed in range(3):
        inst = random_instance(6, seed)
        for r in (0, 100, 500, 719):
            p = unrank(6, r)
            base = cost(inst, p)
            for i, j in swap_pairs(6):
                q = swap(p, i, j)
                assert swap_delta(inst, p, i, j) == cost(inst, q) - base


def test_block_ops_match_scalar():
    inst = random_instance(5, 3)
    total = factorial(5)
    perms = unrank_block(5, 0, total)
    assert perms.shape == (total, 5)
    # unrank_block agrees with itertools lexicographic enumeration
    expected = np.array(list(itertools.permutations(range(5))))
    assert np.array_equal(perms, expected)
    assert np.array_equal(rank_block(perms), np.arange(total))
    costs = cost_block(inst, perms)
    deltas = swap_delta_block(inst, perms)
    pairs = swap_pairs(5)
    for r in range(0, total, 7):
        p = unrank(5, r)
        assert costs[r] == cost(inst, p)
        for k, (i, j) in enumerate(pairs):
            assert deltas[r, k] == swap_delta(inst, p, i, j)


def test_unrank_many_subset():
    ranks = np.array([0, 5, 23, 100, 719])
    got = unrank_many(6, ranks)
    for row, r in zip(got, ranks):
        assert tuple(int(v) for v in row) == unrank(6, int(r)).items
