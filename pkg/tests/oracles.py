"""Naive reference implementations the tests compare against.

Everything here trades speed for obviousness: full cost recomputation,
direct pair enumeration, exhaustive partition search.  None of it shares
code with the production paths it checks.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from qaplon.qap import QapInstance, Permutation, cost, neighbors, rank, unrank


def naive_hill_climb(inst: QapInstance, start: Permutation) -> Permutation:
    """Best-improvement climb evaluating every neighbor's cost from scratch."""
    current = start
    current_cost = cost(inst, current)
    while True:
        best = None
        best_cost = current_cost
        for q in neighbors(current):
            c = cost(inst, q)
            if c < best_cost:
                best = q
                best_cost = c
        if best is None:
            return current
        current = best
        current_cost = best_cost


def naive_basins(inst: QapInstance) -> tuple[list[int], dict[int, int]]:
    """(endpoint rank per start rank, optimum rank -> basin size)."""
    total = factorial(inst.n)
    endpoints = []
    sizes: dict[int, int] = {}
    for r in range(total):
        end = rank(naive_hill_climb(inst, unrank(inst.n, r)))
        endpoints.append(end)
        sizes[end] = sizes.get(end, 0) + 1
    return endpoints, sizes


def naive_lon_weights(
    inst: QapInstance, endpoints: list[int], sizes: dict[int, int]
) -> dict[tuple[int, int], Fraction]:
    """Directed weights keyed by optimum rank pairs, via direct pair tallies."""
    npairs = inst.n * (inst.n - 1) // 2
    counts: dict[tuple[int, int], int] = {}
    for r, src in enumerate(endpoints):
        p = unrank(inst.n, r)
        for q in neighbors(p):
            dst = endpoints[rank(q)]
            counts[(src, dst)] = counts.get((src, dst), 0) + 1
    return {
        (src, dst): Fraction(c, sizes[src] * npairs)
        for (src, dst), c in counts.items()
    }


def all_partitions(n: int):
    """Every set partition of range(n) as a membership tuple (RGS order)."""

    def rec(prefix: list[int], mx: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(mx + 2):
            prefix.append(c)
            yield from rec(prefix, max(mx, c))
            prefix.pop()

    yield from rec([0], 0)


def best_partition(graph) -> tuple[tuple[int, ...], float]:
    """Exhaustive max-modularity search; only viable for small node counts."""
    from qaplon.community import modularity

    best_q = None
    best = None
    for memb in all_partitions(graph.n_nodes):
        q = modularity(graph, memb)
        if best_q is None or q > best_q:
            best_q = q
            best = memb
    return best, best_q
