"""QAP instances, permutations, exact cost evaluation, and the swap neighborhood.

Conventions fixed here and relied on everywhere else:

* A permutation maps position -> assigned item: ``cost`` sums
  ``A[i, j] * B[p[i], p[j]]`` over all ordered pairs of positions.
* All fitness arithmetic is exact 64-bit integer; there is no floating
  point anywhere in cost or delta evaluation.
* The neighborhood of a permutation is the n*(n-1)/2 position swaps,
  enumerated in (i, j) lexicographic scan order with i < j.  This order
  doubles as the tie-breaking order of the hill climber, so it must not
  change.
* ``rank``/``unrank`` index permutations by lexicographic order (factorial
  number system), giving every configuration a dense address in [0, n!).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError

#: Largest n for which exhaustive enumeration of the n! configurations is
#: allowed anywhere in the package (assignment array ~1.9 GB at n=12).
MAX_EXHAUSTIVE_N = 12

CLASS_TAGS = ("uniform", "real_like", "external")


@dataclass(frozen=True)
class QapInstance:
    """A QAP instance: distance matrix ``a``, flow matrix ``b``, size ``n``.

    Matrices are stored as read-only int64 arrays.  Entries must be
    non-negative; a zero diagonal is guaranteed for generated instances but
    only warned about by the file loader for external ones.
    """

    n: int
    a: np.ndarray
    b: np.ndarray
    label: str = "unnamed"
    class_tag: str = "external"

    def __post_init__(self):
        if self.n < 1:
            raise ContractError(f"instance size must be >= 1, got {self.n}")
        if self.class_tag not in CLASS_TAGS:
            raise ContractError(f"unknown class tag {self.class_tag!r}")
        for name, m in (("a", self.a), ("b", self.b)):
            arr = np.asarray(m, dtype=np.int64)
            if arr.shape != (self.n, self.n):
                raise ContractError(
                    f"matrix {name} has shape {arr.shape}, expected {(self.n, self.n)}"
                )
            if (arr < 0).any():
                raise ContractError(f"matrix {name} contains negative entries")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def num_swaps(self) -> int:
        return self.n * (self.n - 1) // 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, QapInstance):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    def __hash__(self):
        return hash((self.n, self.a.tobytes(), self.b.tobytes()))


def _as_items(p: "Permutation | Sequence[int]") -> tuple[int, ...]:
    if isinstance(p, Permutation):
        return p.items
    return tuple(int(x) for x in p)


@dataclass(frozen=True)
class Permutation:
    """An assignment of items to positions, with a lexicographic rank.

    ``items[i]`` is the item placed at position ``i``.  The rank is the
    0-based index of the permutation in lexicographic order over all n!
    permutations of {0, .., n-1} and is computed lazily.
    """

    items: tuple[int, ...]

    def __post_init__(self):
        items = tuple(int(x) for x in self.items)
        object.__setattr__(self, "items", items)
        if not items:
            raise ContractError("a permutation needs at least one item")
        if sorted(items) != list(range(len(items))):
            raise ContractError(f"not a permutation of 0..{len(items) - 1}: {items}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_rank(cls, n: int, r: int) -> "Permutation":
        return unrank(n, r)

    @cached_property
    def rank(self) -> int:
        return rank(self)

    @property
    def n(self) -> int:
        return len(self.items)

    def swapped(self, i: int, j: int) -> "Permutation":
        return swap(self, i, j)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i: int) -> int:
        return self.items[i]


def cost(inst: QapInstance, p: Permutation | Sequence[int]) -> int:
    """Exact assignment cost: sum of ``a[i, j] * b[p[i], p[j]]`` over all i, j."""
    items = _as_items(p)
    if len(items) != inst.n:
        raise ContractError(
            f"permutation length {len(items)} does not match instance size {inst.n}"
        )
    idx = np.asarray(items, dtype=np.intp)
    return int(np.sum(inst.a * inst.b[np.ix_(idx, idx)], dtype=np.int64))


def swap(p: Permutation | Sequence[int], i: int, j: int) -> Permutation:
    """The permutation with the contents of positions i and j exchanged."""
    items = list(_as_items(p))
    n = len(items)
    if not (0 <= i < j < n):
        raise ContractError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    items[i], items[j] = items[j], items[i]
    return Permutation(tuple(items))


def swap_delta(inst: QapInstance, p: Permutation | Sequence[int], i: int, j: int) -> int:
    """Cost change of swapping positions i < j, in O(n) exact integer arithmetic.

    Equals ``cost(inst, swap(p, i, j)) - cost(inst, p)``; valid for
    asymmetric matrices and nonzero diagonals.
    """
    items = _as_items(p)
    n = inst.n
    if len(items) != n:
        raise ContractError(
            f"permutation length {len(items)} does not match instance size {n}"
        )
    if not (0 <= i < j < n):
        raise ContractError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    a = inst.a
    b = inst.b
    pi = items[i]
    pj = items[j]
    delta = (a[i, i] - a[j, j]) * (b[pj, pj] - b[pi, pi]) + (a[i, j] - a[j, i]) * (
        b[pj, pi] - b[pi, pj]
    )
    for k in range(n):
        if k == i or k == j:
            continue
        pk = items[k]
        delta += (a[i, k] - a[j, k]) * (b[pj, pk] - b[pi, pk])
        delta += (a[k, i] - a[k, j]) * (b[pk, pj] - b[pk, pi])
    return int(delta)


def swap_pairs(n: int) -> list[tuple[int, int]]:
    """All position pairs (i, j), i < j, in canonical scan order."""
    return [(i, j) for i in range(n - 1) for j in range(i + 1, n)]


def neighbors(p: Permutation | Sequence[int]) -> list[Permutation]:
    """The n*(n-1)/2 swap neighbors, in canonical (i, j) scan order."""
    items = _as_items(p)
    n = len(items)
    if n < 2:
        raise ContractError(f"neighborhood needs n >= 2, got n={n}")
    out = []
    for i, j in swap_pairs(n):
        lst = list(items)
        lst[i], lst[j] = lst[j], lst[i]
        out.append(Permutation(tuple(lst)))
    return out


def rank(p: Permutation | Sequence[int]) -> int:
    """Lexicographic index of ``p`` among all permutations of its length."""
    items = _as_items(p)
    n = len(items)
    if sorted(items) != list(range(n)):
        raise ContractError(f"not a permutation of 0..{n - 1}: {items}")
    r = 0
    for i in range(n):
        smaller_after = sum(1 for k in range(i + 1, n) if items[k] < items[i])
        r += smaller_after * math.factorial(n - 1 - i)
    return r


def unrank(n: int, r: int) -> Permutation:
    """Inverse of :func:`rank`: the permutation at lexicographic index ``r``."""
    if n < 1:
        raise ContractError(f"size must be >= 1, got {n}")
    total = math.factorial(n)
    if not (0 <= r < total):
        raise ContractError(f"rank {r} out of range [0, {n}!) = [0, {total})")
    avail = list(range(n))
    items = []
    rem = r
    for i in range(n):
        f = math.factorial(n - 1 - i)
        d, rem = divmod(rem, f)
        items.append(avail.pop(d))
    return Permutation(tuple(items))


# ---------------------------------------------------------------------------
# Vectorized helpers shared by the landscape and LON builders.  These operate
# on blocks of permutations stored as (m, n) integer arrays and are exact
# (int64 throughout).

def factorials(n: int) -> np.ndarray:
    """``[ (n-1)!, (n-2)!, .., 1, 1 ]`` as int64 place values of the Lehmer code."""
    return np.array([math.factorial(n - 1 - i) for i in range(n)], dtype=np.int64)


def unrank_block(n: int, lo: int, hi: int) -> np.ndarray:
    """Permutations with ranks lo..hi-1 as an (hi-lo, n) int64 array."""
    total = math.factorial(n)
    if not (0 <= lo <= hi <= total):
        raise ContractError(f"rank block [{lo}, {hi}) out of range [0, {total}]")
    return unrank_many(n, np.arange(lo, hi, dtype=np.int64))


def unrank_many(n: int, ranks: np.ndarray) -> np.ndarray:
    """Permutations at the given lexicographic ranks, one per row."""
    total = math.factorial(n)
    rem = np.asarray(ranks, dtype=np.int64)
    if rem.size and (rem.min() < 0 or rem.max() >= total):
        raise ContractError(f"ranks out of range [0, {total})")
    m = rem.shape[0]
    digits = np.empty((m, n), dtype=np.int64)
    for i, f in enumerate(factorials(n)):
        digits[:, i], rem = np.divmod(rem, f)
    # Materialize "d-th smallest unused value" per position.
    out = np.empty((m, n), dtype=np.int64)
    avail = np.tile(np.arange(n, dtype=np.int64), (m, 1))
    width = n
    rows = np.arange(m)
    for i in range(n):
        d = digits[:, i]
        out[:, i] = avail[rows, d]
        # Delete column d from each row by shifting the tail left.
        keep = np.arange(width - 1)[None, :] >= d[:, None]
        shifted = np.where(keep, avail[:, 1:], avail[:, :-1])
        avail = shifted
        width -= 1
    return out


def rank_block(perms: np.ndarray) -> np.ndarray:
    """Lexicographic ranks of an (m, n) block of permutations."""
    p = np.asarray(perms, dtype=np.int64)
    m, n = p.shape
    later_smaller = p[:, :, None] > p[:, None, :]
    after = np.triu(np.ones((n, n), dtype=bool), k=1)
    counts = (later_smaller & after[None, :, :]).sum(axis=2, dtype=np.int64)
    return counts @ factorials(n)


def cost_block(inst: QapInstance, perms: np.ndarray) -> np.ndarray:
    """Exact costs of an (m, n) block of permutations as int64."""
    p = np.asarray(perms, dtype=np.intp)
    pb = inst.b[p[:, :, None], p[:, None, :]]
    return np.einsum("ij,mij->m", inst.a, pb, dtype=np.int64)


def swap_delta_block(inst: QapInstance, perms: np.ndarray) -> np.ndarray:
    """Deltas of every canonical swap for a block of permutations.

    Returns an (m, n*(n-1)/2) int64 array whose column order matches
    :func:`swap_pairs`.  Implemented as one integer matmul against the
    "frame" matrices F_k = A_swapped(k) - A, which is exact and independent
    of summation order.
    """
    p = np.asarray(perms, dtype=np.intp)
    m, n = p.shape
    pairs = swap_pairs(n)
    a = inst.a
    frames = np.empty((len(pairs), n * n), dtype=np.int64)
    for k, (i, j) in enumerate(pairs):
        idx = np.arange(n)
        idx[[i, j]] = idx[[j, i]]
        frames[k] = (a[np.ix_(idx, idx)] - a).ravel()
    pb = inst.b[p[:, :, None], p[:, None, :]].reshape(m, n * n)
    return pb @ frames.T
