"""Community detection on filtered LONs: weighted modularity, greedy
agglomeration, and Potts spin-glass annealing.

Both detectors accept anything graph-shaped: an object with ``n_nodes``
and an ``edges`` mapping ``(i, j) -> weight`` keyed with ``i < j`` and no
self-loops.  :class:`~qaplon.lon.FilteredLon` and :class:`WeightedGraph`
both qualify.

Modularity of a membership vector sigma:

    Q = sum_c [ W_c / m  -  (K_c / 2m)^2 ]

with m the total edge weight, W_c the intra-community edge weight and
K_c the summed node strengths of community c.  The spin-glass objective

    H(sigma) = - sum_{i<j} [ w_ij - gamma * k_i k_j / 2m ] * [sigma_i == sigma_j]

satisfies Q = -H/m - sum_i k_i^2 / (4 m^2) at gamma = 1, so its ground
state is the max-modularity partition; the annealer approximates it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError, ModularityUndefinedError, ParseError

ALGORITHM_TAGS = ("greedy", "spinglass", "external")


@dataclass(frozen=True)
class WeightedGraph:
    """Plain undirected weighted graph, the detectors' minimal input."""

    n_nodes: int
    edges: dict[tuple[int, int], float]

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ContractError("graph needs at least one node")
        for (i, j), w in self.edges.items():
            if not 0 <= i < j < self.n_nodes:
                raise ContractError(f"bad edge key ({i}, {j}) for {self.n_nodes} nodes")
            if not (float(w) >= 0.0):
                raise ContractError(f"edge ({i}, {j}) has negative or NaN weight {w}")


@dataclass(frozen=True)
class Partition:
    """A community assignment over graph nodes plus its modularity."""

    assignment: tuple[int, ...]
    q: float
    algorithm_tag: str
    seed: int | None = None

    def __post_init__(self):
        if self.algorithm_tag not in ALGORITHM_TAGS:
            raise ContractError(f"unknown algorithm tag {self.algorithm_tag!r}")
        if not self.assignment:
            raise ContractError("empty partition")
        ids = set(self.assignment)
        if ids != set(range(len(ids))):
            raise ContractError("community ids must be dense and 0-based")
        if not (-0.5 - 1e-9 <= self.q < 1.0):
            raise ContractError(f"modularity {self.q} outside [-0.5, 1)")

    @property
    def n_communities(self) -> int:
        return max(self.assignment) + 1


def _edge_list(g) -> list[tuple[int, int, float]]:
    n = g.n_nodes
    out = []
    for (i, j), w in sorted(g.edges.items()):
        if not 0 <= i < j < n:
            raise ContractError(f"bad edge key ({i}, {j}) for {n} nodes")
        out.append((int(i), int(j), float(w)))
    return out


def _strengths(n: int, edges: list[tuple[int, int, float]]) -> tuple[np.ndarray, float]:
    k = np.zeros(n, dtype=np.float64)
    m = 0.0
    for i, j, w in edges:
        k[i] += w
        k[j] += w
        m += w
    return k, m


def _check_membership(g, membership: Sequence[int]) -> list[int]:
    memb = [int(c) for c in membership]
    if len(memb) != g.n_nodes:
        raise ContractError(
            f"membership has {len(memb)} entries for {g.n_nodes} nodes"
        )
    if memb and min(memb) < 0:
        raise ContractError("community ids must be non-negative")
    return memb


def modularity(g, membership: Sequence[int]) -> float:
    """Weighted modularity of the given membership vector."""
    memb = _check_membership(g, membership)
    edges = _edge_list(g)
    k, m = _strengths(g.n_nodes, edges)
    if m == 0.0:
        raise ModularityUndefinedError(
            "modularity is undefined on a graph with no edge weight"
        )
    intra = 0.0
    for i, j, w in edges:
        if memb[i] == memb[j]:
            intra += w
    n_comm = max(memb) + 1
    big_k = np.zeros(n_comm, dtype=np.float64)
    for v, c in enumerate(memb):
        big_k[c] += k[v]
    return intra / m - float(np.sum((big_k / (2.0 * m)) ** 2))


def dense_relabel(membership: Sequence[int]) -> tuple[int, ...]:
    """Map community labels onto 0..k-1 in order of first appearance."""
    mapping: dict[int, int] = {}
    out = []
    for c in membership:
        c = int(c)
        if c not in mapping:
            mapping[c] = len(mapping)
        out.append(mapping[c])
    return tuple(out)


# ---------------------------------------------------------------------------
# Greedy agglomeration

def greedy_modularity(g) -> Partition:
    """Agglomerative modularity ascent from singletons.

    Repeatedly merges the connected community pair with the largest
    merge gain dQ = W_ij/m - K_i*K_j/(2 m^2), ties broken by the smallest
    (i, j) label pair; records Q after every merge (the singleton start
    included) and returns the best partition along that path.  The merge
    heap is lazy: entries are re-validated against the current dQ on pop.
    """
    import heapq

    edges = _edge_list(g)
    n = g.n_nodes
    k, m = _strengths(n, edges)
    if m == 0.0:
        raise ModularityUndefinedError(
            "modularity is undefined on a graph with no edge weight"
        )

    # community state; labels start as node ids and keep the smaller on merge
    strength = {v: float(k[v]) for v in range(n)}
    nbr: dict[int, dict[int, float]] = {v: {} for v in range(n)}
    for i, j, w in edges:
        nbr[i][j] = nbr[i].get(j, 0.0) + w
        nbr[j][i] = nbr[j].get(i, 0.0) + w

    def gain(a: int, b: int) -> float:
        return nbr[a][b] / m - strength[a] * strength[b] / (2.0 * m * m)

    heap: list[tuple[float, int, int]] = []
    for a in range(n):
        for b in nbr[a]:
            if a < b:
                heap.append((-gain(a, b), a, b))
    heapq.heapify(heap)

    q = -float(np.sum((k / (2.0 * m)) ** 2))  # all singletons
    best_q = q
    best_step = 0
    merges: list[tuple[int, int]] = []

    while heap:
        neg_dq, a, b = heapq.heappop(heap)
        if b not in nbr.get(a, {}):
            continue  # one side already absorbed, or edge rewired
        dq = gain(a, b)
        if -neg_dq != dq:
            heapq.heappush(heap, (-dq, a, b))  # stale entry, refresh
            continue
        # merge b into a (a < b by construction)
        merges.append((a, b))
        q += dq
        strength[a] += strength.pop(b)
        moved = nbr.pop(b)
        del nbr[a][b]
        for x, w in moved.items():
            if x == a:
                continue
            nbr[x].pop(b, None)
            nbr[a][x] = nbr[a].get(x, 0.0) + w
            nbr[x][a] = nbr[a][x]
        for x in nbr[a]:
            lo, hi = (a, x) if a < x else (x, a)
            heapq.heappush(heap, (-gain(lo, hi), lo, hi))
        if q > best_q:
            best_q = q
            best_step = len(merges)

    # replay the winning prefix of the merge sequence
    label = list(range(n))
    members: dict[int, list[int]] = {v: [v] for v in range(n)}
    for a, b in merges[:best_step]:
        moved = members.pop(b)
        for v in moved:
            label[v] = a
        members[a].extend(moved)
    assignment = dense_relabel(label)
    return Partition(
        assignment=assignment,
        q=modularity(g, assignment),
        algorithm_tag="greedy",
    )


# ---------------------------------------------------------------------------
# Spin-glass annealing

@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling schedule; ``None`` fields are derived at run time.

    t_start defaults to auto-calibration (raised until at least 90% of
    probe moves from the initial state would be accepted); flips_per_t
    defaults to 50 * n_nodes attempted single-spin flips per temperature.
    Annealing stops early when a whole temperature step accepts nothing.
    """

    t_start: float | None = None
    cooling_factor: float = 0.99
    flips_per_t: int | None = None
    t_stop: float = 1e-6

    def __post_init__(self):
        if self.t_start is not None and self.t_start <= 0.0:
            raise ContractError("t_start must be positive")
        if not 0.0 < self.cooling_factor < 1.0:
            raise ContractError("cooling_factor must lie in (0, 1)")
        if self.flips_per_t is not None and self.flips_per_t < 1:
            raise ContractError("flips_per_t must be positive")
        if self.t_stop <= 0.0:
            raise ContractError("t_stop must be positive")


def spinglass_hamiltonian(g, membership: Sequence[int], gamma: float = 1.0) -> float:
    """Potts Hamiltonian of a membership vector (lower is better)."""
    memb = _check_membership(g, membership)
    edges = _edge_list(g)
    k, m = _strengths(g.n_nodes, edges)
    if m == 0.0:
        raise ModularityUndefinedError(
            "the spin-glass objective is undefined without edge weight"
        )
    h = 0.0
    for i, j, w in edges:
        if memb[i] == memb[j]:
            h -= w
    n_comm = max(memb) + 1
    big_k = np.zeros(n_comm, dtype=np.float64)
    sq = np.zeros(n_comm, dtype=np.float64)
    for v, c in enumerate(memb):
        big_k[c] += k[v]
        sq[c] += k[v] * k[v]
    # sum_{i<j, same spin} k_i k_j = (K_c^2 - sum k_i^2) / 2 per community
    h += gamma * float(np.sum(big_k * big_k - sq)) / (4.0 * m)
    return h


def spinglass_communities(
    g,
    seed: int,
    gamma: float = 1.0,
    q_max: int = 25,
    schedule: AnnealSchedule | None = None,
) -> Partition:
    """Approximate the spin-glass ground state by simulated annealing.

    Deterministic given (graph, seed, gamma, q_max, schedule).  Nodes with
    no incident edge weight are left out of the anneal and returned as
    singleton communities; they contribute nothing to either objective.
    """
    from . import _anneal

    if q_max < 2:
        raise ContractError("q_max must be at least 2")
    if gamma <= 0.0:
        raise ContractError("gamma must be positive")
    schedule = schedule or AnnealSchedule()
    edges = _edge_list(g)
    n = g.n_nodes
    k, m = _strengths(n, edges)
    if m == 0.0:
        raise ModularityUndefinedError(
            "modularity is undefined on a graph with no edge weight"
        )

    # CSR adjacency over both endpoint directions
    deg = np.zeros(n + 1, dtype=np.int64)
    for i, j, _ in edges:
        deg[i + 1] += 1
        deg[j + 1] += 1
    ptr = np.cumsum(deg)
    idx = np.zeros(ptr[-1], dtype=np.int64)
    wgt = np.zeros(ptr[-1], dtype=np.float64)
    cursor = ptr[:-1].copy()
    for i, j, w in edges:
        idx[cursor[i]] = j
        wgt[cursor[i]] = w
        cursor[i] += 1
        idx[cursor[j]] = i
        wgt[cursor[j]] = w
        cursor[j] += 1

    active = np.nonzero(k > 0.0)[0].astype(np.int64)
    if len(active) == 0:
        raise ModularityUndefinedError("no node carries edge weight")

    flips = schedule.flips_per_t if schedule.flips_per_t is not None else 50 * n
    t_start = schedule.t_start if schedule.t_start is not None else 0.0
    best_sigma, _, _ = _anneal.anneal(
        ptr,
        idx,
        wgt,
        k,
        active,
        float(m),
        float(gamma),
        int(q_max),
        float(t_start),
        float(schedule.cooling_factor),
        int(flips),
        float(schedule.t_stop),
        np.uint64(seed % 2**64),
    )

    # inactive nodes become singletons; dense labels by first appearance
    labels = [int(c) for c in best_sigma]
    next_free = q_max
    for v in range(n):
        if k[v] == 0.0:
            labels[v] = next_free
            next_free += 1
    assignment = dense_relabel(labels)
    return Partition(
        assignment=assignment,
        q=modularity(g, assignment),
        algorithm_tag="spinglass",
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# Partition and graph file formats

def save_partition(part: Partition, path: str | Path, gamma: float | None = None) -> None:
    """CSV with one metadata comment line, then node_id,community_id rows."""
    seed = "" if part.seed is None else str(part.seed)
    g = "" if gamma is None else f"{gamma:.12g}"
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# algorithm={part.algorithm_tag} seed={seed} gamma={g} q={part.q:.12g}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["node_id", "community_id"])
        for v, c in enumerate(part.assignment):
            writer.writerow([v, c])


def load_graph_csv(edges_path: str | Path, nodes_path: str | Path | None = None) -> WeightedGraph:
    """Read an exported edge CSV (src,dst,weight) back into a graph.

    When the sibling node table is given (or found by the ``.edges.csv``
    naming convention), isolated nodes survive the round trip; otherwise
    the node count is inferred from the largest endpoint id.
    """
    edges_path = Path(edges_path)
    if nodes_path is None and edges_path.name.endswith(".edges.csv"):
        candidate = edges_path.with_name(
            edges_path.name[: -len(".edges.csv")] + ".nodes.csv"
        )
        if candidate.exists():
            nodes_path = candidate
    edges: dict[tuple[int, int], float] = {}
    max_id = -1
    with open(edges_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["src", "dst", "weight"]:
            raise ParseError(f"{edges_path}: expected header src,dst,weight")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                i, j, w = int(row[0]), int(row[1]), float(row[2])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{edges_path}:{row_no}: bad edge row {row!r}") from exc
            if i == j:
                raise ParseError(f"{edges_path}:{row_no}: self-loop on node {i}")
            key = (i, j) if i < j else (j, i)
            if key in edges:
                raise ParseError(f"{edges_path}:{row_no}: duplicate edge {key}")
            edges[key] = w
            max_id = max(max_id, i, j)
    n_nodes = max_id + 1
    if nodes_path is not None:
        with open(nodes_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:1]] != ["id"]:
                raise ParseError(f"{nodes_path}: expected header starting with id")
            ids = []
            for row_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    ids.append(int(row[0]))
                except ValueError as exc:
                    raise ParseError(
                        f"{nodes_path}:{row_no}: bad node id {row[0]!r}"
                    ) from exc
        if ids and (min(ids) != 0 or sorted(ids) != list(range(len(ids)))):
            raise ParseError(f"{nodes_path}: node ids must be 0..n-1")
        n_nodes = max(n_nodes, len(ids))
    if n_nodes < 1:
        raise ParseError(f"{edges_path}: no nodes found")
    return WeightedGraph(n_nodes=n_nodes, edges=edges)
