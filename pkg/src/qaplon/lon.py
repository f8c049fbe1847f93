"""Local optima network construction, quantile filtering, and graph export.

The directed network is stored as integer pair counts: ``c[i, j]`` is the
number of ordered configuration pairs (s, s') with s in basin i, s' in
basin j, and s' a swap neighbor of s.  Since every configuration has
exactly ``n*(n-1)/2`` neighbors, each chosen uniformly by the escape
kernel, the directed transition probability is the exact rational

    w(i -> j) = c[i, j] / (basin_size_i * n*(n-1)/2)

and every node's outgoing weights (self-loop included) sum to exactly 1.
Counts stay integers end to end, so parallel tallying is order-independent
and comparisons against oracles are exact; floats appear only at export.

Filtering first symmetrizes (average of the two directed weights, dropped
self-loops), then removes edges below the nearest-rank empirical quantile
of the undirected weight distribution: the threshold is the
``ceil(alpha * E)``-th smallest of the E edge weights, and edges strictly
below it are suppressed.  ``alpha = 0`` removes nothing.  Nodes are never
dropped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, factorial
from pathlib import Path
from xml.sax.saxutils import quoteattr

import numpy as np

from .errors import ContractError
from .landscape import DEFAULT_CHUNK, BasinMap, LocalOptimum
from .qap import QapInstance, cost_block, rank_block, swap_pairs, unrank_block, unrank_many

#: Largest node count for which pair counts accumulate into a dense matrix;
#: beyond it a sparse dictionary tally is used instead.
_DENSE_NODE_LIMIT = 2048

#: Full neighbor-rank tables are cached per size up to here (52 MB at n=9);
#: larger sizes recompute ranks chunk by chunk.
_TABLE_CACHE_MAX_N = 9


@dataclass(frozen=True)
class Lon:
    """Directed LON with exact integer pair counts."""

    n: int
    nodes: tuple[LocalOptimum, ...]
    edge_counts: dict[tuple[int, int], int]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_swaps(self) -> int:
        return self.n * (self.n - 1) // 2

    def directed_weight(self, i: int, j: int) -> Fraction:
        """Exact transition probability from basin i to basin j."""
        c = self.edge_counts.get((i, j), 0)
        return Fraction(c, self.nodes[i].basin_size * self.num_swaps)

    def out_weight_sum(self, i: int) -> Fraction:
        return sum(
            (Fraction(c, self.nodes[i].basin_size * self.num_swaps)
             for (a, b), c in self.edge_counts.items() if a == i),
            start=Fraction(0),
        )


@dataclass(frozen=True)
class FilteredLon:
    """Undirected LON after symmetrization and quantile filtering."""

    n: int
    nodes: tuple[LocalOptimum, ...]
    edges: dict[tuple[int, int], Fraction]
    alpha: float
    threshold: Fraction | None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


@lru_cache(maxsize=2)
def _neighbor_rank_tables(n: int) -> tuple[np.ndarray, ...]:
    """For each canonical swap, the rank of every configuration's neighbor."""
    perms = unrank_block(n, 0, factorial(n))
    tables = []
    for i, j in swap_pairs(n):
        moved = perms.copy()
        moved[:, [i, j]] = moved[:, [j, i]]
        tables.append(rank_block(moved).astype(np.int32))
    return tuple(tables)


def _tally_span(
    inst: QapInstance,
    assignment: np.ndarray,
    lo: int,
    hi: int,
    chunk_size: int,
) -> dict[tuple[int, int], int]:
    """Pair counts contributed by source configurations with ranks in [lo, hi)."""
    n = inst.n
    n_opt = int(assignment.max()) + 1
    tables = _neighbor_rank_tables(n) if n <= _TABLE_CACHE_MAX_N else None
    dense = (
        np.zeros(n_opt * n_opt, dtype=np.int64) if n_opt <= _DENSE_NODE_LIMIT else None
    )
    sparse: dict[int, int] = {}
    for start in range(lo, hi, chunk_size):
        stop = min(start + chunk_size, hi)
        from_ids = assignment[start:stop].astype(np.int64)
        perms = None if tables is not None else unrank_block(n, start, stop)
        for k, (i, j) in enumerate(swap_pairs(n)):
            if tables is not None:
                nbr_ranks = tables[k][start:stop]
            else:
                moved = perms.copy()
                moved[:, [i, j]] = moved[:, [j, i]]
                nbr_ranks = rank_block(moved)
            to_ids = assignment[nbr_ranks].astype(np.int64)
            keys = from_ids * n_opt + to_ids
            if dense is not None:
                dense += np.bincount(keys, minlength=n_opt * n_opt)
            else:
                uniq, cnt = np.unique(keys, return_counts=True)
                for key, c in zip(uniq.tolist(), cnt.tolist()):
                    sparse[key] = sparse.get(key, 0) + int(c)
    if dense is not None:
        nz = np.nonzero(dense)[0]
        return {(int(k) // n_opt, int(k) % n_opt): int(dense[k]) for k in nz}
    return {(k // n_opt, k % n_opt): c for k, c in sparse.items()}


def _tally_job(args) -> dict[tuple[int, int], int]:
    return _tally_span(*args)


def build_lon(
    inst: QapInstance,
    bm: BasinMap,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> Lon:
    """Tally every (configuration, neighbor) pair into basin-to-basin counts."""
    if bm.n != inst.n:
        raise ContractError(f"basin map is for n={bm.n}, instance has n={inst.n}")
    total = factorial(inst.n)
    if len(bm.assignment) != total:
        raise ContractError("basin map assignment has the wrong length")
    # Cheap consistency check that bm really belongs to inst: optimum costs.
    reps = unrank_many(inst.n, np.array([o.rep.rank for o in bm.optima], dtype=np.int64))
    if not np.array_equal(cost_block(inst, reps), [o.cost for o in bm.optima]):
        raise ContractError("basin map optima do not match this instance")
    if workers < 1:
        raise ContractError("workers must be >= 1")

    if workers == 1:
        counts = _tally_span(inst, bm.assignment, 0, total, chunk_size)
    else:
        from concurrent.futures import ProcessPoolExecutor

        span = -(-total // workers)
        jobs = [
            (inst, bm.assignment, lo, min(lo + span, total), chunk_size)
            for lo in range(0, total, span)
        ]
        counts = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_tally_job, jobs):
                for key, c in part.items():
                    counts[key] = counts.get(key, 0) + c
    return Lon(n=inst.n, nodes=bm.optima, edge_counts=counts)


def undirected_weights(lon: Lon) -> dict[tuple[int, int], Fraction]:
    """Symmetrized inter-basin weights (i < j), self-loops excluded."""
    out: dict[tuple[int, int], Fraction] = {}
    seen = set()
    for (i, j) in lon.edge_counts:
        if i == j:
            continue
        key = (i, j) if i < j else (j, i)
        if key in seen:
            continue
        seen.add(key)
        w = (lon.directed_weight(key[0], key[1]) + lon.directed_weight(key[1], key[0])) / 2
        out[key] = w
    return out


def nearest_rank_quantile(values: list[Fraction], alpha: float) -> Fraction:
    """The ceil(alpha*E)-th smallest value (1-based), for alpha in (0, 1]."""
    if not values:
        raise ContractError("quantile of an empty collection")
    if not 0.0 < alpha <= 1.0:
        raise ContractError(f"alpha must lie in (0, 1] for a quantile, got {alpha}")
    idx = ceil(alpha * len(values))
    return sorted(values)[idx - 1]


def filter_lon(lon: Lon, alpha: float) -> FilteredLon:
    """Symmetrize, then suppress edges below the alpha-quantile weight."""
    if not 0.0 <= alpha <= 1.0:
        raise ContractError(f"alpha must lie in [0, 1], got {alpha}")
    weights = undirected_weights(lon)
    if alpha == 0.0 or not weights:
        return FilteredLon(
            n=lon.n, nodes=lon.nodes, edges=weights, alpha=alpha, threshold=None
        )
    threshold = nearest_rank_quantile(list(weights.values()), alpha)
    kept = {key: w for key, w in weights.items() if w >= threshold}
    return FilteredLon(
        n=lon.n, nodes=lon.nodes, edges=kept, alpha=alpha, threshold=threshold
    )


# ---------------------------------------------------------------------------
# Export

EXPORT_FORMATS = ("graphml", "dot", "edge_csv")


def _fmt(x: float) -> str:
    """Fixed 12-significant-digit decimal form used in every export format."""
    return f"{float(x):.12g}"


def node_styles(nodes: tuple[LocalOptimum, ...]) -> list[tuple[float, int]]:
    """(size_hint, shade) per node.

    size_hint is proportional to basin size, scaled so the largest basin
    gets 50.0.  shade is an affine map of cost onto grayscale 0..255 with
    darker = better (lower cost); a degenerate cost range maps to 128.
    """
    max_bs = max(o.basin_size for o in nodes)
    costs = [o.cost for o in nodes]
    lo, hi = min(costs), max(costs)
    styles = []
    for o in nodes:
        size = 50.0 * o.basin_size / max_bs
        shade = 128 if hi == lo else round(255 * (o.cost - lo) / (hi - lo))
        styles.append((size, shade))
    return styles


def _iter_edges(g: Lon | FilteredLon) -> list[tuple[int, int, float]]:
    if isinstance(g, Lon):
        items = [
            (i, j, float(g.directed_weight(i, j)))
            for (i, j) in sorted(g.edge_counts)
        ]
        return items
    return [(i, j, float(w)) for (i, j), w in sorted(g.edges.items())]


def export_graph(g: Lon | FilteredLon, fmt: str, path: str | Path) -> list[Path]:
    """Write the graph in one of ``graphml``, ``dot``, ``edge_csv``.

    The directed (unfiltered) network exports as a digraph with self-loops;
    the filtered network as an undirected simple graph.  Node and edge
    order is deterministic: nodes by id, edges by (src, dst).
    ``edge_csv`` writes two files: the edge list at ``path`` and a node
    table next to it (``.edges.csv`` becomes ``.nodes.csv``).
    """
    if fmt not in EXPORT_FORMATS:
        raise ContractError(f"unknown export format {fmt!r}")
    path = Path(path)
    directed = isinstance(g, Lon)
    styles = node_styles(g.nodes)
    edges = _iter_edges(g)
    if fmt == "graphml":
        _write_graphml(g, styles, edges, directed, path)
        return [path]
    if fmt == "dot":
        _write_dot(g, styles, edges, directed, path)
        return [path]
    return _write_edge_csv(g, edges, path)


def _write_graphml(g, styles, edges, directed, path: Path) -> None:
    keys = [
        ("d_cost", "node", "cost", "long"),
        ("d_basin", "node", "basin_size", "long"),
        ("d_size", "node", "size_hint", "double"),
        ("d_shade", "node", "shade", "long"),
        ("d_weight", "edge", "weight", "double"),
    ]
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
    ]
    for kid, domain, name, typ in keys:
        lines.append(
            f'  <key id="{kid}" for="{domain}" attr.name={quoteattr(name)} attr.type="{typ}"/>'
        )
    kind = "directed" if directed else "undirected"
    lines.append(f'  <graph id="lon" edgedefault="{kind}">')
    for o, (size, shade) in zip(g.nodes, styles):
        lines.append(f'    <node id="n{o.id}">')
        lines.append(f'      <data key="d_cost">{o.cost}</data>')
        lines.append(f'      <data key="d_basin">{o.basin_size}</data>')
        lines.append(f'      <data key="d_size">{_fmt(size)}</data>')
        lines.append(f'      <data key="d_shade">{shade}</data>')
        lines.append("    </node>")
    for i, j, w in edges:
        lines.append(f'    <edge source="n{i}" target="n{j}">')
        lines.append(f'      <data key="d_weight">{_fmt(w)}</data>')
        lines.append("    </edge>")
    lines.append("  </graph>")
    lines.append("</graphml>")
    path.write_text("\n".join(lines) + "\n")


def _write_dot(g, styles, edges, directed, path: Path) -> None:
    head = "digraph lon {" if directed else "graph lon {"
    arrow = "->" if directed else "--"
    lines = [head]
    for o, (size, shade) in zip(g.nodes, styles):
        lines.append(
            f'  n{o.id} [cost={o.cost}, basin_size={o.basin_size}, '
            f"size_hint={_fmt(size)}, shade={shade}];"
        )
    for i, j, w in edges:
        lines.append(f"  n{i} {arrow} n{j} [weight={_fmt(w)}];")
    lines.append("}")
    path.write_text("\n".join(lines) + "\n")


def _write_edge_csv(g, edges, path: Path) -> list[Path]:
    if path.name.endswith(".edges.csv"):
        nodes_path = path.with_name(path.name[: -len(".edges.csv")] + ".nodes.csv")
    else:
        nodes_path = path.with_name(path.stem + ".nodes.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight"])
        for i, j, w in edges:
            writer.writerow([i, j, _fmt(w)])
    with open(nodes_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "cost", "basin_size"])
        for o in g.nodes:
            writer.writerow([o.id, o.cost, o.basin_size])
    return [path, nodes_path]
