"""Batch experiments over generated instances plus summary statistics.

A run sweeps class x instance-index, derives one seed per instance from
the master seed, pushes each instance through the exact pipeline
(basins, LON, filter), and scores the filtered network with every
configured detector.  One record per detector run, written in
deterministic (class, index, algorithm, run) order; the wall_ms column
is the only nondeterministic field, so reruns are byte-identical once
it is stripped.

Per-instance failures never abort a batch: the affected rows keep their
identifying columns, carry an empty q, and name the failure in the
trailing error column.
"""

from __future__ import annotations

import csv
import io
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .community import WeightedGraph, greedy_modularity, spinglass_communities
from .errors import ContractError, ParseError, QaplonError, ResourceLimitError
from .generators import GENERATED_CLASSES, GeneratorConfig, generate, instance_seed
from .landscape import MAX_EXHAUSTIVE_N, enumerate_basins
from .lon import build_lon, filter_lon
from .rng import derive_seed
from .stats import five_number, mann_whitney_u

ALGORITHMS = ("greedy", "spinglass")

#: Spin-glass run k on an instance uses derive_seed(instance_seed, k + SPIN_STREAM_BASE);
#: the offset keeps these streams clear of the generator's own state setup.
SPIN_STREAM_BASE = 8

RECORD_FIELDS = (
    "class",
    "n",
    "instance_seed",
    "algorithm",
    "alpha",
    "n_optima",
    "n_edges_filtered",
    "n_communities",
    "q",
    "wall_ms",
)

RECORDS_FILENAME = "records.csv"


@dataclass(frozen=True)
class ExperimentConfig:
    classes: tuple[str, ...] = ("uniform", "real_like")
    sizes: dict[str, int] = field(default_factory=lambda: {"uniform": 8, "real_like": 8})
    count: int = 30
    master_seed: int = 0
    alpha: float = 0.05
    algorithms: tuple[str, ...] = ALGORITHMS
    spinglass_seeds: int = 1
    workers: int = 1
    out_dir: Path | None = None

    def __post_init__(self):
        if not self.classes or any(c not in GENERATED_CLASSES for c in self.classes):
            raise ContractError(f"classes must be a non-empty subset of {GENERATED_CLASSES}")
        if len(set(self.classes)) != len(self.classes):
            raise ContractError("duplicate class")
        for c in self.classes:
            if c not in self.sizes:
                raise ContractError(f"no size given for class {c!r}")
            n = self.sizes[c]
            if n < 2:
                raise ContractError(f"size for {c} must be >= 2")
            if n > MAX_EXHAUSTIVE_N:
                raise ResourceLimitError(
                    f"size {n} exceeds the exhaustive limit n <= {MAX_EXHAUSTIVE_N}"
                )
        if self.count < 1:
            raise ContractError("count must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ContractError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.algorithms or any(a not in ALGORITHMS for a in self.algorithms):
            raise ContractError(f"algorithms must be a non-empty subset of {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ContractError("duplicate algorithm")
        if self.spinglass_seeds < 1:
            raise ContractError("spinglass_seeds must be >= 1")
        if self.workers < 1:
            raise ContractError("workers must be >= 1")


@dataclass(frozen=True)
class ExperimentRecord:
    instance_class: str
    n: int
    instance_seed: int
    algorithm: str
    alpha: float
    n_optima: int | None
    n_edges_filtered: int | None
    n_communities: int | None
    q: float | None
    wall_ms: int
    error: str = ""

    def __post_init__(self):
        if self.q is not None and not (-0.5 - 1e-9 <= self.q < 1.0):
            raise ContractError(f"modularity {self.q} outside [-0.5, 1)")
        if self.n_optima is not None and self.n_optima < 1:
            raise ContractError("n_optima must be >= 1")


def _ordered_classes(cfg: ExperimentConfig) -> list[str]:
    return [c for c in GENERATED_CLASSES if c in cfg.classes]


def _ordered_algorithms(cfg: ExperimentConfig) -> list[str]:
    return [a for a in ALGORITHMS if a in cfg.algorithms]


def _detector_runs(cfg: ExperimentConfig) -> list[tuple[str, int]]:
    runs = []
    for algo in _ordered_algorithms(cfg):
        reps = cfg.spinglass_seeds if algo == "spinglass" else 1
        for k in range(reps):
            runs.append((algo, k))
    return runs


def _instance_job(args) -> list[ExperimentRecord]:
    cfg, cls, idx = args
    n = cfg.sizes[cls]
    seed = instance_seed(cfg.master_seed, cls, idx)
    runs = _detector_runs(cfg)

    def error_rows(tag: str, n_optima=None, n_edges=None) -> list[ExperimentRecord]:
        return [
            ExperimentRecord(
                instance_class=cls,
                n=n,
                instance_seed=seed,
                algorithm=algo,
                alpha=cfg.alpha,
                n_optima=n_optima,
                n_edges_filtered=n_edges,
                n_communities=None,
                q=None,
                wall_ms=0,
                error=tag,
            )
            for algo, _ in runs
        ]

    try:
        inst = generate(GeneratorConfig(n=n, seed=seed, instance_class=cls))
        bm = enumerate_basins(inst)
        lon = build_lon(inst, bm)
        flon = filter_lon(lon, cfg.alpha)
    except QaplonError as exc:
        return error_rows(type(exc).__name__)

    g = WeightedGraph(flon.n_nodes, {k: float(w) for k, w in flon.edges.items()})
    records = []
    for algo, k in runs:
        t0 = time.perf_counter()
        try:
            if algo == "greedy":
                part = greedy_modularity(g)
            else:
                part = spinglass_communities(g, seed=derive_seed(seed, SPIN_STREAM_BASE + k))
            wall_ms = int(round((time.perf_counter() - t0) * 1000))
            records.append(
                ExperimentRecord(
                    instance_class=cls,
                    n=n,
                    instance_seed=seed,
                    algorithm=algo,
                    alpha=cfg.alpha,
                    n_optima=bm.n_optima,
                    n_edges_filtered=len(flon.edges),
                    n_communities=part.n_communities,
                    q=part.q,
                    wall_ms=wall_ms,
                )
            )
        except QaplonError as exc:
            wall_ms = int(round((time.perf_counter() - t0) * 1000))
            records.append(
                ExperimentRecord(
                    instance_class=cls,
                    n=n,
                    instance_seed=seed,
                    algorithm=algo,
                    alpha=cfg.alpha,
                    n_optima=bm.n_optima,
                    n_edges_filtered=len(flon.edges),
                    n_communities=None,
                    q=None,
                    wall_ms=wall_ms,
                    error=type(exc).__name__,
                )
            )
    return records


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Run the full sweep; also writes records.csv when out_dir is set."""
    jobs = [
        (cfg, cls, idx)
        for cls in _ordered_classes(cfg)
        for idx in range(cfg.count)
    ]
    if cfg.workers == 1:
        batches = [_instance_job(job) for job in jobs]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(_instance_job, jobs))
    records = [rec for batch in batches for rec in batch]
    if cfg.out_dir is not None:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_records_csv(records, out_dir / RECORDS_FILENAME)
    return records


# ---------------------------------------------------------------------------
# Records CSV

def _fmt_opt(value) -> str:
    return "" if value is None else str(value)


def write_records_csv(records: list[ExperimentRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(RECORD_FIELDS) + ["error"])
        for r in records:
            writer.writerow(
                [
                    r.instance_class,
                    r.n,
                    r.instance_seed,
                    r.algorithm,
                    f"{r.alpha:.12g}",
                    _fmt_opt(r.n_optima),
                    _fmt_opt(r.n_edges_filtered),
                    _fmt_opt(r.n_communities),
                    "" if r.q is None else f"{r.q:.12g}",
                    r.wall_ms,
                    r.error,
                ]
            )


def read_records_csv(path: str | Path) -> list[ExperimentRecord]:
    path = Path(path)
    expected = list(RECORD_FIELDS) + ["error"]
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected:
            raise ParseError(f"{path}: expected header {','.join(expected)}")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise ParseError(f"{path}:{row_no}: expected {len(expected)} fields")
            try:
                records.append(
                    ExperimentRecord(
                        instance_class=row[0],
                        n=int(row[1]),
                        instance_seed=int(row[2]),
                        algorithm=row[3],
                        alpha=float(row[4]),
                        n_optima=int(row[5]) if row[5] else None,
                        n_edges_filtered=int(row[6]) if row[6] else None,
                        n_communities=int(row[7]) if row[7] else None,
                        q=float(row[8]) if row[8] else None,
                        wall_ms=int(row[9]),
                        error=row[10],
                    )
                )
            except ValueError as exc:
                raise ParseError(f"{path}:{row_no}: bad record row: {exc}") from exc
    return records


def strip_timing(csv_text: str) -> str:
    """Records CSV with the wall_ms column removed, for determinism diffs."""
    out = io.StringIO()
    writer = csv.writer(out)
    reader = csv.reader(io.StringIO(csv_text))
    header = next(reader)
    drop = header.index("wall_ms")
    writer.writerow(header[:drop] + header[drop + 1 :])
    for row in reader:
        writer.writerow(row[:drop] + row[drop + 1 :])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Summaries

@dataclass(frozen=True)
class GroupSummary:
    instance_class: str
    algorithm: str
    count: int
    q_min: float
    q1: float
    median: float
    q3: float
    q_max: float


@dataclass(frozen=True)
class TrendTest:
    algorithm: str
    n_real_like: int
    n_uniform: int
    u: float
    p_value: float


@dataclass(frozen=True)
class SummaryResult:
    groups: tuple[GroupSummary, ...]
    tests: tuple[TrendTest, ...]
    max_q: dict[str, float]
    skipped: tuple[str, ...]  # human-readable notes about omitted parts


MIN_GROUP_FOR_TEST = 5


def summarize(records: list[ExperimentRecord]) -> SummaryResult:
    """Five-number Q summaries per (class, algorithm) and the class trend test.

    The one-sided Mann-Whitney test asks whether real_like modularity
    exceeds uniform modularity, separately per algorithm.  Groups with no
    scored records are dropped with a warning; a test is skipped when
    either side has fewer than 5 records.
    """
    scored = [r for r in records if r.q is not None]
    by_group: dict[tuple[str, str], list[float]] = {}
    for r in scored:
        by_group.setdefault((r.instance_class, r.algorithm), []).append(r.q)

    classes = [c for c in GENERATED_CLASSES if any(k[0] == c for k in by_group)]
    algorithms = [a for a in ALGORITHMS if any(k[1] == a for k in by_group)]

    groups = []
    skipped = []
    for cls in classes:
        for algo in algorithms:
            qs = by_group.get((cls, algo))
            if not qs:
                note = f"group ({cls}, {algo}) has no scored records; omitted"
                warnings.warn(note)
                skipped.append(note)
                continue
            mn, q1, med, q3, mx = five_number(qs)
            groups.append(GroupSummary(cls, algo, len(qs), mn, q1, med, q3, mx))

    tests = []
    for algo in algorithms:
        rl = by_group.get(("real_like", algo), [])
        uni = by_group.get(("uniform", algo), [])
        if len(rl) < MIN_GROUP_FOR_TEST or len(uni) < MIN_GROUP_FOR_TEST:
            note = (
                f"trend test for {algo} skipped: needs >= {MIN_GROUP_FOR_TEST} "
                f"records per class, have real_like={len(rl)} uniform={len(uni)}"
            )
            skipped.append(note)
            continue
        u, p = mann_whitney_u(rl, uni, alternative="greater")
        tests.append(TrendTest(algo, len(rl), len(uni), u, p))

    max_q = {}
    for cls in classes:
        qs = [r.q for r in scored if r.instance_class == cls]
        if qs:
            max_q[cls] = max(qs)
    return SummaryResult(
        groups=tuple(groups), tests=tuple(tests), max_q=max_q, skipped=tuple(skipped)
    )


def write_summary_csv(summary: SummaryResult, path: str | Path) -> None:
    """One CSV with a kind column: fivenum rows, mwu rows, then max_q rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["kind", "class", "algorithm", "count", "min", "q1", "median", "q3", "max", "u", "p_value"]
        )
        for g in summary.groups:
            writer.writerow(
                ["fivenum", g.instance_class, g.algorithm, g.count]
                + [f"{v:.12g}" for v in (g.q_min, g.q1, g.median, g.q3, g.q_max)]
                + ["", ""]
            )
        for t in summary.tests:
            writer.writerow(
                ["mwu", "", t.algorithm, t.n_real_like + t.n_uniform, "", "", "", "", "",
                 f"{t.u:.12g}", f"{t.p_value:.12g}"]
            )
        for cls, q in sorted(summary.max_q.items()):
            writer.writerow(["max_q", cls, "", "", "", "", "", "", f"{q:.12g}", "", ""])


def format_summary(summary: SummaryResult) -> str:
    """Plain-text table for terminal output."""
    lines = []
    lines.append(f"{'class':<10} {'algorithm':<10} {'count':>5} {'min':>8} {'q1':>8} "
                 f"{'median':>8} {'q3':>8} {'max':>8}")
    for g in summary.groups:
        lines.append(
            f"{g.instance_class:<10} {g.algorithm:<10} {g.count:>5} "
            f"{g.q_min:>8.4f} {g.q1:>8.4f} {g.median:>8.4f} {g.q3:>8.4f} {g.q_max:>8.4f}"
        )
    for t in summary.tests:
        lines.append(
            f"trend {t.algorithm}: U = {t.u:.1f}, one-sided p(real_like > uniform) = {t.p_value:.4g}"
        )
    if summary.max_q:
        shown = ", ".join(f"{cls} = {q:.4f}" for cls, q in sorted(summary.max_q.items()))
        lines.append(f"max Q per class: {shown}")
    for note in summary.skipped:
        lines.append(f"note: {note}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Config file parsing (plain key = value lines)

_LIST_KEYS = {"classes", "algorithms"}
_INT_KEYS = {"count", "master_seed", "spinglass_seeds", "workers"}
_FLOAT_KEYS = {"alpha"}


def parse_experiment_config(text: str, out_dir: str | Path | None = None) -> ExperimentConfig:
    """Parse a key = value config.

    Recognized keys: classes, sizes, count, master_seed, alpha, algorithms,
    spinglass_seeds, workers.  Lists are comma-separated; sizes is either a
    single integer for all classes or per-class pairs like
    ``sizes = uniform:9, real_like:11``.  '#' starts a comment.
    """
    raw: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"line {line_no}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key or not value:
            raise ParseError(f"line {line_no}: empty key or value")
        if key in raw:
            raise ParseError(f"line {line_no}: duplicate key {key!r}")
        raw[key] = value

    kwargs = {}
    for key, value in raw.items():
        if key in _LIST_KEYS:
            kwargs[key] = tuple(v.strip() for v in value.split(",") if v.strip())
        elif key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError as exc:
                raise ParseError(f"key {key!r}: expected integer, got {value!r}") from exc
        elif key in _FLOAT_KEYS:
            try:
                kwargs[key] = float(value)
            except ValueError as exc:
                raise ParseError(f"key {key!r}: expected number, got {value!r}") from exc
        elif key == "sizes":
            kwargs[key] = _parse_sizes(value)
        else:
            raise ParseError(f"unknown config key {key!r}")

    classes = kwargs.get("classes", ("uniform", "real_like"))
    sizes = kwargs.get("sizes")
    if sizes is None:
        sizes = {c: 8 for c in classes}
    elif isinstance(sizes, int):
        sizes = {c: sizes for c in classes}
    kwargs["classes"] = classes
    kwargs["sizes"] = sizes
    if out_dir is not None:
        kwargs["out_dir"] = Path(out_dir)
    try:
        return ExperimentConfig(**kwargs)
    except ResourceLimitError:
        raise
    except (TypeError, ContractError) as exc:
        # invalid values in a config file are a data problem, not a usage one
        raise ParseError(f"bad config: {exc}") from exc


def _parse_sizes(value: str) -> dict[str, int] | int:
    if ":" not in value:
        try:
            return int(value)
        except ValueError as exc:
            raise ParseError(f"key 'sizes': expected integer, got {value!r}") from exc
    sizes = {}
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ParseError(f"key 'sizes': expected class:size pairs, got {part!r}")
        cls, _, num = part.partition(":")
        cls = cls.strip()
        if cls in sizes:
            raise ParseError(f"key 'sizes': class {cls!r} listed twice")
        try:
            sizes[cls] = int(num.strip())
        except ValueError as exc:
            raise ParseError(f"key 'sizes': bad size in {part!r}") from exc
    return sizes


def load_experiment_config(path: str | Path, out_dir: str | Path | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    try:
        return parse_experiment_config(text, out_dir=out_dir)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from exc
