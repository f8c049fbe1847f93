"""Seeded generation of the two QAP instance classes, plus instance file I/O.

Two families are produced, both symmetric with zero diagonal:

* ``uniform``: every off-diagonal entry of A and B drawn independently and
  uniformly from {1, .., uniform_max}.
* ``real_like``: n points placed uniformly at random in a square of side
  ``rl_grid``; distances are rounded Euclidean distances between points.
  Flows are skewed: ``round(10 ** (r * rl_exponent))`` with r uniform in
  [0, 1) (log-uniform magnitudes), optionally zeroed with probability
  ``rl_sparsity``.

Draw order is part of the format contract (see the field-by-field notes in
the generator functions): generation is a pure function of
(class, n, seed, parameters) and must stay bitwise stable.

Rounding is half-up (``floor(x + 0.5)``), so flow magnitudes for the
default exponent 2 land in {1, .., 100} with ``P(flow <= t)`` equal to
``log10(t + 0.5) / 2``.

File format is QAPLIB-style: token ``n`` followed by the n*n entries of A
(row-major) and the n*n entries of B, separated by arbitrary whitespace.
Generator metadata travels in a sidecar ``<path>.meta`` file of
``key=value`` lines, keeping the instance file strictly QAPLIB compatible.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
import warnings

import numpy as np

from .errors import ContractError, ParseError
from .qap import QapInstance
from .rng import Xoshiro256StarStar, derive_seed

GENERATED_CLASSES = ("uniform", "real_like")

#: Stream indices for :func:`qaplon.rng.derive_seed` when deriving
#: per-instance seeds from an experiment master seed: the stream for
#: instance ``i`` of class ``c`` is ``CLASS_STREAM_STRIDE * code(c) + i``.
CLASS_STREAM_STRIDE = 1 << 32
CLASS_CODES = {"uniform": 0, "real_like": 1}


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of one generated instance (class, size, seed, knobs)."""

    n: int
    seed: int
    instance_class: str = "uniform"
    uniform_max: int = 100
    rl_grid: float = 100.0
    rl_exponent: float = 2.0
    rl_sparsity: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ContractError(f"generator needs n >= 2, got {self.n}")
        if self.instance_class not in GENERATED_CLASSES:
            raise ContractError(f"unknown instance class {self.instance_class!r}")
        if self.uniform_max < 1:
            raise ContractError("uniform_max must be >= 1")
        if not self.rl_exponent > 0:
            raise ContractError("rl_exponent must be > 0")
        if not 0.0 <= self.rl_sparsity <= 1.0:
            raise ContractError("rl_sparsity must lie in [0, 1]")


def instance_seed(master_seed: int, instance_class: str, index: int) -> int:
    """Per-instance seed; independent of how many other instances exist."""
    code = CLASS_CODES[instance_class]
    return derive_seed(master_seed, code * CLASS_STREAM_STRIDE + index)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def generate(cfg: GeneratorConfig) -> QapInstance:
    """Dispatch on the configured class."""
    if cfg.instance_class == "uniform":
        return gen_uniform(cfg)
    return gen_real_like(cfg)


def gen_uniform(cfg: GeneratorConfig) -> QapInstance:
    """Uniform random instance.

    Draw order: the upper triangle of A in (i, j) row-major order, then the
    upper triangle of B, one bounded-integer draw per entry, mirrored into
    the lower triangle.
    """
    if cfg.instance_class != "uniform":
        raise ContractError(f"config class is {cfg.instance_class!r}, not 'uniform'")
    rng = Xoshiro256StarStar(cfg.seed)
    n = cfg.n

    def draw_matrix() -> np.ndarray:
        m = np.zeros((n, n), dtype=np.int64)
        for i in range(n - 1):
            for j in range(i + 1, n):
                v = rng.uniform_int(1, cfg.uniform_max)
                m[i, j] = v
                m[j, i] = v
        return m

    a = draw_matrix()
    b = draw_matrix()
    label = f"uniform-n{n}-s{cfg.seed:016x}"
    return QapInstance(n, a, b, label=label, class_tag="uniform")


def gen_real_like(cfg: GeneratorConfig) -> QapInstance:
    """Instance with Euclidean distances and log-uniform flows.

    Draw order: for each point 0..n-1 an x then a y coordinate (uniform in
    [0, rl_grid)); then for each pair (i, j), i < j, in row-major order a
    sparsity draw followed by a magnitude draw.  Both draws are consumed
    even when one is unused, so the stream layout does not depend on the
    sparsity setting.
    """
    if cfg.instance_class != "real_like":
        raise ContractError(f"config class is {cfg.instance_class!r}, not 'real_like'")
    rng = Xoshiro256StarStar(cfg.seed)
    n = cfg.n
    xs = np.empty(n)
    ys = np.empty(n)
    for i in range(n):
        xs[i] = rng.uniform() * cfg.rl_grid
        ys[i] = rng.uniform() * cfg.rl_grid
    a = np.zeros((n, n), dtype=np.int64)
    b = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 1):
        for j in range(i + 1, n):
            d = math.hypot(xs[i] - xs[j], ys[i] - ys[j])
            a[i, j] = a[j, i] = _round_half_up(d)
            drop = rng.uniform() < cfg.rl_sparsity
            magnitude = rng.uniform()
            if not drop:
                v = _round_half_up(10.0 ** (magnitude * cfg.rl_exponent))
                b[i, j] = b[j, i] = v
    label = f"real_like-n{n}-s{cfg.seed:016x}"
    return QapInstance(n, a, b, label=label, class_tag="real_like")


# ---------------------------------------------------------------------------
# QAPLIB-style file I/O

_TOKEN_RE = re.compile(rb"\S+")


def load_instance(path: str | Path) -> QapInstance:
    """Parse a QAPLIB-style instance file.

    Raises :class:`ParseError` with the byte offset of the offending token
    on malformed input; warns (without failing) when an external file has a
    nonzero diagonal.
    """
    path = Path(path)
    data = path.read_bytes()
    tokens = [(m.group(0), m.start()) for m in _TOKEN_RE.finditer(data)]

    def intval(pos: int, what: str) -> int:
        if pos >= len(tokens):
            raise ParseError(
                f"unexpected end of file while reading {what}", offset=len(data)
            )
        raw, off = tokens[pos]
        try:
            return int(raw)
        except ValueError:
            raise ParseError(
                f"expected an integer for {what}, found {raw.decode(errors='replace')!r}",
                offset=off,
            ) from None

    n = intval(0, "instance size")
    if n < 1:
        raise ParseError(f"instance size must be >= 1, got {n}", offset=tokens[0][1])
    need = 1 + 2 * n * n
    if len(tokens) > need:
        raise ParseError(
            f"trailing data: expected {need} tokens, found {len(tokens)}",
            offset=tokens[need][1],
        )
    values = np.empty(2 * n * n, dtype=np.int64)
    for k in range(2 * n * n):
        name = "distance matrix" if k < n * n else "flow matrix"
        v = intval(1 + k, f"{name} entry")
        if v < 0:
            raise ParseError(
                f"negative {name} entry {v}", offset=tokens[1 + k][1]
            )
        values[k] = v
    a = values[: n * n].reshape(n, n)
    b = values[n * n:].reshape(n, n)
    if np.diagonal(a).any() or np.diagonal(b).any():
        warnings.warn(f"{path.name}: nonzero diagonal entries", stacklevel=2)
    return QapInstance(n, a, b, label=path.stem, class_tag="external")


def format_instance(inst: QapInstance) -> str:
    """Canonical serialization: n, blank line, A rows, blank line, B rows."""
    lines = [str(inst.n), ""]
    for m in (inst.a, inst.b):
        lines.extend(" ".join(str(int(v)) for v in row) for row in m)
        lines.append("")
    return "\n".join(lines)


def save_instance(inst: QapInstance, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst))


def save_meta(cfg: GeneratorConfig, path: str | Path) -> None:
    """Write the generator sidecar ``<path>.meta`` describing ``cfg``."""
    lines = [
        f"class={cfg.instance_class}",
        f"n={cfg.n}",
        f"seed={cfg.seed}",
        f"uniform_max={cfg.uniform_max}",
        f"rl_grid={cfg.rl_grid!r}",
        f"rl_exponent={cfg.rl_exponent!r}",
        f"rl_sparsity={cfg.rl_sparsity!r}",
    ]
    Path(str(path) + ".meta").write_text("\n".join(lines) + "\n")
