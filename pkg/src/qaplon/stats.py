"""Small statistics helpers for experiment summaries.

Quartiles use linear interpolation between order statistics (the same
rule as numpy's default quantile): at probability p the value is taken
at fractional index p*(n-1) of the sorted sample, interpolating between
the two bracketing order statistics.  So {0.1, 0.2, 0.3, 0.4, 0.5} has
Q1 = 0.2, median = 0.3, Q3 = 0.4.

The Mann-Whitney U statistic counts pairs (x, y) with x > y, ties at
half weight.  Below a combined sample size of 20 the p-value is exact:
U is evaluated for every split of the pooled sample into the two group
sizes.  From 20 up it uses the normal approximation with midrank tie
correction and a 0.5 continuity correction.
"""

from __future__ import annotations

from itertools import combinations
from math import erfc, floor, sqrt

from .errors import ContractError

EXACT_LIMIT = 20  # combined size below which the U distribution is enumerated

ALTERNATIVES = ("greater", "less", "two-sided")


def quantile(values: list[float], p: float) -> float:
    """Linear-interpolation quantile of an unsorted sample."""
    if not values:
        raise ContractError("quantile of an empty sample")
    if not 0.0 <= p <= 1.0:
        raise ContractError(f"probability {p} outside [0, 1]")
    xs = sorted(float(v) for v in values)
    h = p * (len(xs) - 1)
    lo = floor(h)
    hi = min(lo + 1, len(xs) - 1)
    frac = h - lo
    return xs[lo] * (1.0 - frac) + xs[hi] * frac


def five_number(values: list[float]) -> tuple[float, float, float, float, float]:
    """(min, Q1, median, Q3, max) of a sample."""
    if not values:
        raise ContractError("summary of an empty sample")
    xs = sorted(float(v) for v in values)
    return (
        xs[0],
        quantile(xs, 0.25),
        quantile(xs, 0.5),
        quantile(xs, 0.75),
        xs[-1],
    )


def _u_statistic(x: list[float], y: list[float]) -> float:
    u = 0.0
    for xi in x:
        for yj in y:
            if xi > yj:
                u += 1.0
            elif xi == yj:
                u += 0.5
    return u


def mann_whitney_u(
    x: list[float], y: list[float], alternative: str = "greater"
) -> tuple[float, float]:
    """U statistic for x against y and its p-value.

    ``greater`` tests whether x tends to exceed y.  Exact p-values are
    permutation fractions and therefore conservative (include the
    observed split); e.g. three values all above three others give
    p = 1/C(6,3) = 0.05.
    """
    if alternative not in ALTERNATIVES:
        raise ContractError(f"unknown alternative {alternative!r}")
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    if not x or not y:
        raise ContractError("both samples must be non-empty")
    nx, ny = len(x), len(y)
    u = _u_statistic(x, y)

    if nx + ny < EXACT_LIMIT:
        pooled = x + y
        total = 0
        ge = 0
        le = 0
        for picked in combinations(range(nx + ny), nx):
            mask = set(picked)
            px = [pooled[i] for i in picked]
            py = [pooled[i] for i in range(nx + ny) if i not in mask]
            pu = _u_statistic(px, py)
            total += 1
            if pu >= u:
                ge += 1
            if pu <= u:
                le += 1
        p_greater = ge / total
        p_less = le / total
        if alternative == "greater":
            return u, p_greater
        if alternative == "less":
            return u, p_less
        return u, min(1.0, 2.0 * min(p_greater, p_less))

    # normal approximation with midrank tie correction
    n = nx + ny
    pooled = sorted(x + y)
    tie_term = 0.0
    i = 0
    while i < n:
        j = i
        while j < n and pooled[j] == pooled[i]:
            j += 1
        t = j - i
        tie_term += t * t * t - t
        i = j
    mu = nx * ny / 2.0
    var = nx * ny / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        # every pooled value identical: no evidence either way
        return u, 1.0

    def upper_tail(stat: float) -> float:
        z = (stat - mu - 0.5) / sqrt(var)
        return 0.5 * erfc(z / sqrt(2.0))

    def lower_tail(stat: float) -> float:
        z = (stat - mu + 0.5) / sqrt(var)
        return 0.5 * erfc(-z / sqrt(2.0))

    if alternative == "greater":
        return u, min(1.0, upper_tail(u))
    if alternative == "less":
        return u, min(1.0, lower_tail(u))
    return u, min(1.0, 2.0 * min(upper_tail(u), lower_tail(u)))
