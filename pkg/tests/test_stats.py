import numpy as np
import pytest
import scipy.stats

from qaplon.errors import ContractError
from qaplon.stats import EXACT_LIMIT, five_number, mann_whitney_u, quantile


def test_five_number_hand_example():
    mn, q1, med, q3, mx = five_number([0.1, 0.2, 0.3, 0.4, 0.5])
    assert mn == 0.1
    assert abs(q1 - 0.2) <= 1e-15
    assert abs(med - 0.3) <= 1e-15
    assert abs(q3 - 0.4) <= 1e-15
    assert mx == 0.5


def test_quantile_matches_numpy_linear():
    rng = np.random.default_rng(3)
    for _ in range(20):
        xs = rng.random(int(rng.integers(1, 30))).tolist()
        for p in (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0):
            assert abs(quantile(xs, p) - float(np.quantile(xs, p))) <= 1e-12


def test_quantile_validation():
    with pytest.raises(ContractError):
        quantile([], 0.5)
    with pytest.raises(ContractError):
        quantile([1.0], 1.5)


def test_mwu_exact_hand_example():
    # complete separation of two triples: one-sided p = 1/C(6,3)
    u, p = mann_whitney_u([0.7, 0.72, 0.75], [0.3, 0.33, 0.35], alternative="greater")
    assert u == 9.0
    assert abs(p - 0.05) <= 1e-12


def test_mwu_identical_groups_not_significant():
    _, p = mann_whitney_u([0.4, 0.5, 0.6], [0.4, 0.5, 0.6], alternative="greater")
    assert p >= 0.5


def test_mwu_exact_matches_scipy():
    rng = np.random.default_rng(17)
    checked = 0
    for _ in range(12):
        nx = int(rng.integers(3, 9))
        ny = int(rng.integers(3, 9))
        if nx + ny >= EXACT_LIMIT:
            continue
        x = rng.random(nx).tolist()
        y = rng.random(ny).tolist()
        for alt in ("greater", "less", "two-sided"):
            u, p = mann_whitney_u(x, y, alternative=alt)
            ref = scipy.stats.mannwhitneyu(x, y, alternative=alt, method="exact")
            assert abs(u - float(ref.statistic)) <= 1e-12
            assert abs(p - float(ref.pvalue)) <= 1e-12
        checked += 1
    assert checked >= 8


def test_mwu_normal_approx_matches_scipy():
    rng = np.random.default_rng(29)
    for _ in range(8):
        x = rng.random(15).tolist()
        y = (rng.random(15) - 0.2).tolist()
        assert len(x) + len(y) >= EXACT_LIMIT
        for alt in ("greater", "less", "two-sided"):
            _, p = mann_whitney_u(x, y, alternative=alt)
            ref = scipy.stats.mannwhitneyu(
                x, y, alternative=alt, method="asymptotic", use_continuity=True
            )
            assert abs(p - float(ref.pvalue)) <= 1e-9


def test_mwu_normal_approx_with_ties():
    x = [0.1, 0.2, 0.2, 0.3] * 4
    y = [0.2, 0.2, 0.3, 0.4] * 4
    _, p = mann_whitney_u(x, y, alternative="less")
    ref = scipy.stats.mannwhitneyu(
        x, y, alternative="less", method="asymptotic", use_continuity=True
    )
    assert abs(p - float(ref.pvalue)) <= 1e-9


def test_mwu_validation():
    with pytest.raises(ContractError):
        mann_whitney_u([], [1.0])
    with pytest.raises(ContractError):
        mann_whitney_u([1.0], [2.0], alternative="sideways")
