"""Simulated-annealing kernel for the Potts spin-glass detector.

Compiled with numba; everything in here is deterministic given the seed.
The random stream is the same splitmix64-seeded xoshiro256** generator as
:mod:`qaplon.rng`, re-implemented inline because the kernel cannot call
Python objects.

State kept incrementally per spin s and node v:

    K_spin[s]   total strength of nodes currently on spin s
    link[v, s]  summed edge weight from v to spin-s nodes (v excluded)

which makes a single-flip energy delta O(1) and an accepted flip O(deg v).
Energies drift by float rounding over millions of updates; the caller
recomputes the final Hamiltonian exactly, the kernel's running value is
only used to pick moves and track the incumbent.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True)
def _xo_init(seed):
    s = np.empty(4, dtype=np.uint64)
    acc = U64(seed)
    for i in range(4):
        acc = acc + U64(0x9E3779B97F4A7C15)
        s[i] = _mix64(acc)
    return s


@njit(cache=True, inline="always")
def _xo_next(s):
    x = s[1] * U64(5)
    result = ((x << U64(7)) | (x >> U64(57))) * U64(9)
    t = s[1] << U64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << U64(45)) | (s[3] >> U64(19))
    return result


@njit(cache=True, inline="always")
def _xo_below(s, span):
    # rejection sampling: unbiased draw from [0, span); the largest multiple
    # of span is 2**64 - (2**64 mod span), with the modulus taken as
    # (0 - span) mod span to stay inside 64-bit arithmetic
    limit = U64(0) - ((U64(0) - U64(span)) % U64(span))
    while True:
        x = _xo_next(s)
        if limit == U64(0) or x < limit:
            return np.int64(x % U64(span))


@njit(cache=True, inline="always")
def _xo_unit(s):
    return np.float64(_xo_next(s) >> U64(11)) * (2.0 ** -53)


@njit(cache=True)
def _flip_delta(v, s_new, sigma, link, k, K_spin, gamma, two_m):
    s_old = sigma[v]
    dh = -(link[v, s_new] - link[v, s_old])
    dh += gamma * k[v] * (K_spin[s_new] - (K_spin[s_old] - k[v])) / two_m
    return dh


@njit(cache=True)
def _apply_flip(v, s_new, sigma, link, k, K_spin, nbr_ptr, nbr_idx, nbr_w):
    s_old = sigma[v]
    for e in range(nbr_ptr[v], nbr_ptr[v + 1]):
        u = nbr_idx[e]
        link[u, s_old] -= nbr_w[e]
        link[u, s_new] += nbr_w[e]
    K_spin[s_old] -= k[v]
    K_spin[s_new] += k[v]
    sigma[v] = s_new


@njit(cache=True)
def anneal(
    nbr_ptr,
    nbr_idx,
    nbr_w,
    k,
    active,
    m,
    gamma,
    q_max,
    t_start,
    cooling,
    flips_per_t,
    t_stop,
    seed,
):
    """Return (best_sigma, best_h_running, n_temperature_steps)."""
    n = k.shape[0]
    two_m = 2.0 * m
    rng = _xo_init(seed)

    sigma = np.empty(n, dtype=np.int64)
    for v in range(n):
        sigma[v] = _xo_below(rng, q_max)

    link = np.zeros((n, q_max), dtype=np.float64)
    K_spin = np.zeros(q_max, dtype=np.float64)
    for v in range(n):
        K_spin[sigma[v]] += k[v]
        for e in range(nbr_ptr[v], nbr_ptr[v + 1]):
            link[v, sigma[nbr_idx[e]]] += nbr_w[e]

    # current Hamiltonian, from scratch once
    h = 0.0
    for v in range(n):
        h -= 0.5 * link[v, sigma[v]]
        h += gamma * k[v] * (K_spin[sigma[v]] - k[v]) / (2.0 * two_m)

    n_active = active.shape[0]
    if t_start <= 0.0:
        # calibrate: probe deltas from the initial state, then double the
        # temperature until at least 90% of probe moves would be accepted
        pos_sum = 0.0
        pos_cnt = 0
        for _ in range(256):
            v = active[_xo_below(rng, n_active)]
            alt = _xo_below(rng, q_max - 1)
            s_new = alt + 1 if alt >= sigma[v] else alt
            dh = _flip_delta(v, s_new, sigma, link, k, K_spin, gamma, two_m)
            if dh > 0.0:
                pos_sum += dh
                pos_cnt += 1
        t = pos_sum / pos_cnt if pos_cnt > 0 else 1.0
        if t <= 0.0:
            t = 1.0
        for _ in range(64):
            acc = 0
            for _ in range(256):
                v = active[_xo_below(rng, n_active)]
                alt = _xo_below(rng, q_max - 1)
                s_new = alt + 1 if alt >= sigma[v] else alt
                dh = _flip_delta(v, s_new, sigma, link, k, K_spin, gamma, two_m)
                if dh <= 0.0 or _xo_unit(rng) < np.exp(-dh / t):
                    acc += 1
            if acc >= 230:  # ceil(0.9 * 256)
                break
            t *= 2.0
    else:
        t = t_start

    best_sigma = sigma.copy()
    best_h = h
    steps = 0
    while t > t_stop:
        accepted = 0
        for _ in range(flips_per_t):
            v = active[_xo_below(rng, n_active)]
            alt = _xo_below(rng, q_max - 1)
            s_new = alt + 1 if alt >= sigma[v] else alt
            dh = _flip_delta(v, s_new, sigma, link, k, K_spin, gamma, two_m)
            if dh <= 0.0 or _xo_unit(rng) < np.exp(-dh / t):
                _apply_flip(v, s_new, sigma, link, k, K_spin, nbr_ptr, nbr_idx, nbr_w)
                h += dh
                accepted += 1
                if h < best_h:
                    best_h = h
                    best_sigma[:] = sigma
        steps += 1
        if accepted == 0:
            break
        t *= cooling
    return best_sigma, best_h, steps
