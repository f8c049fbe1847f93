"""Self-contained deterministic random number generation.

Instance generation must be bitwise reproducible across platforms and
library versions, so the generator is pinned by algorithm constants rather
than delegated to numpy or the stdlib:

* Stream seeding and seed derivation use the SplitMix64 finalizer
  (increment ``0x9E3779B97F4A7C15``, multipliers ``0xBF58476D1CE4E5B9``
  and ``0x94D049BB133111EB``, shifts 30/27/31).
* The working generator is xoshiro256** (scrambler ``rotl(s1*5, 7)*9``,
  linear engine shifts 17/45), state-seeded from four consecutive
  SplitMix64 outputs.
* Bounded integers use rejection sampling on the top multiple of the span,
  so every value in the range is exactly equally likely.
* Floats in [0, 1) take the top 53 bits of one 64-bit output.

Derived seeds: ``derive_seed(master, stream)`` is the ``stream+1``-th output
of a SplitMix64 sequence started at ``master``, which lets any sub-stream
(instance, detector run) be regenerated independently of the others.
"""

from __future__ import annotations

_M64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix_finalize(z: int) -> int:
    z &= _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def splitmix64_outputs(seed: int, count: int) -> list[int]:
    """First ``count`` outputs of SplitMix64 started at ``seed``."""
    state = seed & _M64
    out = []
    for _ in range(count):
        state = (state + _SPLITMIX_GAMMA) & _M64
        out.append(_splitmix_finalize(state))
    return out


def derive_seed(master_seed: int, stream: int) -> int:
    """Seed for sub-stream ``stream`` of the sequence rooted at ``master_seed``."""
    state = (master_seed + (stream + 1) * _SPLITMIX_GAMMA) & _M64
    return _splitmix_finalize(state)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _M64


class Xoshiro256StarStar:
    """xoshiro256** with SplitMix64 state seeding.

    Pure Python on purpose: generation volume is tiny next to landscape
    enumeration, and an explicit implementation keeps the byte-for-byte
    reproducibility promise independent of any library.
    """

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        self._s = splitmix64_outputs(seed, 4)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _M64, 7) * 9) & _M64
        t = (s1 << 17) & _M64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform_int(self, lo: int, hi: int) -> int:
        """Unbiased integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            u = self.next_u64()
            if u < limit:
                return lo + (u % span)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)
