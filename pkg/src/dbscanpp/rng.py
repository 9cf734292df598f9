"""Seeded pseudo-random generator shared by every stochastic routine.

The generator is xoshiro256** with its four state words filled from a
splitmix64 stream seeded by a single 64-bit integer. All derived draws
(bounded integers, doubles, normals, partial shuffles) are defined here so
that a given seed produces the same samples on any platform.

Derived draws:

* ``bounded(k)``: unbiased integer in ``[0, k)``. Raw words below
  ``(2**64 - k) % k`` are rejected, the rest are reduced modulo ``k``.
* ``random()``: ``(x >> 11) * 2**-53``, a double in ``[0, 1)``.
* ``standard_normal()``: Box-Muller on consecutive pairs of doubles
  ``u1, u2`` using ``r = sqrt(-2 log(1 - u1))``; both ``r cos(2 pi u2)``
  and ``r sin(2 pi u2)`` are emitted, in that order.
* ``sample_without_replacement(n, m)``: the first ``m`` steps of a
  Fisher-Yates shuffle of ``0..n-1`` where step ``i`` swaps position ``i``
  with ``i + bounded(n - i)``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def seed_state(seed: int) -> np.ndarray:
    s = int(seed) & MASK64
    words = []
    for _ in range(4):
        s, out = splitmix64(s)
        words.append(out)
    return np.array(words, dtype=np.uint64)


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def _next(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True)
def _fill_raw(state, out):
    for i in range(out.shape[0]):
        out[i] = _next(state)


@njit(cache=True)
def _bounded(state, k):
    ku = np.uint64(k)
    threshold = (np.uint64(0) - ku) % ku
    while True:
        x = _next(state)
        if x >= threshold:
            return x % ku


@njit(cache=True)
def _fill_random(state, out):
    scale = 1.0 / 9007199254740992.0
    for i in range(out.shape[0]):
        out[i] = (_next(state) >> np.uint64(11)) * scale


@njit(cache=True)
def _fill_normal(state, out):
    scale = 1.0 / 9007199254740992.0
    n = out.shape[0]
    i = 0
    while i < n:
        u1 = (_next(state) >> np.uint64(11)) * scale
        u2 = (_next(state) >> np.uint64(11)) * scale
        r = np.sqrt(-2.0 * np.log(1.0 - u1))
        theta = 2.0 * np.pi * u2
        out[i] = r * np.cos(theta)
        if i + 1 < n:
            out[i + 1] = r * np.sin(theta)
        i += 2


@njit(cache=True)
def _partial_shuffle(state, n, m):
    arr = np.arange(n)
    for i in range(m):
        j = i + np.int64(_bounded(state, n - i))
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp
    return arr[:m].copy()


class Xoshiro256:
    """xoshiro256** seeded through splitmix64.

    An odd-length ``standard_normal`` request discards the unused second
    Box-Muller output, so the stream position depends only on the request
    sizes.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.state = seed_state(seed)

    def next_u64(self) -> int:
        return int(_next(self.state))

    def random_raw(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.uint64)
        _fill_raw(self.state, out)
        return out

    def bounded(self, k: int) -> int:
        if k < 1:
            raise ValueError(f"bound must be >= 1, got {k}")
        return int(_bounded(self.state, k))

    def random(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.float64)
        _fill_random(self.state, out)
        return out

    def standard_normal(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.float64)
        _fill_normal(self.state, out)
        return out

    def sample_without_replacement(self, n: int, m: int) -> np.ndarray:
        """First ``m`` entries of a partial Fisher-Yates shuffle (unsorted)."""
        if not 0 <= m <= n:
            raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
        return _partial_shuffle(self.state, n, m)
