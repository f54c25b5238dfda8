"""Counter-based random numbers (Philox4x32-10).

Every draw is a pure function of ``(seed, stream_id, counter)``: the 64-bit
seed is the Philox key, and the 128-bit Philox counter holds the draw counter
in its low half and the stream id in its high half.  One draw is one Philox
block of four 32-bit words.  Nothing here keeps hidden state, so ensembles can
be split across workers in any order and replayed from any counter.

The block function is compiled with numba so that simulation kernels can call
it inline; ``philox_block`` is the Python-callable entry point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numba
import numpy as np

from .core import ParameterDomainError

_MASK64 = (1 << 64) - 1
_INV32 = 1.0 / 4294967296.0
_INV53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, inline="always")
def _philox(c0, c1, c2, c3, k0, k1):
    c0 = np.uint32(c0)
    c1 = np.uint32(c1)
    c2 = np.uint32(c2)
    c3 = np.uint32(c3)
    k0 = np.uint32(k0)
    k1 = np.uint32(k1)
    for _ in range(10):
        p0 = np.uint64(c0) * np.uint64(0xD2511F53)
        p1 = np.uint64(c2) * np.uint64(0xCD9E8D57)
        n0 = np.uint32(np.uint32(p1 >> np.uint64(32)) ^ c1 ^ k0)
        n1 = np.uint32(p1 & np.uint64(0xFFFFFFFF))
        n2 = np.uint32(np.uint32(p0 >> np.uint64(32)) ^ c3 ^ k1)
        n3 = np.uint32(p0 & np.uint64(0xFFFFFFFF))
        c0, c1, c2, c3 = n0, n1, n2, n3
        k0 = np.uint32(k0 + np.uint32(0x9E3779B9))
        k1 = np.uint32(k1 + np.uint32(0xBB67AE85))
    return c0, c1, c2, c3


@numba.njit(cache=True, inline="always")
def draw_words(seed, stream_id, counter):
    """Four 32-bit words for draw ``counter`` of stream ``stream_id``."""
    seed = np.uint64(seed)
    stream_id = np.uint64(stream_id)
    counter = np.uint64(counter)
    lo = np.uint64(0xFFFFFFFF)
    return _philox(
        counter & lo,
        counter >> np.uint64(32),
        stream_id & lo,
        stream_id >> np.uint64(32),
        seed & lo,
        seed >> np.uint64(32),
    )


@numba.njit(cache=True, inline="always")
def word_to_unit(w):
    """Map a 32-bit word to [0, 1); a coin with probability p is ``unit < p``."""
    return np.float64(w) * 2.3283064365386963e-10


@numba.njit(cache=True, inline="always")
def words_to_unit53(w_hi, w_lo):
    hi = np.uint64(w_hi) >> np.uint64(5)
    lo = np.uint64(w_lo) >> np.uint64(6)
    return (np.float64(hi) * 67108864.0 + np.float64(lo)) * 1.1102230246251565e-16


@numba.njit(cache=True)
def _uniform_kernel(seed, stream_ids, counters, out):
    for i in range(out.shape[0]):
        w0, w1, _, _ = draw_words(seed, stream_ids[i], counters[i])
        out[i] = words_to_unit53(w0, w1)


@numba.njit(cache=True)
def _normal_kernel(seed, stream_id, counter0, out):
    n = out.shape[0]
    for j in range((n + 1) // 2):
        w0, w1, w2, w3 = draw_words(seed, stream_id, counter0 + j)
        u1 = 1.0 - words_to_unit53(w0, w1)  # (0, 1]
        u2 = words_to_unit53(w2, w3)
        r = math.sqrt(-2.0 * math.log(u1))
        out[2 * j] = r * math.cos(2.0 * math.pi * u2)
        if 2 * j + 1 < n:
            out[2 * j + 1] = r * math.sin(2.0 * math.pi * u2)


def _u64(value: int, name: str) -> int:
    value = int(value)
    if not 0 <= value <= _MASK64:
        raise ParameterDomainError(f"{name} must fit in 64 unsigned bits, got {value}")
    return value


def philox_block(seed: int, stream_id: int, counter: int) -> tuple[int, int, int, int]:
    words = draw_words(
        np.uint64(_u64(seed, "seed")), np.uint64(_u64(stream_id, "stream_id")), np.uint64(_u64(counter, "counter"))
    )
    return tuple(int(w) for w in words)


def uniform_array(seed: int, stream_ids, counters) -> np.ndarray:
    """Vectorised 53-bit uniforms for arbitrary (stream, counter) pairs."""
    stream_ids, counters = np.broadcast_arrays(
        np.asarray(stream_ids, dtype=np.uint64), np.asarray(counters, dtype=np.uint64)
    )
    shape = stream_ids.shape
    out = np.empty(stream_ids.size, dtype=np.float64)
    _uniform_kernel(
        np.uint64(_u64(seed, "seed")), stream_ids.ravel().copy(), counters.ravel().copy(), out
    )
    return out.reshape(shape)


@dataclass(frozen=True)
class RngStream:
    """Immutable handle on one Philox stream.

    Methods that consume draws return the values together with the advanced
    stream; the original handle is unchanged and can be replayed.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self):
        _u64(self.seed, "seed")
        _u64(self.stream_id, "stream_id")
        _u64(self.counter, "counter")

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id, 0)

    def advance(self, n: int) -> "RngStream":
        return replace(self, counter=(self.counter + int(n)) & _MASK64)

    def words(self) -> tuple[tuple[int, int, int, int], "RngStream"]:
        return philox_block(self.seed, self.stream_id, self.counter), self.advance(1)

    def uniforms(self, n: int) -> tuple[np.ndarray, "RngStream"]:
        counters = np.arange(n, dtype=np.uint64) + np.uint64(self.counter)
        return uniform_array(self.seed, self.stream_id, counters), self.advance(n)

    def normals(self, n: int) -> tuple[np.ndarray, "RngStream"]:
        """Box-Muller normals; two per draw, so ``ceil(n / 2)`` draws are consumed."""
        out = np.empty(int(n), dtype=np.float64)
        _normal_kernel(
            np.uint64(self.seed), np.uint64(self.stream_id), np.uint64(self.counter), out
        )
        return out, self.advance((int(n) + 1) // 2)


def coin(stream: RngStream, probability_heads: float) -> tuple[bool, RngStream]:
    """Flip one biased coin; returns (heads, advanced stream)."""
    p = float(probability_heads)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ParameterDomainError(f"probability_heads must lie in [0, 1], got {p}")
    (w0, _, _, _), nxt = stream.words()
    return w0 * _INV32 < p, nxt
