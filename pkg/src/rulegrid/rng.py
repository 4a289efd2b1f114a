"""Counter-based splittable pseudorandom numbers (Philox4x64-10).

A generator state is just a 128-bit key.  Drawing the i-th word or deriving
the i-th child key evaluates the block cipher at a fixed counter, so any
number of streams can be consumed out of order, in parallel, with identical
results on every platform.  Distinct counter domains keep draws, splits and
fold-ins from ever colliding.

The scalar path below works on plain Python ints; ``philox4_array`` is the
numpy twin used by the batched stepper.  Both are cross-checked against
``numpy.random.Philox`` in the test suite.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

MASK64 = (1 << 64) - 1

# Round multipliers and key schedule increments (Weyl constants).
_M0 = 0xD2E7470EE14C6C93
_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B

# Counter word 2 tags the purpose of a stream.
_DOMAIN_DRAW = 1
_DOMAIN_SPLIT = 2
_DOMAIN_FOLD = 3
_DOMAIN_SEED = 4


class Key(NamedTuple):
    """128-bit generator key."""

    hi: int
    lo: int


def philox4(ctr: tuple[int, int, int, int], key: tuple[int, int]) -> tuple[int, int, int, int]:
    """One Philox4x64 block: 4 counter words + 2 key words -> 4 output words."""
    c0, c1, c2, c3 = ctr
    k0, k1 = key
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            ((p1 >> 64) ^ c1 ^ k0) & MASK64,
            p1 & MASK64,
            ((p0 >> 64) ^ c3 ^ k1) & MASK64,
            p0 & MASK64,
        )
        k0 = (k0 + _W0) & MASK64
        k1 = (k1 + _W1) & MASK64
    return c0, c1, c2, c3


def _umulhi(a: np.ndarray, b: int) -> np.ndarray:
    """High 64 bits of a 64x64 multiply, via 32-bit limbs."""
    m32 = np.uint64(0xFFFFFFFF)
    b_lo = np.uint64(b & 0xFFFFFFFF)
    b_hi = np.uint64(b >> 32)
    a_lo = a & m32
    a_hi = a >> np.uint64(32)
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    t = (lo_lo >> np.uint64(32)) + (hi_lo & m32) + (lo_hi & m32)
    return a_hi * b_hi + (hi_lo >> np.uint64(32)) + (lo_hi >> np.uint64(32)) + (t >> np.uint64(32))


def philox4_array(
    c0: np.ndarray, c1: np.ndarray, c2: np.ndarray, c3: np.ndarray,
    k0: np.ndarray, k1: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized Philox4x64 over uint64 arrays (broadcasting allowed)."""
    c0, c1, c2, c3, k0, k1 = np.broadcast_arrays(
        *(np.asarray(x, dtype=np.uint64) for x in (c0, c1, c2, c3, k0, k1))
    )
    k0, k1 = k0.copy(), k1.copy()
    m0 = np.uint64(_M0)
    m1 = np.uint64(_M1)
    for _ in range(10):
        lo0 = c0 * m0
        hi0 = _umulhi(c0, _M0)
        lo1 = c2 * m1
        hi1 = _umulhi(c2, _M1)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = k0 + np.uint64(_W0)
        k1 = k1 + np.uint64(_W1)
    return c0, c1, c2, c3


def key_from_seed(seed: int) -> Key:
    """Derive a well-mixed key from a user-facing integer seed."""
    w = philox4((seed & MASK64, seed >> 64 & MASK64, _DOMAIN_SEED, 0), (0, 0))
    return Key(w[0], w[1])


def split(key: Key, num: int = 2) -> tuple[Key, ...]:
    """Derive ``num`` statistically independent child keys."""
    return tuple(fold_in(key, i, _DOMAIN_SPLIT) for i in range(num))


def fold_in(key: Key, data: int, _domain: int = _DOMAIN_FOLD) -> Key:
    """Derive the child key indexed by ``data``."""
    w = philox4((data & MASK64, data >> 64 & MASK64, _domain, 0), key)
    return Key(w[0], w[1])


def random_words(key: Key, count: int) -> list[int]:
    """First ``count`` uint64 words of the key's draw stream."""
    out: list[int] = []
    for block in range((count + 3) // 4):
        out.extend(philox4((block, 0, _DOMAIN_DRAW, 0), key))
    return out[:count]


def randint(key: Key, bound: int, index: int = 0) -> int:
    """Word ``index`` of the draw stream reduced to [0, bound)."""
    block, offset = divmod(index, 4)
    return philox4((block, 0, _DOMAIN_DRAW, 0), key)[offset] % bound


def word_stream(key: Key):
    """The key's draw stream as an endless iterator; same words as
    ``random_words`` for any prefix length."""
    block = 0
    while True:
        yield from philox4((block, 0, _DOMAIN_DRAW, 0), key)
        block += 1


def split_array(k0: np.ndarray, k1: np.ndarray, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized fold_in with the split domain: child ``index`` of each key."""
    w = philox4_array(index, 0, _DOMAIN_SPLIT, 0, k0, k1)
    return w[0], w[1]


def split_batch(key: Key, num: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``num`` children of one key as arrays; same keys as split(key, num)."""
    w = philox4_array(np.arange(num, dtype=np.uint64), 0, _DOMAIN_SPLIT, 0, key[0], key[1])
    return w[0], w[1]


def draw_block_array(k0: np.ndarray, k1: np.ndarray, block: np.ndarray | int):
    """Vectorized draw-stream block: 4 uint64 words per key."""
    return philox4_array(block, 0, _DOMAIN_DRAW, 0, k0, k1)
