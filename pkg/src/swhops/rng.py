"""Counter-based random streams shared by every simulation backend.

All randomness in the simulator is derived from a single 64-bit master seed
through two pure functions:

  * ``stream_seed(parent, *indices)`` derives a child stream seed, so each
    trial / node / purpose gets its own independent stream.
  * ``prf(seed, ctr)`` maps (stream seed, draw counter) to 64 random bits.
    It is splitmix64 evaluated at an arbitrary counter, i.e. a stateless PRF.

Because draws are addressed by counter instead of taken from evolving state,
the compiled kernel, the pure-Python kernel and the object-level API can all
reproduce the exact same values regardless of evaluation order, laziness or
thread count.  The numpy block helpers below are vectorized but bit-identical
to the scalar forms (uint64 wraparound arithmetic in both).
"""

from __future__ import annotations

import numpy as np

_M = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STREAM = 0xD1B54A32D192ED03

# Exact: 2**-53, so (z >> 11) * _TO_UNIT lies in [0, 1).
_TO_UNIT = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """splitmix64 finalizer (Stafford mix)."""
    z &= _M
    z = ((z ^ (z >> 30)) * _MIX1) & _M
    z = ((z ^ (z >> 27)) * _MIX2) & _M
    return z ^ (z >> 31)


def stream_seed(parent: int, *indices: int) -> int:
    """Derive a child stream seed from a parent seed and index path.

    Compositional: stream_seed(s, a, b) == stream_seed(stream_seed(s, a), b).
    """
    h = parent & _M
    for ix in indices:
        h = mix64((h + _GOLDEN + (ix & _M) * _STREAM) & _M)
    return h


def prf(seed: int, ctr: int) -> int:
    """64 random bits for draw number ``ctr`` of stream ``seed``."""
    z = (seed + ((ctr + 1) & _M) * _GOLDEN) & _M
    z = ((z ^ (z >> 30)) * _MIX1) & _M
    z = ((z ^ (z >> 27)) * _MIX2) & _M
    return z ^ (z >> 31)


def u01(seed: int, ctr: int) -> float:
    """Uniform double in [0, 1) for draw ``ctr`` of stream ``seed``."""
    return (prf(seed, ctr) >> 11) * _TO_UNIT


def prf_block(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized prf for counters start .. start+count-1 (uint64 array)."""
    ctr = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + (ctr + np.uint64(1)) * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return z


def u01_block(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized u01 for counters start .. start+count-1 (float64 array)."""
    return (prf_block(seed, start, count) >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def stream_seed_block(parent: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized one-level stream_seed over an integer index array."""
    ix = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = np.uint64(parent) + np.uint64(_GOLDEN) + ix * np.uint64(_STREAM)
        h = (h ^ (h >> np.uint64(30))) * np.uint64(_MIX1)
        h = (h ^ (h >> np.uint64(27))) * np.uint64(_MIX2)
        h = h ^ (h >> np.uint64(31))
    return h


class Stream:
    """Sequential facade over the counter-based PRF.

    ``u01()`` returns draw 0, 1, 2, ... of this stream; ``spawn`` derives a
    child stream.  ``seek`` repositions the counter (draws are addressable).
    """

    __slots__ = ("seed", "ctr")

    def __init__(self, seed: int):
        self.seed = seed & _M
        self.ctr = 0

    def u01(self) -> float:
        value = u01(self.seed, self.ctr)
        self.ctr += 1
        return value

    def u01_block(self, count: int) -> np.ndarray:
        block = u01_block(self.seed, self.ctr, count)
        self.ctr += count
        return block

    def spawn(self, *indices: int) -> "Stream":
        return Stream(stream_seed(self.seed, *indices))

    def seek(self, ctr: int) -> None:
        self.ctr = ctr


# Stream-purpose tags for one simulation trial.  A trial with root seed T uses:
#   placement  stream_seed(T, TAG_PLACE)   ctr 0 = source angle,
#                                          ctr 1+2j / 2+2j = relay j x / y
#   LRC node i stream_seed(T, TAG_LRC, i)  i = 0 source, i = j+1 for relay j
#                                          ctr 0..63 rejection attempts,
#                                          ctr 64 exhaustive-fallback pick
#   routing    stream_seed(T, TAG_ROUTE)   ctr = hop ordinal (one draw per hop)
# Cells and trials hang off the master seed with the same mechanism.
TAG_PLACE = 1
TAG_LRC = 2
TAG_ROUTE = 3
TAG_TRIAL = 4
TAG_CELL = 5
TAG_SEEDS = 6
