"""Counter-based deterministic random streams.

Every stochastic quantity in this package is a pure function of
(master_seed, stream path, draw index).  A stream is identified by a 64-bit
key; draw ``i`` of a stream is obtained by hashing ``key + i*GOLDEN`` with the
splitmix64 finalizer.  This gives:

* reproducibility independent of thread scheduling (no shared generator state),
* identical draws from the vectorized numpy path and the scalar numba kernels,
* cheap random access (trajectories can be regenerated from any offset).

Unit normals use the Box-Muller transform (cosine branch); each normal
consumes two fresh uniforms, so normal ``i`` of a stream maps to hash counters
``2i`` and ``2i+1``.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.1102230246251565e-16  # 2**-53
_TWO_PI = 6.283185307179586


def mix64(z):
    """splitmix64 output function: hash ``z`` (uint64 scalar or array)."""
    z = np.uint64(z) if np.isscalar(z) or isinstance(z, int) else np.asarray(z, np.uint64)
    with np.errstate(over="ignore"):
        z = z + GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def derive_key(master_seed: int, *ids: int) -> np.uint64:
    """Derive a stream key from a master seed and a path of integer ids.

    Distinct paths give statistically independent streams.  The chaining is a
    fold of the splitmix64 finalizer, so keys are stable across platforms.
    """
    with np.errstate(over="ignore"):
        k = mix64(np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF))
        for i in ids:
            k = mix64(k ^ (np.uint64(int(i) + 1) * GOLDEN))
    return np.uint64(k)


def raw_uint64(key: np.uint64, start: int, count: int) -> np.ndarray:
    """Hash outputs for counters ``start .. start+count-1`` of stream ``key``."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(key) + idx * GOLDEN)


def uniforms(key: np.uint64, start: int, count: int) -> np.ndarray:
    """Uniforms on (0, 1]: ((bits >> 11) + 1) * 2**-53."""
    bits = raw_uint64(key, start, count)
    return ((bits >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV_2_53


def normals(key: np.uint64, start: int, count: int) -> np.ndarray:
    """Unit normals ``start .. start+count-1`` of stream ``key``.

    Normal ``i`` is Box-Muller(u(2i), u(2i+1)) with the cosine branch only;
    u(2i) maps to (0,1] so the log never sees zero.  The scalar numba kernels
    implement the same map, draw for draw.
    """
    bits = raw_uint64(key, 2 * start, 2 * count)
    u1 = ((bits[0::2] >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV_2_53
    u2 = (bits[1::2] >> np.uint64(11)).astype(np.float64) * _INV_2_53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


class RandomStream:
    """A deterministic stream with a draw counter.

    Successive calls consume consecutive counter indices, so a stream behaves
    like a stateful generator while remaining a pure function of
    (key, construction-time counter).
    """

    def __init__(self, key: np.uint64, counter: int = 0):
        self.key = np.uint64(key)
        self.counter = int(counter)

    @classmethod
    def from_seed(cls, master_seed: int, *ids: int) -> "RandomStream":
        return cls(derive_key(master_seed, *ids))

    def normals(self, count: int) -> np.ndarray:
        out = normals(self.key, self.counter, count)
        self.counter += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        out = uniforms(self.key, self.counter, count)
        self.counter += count
        return out

    def split(self, *ids: int) -> "RandomStream":
        """Child stream; independent of this stream's counter position."""
        with np.errstate(over="ignore"):
            k = self.key
            for i in ids:
                k = mix64(k ^ (np.uint64(int(i) + 1) * GOLDEN))
        return RandomStream(k)
