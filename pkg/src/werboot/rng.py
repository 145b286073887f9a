"""Counter-based random streams built on the splitmix64 output function.

Every random quantity in werboot is addressed by a 64-bit *stream key* and a
word counter.  Word ``j`` (``j = 0, 1, ...``) of the stream with key ``k`` is::

    mix64(k + (j + 1) * GOLDEN)  (mod 2**64)

which is exactly the output sequence of a splitmix64 generator whose state is
initialised to ``k``.  Each stream therefore has period 2**64 and the output
is bit-exact on every platform.  Because words are addressed by counter,
replicates, blocks and simulations can be computed in any order (or in
parallel) without changing results.

Keys are derived hierarchically from a master seed::

    stream_key(seed)            = mix64(seed + GOLDEN)
    stream_key(seed, c0, c1...) = child(child(stream_key(seed), c0), c1) ...
    child(k, c)                 = mix64(k ^ mix64((c + 1) * GOLDEN))

Three equivalent implementations live here: plain Python integers (scalar
keys), vectorised NumPy (arrays of keys/words) and numba ``njit`` helpers
used inside compiled kernels.  The test-suite checks they agree bit for bit.
"""

import numba
import numpy as np

GENERATOR_NAME = "splitmix64-counter"

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_MUL1 = np.uint64(_MUL1)
_U_MUL2 = np.uint64(_MUL2)
_U1 = np.uint64(1)
_U11 = np.uint64(11)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U32 = np.uint64(32)
_TWO_M53 = 2.0**-53


def mix64(z: int) -> int:
    """splitmix64 finaliser on a Python integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def child_key(key: int, index: int) -> int:
    return mix64(key ^ mix64((index + 1) * GOLDEN))


def stream_key(seed: int, *path: int) -> int:
    """Derive the key of the stream addressed by ``path`` under ``seed``."""
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    key = mix64(seed + GOLDEN)
    for c in path:
        key = child_key(key, int(c))
    return key


def word(key: int, j: int) -> int:
    """Word ``j`` of stream ``key``."""
    return mix64(key + (j + 1) * GOLDEN)


# -- NumPy ---------------------------------------------------------------

# uint64 wrap-around is the intended arithmetic; silence NumPy's scalar overflow warnings
def _wrap():
    return np.errstate(over="ignore")


def mix64_np(z: np.ndarray) -> np.ndarray:
    with _wrap():
        z = np.asarray(z, dtype=np.uint64)
        z = (z ^ (z >> _U30)) * _U_MUL1
        z = (z ^ (z >> _U27)) * _U_MUL2
        return z ^ (z >> _U31)


def root_keys(seeds) -> np.ndarray:
    """Vectorised ``stream_key(seed)`` with an empty path."""
    with _wrap():
        return mix64_np(np.asarray(seeds, dtype=np.uint64) + _U_GOLDEN)


def child_keys(key, indices) -> np.ndarray:
    """Vectorised :func:`child_key` over an array of keys and/or indices."""
    idx = np.asarray(indices, dtype=np.uint64)
    with _wrap():
        return mix64_np(np.asarray(key, dtype=np.uint64) ^ mix64_np((idx + _U1) * _U_GOLDEN))


def words(keys, count: int, start: int = 0) -> np.ndarray:
    """Words ``start .. start+count-1`` of each stream; shape ``keys.shape + (count,)``."""
    keys = np.asarray(keys, dtype=np.uint64)
    with _wrap():
        ctr = (np.arange(start + 1, start + count + 1, dtype=np.uint64)) * _U_GOLDEN
        return mix64_np(keys[..., None] + ctr)


def to_unit(w: np.ndarray) -> np.ndarray:
    """Map words to doubles in the open interval (0, 1) using the top 53 bits."""
    return ((np.asarray(w, dtype=np.uint64) >> _U11).astype(np.float64) + 0.5) * _TWO_M53


def to_index(w: np.ndarray, n: int) -> np.ndarray:
    """Map words to integers in ``[0, n)`` via ``((w >> 32) * n) >> 32``; needs n < 2**32."""
    if not 0 < n < 2**32:
        raise ValueError("index range must be in (0, 2**32)")
    return (((np.asarray(w, dtype=np.uint64) >> _U32) * np.uint64(n)) >> _U32).astype(np.intp)


# -- numba ---------------------------------------------------------------

@numba.njit(inline="always")
def nb_mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(inline="always")
def nb_word(key, j):
    return nb_mix64(key + np.uint64(j + 1) * np.uint64(0x9E3779B97F4A7C15))


@numba.njit(inline="always")
def nb_unit(w):
    return (np.float64(w >> np.uint64(11)) + 0.5) * 1.1102230246251565e-16


@numba.njit(inline="always")
def nb_index(w, n):
    return np.intp(((w >> np.uint64(32)) * np.uint64(n)) >> np.uint64(32))
