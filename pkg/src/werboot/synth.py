"""Block-correlated binomial error counts through a Gaussian copula.

For every block of ``d`` consecutive utterances and each system separately:

1. draw ``v ~ N(0, Sigma_d)`` with unit variances and constant correlation
   ``rho``, using the one-factor form ``v_s = sqrt(rho) w_0 + sqrt(1-rho) w_s``;
2. map to correlated uniforms ``u_s = Phi(v_s)``;
3. invert the binomial CDF, ``e_s = Q(u_s; m, p)``.

Each error count is exactly ``Binom(m, p)`` marginally.  The correlation of
the counts is *not* ``rho``; it is whatever the copula induces.

Standard normals come from counter-stream uniforms through Wichura's AS241
(PPND16) inverse normal, ``Phi`` is ``erfc(-x / sqrt 2) / 2``.  Block ``k`` of
system ``s`` (0 for A, 1 for B) reads the stream ``stream_key(seed, k, s)``:
word 0 feeds the common factor ``w_0`` and words ``1..d`` the idiosyncratic
terms.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numba
import numpy as np

from werboot import rng
from werboot.data import EvalDataset, dataset_from_arrays
from werboot.errors import ConfigError

__all__ = [
    "SynthConfig",
    "binomial_cdf_table",
    "binomial_quantile",
    "gaussian_cdf",
    "generate_counts",
    "generate_dataset",
    "normal_quantile",
    "SyntheticCounts",
    "diff_sums",
    "generate_view",
    "sample_equicorrelated_gaussians",
]


@dataclass(frozen=True)
class SynthConfig:
    n: int = 3000
    m: int = 100
    wer_a: float = 0.10
    wer_b: float = 0.095
    d: int = 30
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.d < 1:
            raise ConfigError("n, m and d must be positive")
        if self.n % self.d:
            raise ConfigError(f"n={self.n} is not divisible by block size d={self.d}")
        for name in ("wer_a", "wer_b"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if not 0 <= self.rho < 1:
            raise ConfigError(f"rho must lie in [0, 1), got {self.rho}")
        if not 0 <= self.seed <= rng.MASK64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def num_blocks(self) -> int:
        return self.n // self.d

    @property
    def true_abs_diff(self) -> float:
        return self.wer_b - self.wer_a

    def with_(self, **changes) -> "SynthConfig":
        return replace(self, **changes)


# -- scalar kernels --------------------------------------------------------

_SQRT1_2 = 0.7071067811865476


@numba.njit(inline="always")
def _phi(x):
    return 0.5 * math.erfc(-x * _SQRT1_2)


@numba.njit
def _ndtri(p):
    # Wichura (1988), Algorithm AS241 PPND16; relative accuracy about 1e-16.
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


@numba.njit(inline="always")
def _search(cdf, u):
    # smallest e with cdf[e] >= u; cdf[-1] == 1
    lo = 0
    hi = cdf.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] >= u:
            hi = mid
        else:
            lo = mid + 1
    return lo


@numba.njit(nogil=True, cache=True)
def _map_array(x, which):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _phi(x[i]) if which == 0 else _ndtri(x[i])
    return out


def gaussian_cdf(x):
    """Standard normal CDF, elementwise."""
    a = np.asarray(x, dtype=np.float64)
    out = _map_array(a.ravel(), 0).reshape(a.shape)
    return float(out) if out.ndim == 0 else out


def normal_quantile(p):
    """Standard normal quantile for ``p`` in (0, 1), elementwise."""
    a = np.asarray(p, dtype=np.float64)
    if ((a <= 0) | (a >= 1)).any():
        raise ValueError("normal_quantile needs 0 < p < 1")
    out = _map_array(a.ravel(), 1).reshape(a.shape)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=64)
def _cdf_table(m: int, p: float) -> np.ndarray:
    if p <= 0.0:
        cdf = np.ones(m + 1)
    elif p >= 1.0:
        cdf = np.zeros(m + 1)
        cdf[m] = 1.0
    else:
        # pmf ratios from the mode outward in extended precision, then normalise;
        # starting at the mode keeps the tails from underflowing the whole table
        w = np.zeros(m + 1, dtype=np.longdouble)
        mode = min(int(math.floor((m + 1) * p)), m)
        odds = np.longdouble(p) / (np.longdouble(1) - np.longdouble(p))
        w[mode] = 1
        for e in range(mode, m):
            w[e + 1] = w[e] * (m - e) / (e + 1) * odds
        for e in range(mode, 0, -1):
            w[e - 1] = w[e] * e / (m - e + 1) / odds
        cdf = (np.cumsum(w) / w.sum()).astype(np.float64)
        cdf[m] = 1.0
    cdf.setflags(write=False)
    return cdf


def binomial_cdf_table(m: int, p: float) -> np.ndarray:
    """``[P(X <= 0), ..., P(X <= m)]`` for ``X ~ Binom(m, p)``."""
    if m < 0 or not 0 <= p <= 1:
        raise ValueError("need m >= 0 and 0 <= p <= 1")
    return _cdf_table(int(m), float(p))


def binomial_quantile(u, m: int, p: float):
    """Smallest ``e`` in ``0..m`` with ``BinomCDF(e; m, p) >= u``."""
    cdf = binomial_cdf_table(m, p)
    a = np.asarray(u, dtype=np.float64)
    if ((a < 0) | (a > 1)).any():
        raise ValueError("u must lie in [0, 1]")
    e = np.minimum(np.searchsorted(cdf, a, side="left"), m)
    return int(e) if e.ndim == 0 else e.astype(np.int64)


# -- generation ------------------------------------------------------------

@numba.njit(inline="always")
def _gaussian_block(key, d, sr, s1r, out):
    w0 = _ndtri(rng.nb_unit(rng.nb_word(key, 0)))
    for s in range(d):
        out[s] = sr * w0 + s1r * _ndtri(rng.nb_unit(rng.nb_word(key, s + 1)))


@numba.njit(nogil=True, cache=True)
def _fill_counts(keys, d, sr, s1r, cdf, out):
    v = np.empty(d)
    for k in range(keys.shape[0]):
        _gaussian_block(keys[k], d, sr, s1r, v)
        base = k * d
        for s in range(d):
            out[base + s] = _search(cdf, _phi(v[s]))


@numba.njit(nogil=True, cache=True)
def _diff_sums(keys_a, keys_b, d, sr, s1r, cdf_a, cdf_b):
    # keys_*: (datasets, blocks); returns sum(e_b - e_a) per dataset
    v = np.empty(d)
    out = np.zeros(keys_a.shape[0], dtype=np.int64)
    for r in range(keys_a.shape[0]):
        total = 0
        for k in range(keys_a.shape[1]):
            _gaussian_block(keys_a[r, k], d, sr, s1r, v)
            for s in range(d):
                total -= _search(cdf_a, _phi(v[s]))
            _gaussian_block(keys_b[r, k], d, sr, s1r, v)
            for s in range(d):
                total += _search(cdf_b, _phi(v[s]))
        out[r] = total
    return out


def _block_keys(seeds, num_blocks: int):
    roots = rng.root_keys(seeds)
    kk = rng.child_keys(roots[..., None], np.arange(num_blocks))
    return rng.child_keys(kk, 0), rng.child_keys(kk, 1)


def sample_equicorrelated_gaussians(d: int, rho: float, key: int) -> np.ndarray:
    """One draw of ``N(0, Sigma_d)`` from the stream with the given key."""
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    out = np.empty(d)
    _gaussian_kernel(np.uint64(key), d, math.sqrt(rho), math.sqrt(1 - rho), out)
    return out


@numba.njit(cache=True)
def _gaussian_kernel(key, d, sr, s1r, out):
    _gaussian_block(key, d, sr, s1r, out)


def generate_counts(cfg: SynthConfig) -> tuple:
    """Error-count arrays ``(e_a, e_b)`` of length ``cfg.n``."""
    keys_a, keys_b = _block_keys(cfg.seed, cfg.num_blocks)
    sr, s1r = math.sqrt(cfg.rho), math.sqrt(1 - cfg.rho)
    out = []
    for keys, p in ((keys_a, cfg.wer_a), (keys_b, cfg.wer_b)):
        e = np.empty(cfg.n, dtype=np.int64)
        _fill_counts(keys, cfg.d, sr, s1r, binomial_cdf_table(cfg.m, p), e)
        out.append(e)
    return tuple(out)


def generate_dataset(cfg: SynthConfig) -> EvalDataset:
    e_a, e_b = generate_counts(cfg)
    width = len(str(cfg.n - 1))
    bwidth = len(str(cfg.num_blocks - 1))
    utt_ids = [f"u{i:0{width}d}" for i in range(cfg.n)]
    block_ids = [f"b{i // cfg.d:0{bwidth}d}" for i in range(cfg.n)]
    return dataset_from_arrays(utt_ids, block_ids, np.full(cfg.n, cfg.m), e_a, e_b, source="synthetic")


def diff_sums(cfg: SynthConfig, seeds) -> np.ndarray:
    """``sum(e_b - e_a)`` of the dataset ``cfg.with_(seed=s)`` for each seed, without materialising it."""
    keys_a, keys_b = _block_keys(np.asarray(seeds, dtype=np.uint64), cfg.num_blocks)
    return _diff_sums(
        keys_a, keys_b, cfg.d, math.sqrt(cfg.rho), math.sqrt(1 - cfg.rho),
        binomial_cdf_table(cfg.m, cfg.wer_a), binomial_cdf_table(cfg.m, cfg.wer_b),
    )


@dataclass(frozen=True, eq=False)
class SyntheticCounts:
    """Lightweight stand-in for :class:`EvalDataset` with equal, consecutive blocks.

    Exposes the columns and ``block_sums`` the bootstrap engines need, without
    building string identifiers; used on the hot path of simulation studies.
    """

    m: np.ndarray
    e_a: np.ndarray
    e_b: np.ndarray
    block_size: int

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def num_blocks(self) -> int:
        return self.n // self.block_size

    def block_sums(self, values) -> np.ndarray:
        return np.asarray(values, dtype=np.int64).reshape(self.num_blocks, self.block_size).sum(axis=1)


def generate_view(cfg: SynthConfig) -> SyntheticCounts:
    e_a, e_b = generate_counts(cfg)
    return SyntheticCounts(np.full(cfg.n, cfg.m, dtype=np.int64), e_a, e_b, cfg.d)
