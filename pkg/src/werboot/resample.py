"""Ordinary and blockwise bootstrap confidence intervals for WER statistics.

Both engines draw, for replicate ``b``, ``N`` indices uniformly from
``[0, N)`` out of the counter stream ``stream_key(seed, b)``: ``N`` is the
number of utterances for the ordinary bootstrap and the number of blocks for
the blockwise bootstrap.  The two systems are always evaluated on the same
resampled indices.  Sums are accumulated in integers, so a replicate depends
only on (dataset, seed, b) and is bit-identical regardless of chunking or
thread count; with singleton blocks the two modes coincide exactly.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional

import numba
import numpy as np

from werboot import rng
from werboot.errors import (
    ConfigError,
    EmptySamples,
    InsufficientSamples,
    ZeroBaselineWer,
    ZeroReferenceLength,
)

__all__ = [
    "BootstrapConfig",
    "CiReport",
    "Mode",
    "StatisticKind",
    "bootstrap_replicates",
    "evaluate_statistic",
    "gaussian_interval",
    "percentile_interval",
    "run_ci",
]


class StatisticKind(str, enum.Enum):
    WER_A = "wer_a"
    WER_B = "wer_b"
    ABS_DIFF = "abs_diff"
    REL_DIFF = "rel_diff"


class Mode(str, enum.Enum):
    ORDINARY = "ordinary"
    BLOCKWISE = "blockwise"


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    seed: int = 0
    mode: Mode = Mode.BLOCKWISE
    statistic: StatisticKind = StatisticKind.ABS_DIFF
    alpha: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "statistic", StatisticKind(self.statistic))
        if int(self.replicates) != self.replicates or self.replicates < 2:
            raise ConfigError(f"replicates must be an integer >= 2, got {self.replicates}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie strictly between 0 and 1, got {self.alpha}")
        if not 0 <= self.seed <= rng.MASK64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class CiReport:
    statistic: StatisticKind
    mode: Mode
    point_estimate: float
    replicate_mean: float
    std_error: float
    percentile_ci: tuple
    gaussian_ci: tuple
    B: int
    seed: int
    alpha: float
    dataset_summary: Optional[dict] = None
    replicates: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic.value,
            "mode": self.mode.value,
            "point_estimate": self.point_estimate,
            "replicate_mean": self.replicate_mean,
            "std_error": self.std_error,
            "percentile_ci": list(self.percentile_ci),
            "gaussian_ci": list(self.gaussian_ci),
            "B": self.B,
            "seed": self.seed,
            "alpha": self.alpha,
            "rng": rng.GENERATOR_NAME,
            "dataset_summary": self.dataset_summary,
        }


def _columns(m, e_a, e_b, kind: StatisticKind):
    """Integer numerator and denominator columns whose summed ratio is ``kind``."""
    m = np.asarray(m, dtype=np.int64)
    e_a = np.asarray(e_a, dtype=np.int64)
    e_b = np.asarray(e_b, dtype=np.int64)
    if kind is StatisticKind.WER_A:
        return e_a, m
    if kind is StatisticKind.WER_B:
        return e_b, m
    if kind is StatisticKind.ABS_DIFF:
        return e_b - e_a, m
    return e_b - e_a, e_a


def _ratio(num, den, kind: StatisticKind):
    den = np.asarray(den)
    if (den == 0).any():
        if kind is StatisticKind.REL_DIFF:
            raise ZeroBaselineWer("relative WER difference is undefined: system A has zero errors")
        raise ZeroReferenceLength("total reference length is zero")
    return np.asarray(num, dtype=np.float64) / den.astype(np.float64)


def evaluate_statistic(ds, kind) -> float:
    """Evaluate ``kind`` on anything exposing integer ``m``, ``e_a``, ``e_b`` columns.

    ``rel_diff`` is computed as ``sum(e_b - e_a) / sum(e_a)``, i.e. the absolute
    difference divided by system A's WER.
    """
    kind = StatisticKind(kind)
    num, den = _columns(ds.m, ds.e_a, ds.e_b, kind)
    return float(_ratio(num.sum(), den.sum(), kind))


@numba.njit(nogil=True, cache=True)
def _resample_sums(num, den, keys, out_num, out_den):
    n_units = num.shape[0]
    for b in range(keys.shape[0]):
        key = keys[b]
        s_num = 0
        s_den = 0
        for j in range(n_units):
            k = rng.nb_index(rng.nb_word(key, j), n_units)
            s_num += num[k]
            s_den += den[k]
        out_num[b] = s_num
        out_den[b] = s_den


def replicate_keys(seed: int, count: int) -> np.ndarray:
    return rng.child_keys(np.uint64(rng.stream_key(seed)), np.arange(count))


def resampled_sums(num, den, seed: int, replicates: int, jobs: int = 1):
    """Integer sums of ``num`` and ``den`` over ``replicates`` resamples of the units."""
    num = np.ascontiguousarray(num, dtype=np.int64)
    den = np.ascontiguousarray(den, dtype=np.int64)
    keys = replicate_keys(seed, replicates)
    out_num = np.empty(replicates, dtype=np.int64)
    out_den = np.empty(replicates, dtype=np.int64)
    jobs = max(1, min(int(jobs), replicates))
    if jobs == 1:
        _resample_sums(num, den, keys, out_num, out_den)
    else:
        bounds = np.linspace(0, replicates, jobs + 1).astype(int)
        with ThreadPoolExecutor(jobs) as pool:
            futures = [
                pool.submit(_resample_sums, num, den, keys[lo:hi], out_num[lo:hi], out_den[lo:hi])
                for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
            for f in futures:
                f.result()
    return out_num, out_den


def bootstrap_replicates(ds, cfg: BootstrapConfig, jobs: int = 1) -> np.ndarray:
    """Replicate statistics ``[T^(1), ..., T^(B)]`` for ``cfg.mode``.

    Ordinary mode resamples utterances; blockwise mode resamples whole blocks
    (with replacement), so the replicate's total word count varies.
    """
    num, den = _columns(ds.m, ds.e_a, ds.e_b, cfg.statistic)
    if cfg.mode is Mode.BLOCKWISE:
        num, den = ds.block_sums(num), ds.block_sums(den)
    s_num, s_den = resampled_sums(num, den, cfg.seed, cfg.replicates, jobs)
    return _ratio(s_num, s_den, cfg.statistic)


def percentile_interval(samples, alpha: float = 0.05) -> tuple:
    """Nearest-rank percentile interval.

    The ``q`` quantile of ``B`` sorted samples is the one at 1-based rank
    ``ceil(q * B)`` clamped to ``[1, B]``; no interpolation, so both endpoints
    are members of ``samples``.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    B = x.size
    if B == 0:
        raise EmptySamples("no samples")

    def at(q):
        # guard against q * B landing a hair above an integer
        rank = math.ceil(q * B - 1e-9)
        return float(x[min(max(rank, 1), B) - 1])

    return at(alpha / 2), at(1 - alpha / 2)


def gaussian_interval(samples, alpha: float = 0.05) -> tuple:
    """Returns ``(mean, se, lo, hi)`` with ``se`` the (B-1)-denominator std."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {x.size}")
    if (x == x[0]).all():
        mean, se = float(x[0]), 0.0
    else:
        mean = float(x.mean())
        se = float(x.std(ddof=1))
    z = NormalDist().inv_cdf(1 - alpha / 2)
    return mean, se, mean - z * se, mean + z * se


def run_ci(ds, cfg: BootstrapConfig, jobs: int = 1, summary: Optional[dict] = None) -> CiReport:
    point = evaluate_statistic(ds, cfg.statistic)
    reps = bootstrap_replicates(ds, cfg, jobs)
    mean, se, g_lo, g_hi = gaussian_interval(reps, cfg.alpha)
    return CiReport(
        statistic=cfg.statistic,
        mode=cfg.mode,
        point_estimate=point,
        replicate_mean=mean,
        std_error=se,
        percentile_ci=percentile_interval(reps, cfg.alpha),
        gaussian_ci=(g_lo, g_hi),
        B=cfg.replicates,
        seed=cfg.seed,
        alpha=cfg.alpha,
        dataset_summary=summary,
        replicates=reps,
    )
