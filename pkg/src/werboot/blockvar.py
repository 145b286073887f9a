"""Blockwise variance estimator for the mean paired difference, and its consistency harness.

With equal utterance lengths, ``Z_i = (e_i^B - e_i^A) / m`` and the absolute
WER difference is the mean of the ``Z_i``.  Cutting the series into ``K``
consecutive blocks of ``d`` values with block means ``M_k`` and overall mean
``M``, the estimator of the asymptotic variance ``lim n Var(mean Z)`` is::

    sigma2_hat = d / K * sum_k (M_k - M) ** 2
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from werboot import rng
from werboot.errors import ConfigError, InsufficientBlocks
from werboot.synth import SynthConfig, diff_sums, generate_counts

__all__ = [
    "BlockedSeries",
    "CurveRow",
    "blockwise_variance",
    "consistency_curve",
    "iid_variance",
    "monte_carlo_target",
    "parse_block_rule",
]


@dataclass(frozen=True)
class BlockedSeries:
    z: np.ndarray
    block_size: int
    num_blocks: int
    dropped: int = 0

    @classmethod
    def from_values(cls, values, block_size: int) -> "BlockedSeries":
        """Cut ``values`` into consecutive blocks, dropping an incomplete tail with a warning."""
        z = np.asarray(values, dtype=np.float64)
        if block_size < 1:
            raise ConfigError("block size must be >= 1")
        k = z.size // block_size
        dropped = z.size - k * block_size
        if dropped:
            warnings.warn(
                f"dropping {dropped} trailing values that do not fill a block of {block_size}",
                stacklevel=2,
            )
        if k < 2:
            raise InsufficientBlocks(f"need at least 2 blocks, got {k}")
        return cls(z[: k * block_size], block_size, k, dropped)

    @classmethod
    def from_counts(cls, m, e_a, e_b, block_size: int) -> "BlockedSeries":
        m = np.asarray(m, dtype=np.float64)
        z = (np.asarray(e_b, dtype=np.float64) - np.asarray(e_a, dtype=np.float64)) / m
        return cls.from_values(z, block_size)


def blockwise_variance(series: BlockedSeries) -> float:
    if series.num_blocks < 2:
        raise InsufficientBlocks(f"need at least 2 blocks, got {series.num_blocks}")
    means = series.z.reshape(series.num_blocks, series.block_size).mean(axis=1)
    dev = means - means.mean()
    return float(series.block_size / series.num_blocks * (dev @ dev))


BlockRule = Callable[[int], int]


def parse_block_rule(spec: Union[str, BlockRule]) -> BlockRule:
    """Turn a rule name into ``n -> d_n``.

    ``sqrt``            floor(sqrt(n))
    ``sqrt-aligned:A``  floor(sqrt(n)) rounded down to a multiple of A (at least A)
    ``fixed:D``         D regardless of n
    """
    if callable(spec):
        return spec
    name, _, arg = spec.partition(":")
    if name == "sqrt" and not arg:
        return lambda n: math.isqrt(n)
    if name == "sqrt-aligned" and arg:
        a = int(arg)
        if a < 1:
            raise ConfigError("alignment must be >= 1")
        return lambda n: max(a, math.isqrt(n) // a * a)
    if name == "fixed" and arg:
        d = int(arg)
        return lambda n: d
    raise ConfigError(f"unknown block rule {spec!r}")


@dataclass(frozen=True)
class CurveRow:
    n: int
    d_n: int
    K_n: int
    mean_sigma2_hat: float
    sd_sigma2_hat: float
    oracle_sigma2: float
    trials: int

    @property
    def mc_stderr(self) -> float:
        """Monte Carlo standard error of ``mean_sigma2_hat``."""
        return self.sd_sigma2_hat / math.sqrt(self.trials)


def monte_carlo_target(template: SynthConfig, n: int, datasets: int, seed: int) -> float:
    """``n * Var(mean Z)`` estimated from ``datasets`` fresh synthetic datasets of size ``n``."""
    if datasets < 2:
        raise ConfigError("the oracle needs at least 2 datasets")
    cfg = template.with_(n=n)
    seeds = rng.child_keys(np.uint64(rng.stream_key(seed, 1, n)), np.arange(datasets))
    means = np.empty(datasets)
    chunk = max(1, 2_000_000 // n)
    for lo in range(0, datasets, chunk):
        hi = min(datasets, lo + chunk)
        means[lo:hi] = diff_sums(cfg, seeds[lo:hi]) / (n * cfg.m)
    return float(n * means.var(ddof=1))


def consistency_curve(
    template: SynthConfig,
    n_grid: Sequence[int],
    d_rule,
    trials: int,
    seed: int,
    oracle_datasets: int = 20_000,
) -> list:
    """Mean and spread of the blockwise variance estimate along ``n_grid``.

    For each ``n`` the estimator is applied to ``trials`` synthetic datasets
    (generator settings from ``template``, estimator block size ``d_rule(n)``),
    and compared against :func:`monte_carlo_target`.  The generator's own block
    size is ``template.d``; each ``n`` must be a multiple of it.
    """
    rule = parse_block_rule(d_rule)
    if trials < 2:
        raise ConfigError("trials must be >= 2")
    rows = []
    for n in n_grid:
        d_n = int(rule(n))
        if d_n < 1 or d_n >= n:
            raise ConfigError(f"block rule gives d_n={d_n} for n={n}; need 1 <= d_n < n")
        cfg = template.with_(n=n)
        trial_seeds = rng.child_keys(np.uint64(rng.stream_key(seed, 0, n)), np.arange(trials))
        est = np.empty(trials)
        for t, s in enumerate(trial_seeds):
            e_a, e_b = generate_counts(cfg.with_(seed=int(s)))
            est[t] = blockwise_variance(BlockedSeries.from_counts(cfg.m, e_a, e_b, d_n))
        rows.append(CurveRow(
            n=n,
            d_n=d_n,
            K_n=n // d_n,
            mean_sigma2_hat=float(est.mean()),
            sd_sigma2_hat=float(est.std(ddof=1)),
            oracle_sigma2=monte_carlo_target(template, n, oracle_datasets, seed),
            trials=trials,
        ))
    return rows


def iid_variance(template: SynthConfig) -> float:
    """``Var(Z_i)`` for independent binomial counts: ``(pA(1-pA) + pB(1-pB)) / m``."""
    pa, pb = template.wer_a, template.wer_b
    return (pa * (1 - pa) + pb * (1 - pb)) / template.m
