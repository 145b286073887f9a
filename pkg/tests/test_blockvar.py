import math
import warnings

import numpy as np
import pytest

from werboot.blockvar import (
    BlockedSeries,
    blockwise_variance,
    consistency_curve,
    iid_variance,
    monte_carlo_target,
    parse_block_rule,
)
from werboot.errors import ConfigError, InsufficientBlocks
from werboot.synth import SynthConfig, generate_counts


def sigma2(values, d):
    return blockwise_variance(BlockedSeries.from_values(values, d))


def test_constant_series_is_zero():
    assert sigma2(np.full(40, 0.37), 4) == 0.0


def test_two_block_example():
    assert sigma2([0.1, 0.1, 0.2, 0.2], 2) == pytest.approx(0.005)
    assert sigma2([0.0, 0.2, 0.3, 0.1], 2) == pytest.approx(0.005)


def test_naive_formula():
    g = np.random.default_rng(0)
    z = g.normal(size=120)
    d, K = 8, 15
    means = [z[k * d:(k + 1) * d].mean() for k in range(K)]
    overall = sum(means) / K
    assert sigma2(z, d) == pytest.approx(d / K * sum((x - overall) ** 2 for x in means), rel=1e-12)


def test_zero_only_when_block_means_equal():
    z = np.array([1.0, 3.0, 2.0, 2.0, 0.0, 4.0])
    assert sigma2(z, 2) == 0.0
    assert sigma2(z + [0, 0, 0, 0, 0, 1], 2) > 0


def test_invariances():
    g = np.random.default_rng(1)
    z = g.normal(size=(12, 5))
    base = sigma2(z.ravel(), 5)
    assert sigma2(z[g.permutation(12)].ravel(), 5) == pytest.approx(base, rel=1e-12)
    shuffled = np.array([row[g.permutation(5)] for row in z])
    assert sigma2(shuffled.ravel(), 5) == pytest.approx(base, rel=1e-12)
    assert sigma2(z.ravel() + 7.5, 5) == pytest.approx(base, rel=1e-9)
    assert sigma2(-3 * z.ravel(), 5) == pytest.approx(9 * base, rel=1e-12)
    assert base >= 0


def test_trailing_values_dropped_with_warning():
    with pytest.warns(UserWarning, match="dropping 3"):
        s = BlockedSeries.from_values(np.arange(23.0), 5)
    assert (s.num_blocks, s.dropped, s.z.size) == (4, 3, 20)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        BlockedSeries.from_values(np.arange(20.0), 5)


def test_too_few_blocks():
    with pytest.raises(InsufficientBlocks):
        BlockedSeries.from_values(np.arange(5.0), 5)
    with pytest.raises(ConfigError):
        BlockedSeries.from_values(np.arange(5.0), 0)


def test_from_counts():
    s = BlockedSeries.from_counts(np.full(4, 10), [1, 2, 3, 4], [2, 2, 2, 2], 2)
    assert s.z.tolist() == [0.1, 0.0, -0.1, -0.2]


def test_block_rules():
    assert parse_block_rule("sqrt")(27000) == 164
    assert parse_block_rule("sqrt-aligned:30")(27000) == 150
    assert parse_block_rule("sqrt-aligned:30")(2700) == 30
    assert parse_block_rule("sqrt-aligned:30")(100) == 30
    assert parse_block_rule("fixed:7")(10 ** 6) == 7
    assert parse_block_rule(lambda n: n // 10)(500) == 50
    for bad in ("cube", "fixed", "sqrt-aligned:0", "sqrt:3"):
        with pytest.raises(ConfigError):
            parse_block_rule(bad)


def test_curve_rejects_bad_rules():
    t = SynthConfig(d=30, rho=0.2)
    with pytest.raises(ConfigError):
        consistency_curve(t, [300], "fixed:300", trials=5, seed=0, oracle_datasets=10)
    with pytest.raises(ConfigError):
        consistency_curve(t, [300], "fixed:0", trials=5, seed=0, oracle_datasets=10)


def test_oracle_matches_direct_variance():
    t = SynthConfig(d=30, rho=0.2)
    a = monte_carlo_target(t, 600, 400, seed=3)
    assert a == monte_carlo_target(t, 600, 400, seed=3)
    with pytest.raises(ConfigError):
        monte_carlo_target(t, 600, 1, seed=3)


def test_iid_curve_matches_closed_form():
    t = SynthConfig(d=1, rho=0.0)
    target = iid_variance(t)
    assert target == pytest.approx((0.09 + 0.095 * 0.905) / 100)
    (row,) = consistency_curve(t, [3600], "sqrt", trials=300, seed=1, oracle_datasets=3000)
    assert (row.d_n, row.K_n) == (60, 60)
    assert abs(row.mean_sigma2_hat - target) < 3 * row.mc_stderr
    assert row.oracle_sigma2 == pytest.approx(target, rel=4 * math.sqrt(2 / 3000))


def test_misaligned_blocks_underestimate():
    t = SynthConfig(d=30, rho=0.2)
    (row,) = consistency_curve(t, [3000], "fixed:5", trials=60, seed=2, oracle_datasets=1000)
    assert row.mean_sigma2_hat < 0.5 * row.oracle_sigma2
    (aligned,) = consistency_curve(t, [3000], "fixed:30", trials=60, seed=2, oracle_datasets=1000)
    # K = 100 blocks leaves a 1% downward bias, well inside this band
    assert aligned.mean_sigma2_hat == pytest.approx(aligned.oracle_sigma2, rel=0.15)


def test_estimator_on_generated_counts_is_deterministic():
    cfg = SynthConfig(n=600, d=30, rho=0.2, seed=4)
    e_a, e_b = generate_counts(cfg)
    a = blockwise_variance(BlockedSeries.from_counts(100, e_a, e_b, 30))
    assert a == blockwise_variance(BlockedSeries.from_counts(100, e_a, e_b, 30)) > 0
