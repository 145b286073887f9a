import math
import random
import statistics

import numpy as np
import pytest
from hypothesis import given, strategies as st

from werboot import rng
from werboot.data import dataset_from_arrays
from werboot.errors import ConfigError, EmptySamples, InsufficientSamples, ZeroBaselineWer
from werboot.resample import (
    BootstrapConfig,
    Mode,
    bootstrap_replicates,
    evaluate_statistic,
    gaussian_interval,
    percentile_interval,
    replicate_keys,
    run_ci,
)
from werboot.synth import SynthConfig, generate_dataset

from oracles import nearest_rank

STATS = ["wer_a", "wer_b", "abs_diff", "rel_diff"]


def make(m, e_a, e_b, blocks=None):
    n = len(m)
    return dataset_from_arrays([f"u{i}" for i in range(n)], blocks or [f"u{i}" for i in range(n)], m, e_a, e_b)


@pytest.fixture(scope="module")
def blocked():
    return generate_dataset(SynthConfig(n=600, d=6, rho=0.3, seed=11))


def test_point_estimates():
    ds = make([10, 10], [1, 2], [0, 2])
    assert evaluate_statistic(ds, "abs_diff") == pytest.approx(-0.05)
    assert evaluate_statistic(ds, "wer_a") == pytest.approx(0.15)
    assert evaluate_statistic(ds, "wer_b") == pytest.approx(0.10)
    assert evaluate_statistic(ds, "rel_diff") == pytest.approx(-1 / 3)
    assert evaluate_statistic(make([4, 6], [1, 3], [1, 3]), "abs_diff") == 0.0


def test_zero_baseline():
    ds = make([5, 5], [0, 0], [1, 0])
    with pytest.raises(ZeroBaselineWer):
        evaluate_statistic(ds, "rel_diff")
    with pytest.raises(ZeroBaselineWer):
        bootstrap_replicates(ds, BootstrapConfig(50, statistic="rel_diff"))


@pytest.mark.parametrize("kwargs", [{"replicates": 1}, {"alpha": 0}, {"alpha": 1}, {"seed": -1},
                                    {"mode": "moving"}, {"statistic": "cer"}])
def test_config_validation(kwargs):
    with pytest.raises((ConfigError, ValueError)):
        BootstrapConfig(**kwargs)


@pytest.mark.parametrize("mode", ["ordinary", "blockwise"])
def test_degenerate_equal_errors(mode):
    ds = make([3, 4, 5, 6], [1, 0, 2, 1], [1, 0, 2, 1], ["x", "x", "y", "y"])
    reps = bootstrap_replicates(ds, BootstrapConfig(200, mode=mode))
    assert (reps == 0).all()
    rep = run_ci(ds, BootstrapConfig(200, mode=mode))
    assert rep.percentile_ci == (0.0, 0.0) and rep.gaussian_ci == (0.0, 0.0)
    assert rep.std_error == 0.0


def test_constant_rate_gives_constant_replicates():
    ds = make([10] * 8, [1] * 8, [3] * 8, list("aabbccdd"))
    for mode in Mode:
        reps = bootstrap_replicates(ds, BootstrapConfig(100, mode=mode))
        assert np.all(reps == reps[0]) and reps[0] == pytest.approx(0.2)


def test_ordinary_matches_numpy_gather(blocked):
    cfg = BootstrapConfig(64, seed=5, mode="ordinary")
    reps = bootstrap_replicates(blocked, cfg)
    diff = blocked.e_b - blocked.e_a
    for b, key in enumerate(replicate_keys(5, 64)):
        idx = rng.to_index(rng.words(key, blocked.n), blocked.n)
        assert reps[b] == diff[idx].sum() / blocked.m[idx].sum()


def test_blockwise_resamples_whole_blocks(blocked):
    reps = bootstrap_replicates(blocked, BootstrapConfig(64, seed=5, mode="blockwise", statistic="wer_b"))
    e = blocked.block_sums(blocked.e_b)
    m = blocked.block_sums(blocked.m)
    K = blocked.num_blocks
    for b, key in enumerate(replicate_keys(5, 64)):
        idx = rng.to_index(rng.words(key, K), K)
        assert reps[b] == e[idx].sum() / m[idx].sum()


def test_singleton_blocks_coincide():
    ds = generate_dataset(SynthConfig(n=300, d=1, seed=2))
    for stat in STATS:
        a = bootstrap_replicates(ds, BootstrapConfig(300, seed=9, mode="ordinary", statistic=stat))
        b = bootstrap_replicates(ds, BootstrapConfig(300, seed=9, mode="blockwise", statistic=stat))
        assert np.array_equal(a, b)


def test_determinism_and_jobs(blocked):
    cfg = BootstrapConfig(501, seed=3)
    ref = run_ci(blocked, cfg)
    assert run_ci(blocked, cfg) == ref
    for jobs in (2, 3, 8):
        assert np.array_equal(bootstrap_replicates(blocked, cfg, jobs=jobs), ref.replicates)
    assert not np.array_equal(bootstrap_replicates(blocked, BootstrapConfig(501, seed=4)), ref.replicates)


def test_percentile_examples():
    assert percentile_interval(np.arange(1, 1001), 0.05) == (25, 975)
    assert percentile_interval(np.arange(1000, 0, -1), 0.05) == (25, 975)
    assert percentile_interval([0.3] * 77, 0.1) == (0.3, 0.3)
    with pytest.raises(EmptySamples):
        percentile_interval([], 0.05)


def test_percentile_against_sort_and_index():
    r = random.Random(0)
    for _ in range(200):
        B = r.randint(1, 400)
        alpha = r.choice([0.01, 0.05, 0.1, 0.2, r.uniform(0.001, 0.5)])
        xs = [r.gauss(0, 1) for _ in range(B)]
        lo, hi = percentile_interval(xs, alpha)
        assert (lo, hi) == (nearest_rank(xs, alpha / 2), nearest_rank(xs, 1 - alpha / 2))
        assert lo in xs and hi in xs


def test_gaussian_examples():
    mean, se, lo, hi = gaussian_interval([-1, 1], 0.05)
    assert mean == 0 and se == pytest.approx(math.sqrt(2))
    assert lo == pytest.approx(-2.7719, abs=1e-4) and hi == pytest.approx(2.7719, abs=1e-4)
    assert gaussian_interval([0.7] * 10) == (0.7, 0.0, 0.7, 0.7)
    with pytest.raises(InsufficientSamples):
        gaussian_interval([1.0])


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=50))
def test_gaussian_matches_statistics_module(xs):
    mean, se, lo, hi = gaussian_interval(xs)
    assert mean == pytest.approx(statistics.fmean(xs), abs=1e-12)
    assert se == pytest.approx(statistics.stdev(xs), abs=1e-9)
    assert hi - lo == pytest.approx(2 * 1.959963984540054 * se, abs=1e-9)


@pytest.mark.parametrize("mode", ["ordinary", "blockwise"])
def test_swapping_systems_negates(blocked, mode):
    swapped = dataset_from_arrays(blocked.utt_ids, blocked.record_blocks, blocked.m, blocked.e_b, blocked.e_a)
    # B = 999 keeps q * B off the integers, where nearest-rank reflects exactly
    cfg = BootstrapConfig(999, seed=8, mode=mode)
    fwd, back = run_ci(blocked, cfg), run_ci(swapped, cfg)
    assert back.point_estimate == -fwd.point_estimate
    assert np.array_equal(back.replicates, -fwd.replicates)
    assert back.percentile_ci == (-fwd.percentile_ci[1], -fwd.percentile_ci[0])
    assert back.gaussian_ci == pytest.approx((-fwd.gaussian_ci[1], -fwd.gaussian_ci[0]), abs=1e-15)
    assert back.std_error == pytest.approx(fwd.std_error, rel=1e-12)


def test_report_serialisation(blocked):
    rep = run_ci(blocked, BootstrapConfig(100, seed=1), summary={"n": blocked.n})
    d = rep.to_dict()
    assert d["statistic"] == "abs_diff" and d["mode"] == "blockwise"
    assert d["B"] == 100 and d["seed"] == 1 and d["dataset_summary"] == {"n": blocked.n}
    assert d["rng"] == rng.GENERATOR_NAME
    assert d["percentile_ci"][0] <= d["percentile_ci"][1]
