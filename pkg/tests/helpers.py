import numpy as np
from scipy import stats


def binomial_chisquare(counts, m, p):
    """Chi-square goodness-of-fit p-value of ``counts`` against Binom(m, p), tails pooled to expected >= 5."""
    counts = np.asarray(counts)
    observed = np.bincount(counts, minlength=m + 1).astype(float)
    expected = stats.binom.pmf(np.arange(m + 1), m, p) * counts.size
    lo = 0
    while expected[: lo + 1].sum() < 5:
        lo += 1
    hi = m
    while expected[hi:].sum() < 5:
        hi -= 1
    obs = np.concatenate([[observed[: lo + 1].sum()], observed[lo + 1: hi], [observed[hi:].sum()]])
    exp = np.concatenate([[expected[: lo + 1].sum()], expected[lo + 1: hi], [expected[hi:].sum()]])
    exp *= obs.sum() / exp.sum()
    return stats.chisquare(obs, exp).pvalue


def first_in_block(cfg, system=0):
    from werboot.synth import generate_counts

    e = generate_counts(cfg)[system]
    return e.reshape(cfg.num_blocks, cfg.d)
