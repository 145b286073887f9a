"""Monte Carlo coverage study of ordinary vs blockwise bootstrap intervals.

Simulation ``s`` of a study with master seed ``S`` generates its data from
``stream_key(S, 0, s)`` and bootstraps with seed ``stream_key(S, 1, s)``.
Neither depends on ``d`` or ``rho``, so the cells of a grid share random
numbers, which keeps comparisons between cells free of most simulation noise.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from werboot import rng
from werboot.errors import ConfigError
from werboot.resample import (
    BootstrapConfig,
    Mode,
    bootstrap_replicates,
    evaluate_statistic,
    gaussian_interval,
    percentile_interval,
)
from werboot.synth import SynthConfig, generate_view

__all__ = [
    "MethodSummary",
    "SimRow",
    "StudyConfig",
    "StudyResult",
    "emit_ci_strip",
    "format_table",
    "run_grid",
    "run_study",
]

GRID_D = (5, 30)
GRID_RHO = (0.0, 0.05, 0.1, 0.2, 0.4)


@dataclass(frozen=True)
class StudyConfig:
    synth: SynthConfig = field(default_factory=SynthConfig)
    replicates: int = 1000
    simulations: int = 1000
    methods: tuple = (Mode.ORDINARY, Mode.BLOCKWISE)
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Mode(m) for m in self.methods))
        if self.simulations < 1:
            raise ConfigError("simulations must be >= 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        # validates replicates, alpha and seed
        BootstrapConfig(self.replicates, self.seed, alpha=self.alpha)

    def to_dict(self) -> dict:
        return {
            "synth": {k: v for k, v in asdict(self.synth).items() if k != "seed"},
            "replicates": self.replicates,
            "simulations": self.simulations,
            "methods": [m.value for m in self.methods],
            "alpha": self.alpha,
            "seed": self.seed,
            "rng": rng.GENERATOR_NAME,
        }


@dataclass(frozen=True)
class SimRow:
    sim: int
    method: str
    point_estimate: float
    std_error: float
    ci_lo: float
    ci_hi: float
    covered: bool
    gaussian_lo: float
    gaussian_hi: float
    gaussian_covered: bool

    @property
    def width(self) -> float:
        return self.ci_hi - self.ci_lo


@dataclass(frozen=True)
class MethodSummary:
    avg_width: float
    coverage: float
    coverage_se: float
    gaussian_avg_width: float
    gaussian_coverage: float


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    truth: float
    summary: dict
    rows: tuple

    def rows_for(self, method) -> list:
        method = Mode(method).value
        return [r for r in self.rows if r.method == method]

    def to_dict(self, include_rows: bool = True) -> dict:
        out = {
            "config": self.config.to_dict(),
            "truth": self.truth,
            "methods": {k: asdict(v) for k, v in self.summary.items()},
        }
        if include_rows:
            out["rows"] = [asdict(r) for r in self.rows]
        return out


def _simulate(cfg: StudyConfig, sim: int, truth: float) -> list:
    data = generate_view(cfg.synth.with_(seed=rng.stream_key(cfg.seed, 0, sim)))
    point = evaluate_statistic(data, "abs_diff")
    boot_seed = rng.stream_key(cfg.seed, 1, sim)
    rows = []
    for mode in cfg.methods:
        reps = bootstrap_replicates(data, BootstrapConfig(cfg.replicates, boot_seed, mode, alpha=cfg.alpha))
        lo, hi = percentile_interval(reps, cfg.alpha)
        _, se, g_lo, g_hi = gaussian_interval(reps, cfg.alpha)
        rows.append(SimRow(
            sim, mode.value, point, se, lo, hi, bool(lo <= truth <= hi),
            g_lo, g_hi, bool(g_lo <= truth <= g_hi),
        ))
    return rows


def _summarise(rows: list, simulations: int) -> MethodSummary:
    covered = np.array([r.covered for r in rows], dtype=float)
    c = float(covered.mean())
    return MethodSummary(
        avg_width=float(np.mean([r.width for r in rows])),
        coverage=c,
        coverage_se=math.sqrt(c * (1 - c) / simulations),
        gaussian_avg_width=float(np.mean([r.gaussian_hi - r.gaussian_lo for r in rows])),
        gaussian_coverage=float(np.mean([r.gaussian_covered for r in rows])),
    )


def run_study(cfg: StudyConfig, jobs: int = 1) -> StudyResult:
    """Simulate, bootstrap with each method, and aggregate width and coverage.

    Coverage counts percentile intervals containing the true difference
    ``wer_b - wer_a``; the Gaussian-approximation interval is tracked alongside.
    """
    truth = cfg.synth.true_abs_diff
    sims = range(cfg.simulations)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            per_sim = list(pool.map(lambda s: _simulate(cfg, s, truth), sims))
    else:
        per_sim = [_simulate(cfg, s, truth) for s in sims]
    rows = tuple(r for group in per_sim for r in group)
    summary = {
        m.value: _summarise([r for r in rows if r.method == m.value], cfg.simulations)
        for m in cfg.methods
    }
    return StudyResult(cfg, truth, summary, rows)


def run_grid(base: StudyConfig, ds=GRID_D, rhos=GRID_RHO, jobs: int = 1) -> list:
    results = []
    for d in ds:
        for rho in rhos:
            cfg = StudyConfig(
                base.synth.with_(d=d, rho=rho), base.replicates, base.simulations,
                base.methods, base.alpha, base.seed,
            )
            results.append(run_study(cfg, jobs))
    return results


def emit_ci_strip(result: StudyResult, first_k: int) -> list:
    """Plot-ready interval rows for the first ``first_k`` simulations of each method."""
    if first_k < 0 or first_k > result.config.simulations:
        raise ConfigError(f"first_k must lie in [0, {result.config.simulations}]")
    return [
        {"method": r.method, "sim": r.sim, "lo": r.ci_lo, "hi": r.ci_hi,
         "width": r.width, "covered": r.covered}
        for r in result.rows if r.sim < first_k
    ]


def format_table(results: list) -> str:
    """Aligned text table: one line per (d, rho) cell, width and coverage per method."""
    methods = [m.value for m in results[0].config.methods]
    head = f"{'d':>4} {'rho':>6} " + " ".join(f"{m + ' width':>16} {m + ' cover':>16}" for m in methods)
    lines = [head, "-" * len(head)]
    for res in results:
        s = res.config.synth
        cells = " ".join(
            f"{res.summary[m].avg_width:>16.4f} {res.summary[m].coverage * 100:>15.1f}%" for m in methods
        )
        lines.append(f"{s.d:>4} {s.rho:>6.2f} {cells}")
    return "\n".join(lines)
