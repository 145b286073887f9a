"""Command-line interface: ``werboot {score,ci,varcurve,simulate}``.

Every subcommand writes its main report to ``--output`` (or stdout) and a
short human-readable summary to stdout; ``--json`` prints the JSON report to
stdout instead.  Exit codes: 0 success, 2 input/validation error, 3 statistical
precondition failure.
"""

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict
from importlib import resources

from werboot import __version__, rng
from werboot.blockvar import consistency_curve, iid_variance
from werboot.data import load_counts, partition_summary, score_transcripts, write_counts
from werboot.errors import ConfigError, DataError, StatisticError
from werboot.resample import BootstrapConfig, Mode, StatisticKind, evaluate_statistic, run_ci
from werboot.study import StudyConfig, emit_ci_strip, format_table, run_grid, run_study
from werboot.synth import SynthConfig

EXIT_INPUT = 2
EXIT_STATISTIC = 3


def load_schema(command: str) -> dict:
    """The JSON schema shipped for ``command``'s report."""
    text = resources.files("werboot").joinpath("schemas", f"{command}.schema.json").read_text("utf-8")
    return json.loads(text)


def _default_seed() -> int:
    raw = os.environ.get("WERBOOT_SEED")
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise SystemExit(f"werboot: error: WERBOOT_SEED is not an integer: {raw!r}") from None


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= rng.MASK64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _emit(args, report: dict, text: str) -> None:
    """Route the JSON report and the text summary according to --output/--json."""
    payload = _dumps(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload)
    if args.json:
        sys.stdout.write(payload)
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _pct(x: float) -> str:
    return f"{x * 100:.3f}%"


# -- score -------------------------------------------------------------------

def cmd_score(args) -> int:
    if not args.output:
        raise ConfigError("score needs --output PATH for the counts TSV")
    ds = score_transcripts(args.ref, args.hyp_a, args.hyp_b, args.block_map, args.case_fold)
    write_counts(ds, args.output)
    summary = partition_summary(ds)
    summary.update(
        wer_a=evaluate_statistic(ds, "wer_a"),
        wer_b=evaluate_statistic(ds, "wer_b"),
        abs_diff=evaluate_statistic(ds, "abs_diff"),
    )
    report = {
        "command": "score",
        "config": {"ref": args.ref, "hyp_a": args.hyp_a, "hyp_b": args.hyp_b,
                   "block_map": args.block_map, "case_fold": args.case_fold, "counts": args.output},
        "summary": summary,
    }
    if args.json:
        sys.stdout.write(_dumps(report))
    else:
        sys.stdout.write(
            f"utterances {summary['n']}  words {summary['total_words']}  blocks {summary['num_blocks']}\n"
            f"WER_A {_pct(summary['wer_a'])}  WER_B {_pct(summary['wer_b'])}  "
            f"delta {_pct(summary['abs_diff'])}\n"
        )
    return 0


# -- ci --------------------------------------------------------------------

def _load_dataset(args):
    if args.counts:
        if args.ref or args.hyp_a or args.hyp_b:
            raise ConfigError("give either --counts or --ref/--hyp-a/--hyp-b, not both")
        return load_counts(args.counts)
    if not (args.ref and args.hyp_a and args.hyp_b):
        raise ConfigError("need --counts, or all of --ref, --hyp-a and --hyp-b")
    return score_transcripts(args.ref, args.hyp_a, args.hyp_b, args.block_map, args.case_fold)


def _dump_path(path: str, mode: str, several: bool) -> str:
    if not several:
        return path
    root, ext = os.path.splitext(path)
    return f"{root}.{mode}{ext}"


def cmd_ci(args) -> int:
    ds = _load_dataset(args)
    summary = partition_summary(ds)
    modes = [Mode.ORDINARY, Mode.BLOCKWISE] if args.mode == "both" else [Mode(args.mode)]
    reports = []
    text = [f"n={summary['n']} words={summary['total_words']} blocks={summary['num_blocks']} "
            f"statistic={args.statistic} B={args.replicates} alpha={args.alpha} seed={args.seed}"]
    for mode in modes:
        cfg = BootstrapConfig(args.replicates, args.seed, mode, args.statistic, args.alpha)
        rep = run_ci(ds, cfg, jobs=args.jobs, summary=summary)
        reports.append(rep.to_dict())
        if args.dump_replicates:
            with open(_dump_path(args.dump_replicates, mode.value, len(modes) > 1), "w") as fh:
                fh.writelines(f"{float(v)!r}\n" for v in rep.replicates)
        lo, hi = rep.percentile_ci
        glo, ghi = rep.gaussian_ci
        text.append(
            f"{mode.value:>9}: estimate {_pct(rep.point_estimate)}  se {_pct(rep.std_error)}  "
            f"percentile CI ({_pct(lo)}, {_pct(hi)})  gaussian CI ({_pct(glo)}, {_pct(ghi)})"
        )
    report = {
        "command": "ci",
        "config": {"counts": args.counts, "ref": args.ref, "hyp_a": args.hyp_a, "hyp_b": args.hyp_b,
                   "block_map": args.block_map, "case_fold": args.case_fold,
                   "mode": args.mode, "statistic": args.statistic, "replicates": args.replicates,
                   "alpha": args.alpha, "seed": args.seed},
        "reports": reports,
    }
    _emit(args, report, "\n".join(text))
    return 0


# -- varcurve --------------------------------------------------------------

CURVE_COLUMNS = ["n", "d_n", "K_n", "mean_sigma2_hat", "sd_sigma2_hat", "oracle_sigma2"]


def cmd_varcurve(args) -> int:
    rho = 0.0 if args.iid else args.rho
    template = SynthConfig(n=args.gen_block_size, m=args.m, wer_a=args.wer_a, wer_b=args.wer_b,
                           d=args.gen_block_size, rho=rho)
    for n in args.n_grid:
        if n % args.gen_block_size:
            raise ConfigError(f"grid point n={n} is not a multiple of --gen-block-size {args.gen_block_size}")
    rows = consistency_curve(template, args.n_grid, args.d_rule, args.trials, args.seed,
                             oracle_datasets=args.oracle_datasets)
    config = {"m": args.m, "wer_a": args.wer_a, "wer_b": args.wer_b, "gen_block_size": args.gen_block_size,
              "rho": rho, "n_grid": args.n_grid, "d_rule": args.d_rule, "trials": args.trials,
              "oracle_datasets": args.oracle_datasets, "seed": args.seed, "rng": rng.GENERATOR_NAME}
    buf = io.StringIO()
    buf.write("# werboot varcurve " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for r in rows:
        writer.writerow([getattr(r, c) if isinstance(getattr(r, c), int) else repr(getattr(r, c))
                         for c in CURVE_COLUMNS])
    table = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(table)
    if args.json:
        report = {"command": "varcurve", "config": config,
                  "iid_variance": iid_variance(template) if rho == 0 else None,
                  "rows": [{c: getattr(r, c) for c in CURVE_COLUMNS} for r in rows]}
        sys.stdout.write(_dumps(report))
    else:
        sys.stdout.write(table)
    return 0


# -- simulate --------------------------------------------------------------

ROW_COLUMNS = ["d", "rho", "sim", "method", "point_estimate", "std_error", "ci_lo", "ci_hi", "covered",
               "gaussian_lo", "gaussian_hi", "gaussian_covered"]


def cmd_simulate(args) -> int:
    replicates, simulations = args.replicates, args.simulations
    if args.preset == "quick":
        replicates = replicates or 500
        simulations = simulations or 300
    replicates = replicates or 1000
    simulations = simulations or 1000
    synth = SynthConfig(n=args.n, m=args.m, wer_a=args.wer_a, wer_b=args.wer_b,
                        d=args.d, rho=args.rho)
    base = StudyConfig(synth, replicates, simulations, args.methods, args.alpha, args.seed)
    if args.preset:
        results = run_grid(base, jobs=args.jobs)
    else:
        results = [run_study(base, jobs=args.jobs)]

    if args.rows_csv:
        with open(args.rows_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(ROW_COLUMNS)
            for res in results:
                s = res.config.synth
                for r in res.rows:
                    row = asdict(r)
                    writer.writerow([s.d, repr(s.rho)] + [
                        repr(row[c]) if isinstance(row[c], float) else row[c] for c in ROW_COLUMNS[2:]
                    ])
    if args.strip is not None:
        strips = [emit_ci_strip(res, args.strip) for res in results]
    if args.strip_csv:
        if args.strip is None:
            raise ConfigError("--strip-csv needs --strip K")
        with open(args.strip_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["d", "rho", "method", "sim", "lo", "hi", "width", "covered"])
            for res, strip in zip(results, strips):
                s = res.config.synth
                for r in strip:
                    writer.writerow([s.d, repr(s.rho), r["method"], r["sim"], repr(r["lo"]),
                                     repr(r["hi"]), repr(r["width"]), r["covered"]])
    report = {
        "command": "simulate",
        "config": dict(base.to_dict(), preset=args.preset),
        "cells": [res.to_dict(include_rows=False) for res in results],
    }
    if args.strip is not None:
        for cell, strip in zip(report["cells"], strips):
            cell["strip"] = strip
    _emit(args, report, format_table(results))
    return 0


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None,
                        help="master seed (default: $WERBOOT_SEED or 0)")
    common.add_argument("--jobs", type=_positive, default=1, help="worker threads")
    common.add_argument("--output", "-o", help="write the main report to this file")
    common.add_argument("--json", action="store_true", help="print the JSON report on stdout")

    parser = argparse.ArgumentParser(
        prog="werboot",
        description="WER scoring and (blockwise) bootstrap confidence intervals for ASR comparisons.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", parents=[common], help="align transcripts and write a counts TSV")
    p.add_argument("ref")
    p.add_argument("hyp_a")
    p.add_argument("hyp_b")
    p.add_argument("--block-map")
    p.add_argument("--case-fold", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("ci", parents=[common], help="bootstrap confidence intervals")
    p.add_argument("--counts", help="counts TSV (as written by `score`)")
    p.add_argument("--ref")
    p.add_argument("--hyp-a")
    p.add_argument("--hyp-b")
    p.add_argument("--block-map")
    p.add_argument("--case-fold", action="store_true")
    p.add_argument("--mode", choices=["ordinary", "blockwise", "both"], default="both")
    p.add_argument("--statistic", choices=[k.value for k in StatisticKind], default="abs_diff")
    p.add_argument("--replicates", "-B", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--dump-replicates", metavar="PATH",
                   help="write replicate statistics, one per line (PATH.<mode>.ext with --mode both)")
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("varcurve", parents=[common], help="blockwise variance estimator consistency curve")
    p.add_argument("--m", type=_positive, default=100)
    p.add_argument("--wer-a", type=float, default=0.10)
    p.add_argument("--wer-b", type=float, default=0.095)
    p.add_argument("--gen-block-size", type=_positive, default=30)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--iid", action="store_true", help="independent data (rho = 0)")
    p.add_argument("--n-grid", type=_int_list, default=[2700, 10800, 27000])
    p.add_argument("--d-rule", default="sqrt-aligned:30",
                   help="sqrt | sqrt-aligned:A | fixed:D (default sqrt-aligned:30)")
    p.add_argument("--trials", type=_positive, default=200)
    p.add_argument("--oracle-datasets", type=_positive, default=20_000)
    p.set_defaults(func=cmd_varcurve)

    p = sub.add_parser("simulate", parents=[common], help="coverage study on synthetic data")
    p.add_argument("--n", type=_positive, default=3000)
    p.add_argument("--m", type=_positive, default=100)
    p.add_argument("--wer-a", type=float, default=0.10)
    p.add_argument("--wer-b", type=float, default=0.095)
    p.add_argument("--d", type=_positive, default=5)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--replicates", "-B", type=_positive, default=None, help="default 1000 (500 with quick)")
    p.add_argument("--simulations", type=_positive, default=None, help="default 1000 (300 with quick)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--methods", type=lambda s: s.split(","), default=["ordinary", "blockwise"])
    p.add_argument("--preset", choices=["grid", "quick"],
                   help="run the d x rho grid (quick: fewer simulations and replicates)")
    p.add_argument("--rows-csv", metavar="PATH", help="per-simulation intervals")
    p.add_argument("--strip", type=int, metavar="K", help="emit intervals of the first K simulations")
    p.add_argument("--strip-csv", metavar="PATH")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    try:
        return args.func(args)
    except StatisticError as exc:
        print(f"werboot: statistical error: {exc}", file=sys.stderr)
        return EXIT_STATISTIC
    except (DataError, ConfigError, OSError) as exc:
        print(f"werboot: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"werboot: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
