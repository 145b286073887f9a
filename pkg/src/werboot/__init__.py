"""Word error rate scoring and blockwise bootstrap confidence intervals."""

__version__ = "0.1.0"

from werboot.align import AlignmentCounts, align, corpus_wer, tokenize  # noqa: E402
from werboot.data import EvalDataset, load_counts, partition_summary, score_transcripts  # noqa: E402
from werboot.resample import BootstrapConfig, CiReport, Mode, StatisticKind, run_ci  # noqa: E402

__all__ = [
    "AlignmentCounts",
    "BootstrapConfig",
    "CiReport",
    "EvalDataset",
    "Mode",
    "StatisticKind",
    "align",
    "corpus_wer",
    "load_counts",
    "partition_summary",
    "run_ci",
    "score_transcripts",
    "tokenize",
]
