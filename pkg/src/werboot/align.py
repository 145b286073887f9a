"""Word-level Levenshtein alignment and corpus WER."""

from dataclasses import dataclass
from typing import Iterable, Sequence

from werboot.errors import ZeroReferenceLength

__all__ = [
    "AlignmentCounts",
    "align",
    "corpus_wer",
    "edit_distance",
    "tokenize",
]


@dataclass(frozen=True)
class AlignmentCounts:
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0
    reference_length: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions


def tokenize(text: str, case_fold: bool = False) -> list[str]:
    """Split on runs of whitespace, optionally lower-casing every token.

    No other normalisation is applied; punctuation, hesitation markers and the
    like must be handled by the caller before scoring.
    """
    tokens = text.split()
    if case_fold:
        tokens = [t.lower() for t in tokens]
    return tokens


def edit_distance(reference: Sequence[str], hypothesis: Sequence[str]) -> int:
    """Unit-cost Levenshtein distance using two rolling rows."""
    if len(reference) < len(hypothesis):
        reference, hypothesis = hypothesis, reference
    prev = list(range(len(hypothesis) + 1))
    for i, r in enumerate(reference, 1):
        cur = [i]
        for j, h in enumerate(hypothesis, 1):
            cur.append(min(prev[j - 1] + (r != h), prev[j] + 1, cur[j - 1] + 1))
        prev = cur
    return prev[-1]


def align(reference: Sequence[str], hypothesis: Sequence[str]) -> AlignmentCounts:
    """Minimum-cost alignment of ``hypothesis`` against ``reference``.

    Among all minimum-cost alignments the one with the most substitutions
    (fewest insertions plus deletions) is selected.  The DP minimises the pair
    ``(errors, insertions + deletions)`` lexicographically; since
    ``insertions - deletions == len(hypothesis) - len(reference)`` for every
    alignment, that pair fixes all three category counts.  The choice is
    therefore deterministic and symmetric: swapping the sequences swaps
    insertions and deletions and keeps substitutions.
    """
    n, m = len(reference), len(hypothesis)
    if n == 0 or m == 0:
        return AlignmentCounts(insertions=m, deletions=n, reference_length=n)

    # each cell holds (errors, indels); tuples compare lexicographically
    prev = [(j, j) for j in range(m + 1)]
    for i in range(1, n + 1):
        r = reference[i - 1]
        cur = [(i, i)]
        for j in range(1, m + 1):
            e, g = prev[j - 1]
            diag = (e + 1, g) if r != hypothesis[j - 1] else (e, g)
            up = prev[j]
            left = cur[j - 1]
            cur.append(min(diag, (up[0] + 1, up[1] + 1), (left[0] + 1, left[1] + 1)))
        prev = cur
    errors, indels = prev[m]
    ins = (indels + m - n) // 2
    dele = indels - ins
    return AlignmentCounts(errors - indels, ins, dele, n)


def corpus_wer(counts: Iterable[AlignmentCounts]) -> float:
    errors = words = 0
    for c in counts:
        errors += c.errors
        words += c.reference_length
    if words == 0:
        raise ZeroReferenceLength("total reference length is zero")
    return errors / words
