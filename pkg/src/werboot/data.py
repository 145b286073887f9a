"""Evaluation datasets: per-utterance counts grouped into blocks.

File formats (UTF-8, one record per line, ``#`` comments and blank lines
ignored):

* counts TSV      ``utt_id<TAB>block_id<TAB>m<TAB>e_a<TAB>e_b``
* transcripts     ``utt_id<TAB>text``
* block map       ``utt_id<TAB>block_id``
"""

from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from werboot.align import align, tokenize
from werboot.errors import (
    DataError,
    DuplicateUttId,
    EmptyBlock,
    EmptyDataset,
    EmptyReference,
    MissingUtterance,
    ParseError,
)

__all__ = [
    "EvalDataset",
    "UtteranceRecord",
    "dataset_from_arrays",
    "load_counts",
    "partition_summary",
    "read_block_map",
    "read_transcripts",
    "score_transcripts",
    "write_counts",
]


@dataclass(frozen=True)
class UtteranceRecord:
    utt_id: str
    block_id: str
    m: int
    e_a: int
    e_b: int


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EvalDataset:
    """Ordered utterance records plus their partition into blocks.

    Blocks are numbered in order of first appearance; ``block_index[s]`` is the
    block number of record ``s`` and ``block_ids[k]`` the label of block ``k``.
    Use :func:`dataset_from_arrays` (or the loaders) rather than the
    constructor so that the invariants are checked.
    """

    utt_ids: tuple
    record_blocks: tuple
    m: np.ndarray
    e_a: np.ndarray
    e_b: np.ndarray
    block_ids: tuple
    block_index: np.ndarray

    @property
    def n(self) -> int:
        return len(self.utt_ids)

    @property
    def num_blocks(self) -> int:
        return len(self.block_ids)

    @property
    def total_words(self) -> int:
        return int(self.m.sum())

    @property
    def blocks(self) -> Mapping[str, tuple]:
        """Mapping ``block_id -> tuple of record indices`` in file order."""
        members: dict = {b: [] for b in self.block_ids}
        for s, k in enumerate(self.block_index):
            members[self.block_ids[k]].append(s)
        return {b: tuple(v) for b, v in members.items()}

    def block_sums(self, values: np.ndarray) -> np.ndarray:
        """Sum a per-record integer column within each block."""
        return _int_bincount(self.block_index, values, self.num_blocks)

    def records(self) -> Iterator[UtteranceRecord]:
        for s in range(self.n):
            yield UtteranceRecord(
                self.utt_ids[s], self.record_blocks[s],
                int(self.m[s]), int(self.e_a[s]), int(self.e_b[s]),
            )

    def __eq__(self, other):
        if not isinstance(other, EvalDataset):
            return NotImplemented
        return (
            self.utt_ids == other.utt_ids
            and self.record_blocks == other.record_blocks
            and np.array_equal(self.m, other.m)
            and np.array_equal(self.e_a, other.e_a)
            and np.array_equal(self.e_b, other.e_b)
        )


def _int_bincount(index: np.ndarray, values: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=np.int64)
    np.add.at(out, index, values)
    return out


def dataset_from_arrays(utt_ids, block_ids, m, e_a, e_b, source=None) -> EvalDataset:
    """Validate columns and build an :class:`EvalDataset`."""
    utt_ids = tuple(str(u) for u in utt_ids)
    record_blocks = tuple(str(b) for b in block_ids)
    m, e_a, e_b = _frozen(m), _frozen(e_a), _frozen(e_b)
    n = len(utt_ids)
    if not (len(record_blocks) == len(m) == len(e_a) == len(e_b) == n):
        raise DataError("column lengths differ")
    if n == 0:
        raise EmptyDataset(f"{source or 'dataset'}: no records")
    if len(set(utt_ids)) != n:
        seen = set()
        for u in utt_ids:
            if u in seen:
                raise DuplicateUttId(f"{source or 'dataset'}: duplicate utt_id {u!r}")
            seen.add(u)
    if (m < 0).any() or (e_a < 0).any() or (e_b < 0).any():
        raise DataError("counts must be non-negative")
    if (m == 0).any():
        s = int(np.flatnonzero(m == 0)[0])
        raise EmptyReference(f"{source or 'dataset'}: utterance {utt_ids[s]!r} has an empty reference")

    order: dict = {}
    index = np.empty(n, dtype=np.intp)
    for s, b in enumerate(record_blocks):
        index[s] = order.setdefault(b, len(order))
    index.setflags(write=False)
    block_words = _int_bincount(index, m, len(order))
    if (block_words == 0).any():
        k = int(np.flatnonzero(block_words == 0)[0])
        raise EmptyBlock(f"block {list(order)[k]!r} has zero total words")
    return EvalDataset(utt_ids, record_blocks, m, e_a, e_b, tuple(order), index)


def _lines(path) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def _count(field: str, name: str, path, lineno) -> int:
    try:
        value = int(field)
    except ValueError:
        raise ParseError(f"{name} is not an integer: {field!r}", path, lineno) from None
    if value < 0:
        raise ParseError(f"{name} is negative: {value}", path, lineno)
    return value


def load_counts(path) -> EvalDataset:
    """Read a counts TSV into a validated dataset."""
    utts, blocks, ms, eas, ebs = [], [], [], [], []
    seen: dict = {}
    for lineno, line in _lines(path):
        fields = line.split("\t")
        if len(fields) != 5:
            raise ParseError(f"expected 5 tab-separated fields, got {len(fields)}", path, lineno)
        utt, block = fields[0].strip(), fields[1].strip()
        if not utt or not block:
            raise ParseError("empty utt_id or block_id", path, lineno)
        if utt in seen:
            raise DuplicateUttId(f"{path}:{lineno}: duplicate utt_id {utt!r} (first on line {seen[utt]})")
        seen[utt] = lineno
        m = _count(fields[2], "m", path, lineno)
        if m == 0:
            raise EmptyReference(f"{path}:{lineno}: utterance {utt!r} has m=0")
        utts.append(utt)
        blocks.append(block)
        ms.append(m)
        eas.append(_count(fields[3], "e_a", path, lineno))
        ebs.append(_count(fields[4], "e_b", path, lineno))
    return dataset_from_arrays(utts, blocks, ms, eas, ebs, source=str(path))


def write_counts(ds: EvalDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# utt_id\tblock_id\tm\te_a\te_b\n")
        for r in ds.records():
            fh.write(f"{r.utt_id}\t{r.block_id}\t{r.m}\t{r.e_a}\t{r.e_b}\n")


def _read_pairs(path, what: str, require_value: bool) -> dict:
    out: dict = {}
    for lineno, line in _lines(path):
        key, sep, value = line.partition("\t")
        key = key.strip()
        if not key or (require_value and not sep):
            raise ParseError(f"expected 'utt_id<TAB>{what}'", path, lineno)
        if key in out:
            raise DuplicateUttId(f"{path}:{lineno}: duplicate utt_id {key!r}")
        out[key] = value
    return out


def read_transcripts(path) -> dict:
    """``utt_id -> text`` in file order."""
    # a bare utt_id is an empty transcript (e.g. a hypothesis with no output)
    return _read_pairs(path, "text", require_value=False)


def read_block_map(path) -> dict:
    pairs = _read_pairs(path, "block_id", require_value=True)
    for utt, block in pairs.items():
        if not block.strip():
            raise ParseError(f"empty block_id for {utt!r}", path)
    return {u: b.strip() for u, b in pairs.items()}


def score_transcripts(ref, hyp_a, hyp_b, block_map=None, case_fold: bool = False) -> EvalDataset:
    """Align both hypotheses against the reference, utterance by utterance.

    Without a block map every utterance is its own block, in which case the
    blockwise bootstrap reduces to the ordinary one.
    """
    refs = read_transcripts(ref)
    hyps = {"hyp_a": (hyp_a, read_transcripts(hyp_a)), "hyp_b": (hyp_b, read_transcripts(hyp_b))}
    for name, (path, table) in hyps.items():
        missing = [u for u in refs if u not in table]
        if missing:
            raise MissingUtterance(f"{path}: utterance {missing[0]!r} from {ref} is missing ({len(missing)} total)")
        extra = [u for u in table if u not in refs]
        if extra:
            raise MissingUtterance(f"{ref}: utterance {extra[0]!r} from {path} is missing ({len(extra)} total)")
    blocks = read_block_map(block_map) if block_map is not None else None
    if blocks is not None:
        missing = [u for u in refs if u not in blocks]
        if missing:
            raise MissingUtterance(f"{block_map}: no block for utterance {missing[0]!r}")

    utts, block_ids, ms, eas, ebs = [], [], [], [], []
    for utt, text in refs.items():
        r = tokenize(text, case_fold)
        if not r:
            raise EmptyReference(f"{ref}: utterance {utt!r} has an empty reference")
        ca = align(r, tokenize(hyps["hyp_a"][1][utt], case_fold))
        cb = align(r, tokenize(hyps["hyp_b"][1][utt], case_fold))
        utts.append(utt)
        block_ids.append(blocks[utt] if blocks is not None else utt)
        ms.append(len(r))
        eas.append(ca.errors)
        ebs.append(cb.errors)
    return dataset_from_arrays(utts, block_ids, ms, eas, ebs, source=str(ref))


def partition_summary(ds: EvalDataset) -> dict:
    sizes = np.bincount(ds.block_index, minlength=ds.num_blocks)
    return {
        "n": ds.n,
        "total_words": ds.total_words,
        "num_blocks": ds.num_blocks,
        "block_size_min": int(sizes.min()),
        "block_size_median": float(np.median(sizes)),
        "block_size_max": int(sizes.max()),
    }
