"""Streaming n-gram counting (orders 1..3) and count-derived distributions.

Counts are the shared substrate for the Kneser-Ney language model (which
needs sentence boundary markers) and for the divergence measures (which work
on plain surface n-grams). N-gram keys are the tokens joined with a single
space; tokens themselves never contain spaces by tokenizer construction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import DataError, EmptyCorpusError

BOS = "<s>"
EOS = "</s>"

BOUNDARY_NONE = "none"
BOUNDARY_MARKERS = "sentence-markers"

COUNTS_FORMAT_NAME = "corpus-affinity-counts"
COUNTS_FORMAT_VERSION = "v1"

POOLED = "pooled"


@dataclass
class NgramTable:
    """Counts of 1..max_order-grams with per-order totals.

    ``counts[k]`` maps the space-joined k-gram to its count (index 0 unused).
    With ``boundary="sentence-markers"`` every document was padded with
    ``max_order - 1`` leading ``<s>`` and one trailing ``</s>`` for orders
    above 1; ``<s>`` is never counted as a unigram, ``</s>`` is.
    """

    max_order: int
    boundary: str = BOUNDARY_NONE
    counts: list[Counter] = field(default_factory=list)
    totals: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.max_order <= 3:
            raise ValueError(f"max_order must be in [1, 3], got {self.max_order}")
        if self.boundary not in (BOUNDARY_NONE, BOUNDARY_MARKERS):
            raise ValueError(f"unknown boundary policy: {self.boundary!r}")
        if not self.counts:
            self.counts = [Counter() for _ in range(self.max_order + 1)]
        if not self.totals:
            self.recompute_totals()

    def recompute_totals(self) -> None:
        self.totals = [0] + [sum(self.counts[k].values()) for k in range(1, self.max_order + 1)]

    def total(self, order: int) -> int:
        return self.totals[order]


def count_ngrams(
    docs: Iterable[list[str]], max_order: int, boundary: str = BOUNDARY_NONE
) -> NgramTable:
    """Count every contiguous n-gram of each document for n = 1..max_order.

    ``docs`` may be any iterable of token lists; counting is streaming, so
    memory grows only with the number of distinct n-grams.
    """
    table = NgramTable(max_order, boundary)
    counts = table.counts
    join = " ".join
    markers = boundary == BOUNDARY_MARKERS
    pad = [BOS] * (max_order - 1)
    c1 = counts[1]
    c2 = counts[2] if max_order >= 2 else None
    c3 = counts[3] if max_order >= 3 else None
    for toks in docs:
        if markers:
            c1.update(toks)
            c1[EOS] += 1
            if c2 is None:
                continue
            seq = pad + toks + [EOS]
        else:
            c1.update(toks)
            if c2 is None:
                continue
            seq = toks
        c2.update(map(join, zip(seq, seq[1:])))
        if c3 is not None:
            c3.update(map(join, zip(seq, seq[1:], seq[2:])))
    table.recompute_totals()
    return table


def merge_tables(a: NgramTable, b: NgramTable) -> NgramTable:
    """Sum two count tables; commutative and associative.

    Both tables must share ``max_order`` and ``boundary``. Inputs are left
    untouched, so sharded counting can reduce tables in any bracketing.
    """
    if a.max_order != b.max_order or a.boundary != b.boundary:
        raise ValueError(
            "cannot merge tables with different configurations: "
            f"(order={a.max_order}, boundary={a.boundary}) vs "
            f"(order={b.max_order}, boundary={b.boundary})"
        )
    merged = NgramTable(a.max_order, a.boundary)
    for k in range(1, a.max_order + 1):
        c = merged.counts[k]
        c.update(a.counts[k])
        c.update(b.counts[k])
    merged.recompute_totals()
    return merged


def strip_markers(table: NgramTable) -> NgramTable:
    """Convert a sentence-markers table into the equivalent plain-surface one.

    Exact: padded counting only adds windows that touch ``<s>``/``</s>``, so
    dropping keys that start with ``<s>`` or end with ``</s>`` (and the
    ``</s>`` unigram) recovers what boundary-free counting would have
    produced. Avoids a second pass over the corpus.
    """
    if table.boundary != BOUNDARY_MARKERS:
        raise ValueError("strip_markers expects a sentence-markers table")
    out = NgramTable(table.max_order, BOUNDARY_NONE)
    bos_prefix = BOS + " "
    eos_suffix = " " + EOS
    c1 = out.counts[1]
    for key, cnt in table.counts[1].items():
        if key != EOS:
            c1[key] = cnt
    for k in range(2, table.max_order + 1):
        ck = out.counts[k]
        for key, cnt in table.counts[k].items():
            if key.startswith(bos_prefix) or key.endswith(eos_suffix):
                continue
            ck[key] = cnt
    out.recompute_totals()
    return out


@dataclass
class Distribution:
    """A probability distribution over n-gram terms.

    ``pooling`` is an order (1..3) or ``"pooled"`` for the joint distribution
    over every term of orders 1..max_order normalized by the combined total.
    """

    probs: dict[str, float]
    pooling: object

    def __post_init__(self):
        if not self.probs:
            raise EmptyCorpusError("distribution has empty support")


def to_distribution(table: NgramTable, pooling) -> Distribution:
    """Normalize counts into a term distribution (one order, or all pooled)."""
    if pooling == POOLED:
        orders = range(1, table.max_order + 1)
        total = sum(table.totals[k] for k in orders)
        if total == 0:
            raise EmptyCorpusError("cannot build a distribution from an empty table")
        probs: dict[str, float] = {}
        for k in orders:
            for key, cnt in table.counts[k].items():
                probs[key] = cnt / total
        return Distribution(probs, POOLED)
    order = int(pooling)
    if not 1 <= order <= table.max_order:
        raise ValueError(f"pooling order {order} outside table orders 1..{table.max_order}")
    total = table.totals[order]
    if total == 0:
        raise EmptyCorpusError(f"no order-{order} n-grams counted")
    return Distribution({key: cnt / total for key, cnt in table.counts[order].items()}, order)


def write_counts_stream(table: NgramTable, fh) -> None:
    """Serialize a table as sorted ``ORDER<TAB>COUNT<TAB>NGRAM`` lines."""
    fh.write(
        f"{COUNTS_FORMAT_NAME} {COUNTS_FORMAT_VERSION} "
        f"max_order={table.max_order} boundary={table.boundary}\n"
    )
    for k in range(1, table.max_order + 1):
        counts = table.counts[k]
        for key in sorted(counts):
            fh.write(f"{k}\t{counts[key]}\t{key}\n")


def write_counts(table: NgramTable, path) -> None:
    """Write the count artifact to ``path`` (bit-exact round trip with
    :func:`read_counts`)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_counts_stream(table, fh)


def read_counts(path) -> NgramTable:
    """Parse a count artifact written by :func:`write_counts` (bit-exact round trip)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if (
            len(parts) != 4
            or parts[0] != COUNTS_FORMAT_NAME
            or parts[1] != COUNTS_FORMAT_VERSION
            or not parts[2].startswith("max_order=")
            or not parts[3].startswith("boundary=")
        ):
            raise DataError(f"{path}: not a {COUNTS_FORMAT_NAME} {COUNTS_FORMAT_VERSION} file")
        try:
            max_order = int(parts[2].split("=", 1)[1])
        except ValueError as exc:
            raise DataError(f"{path}: bad max_order in header") from exc
        boundary = parts[3].split("=", 1)[1]
        table = NgramTable(max_order, boundary)
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t", 2)
            if len(fields) != 3:
                raise DataError(f"{path}: malformed count line {lineno}")
            try:
                order = int(fields[0])
                cnt = int(fields[1])
            except ValueError as exc:
                raise DataError(f"{path}: malformed count line {lineno}") from exc
            if not 1 <= order <= max_order or cnt < 1 or not fields[2]:
                raise DataError(f"{path}: invalid entry on line {lineno}")
            table.counts[order][fields[2]] = cnt
    table.recompute_totals()
    return table
