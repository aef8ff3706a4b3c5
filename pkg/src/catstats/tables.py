"""Categorical samples, two-way contingency tables, and CSV ingestion.

Categories are dense 1-based integer indices.  String labels found in
sample files are mapped to indices at ingestion and the mapping is kept
for reporting.  Empty rows and columns are retained on purpose: dropping
them would silently change the table dimensions and the degrees of
freedom of the classical tests downstream.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParseError

__all__ = [
    "CategoricalSample",
    "ContingencyTable",
    "ProbabilityVector",
    "table_from_samples",
    "expected_counts",
    "read_table_csv",
    "read_samples_csv",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CategoricalSample:
    """Observed category labels, 1-based; ``labels_y`` is None for one-sample data.

    ``x_levels``/``y_levels`` hold the original labels when the data came
    with string categories (index ``i`` maps to ``levels[i - 1]``); they are
    None when the labels were already integer indices.
    """

    labels_x: np.ndarray
    labels_y: np.ndarray | None
    n: int
    x_levels: tuple[str, ...] | None = None
    y_levels: tuple[str, ...] | None = None

    def __post_init__(self):
        x = np.asarray(self.labels_x, dtype=np.int64)
        if x.ndim != 1:
            raise InputError("labels_x must be one-dimensional")
        if self.n < 1:
            raise InputError("sample size must be at least 1")
        if x.shape[0] != self.n:
            raise InputError(f"labels_x has length {x.shape[0]}, expected n={self.n}")
        if x.size and x.min() < 1:
            raise InputError("category indices are 1-based; found a label < 1")
        object.__setattr__(self, "labels_x", _frozen(x))
        if self.labels_y is not None:
            y = np.asarray(self.labels_y, dtype=np.int64)
            if y.shape != x.shape:
                raise InputError(
                    f"labels_y has length {y.shape[0] if y.ndim == 1 else '?'}, "
                    f"expected n={self.n}"
                )
            if y.min() < 1:
                raise InputError("category indices are 1-based; found a label < 1")
            object.__setattr__(self, "labels_y", _frozen(y))

    @property
    def paired(self) -> bool:
        return self.labels_y is not None


@dataclass(frozen=True)
class ContingencyTable:
    """I x J nonnegative integer counts with cached marginals."""

    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise InputError("counts must be a two-dimensional matrix")
        if counts.min() < 0:
            raise InputError("counts must be nonnegative")
        rows = counts.sum(axis=1)
        cols = counts.sum(axis=0)
        total = int(counts.sum())
        if not np.array_equal(rows, np.asarray(self.row_sums, dtype=np.int64)):
            raise InputError("row_sums inconsistent with counts")
        if not np.array_equal(cols, np.asarray(self.col_sums, dtype=np.int64)):
            raise InputError("col_sums inconsistent with counts")
        if total != self.n:
            raise InputError("n inconsistent with counts")
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "row_sums", _frozen(rows))
        object.__setattr__(self, "col_sums", _frozen(cols))

    @classmethod
    def from_counts(cls, counts) -> "ContingencyTable":
        try:
            arr = np.asarray(counts)
        except ValueError:
            raise InputError("ragged count matrix") from None
        if arr.dtype == object:
            raise InputError("ragged count matrix")
        if np.issubdtype(arr.dtype, np.floating):
            if not np.all(arr == np.floor(arr)):
                raise InputError("counts must be integers")
            arr = arr.astype(np.int64)
        arr = np.asarray(arr, dtype=np.int64)
        if arr.ndim != 2:
            raise InputError("counts must be a two-dimensional matrix")
        return cls(arr, arr.sum(axis=1), arr.sum(axis=0), int(arr.sum()))

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@dataclass(frozen=True)
class ProbabilityVector:
    """Finite discrete distribution: nonnegative entries summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise InputError("probabilities must form a nonempty vector")
        if p.min() < 0.0:
            raise InputError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InputError(f"probabilities sum to {p.sum()!r}, expected 1")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def uniform(cls, k: int) -> "ProbabilityVector":
        return cls(np.full(k, 1.0 / k))

    def __len__(self) -> int:
        return self.probs.size


def table_from_samples(sample: CategoricalSample, I: int, J: int) -> ContingencyTable:
    """Cross-tabulate a paired sample into an I x J contingency table."""
    if not sample.paired:
        raise InputError("a paired sample (labels_x and labels_y) is required")
    if I < 1 or J < 1:
        raise InputError("category counts I and J must be positive")
    x = sample.labels_x
    y = sample.labels_y
    if x.max() > I:
        raise InputError(f"labels_x contains index {x.max()} > I={I}")
    if y.max() > J:
        raise InputError(f"labels_y contains index {y.max()} > J={J}")
    flat = (x - 1) * J + (y - 1)
    counts = np.bincount(flat, minlength=I * J).reshape(I, J)
    return ContingencyTable.from_counts(counts)


def expected_counts(table: ContingencyTable) -> np.ndarray:
    """Expected cell counts under independence: row x column products over n."""
    if table.n < 1:
        raise InputError("expected counts require at least one observation")
    return np.outer(table.row_sums, table.col_sums) / float(table.n)


def read_table_csv(path) -> ContingencyTable:
    """Read a contingency table: one CSV row per table row, no header."""
    rows: list[list[int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            row = []
            for c in cells:
                try:
                    value = int(c)
                except ValueError:
                    raise ParseError(f"non-integer count {c!r}", line=lineno) from None
                if value < 0:
                    raise ParseError(f"negative count {value}", line=lineno)
                row.append(value)
            if rows and len(row) != len(rows[0]):
                raise ParseError(
                    f"row has {len(row)} entries, expected {len(rows[0])}", line=lineno
                )
            rows.append(row)
    if not rows:
        raise ParseError("no table rows found", line=1)
    return ContingencyTable.from_counts(rows)


def _encode_labels(tokens: list[str], line_numbers: list[int], column: str):
    """Map one column of raw tokens to 1-based indices.

    All-integer columns are used as indices directly (and must be >= 1);
    otherwise tokens are treated as string labels and mapped to 1..K in
    sorted order, which keeps the encoding independent of row order.
    """
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        levels = sorted(set(tokens))
        index = {lab: i + 1 for i, lab in enumerate(levels)}
        return np.array([index[t] for t in tokens], dtype=np.int64), tuple(levels)
    for v, lineno in zip(values, line_numbers):
        if v < 1:
            raise ParseError(
                f"integer label {v} in column {column!r} is not 1-based", line=lineno
            )
    return np.array(values, dtype=np.int64), None


def read_samples_csv(path) -> CategoricalSample:
    """Read long-format observations: header ``x,y`` (or ``x`` for one-sample data)."""
    with open(path, encoding="utf-8") as fh:
        lines = [(i, raw.strip()) for i, raw in enumerate(fh, start=1) if raw.strip()]
    if not lines:
        raise ParseError("empty sample file", line=1)
    header_line, header = lines[0]
    names = [c.strip() for c in header.split(",")]
    if names not in (["x"], ["x", "y"]):
        raise ParseError(
            f"header must be 'x' or 'x,y', got {header!r}", line=header_line
        )
    ncol = len(names)
    xs: list[str] = []
    ys: list[str] = []
    line_numbers: list[int] = []
    for lineno, line in lines[1:]:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != ncol:
            raise ParseError(
                f"expected {ncol} fields, got {len(cells)}", line=lineno
            )
        line_numbers.append(lineno)
        xs.append(cells[0])
        if ncol == 2:
            ys.append(cells[1])
    if not xs:
        raise ParseError("no observations found", line=header_line)
    labels_x, x_levels = _encode_labels(xs, line_numbers, "x")
    labels_y, y_levels = (None, None)
    if ncol == 2:
        labels_y, y_levels = _encode_labels(ys, line_numbers, "y")
    return CategoricalSample(
        labels_x=labels_x,
        labels_y=labels_y,
        n=len(xs),
        x_levels=x_levels,
        y_levels=y_levels,
    )
