"""Dataset ingestion, preprocessing, deterministic splits, synthetic data.

CSV files are comma-separated with an optional header and quoted fields;
missing cells are empty strings or "?".  Feature columns are numeric when
every non-missing cell parses as a float, nominal otherwise; nominal columns
are one-hot encoded with lexicographically sorted categories, and a missing
nominal cell is NaN across the whole indicator block.  Labels must take
exactly two raw values; the lexicographically smaller one maps to 0 unless
overridden.  Imputation statistics (column means and modes) are computed
from an explicit set of training rows and recorded with their provenance, so
test rows can never contribute.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from venncal.exceptions import DataError

__all__ = [
    "Column",
    "Dataset",
    "ImputationStats",
    "SplitSpec",
    "load_csv",
    "compute_imputation",
    "apply_imputation",
    "subset",
    "split_proper_calibration",
    "generate_synthetic",
    "write_score_file",
    "read_calibration_scores",
    "read_test_scores",
]

MISSING_TOKENS = ("", "?")


@dataclass(frozen=True)
class Column:
    """Source-column metadata; nominal columns carry their category list."""

    name: str
    kind: str  # "numeric" | "nominal"
    categories: tuple[str, ...] = ()

    @property
    def width(self) -> int:
        return len(self.categories) if self.kind == "nominal" else 1


@dataclass(frozen=True)
class ImputationStats:
    """Per-column fill values plus a record of the rows that produced them."""

    values: tuple  # float mean for numeric, category string for nominal
    n_rows: int
    source: str


@dataclass
class Dataset:
    """Encoded feature matrix with binary labels and column metadata.

    `X` is float64 with NaN marking missing cells (for a nominal column, NaN
    spans its whole one-hot block).  `label_values` records which raw label
    was mapped to 0 and 1.
    """

    X: np.ndarray
    y: np.ndarray
    columns: tuple[Column, ...]
    label_values: tuple[str, str] = ("0", "1")
    imputation: ImputationStats | None = None

    def __len__(self) -> int:
        return len(self.y)

    def column_slices(self) -> list[slice]:
        out = []
        offset = 0
        for col in self.columns:
            out.append(slice(offset, offset + col.width))
            offset += col.width
        return out


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def _parse_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, label_column, *, header: bool = True,
             positive_label: str | None = None, like: Dataset | None = None) -> Dataset:
    """Read a CSV file into an encoded Dataset.

    `label_column` is a column name (with header) or integer position.  Pass
    `like` to reuse another dataset's column schema and label mapping, e.g.
    to encode a test file consistently with its training file.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    if header:
        names = [c.strip() for c in rows[0]]
        data_rows = rows[1:]
        first_line = 2
    else:
        names = [f"col{i}" for i in range(len(rows[0]))]
        data_rows = rows
        first_line = 1
    if not data_rows:
        raise DataError(f"{path}: no data rows")

    if isinstance(label_column, int):
        label_idx = label_column
        if not 0 <= label_idx < len(names):
            raise DataError(f"{path}: label column index {label_column} out of range")
    else:
        if label_column not in names:
            raise DataError(f"{path}: label column {label_column!r} not found")
        label_idx = names.index(label_column)

    width = len(names)
    cells: list[list[str]] = []
    for offset, row in enumerate(data_rows):
        if len(row) != width:
            raise DataError(
                f"{path}: line {first_line + offset}: expected {width} fields, got {len(row)}")
        cells.append([c.strip() for c in row])

    raw_labels = [row[label_idx] for row in cells]
    if any(_is_missing(v) for v in raw_labels):
        raise DataError(f"{path}: missing label values are not allowed")
    feature_idx = [j for j in range(width) if j != label_idx]

    if like is not None:
        columns = like.columns
        if len(columns) != len(feature_idx):
            raise DataError(f"{path}: expected {len(columns)} feature columns, got {len(feature_idx)}")
        label_values = like.label_values
    else:
        columns = []
        for j in feature_idx:
            col_cells = [row[j] for row in cells]
            observed = [c for c in col_cells if not _is_missing(c)]
            # an all-missing column defaults to numeric (imputed later)
            if all(_parse_float(c) is not None for c in observed):
                columns.append(Column(names[j], "numeric"))
            else:
                cats = tuple(sorted(set(observed)))
                columns.append(Column(names[j], "nominal", cats))
        columns = tuple(columns)
        distinct = sorted(set(raw_labels))
        if len(distinct) > 2:
            raise DataError(
                f"{path}: labels must take at most two values, got {distinct[:5]!r}")
        if len(distinct) == 1:
            # a single-class file is readable only when the polarity is obvious
            if distinct[0] not in ("0", "1"):
                raise DataError(
                    f"{path}: single label value {distinct[0]!r}; cannot infer its class")
            label_values = ("0", "1")
        else:
            label_values = (distinct[0], distinct[1])
        if positive_label is not None:
            if positive_label not in distinct:
                raise DataError(f"{path}: positive label {positive_label!r} not among {distinct!r}")
            negative = distinct[0] if distinct[1] == positive_label else distinct[1]
            label_values = (negative, positive_label)

    label_map = {label_values[0]: 0, label_values[1]: 1}
    y = np.empty(len(cells), dtype=np.int64)
    for i, v in enumerate(raw_labels):
        if v not in label_map:
            raise DataError(f"{path}: line {first_line + i}: unknown label {v!r}")
        y[i] = label_map[v]

    total_width = sum(col.width for col in columns)
    X = np.zeros((len(cells), total_width))
    offset = 0
    for col, j in zip(columns, feature_idx):
        if col.kind == "numeric":
            for i, row in enumerate(cells):
                cell = row[j]
                if _is_missing(cell):
                    X[i, offset] = math.nan
                else:
                    value = _parse_float(cell)
                    if value is None:
                        raise DataError(
                            f"{path}: line {first_line + i}: column {col.name!r}: "
                            f"expected a number, got {cell!r}")
                    X[i, offset] = value
            offset += 1
        else:
            cat_pos = {c: p for p, c in enumerate(col.categories)}
            for i, row in enumerate(cells):
                cell = row[j]
                if _is_missing(cell):
                    X[i, offset:offset + col.width] = math.nan
                elif cell in cat_pos:
                    X[i, offset + cat_pos[cell]] = 1.0
                else:
                    raise DataError(
                        f"{path}: line {first_line + i}: column {col.name!r}: "
                        f"unknown category {cell!r}")
            offset += col.width
    return Dataset(X, y, columns, label_values)


def compute_imputation(dataset: Dataset, rows) -> ImputationStats:
    """Column means (numeric) and modes (nominal) over the given rows only."""
    rows = np.asarray(rows, dtype=np.int64)
    if len(rows) == 0:
        raise DataError("imputation needs at least one source row")
    values = []
    for col, sl in zip(dataset.columns, dataset.column_slices()):
        block = dataset.X[rows, sl]
        if col.kind == "numeric":
            observed = block[~np.isnan(block[:, 0]), 0]
            values.append(float(np.mean(observed)) if len(observed) else 0.0)
        else:
            mask = ~np.isnan(block[:, 0])
            if not mask.any():
                values.append(col.categories[0] if col.categories else "")
                continue
            counts = block[mask].sum(axis=0)
            # argmax takes the first maximum; categories are sorted, so ties
            # resolve to the lexicographically smallest category
            values.append(col.categories[int(np.argmax(counts))])
    source = f"rows[{rows.min()}..{rows.max()}] of the training portion"
    return ImputationStats(tuple(values), len(rows), source)


def apply_imputation(dataset: Dataset, stats: ImputationStats) -> Dataset:
    """Fill missing cells with the recorded statistics; returns a new Dataset."""
    if len(stats.values) != len(dataset.columns):
        raise DataError("imputation statistics do not match the column layout")
    X = dataset.X.copy()
    for col, sl, value in zip(dataset.columns, dataset.column_slices(), stats.values):
        missing = np.isnan(X[:, sl.start])
        if not missing.any():
            continue
        if col.kind == "numeric":
            X[missing, sl.start] = value
        else:
            X[np.ix_(missing, range(sl.start, sl.stop))] = 0.0
            X[missing, sl.start + col.categories.index(value)] = 1.0
    return Dataset(X, dataset.y, dataset.columns, dataset.label_values, stats)


def subset(dataset: Dataset, rows) -> Dataset:
    rows = np.asarray(rows, dtype=np.int64)
    return Dataset(dataset.X[rows], dataset.y[rows], dataset.columns,
                   dataset.label_values, dataset.imputation)


@dataclass(frozen=True)
class SplitSpec:
    """Proper-training / calibration split: a ratio or explicit sizes.

    With ratio (a, b) the proper part gets ceil(a / (a + b) * n) rows.  The
    split is contiguous (prefix/suffix) unless `permute` is set, in which
    case a seeded permutation is applied first.
    """

    ratio: tuple[int, int] | None = None
    sizes: tuple[int, int] | None = None
    permute: bool = False
    seed: int | None = None


def split_proper_calibration(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    n = len(dataset)
    if spec.sizes is not None:
        m, k = spec.sizes
        if m + k != n:
            raise DataError(f"split sizes {m}+{k} do not cover {n} rows")
    elif spec.ratio is not None:
        a, b = spec.ratio
        if a < 1 or b < 1:
            raise DataError(f"invalid split ratio {a}:{b}")
        m = (a * n + (a + b) - 1) // (a + b)
        k = n - m
    else:
        raise DataError("split needs a ratio or explicit sizes")
    if m < 1 or k < 1:
        raise DataError(f"degenerate split: proper={m}, calibration={k}")
    order = np.arange(n)
    if spec.permute:
        rng = np.random.default_rng(spec.seed)
        rng.shuffle(order)
    return subset(dataset, order[:m]), subset(dataset, order[m:])


def generate_synthetic(n: int, seed: int | None = None) -> Dataset:
    """One-feature synthetic data: labels are fair coin flips and the feature
    is the label plus standard Gaussian noise.

    Sampling uses numpy's PCG64 generator seeded with `seed`: labels are
    drawn first (uniform integers), noise second (ziggurat normals), so the
    output is deterministic for a given numpy version.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    x = y + rng.standard_normal(n)
    return Dataset(x[:, None].astype(float), y.astype(np.int64),
                   (Column("x", "numeric"),))


# ---- score files ---------------------------------------------------------
# Calibration files have the header "score,label"; test files have "score".
# Floats are written with repr, so reading a file recovers the exact values.


def write_score_file(path, scores, labels=None) -> None:
    scores = np.asarray(scores, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if labels is None:
            fh.write("score\n")
            for s in scores:
                fh.write(f"{float(s)!r}\n")
        else:
            labels = np.asarray(labels)
            if len(labels) != len(scores):
                raise DataError("scores and labels must have the same length")
            fh.write("score,label\n")
            for s, y in zip(scores, labels):
                fh.write(f"{float(s)!r},{int(y)}\n")


def _read_score_rows(path, expected_header: str) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != expected_header.split(","):
        raise DataError(f"{path}: expected header {expected_header!r}")
    if len(rows) < 2:
        raise DataError(f"{path}: no data rows")
    return rows[1:]


def read_calibration_scores(path) -> tuple[np.ndarray, np.ndarray]:
    rows = _read_score_rows(path, "score,label")
    scores = np.empty(len(rows))
    labels = np.empty(len(rows), dtype=np.int64)
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise DataError(f"{path}: line {i + 2}: expected two fields")
        value = _parse_float(row[0])
        if value is None:
            raise DataError(f"{path}: line {i + 2}: bad score {row[0]!r}")
        if row[1].strip() not in ("0", "1"):
            raise DataError(f"{path}: line {i + 2}: bad label {row[1]!r}")
        scores[i] = value
        labels[i] = int(row[1])
    return scores, labels


def read_test_scores(path) -> np.ndarray:
    rows = _read_score_rows(path, "score")
    scores = np.empty(len(rows))
    for i, row in enumerate(rows):
        value = _parse_float(row[0]) if len(row) == 1 else None
        if value is None:
            raise DataError(f"{path}: line {i + 2}: bad score row {row!r}")
        scores[i] = value
    return scores
