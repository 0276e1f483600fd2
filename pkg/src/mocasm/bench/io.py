"""CSV datasets in, cluster assignments out."""

from __future__ import annotations

import csv
import io
import os
from typing import Union

import numpy as np

from ..data import Dataset


class DataError(ValueError):
    """Malformed or unreadable input data."""


def _resolve_label_column(label_column, header: list | None, width: int, lineno: int):
    if label_column is None:
        return None
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None:
            raise DataError(f"label column {label_column!r} given by name but the file has no header")
        if label_column not in header:
            raise DataError(f"line {lineno}: no column named {label_column!r} in header {header}")
        return header.index(label_column)
    idx = int(label_column)
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise DataError(f"label column {label_column} out of range for {width} columns")
    return idx


def parse_csv(path, label_column: Union[int, str, None] = None, header: bool = False, delimiter: str = ",") -> Dataset:
    """Read a numeric CSV file into a :class:`Dataset`.

    ``label_column`` (index or header name) is split off as labels and may
    hold any text; every other cell must parse as a finite float. Blank
    lines are skipped.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    rows = []
    names = None
    width = None
    label_idx = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text), delimiter=delimiter), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        row = [cell.strip() for cell in row]
        if header and names is None:
            names = row
            width = len(row)
            label_idx = _resolve_label_column(label_column, names, width, lineno)
            continue
        if width is None:
            width = len(row)
            label_idx = _resolve_label_column(label_column, names, width, lineno)
        if len(row) != width:
            raise DataError(f"line {lineno}: expected {width} fields, found {len(row)}")
        rows.append((lineno, row))

    if not rows:
        raise DataError(f"{path}: no data rows")

    n_features = width - (label_idx is not None)
    if n_features < 1:
        raise DataError(f"{path}: no feature columns")
    X = np.empty((len(rows), n_features))
    labels = [] if label_idx is not None else None
    for r, (lineno, row) in enumerate(rows):
        c = 0
        for j, cell in enumerate(row):
            if j == label_idx:
                labels.append(cell)
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"line {lineno}: non-numeric value {cell!r} in column {j}") from None
            if not np.isfinite(value):
                raise DataError(f"line {lineno}: non-finite value {cell!r} in column {j}")
            X[r, c] = value
            c += 1
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(rows)}")
    return Dataset(X, None if labels is None else np.array(labels))


def write_csv(path, data: Dataset):
    """Write features plus a trailing ``label`` column (when labelled) with a header."""
    names = [f"x{j}" for j in range(data.d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + (["label"] if data.labels is not None else []))
        for i in range(data.m):
            row = [repr(float(v)) for v in data.objects[i]]
            if data.labels is not None:
                row.append(str(data.labels[i]))
            w.writerow(row)


def format_assignments(labels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object_id", "cluster_id"])
    for i, k in enumerate(np.asarray(labels).tolist()):
        w.writerow([i, k])
    return buf.getvalue()


def write_assignments(path, labels):
    with open(path, "w", newline="") as fh:
        fh.write(format_assignments(labels))


def read_assignments(path) -> np.ndarray:
    """Inverse of :func:`write_assignments`; rows may come in any order."""
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    pairs = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if lineno == 1 and row[0].strip() == "object_id":
                continue
            if len(row) != 2:
                raise DataError(f"line {lineno}: expected object_id,cluster_id")
            try:
                obj, k = int(row[0]), int(row[1])
            except ValueError:
                raise DataError(f"line {lineno}: non-integer id in {row}") from None
            if obj in pairs:
                raise DataError(f"line {lineno}: object {obj} assigned twice")
            pairs[obj] = k
    if sorted(pairs) != list(range(len(pairs))):
        raise DataError(f"{path}: object ids must cover 0..n-1 exactly once")
    return np.array([pairs[i] for i in range(len(pairs))], dtype=int)
