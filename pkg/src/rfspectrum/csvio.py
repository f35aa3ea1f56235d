"""Full-precision CSV with ``#`` comment header lines."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _emit(fh, columns, rows, comments):
    for line in comments:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()):
    """Write to ``path``; an open text stream is written to directly."""
    if hasattr(path, "write"):
        _emit(path, columns, rows, comments)
        return path
    path = Path(path)
    with open(path, "w", newline="") as fh:
        _emit(fh, columns, rows, comments)
    return path


def write_matrix(path, matrix, comments: Sequence[str] = ()) -> Path:
    """Row-major dense matrix; columns named c0, c1, ..."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    return write_csv(path, [f"c{j}" for j in range(A.shape[1])], A.tolist(), comments)


def read_csv(path):
    """Return ``(columns, rows, comments)``; numeric cells become floats."""
    comments, lines = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    rows = []
    for raw in reader:
        row = []
        for cell in raw:
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    return columns, rows, comments


def read_matrix(path) -> np.ndarray:
    _, rows, _ = read_csv(path)
    return np.asarray(rows, dtype=float)
