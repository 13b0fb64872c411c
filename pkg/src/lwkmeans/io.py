"""CSV and JSON artifacts: data loading, label/weight/path outputs, run manifests."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import Assignment, DataMatrix, LwkError

FLOAT_FORMAT = ".17g"


class DataIOError(LwkError):
    """A data file is missing, unreadable or malformed."""

    code = "io-error"


class DataFileNotFoundError(DataIOError, FileNotFoundError):
    code = "file-not-found"


class RaggedRowError(DataIOError, ValueError):
    code = "ragged-row"


class CellParseError(DataIOError, ValueError):
    code = "bad-cell"


class UnknownColumnError(DataIOError, KeyError):
    code = "unknown-column"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


def fmt(x) -> str:
    """Round-trip safe decimal text for a float."""
    return format(float(x), FLOAT_FORMAT)


def _read_rows(path):
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except FileNotFoundError:
        raise DataFileNotFoundError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise DataIOError(f"{path}: {exc}") from None


def _parse_float(cell):
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _looks_like_header(row):
    return any(_parse_float(c) is None and c.strip().lower() not in ("nan", "inf", "-inf", "+inf")
               for c in row)


def _resolve_column(label_column, header, width, path):
    if isinstance(label_column, str):
        if header is not None and label_column in header:
            return header.index(label_column)
        if not label_column.lstrip("-").isdigit():
            if header is None:
                raise UnknownColumnError(f"{path}: label column {label_column!r} needs a header row")
            raise UnknownColumnError(f"{path}: no column named {label_column!r}")
    idx = int(label_column)
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise UnknownColumnError(f"{path}: label column index {label_column} is out of range")
    return idx


def labels_first_appearance(values):
    """Map arbitrary label values to 0, 1, ... in order of first appearance."""
    codes = {}
    return np.array([codes.setdefault(v, len(codes)) for v in values], dtype=np.int64)


def load_csv(path, has_header=None, label_column=None):
    """Read a comma separated numeric table.

    Parameters
    ----------
    path : path-like
    has_header : bool or None
        ``None`` treats the first row as a header when any of its cells is
        not a number.
    label_column : str, int or None
        Column holding class labels, by header name or 0-based index. It is
        removed from the features and mapped to integers by first appearance.

    Returns
    -------
    data : DataMatrix
    labels : Assignment or None
    header : list of str or None
        Feature names, when the file has a header.
    """
    rows = _read_rows(path)
    if not rows:
        raise DataIOError(f"{path}: file is empty")
    if has_header is None:
        has_header = _looks_like_header(rows[0])
    header = [c.strip() for c in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    if not body:
        raise DataIOError(f"{path}: no data rows")
    width = len(header) if header is not None else len(body[0])
    first_line = 2 if has_header else 1
    for i, row in enumerate(body):
        if len(row) != width:
            raise RaggedRowError(
                f"{path}: row {i + first_line} has {len(row)} fields, expected {width}")
    label_idx = None if label_column is None else _resolve_column(label_column, header, width, path)

    feature_cols = [j for j in range(width) if j != label_idx]
    if not feature_cols:
        raise DataIOError(f"{path}: no feature columns")
    values = np.empty((len(body), len(feature_cols)))
    for i, row in enumerate(body):
        for out, j in enumerate(feature_cols):
            value = _parse_float(row[j])
            if value is None:
                name = f" ({header[j]})" if header is not None else ""
                raise CellParseError(
                    f"{path}: row {i + first_line}, column {j + 1}{name}: "
                    f"{row[j]!r} is not a finite number")
            values[i, out] = value

    labels = None
    if label_idx is not None:
        codes = labels_first_appearance([row[label_idx].strip() for row in body])
        labels = Assignment(codes, max(int(codes.max()) + 1, 1))
    names = None if header is None else [header[j] for j in feature_cols]
    return DataMatrix(values), labels, names


def load_labels(path):
    """Labels from a ``row_index,cluster`` file (or any file whose last column holds labels)."""
    rows = _read_rows(path)
    if rows and _looks_like_header(rows[0]):
        rows = rows[1:]
    if not rows:
        raise DataIOError(f"{path}: no label rows")
    codes = labels_first_appearance([row[-1].strip() for row in rows])
    return Assignment(codes, int(codes.max()) + 1)


def load_relevance(path) -> np.ndarray:
    """Boolean flags from a ``feature_index,relevant`` file."""
    rows = _read_rows(path)
    if rows and _looks_like_header(rows[0]):
        rows = rows[1:]
    flags = []
    for i, row in enumerate(rows):
        cell = row[-1].strip().lower()
        if cell in ("1", "true", "yes"):
            flags.append(True)
        elif cell in ("0", "false", "no"):
            flags.append(False)
        else:
            raise CellParseError(f"{path}: row {i + 2}: {row[-1]!r} is not a relevance flag")
    return np.array(flags, dtype=bool)


def _write(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            if header is not None:
                writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise DataIOError(f"{path}: {exc}") from None
    return path


def write_matrix(path, values, header=None):
    values = np.asarray(values, dtype=float)
    if header is None:
        header = [f"x{j}" for j in range(values.shape[1])]
    return _write(path, header, ([fmt(v) for v in row] for row in values))


def write_labels(path, labels):
    labels = np.asarray(labels)
    return _write(path, ["row_index", "cluster"], ([i, int(c)] for i, c in enumerate(labels)))


def write_weights(path, weights):
    return _write(path, ["feature_index", "weight"], ([j, fmt(w)] for j, w in enumerate(weights)))


def write_relevance(path, bits):
    return _write(path, ["feature_index", "relevant"], ([j, int(b)] for j, b in enumerate(bits)))


def _opt(x):
    return "" if x is None else fmt(x)


def write_path_csv(path, points):
    rows = ([fmt(pt.lam), j, fmt(m), fmt(d)]
            for pt in points for j, (m, d) in enumerate(zip(pt.mean_weights, pt.median_weights)))
    return _write(path, ["lambda", "feature_index", "mean_weight", "median_weight"], rows)


def write_summary_csv(path, points):
    header = ["lambda", "mean_cer", "median_cer", "n_selected_mean", "n_selected_median",
              "degenerate_fraction"]
    rows = ([fmt(pt.lam), _opt(pt.mean_cer), _opt(pt.median_cer), fmt(pt.n_selected_mean),
             pt.n_selected_median, fmt(pt.degenerate_fraction)] for pt in points)
    return _write(path, header, rows)


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"{path}: {exc}") from None
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataFileNotFoundError(f"{path}: no such file") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise DataIOError(f"{path}: {exc}") from None
