"""Reading and writing the CSV and JSON artifacts.

CSV numbers use 17 significant digits and '.' as decimal separator, so a
file read back and written again is byte-identical. JSON floats use
Python's shortest round-trip repr; infinities are written as the strings
"+inf" and "-inf".
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import InputFileError

__all__ = [
    "format_number",
    "parse_number",
    "read_losses_csv",
    "write_losses_csv",
    "read_dataset_csv",
    "write_dataset_csv",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_table_csv",
    "read_table_csv",
    "write_json",
    "read_json",
    "dumps_json",
]


def format_number(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def parse_number(text):
    t = text.strip()
    if t in ("+inf", "inf"):
        return math.inf
    if t == "-inf":
        return -math.inf
    return float(t)


def _open_csv(path):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except FileNotFoundError:
        raise InputFileError(f"{path}: file not found") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFileError(f"{path}: cannot read file ({exc})") from None


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _select_column(path, header, column):
    if column is None:
        return 0
    if isinstance(column, int) or (isinstance(column, str) and column.isdigit()):
        return int(column)
    if header is None or column not in header:
        raise InputFileError(f"{path}: row 1: no column named {column!r}")
    return header.index(column)


def read_losses_csv(path, column=None):
    """Read one loss per row; a non-numeric first row is taken as a header.

    `column` is a 0-based index or a header name (default: first column).
    Errors name the file and the 1-based row.
    """
    rows = _open_csv(path)
    rows_idx = [(i + 1, r) for i, r in enumerate(rows) if any(cell.strip() for cell in r)]
    if not rows_idx:
        raise InputFileError(f"{path}: file contains no loss values")
    header = None
    first = rows_idx[0][1]
    if not all(_is_number(c) for c in first if c.strip()):
        header = [c.strip() for c in first]
        rows_idx = rows_idx[1:]
    col = _select_column(path, header, column)
    values = []
    for lineno, row in rows_idx:
        if col >= len(row):
            raise InputFileError(f"{path}: row {lineno}: missing column {col}")
        cell = row[col].strip()
        try:
            x = float(cell)
        except ValueError:
            raise InputFileError(f"{path}: row {lineno}: not a number: {cell!r}") from None
        if not math.isfinite(x):
            raise InputFileError(f"{path}: row {lineno}: invalid loss sample {cell!r}")
        values.append(x)
    if len(values) < 2:
        raise InputFileError(f"{path}: insufficient samples ({len(values)} values, need 2)")
    return np.asarray(values)


def write_table_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else format_number(v) for v in row])


def read_table_csv(path, expected_header=None):
    """Read a headed CSV written by :func:`write_table_csv`; cells stay strings."""
    rows = _open_csv(path)
    if not rows:
        raise InputFileError(f"{path}: empty file")
    header = rows[0]
    if expected_header is not None and list(header) != list(expected_header):
        raise InputFileError(f"{path}: row 1: expected header {list(expected_header)}, got {header}")
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise InputFileError(f"{path}: row {i}: expected {len(header)} fields, got {len(r)}")
    return header, rows[1:]


def write_losses_csv(path, losses, name="loss"):
    write_table_csv(path, [name], [[x] for x in losses])


DATASET_HEADER = ("lambda_um", "radiance")


def write_dataset_csv(path, data):
    write_table_csv(path, DATASET_HEADER, zip(data.wavelength, data.radiance))


def read_dataset_csv(path):
    from .blackbody import SpectrumData

    _, rows = read_table_csv(path, DATASET_HEADER)
    lam, B = [], []
    for i, (a, b) in enumerate(rows, start=2):
        try:
            lam.append(float(a))
            B.append(float(b))
        except ValueError:
            raise InputFileError(f"{path}: row {i}: not a number") from None
        if not (math.isfinite(lam[-1]) and math.isfinite(B[-1])) or lam[-1] <= 0:
            raise InputFileError(f"{path}: row {i}: invalid wavelength or radiance")
    if len(lam) < 3:
        raise InputFileError(f"{path}: need at least 3 data rows")
    return SpectrumData(np.array(lam), np.array(B))


def write_matrix_csv(path, matrix):
    """Comparison matrix laid out as a table: row model vs column model."""
    header = ["model", *matrix.model_ids, "empirical_risk"]
    rows = [[mid, *matrix.bemd[i], matrix.empirical_risks[i]]
            for i, mid in enumerate(matrix.model_ids)]
    write_table_csv(path, header, rows)


def read_matrix_csv(path):
    from .selection import ComparisonMatrix

    header, rows = read_table_csv(path)
    ids = header[1:-1]
    try:
        m = [[parse_number(x) for x in r[1:-1]] for r in rows]
        risks = [parse_number(r[-1]) for r in rows]
    except ValueError as exc:
        raise InputFileError(f"{path}: {exc}") from None
    return ComparisonMatrix(tuple(ids), np.array(m), np.array(risks))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(obj):
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputFileError(f"{path}: file not found") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFileError(f"{path}: row {exc.lineno}: invalid JSON ({exc.msg})") from None
