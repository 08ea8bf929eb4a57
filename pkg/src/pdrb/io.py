"""Text formats: diagram CSV, grid files, matrices, labels, JSON bundles.

All writers go through :func:`atomic_write` (temp file in the target
directory, then rename) and format floats with :func:`format_float`, so equal
inputs give byte-identical files.
"""

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .extract import ScalarGrid

DIAGRAM_HEADER = "birth,death"
LAYOUT_HEADER = "x,y,label"


class ParseError(ValueError):
    """Malformed input file; carries the path and 1-based line number."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {message}")


def format_float(x):
    """Shortest round-trip repr, without a trailing ``.0`` and without ``-0``."""
    x = float(x)
    if x == 0:
        return "0"
    s = repr(x)
    return s[:-2] if s.endswith(".0") else s


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and a rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def _parse_float(token, path, line):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(path, line, f"cannot parse {token!r} as a number") from None
    if not math.isfinite(value):
        raise ParseError(path, line, f"non-finite value {token!r}")
    return value


# -- diagrams ---------------------------------------------------------------


def read_diagram(path):
    """Read a diagram CSV into an (n, 2) array.

    Blank lines are skipped; the first non-blank line may be the header
    ``birth,death``.  Points with ``birth > death`` are rejected.
    """
    rows = []
    seen = False
    for line_no, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen:
            seen = True
            if line.replace(" ", "").lower() == DIAGRAM_HEADER:
                continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ParseError(path, line_no, f"expected 'birth,death', got {raw!r}")
        b, d = (_parse_float(p, path, line_no) for p in parts)
        if b > d:
            raise ParseError(path, line_no, f"birth {b} exceeds death {d}")
        rows.append((b, d))
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def format_diagram(X):
    X = np.asarray(getattr(X, "points", X), dtype=np.float64).reshape(-1, 2)
    lines = [DIAGRAM_HEADER] + [f"{format_float(b)},{format_float(d)}" for b, d in X]
    return "\n".join(lines) + "\n"


def write_diagram(path, X):
    atomic_write(path, format_diagram(X))


# -- grids ------------------------------------------------------------------


def read_grid(path):
    """Read a grid file: ``dims: d1 [d2 [d3]]`` then row-major values."""
    lines = _read_lines(path)
    header_no = next((i for i, l in enumerate(lines) if l.strip()), None)
    if header_no is None:
        raise ParseError(path, 1, "empty grid file")
    header = lines[header_no].strip()
    key, _, rest = header.partition(":")
    if key.strip().lower() != "dims" or not rest.strip():
        raise ParseError(path, header_no + 1, f"expected 'dims: d1 d2 [d3]', got {header!r}")
    dims = []
    for token in rest.split():
        try:
            d = int(token)
        except ValueError:
            raise ParseError(path, header_no + 1, f"bad dimension {token!r}") from None
        if d < 1:
            raise ParseError(path, header_no + 1, f"dimensions must be positive, got {d}")
        dims.append(d)
    if not 1 <= len(dims) <= 3:
        raise ParseError(path, header_no + 1, f"expected 1 to 3 dimensions, got {len(dims)}")
    values = []
    for line_no in range(header_no + 1, len(lines)):
        for token in lines[line_no].split():
            values.append(_parse_float(token, path, line_no + 1))
    expected = int(np.prod(dims))
    if len(values) != expected:
        raise ParseError(path, 0, f"dims {dims} need {expected} values, found {len(values)}")
    return ScalarGrid(tuple(dims), np.array(values, dtype=np.float64))


def format_grid(grid):
    grid = grid if isinstance(grid, ScalarGrid) else ScalarGrid.from_array(np.asarray(grid))
    arr = np.asarray(grid.values, dtype=np.float64).reshape(grid.dims)
    rows = arr.reshape(-1, grid.dims[-1])
    lines = ["dims: " + " ".join(str(d) for d in grid.dims)]
    lines += [" ".join(format_float(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_grid(path, grid):
    atomic_write(path, format_grid(grid))


# -- matrices, labels, layouts ----------------------------------------------


def format_matrix(D):
    D = np.atleast_2d(np.asarray(D, dtype=np.float64))
    return "".join(",".join(format_float(v) for v in row) + "\n" for row in D)


def write_matrix(path, D):
    atomic_write(path, format_matrix(D))


def read_matrix(path):
    rows = []
    for line_no, raw in enumerate(_read_lines(path), start=1):
        if raw.strip():
            rows.append([_parse_float(t.strip(), path, line_no) for t in raw.split(",")])
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ParseError(path, 0, "rows differ in length")
    return np.array(rows, dtype=np.float64)


def write_labels(path, labels):
    atomic_write(path, "".join(f"{int(v)}\n" for v in labels))


def read_labels(path):
    out = []
    for line_no, raw in enumerate(_read_lines(path), start=1):
        token = raw.strip()
        if not token:
            continue
        try:
            out.append(int(token))
        except ValueError:
            raise ParseError(path, line_no, f"expected an integer label, got {token!r}") from None
    return np.array(out, dtype=int)


def write_layout(path, points, labels):
    lines = [LAYOUT_HEADER] + [
        f"{format_float(x)},{format_float(y)},{label}" for (x, y), label in zip(points, labels)
    ]
    atomic_write(path, "\n".join(lines) + "\n")


def read_layout(path):
    points, labels = [], []
    for line_no, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or (line_no == 1 and line.replace(" ", "") == LAYOUT_HEADER):
            continue
        parts = line.split(",", 2)
        if len(parts) != 3:
            raise ParseError(path, line_no, f"expected 'x,y,label', got {raw!r}")
        points.append([_parse_float(p, path, line_no) for p in parts[:2]])
        labels.append(parts[2])
    return np.array(points, dtype=np.float64).reshape(-1, 2), labels


# -- JSON -------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite value {value}")
        return value
    if isinstance(obj, Path):
        return str(obj)
    return obj


def format_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    atomic_write(path, format_json(obj))


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
