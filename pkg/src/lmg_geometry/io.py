"""CSV and JSON file formats.

Every table is a header row followed by one row per record. Floats are
written with 17 significant digits ('%.17g'), so reading a file back gives
the same doubles. Non-finite values are written as nan, inf or -inf. The
JSON form holds the same columns: {"columns": [...], "rows": [[...], ...]},
with non-finite floats stored as the strings 'nan', 'inf' or '-inf'.

FieldFile columns: omega_x, xi_y, g11, g12, g22, f12, det_g, min_gap, status
CurvatureFile columns: omega_x, xi_y, R, status
DOS file columns: bin_left, bin_right, count
Grid rows are row-major with omega_x running fastest.
"""
import csv
import io as _io
import json
import math
import os

import numpy as np

from .geometry import CurvatureField
from .qgt import QgtField

FIELD_COLUMNS = ("omega_x", "xi_y", "g11", "g12", "g22", "f12", "det_g", "min_gap", "status")
CURVATURE_COLUMNS = ("omega_x", "xi_y", "R", "status")
DOS_COLUMNS = ("bin_left", "bin_right", "count")
FORMATS = ("csv", "json")


class SchemaError(ValueError):
    pass


def format_value(v):
    """Text form of one cell."""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v) + 0.0  # no negative zero
    if math.isnan(v):
        return "nan"
    return "%.17g" % v


def _json_value(v):
    if isinstance(v, str) or isinstance(v, (bool, np.bool_)):
        return v if isinstance(v, str) else bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else format_value(v)


def format_table(columns, rows, fmt="csv"):
    """Serialize rows to a string in csv or json form."""
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_value(v) for v in r])
        return buf.getvalue()
    if fmt == "json":
        doc = {"columns": list(columns), "rows": [[_json_value(v) for v in r] for r in rows]}
        return json.dumps(doc, indent=1) + "\n"
    raise ValueError(f"format must be one of {FORMATS}")


def write_table(path, columns, rows, fmt=None):
    fmt = fmt or guess_format(path)
    with open(path, "w", newline="") as fh:
        fh.write(format_table(columns, rows, fmt))


def guess_format(path):
    return "json" if os.fspath(path).lower().endswith(".json") else "csv"


def read_table(path, columns, fmt=None):
    """Read a table and check its columns.

    Returns:
        list of rows, each a list of strings (csv) or JSON values.

    Raises:
        SchemaError naming the first missing or unexpected column.
    """
    fmt = fmt or guess_format(path)
    with open(path, newline="") as fh:
        if fmt == "json":
            doc = json.load(fh)
            header, rows = doc.get("columns", []), doc.get("rows", [])
        else:
            data = list(csv.reader(fh))
            if not data:
                raise SchemaError("empty file, no header")
            header, rows = data[0], data[1:]
    for c in columns:
        if c not in header:
            raise SchemaError(f"missing column {c!r}")
    for c in header:
        if c not in columns:
            raise SchemaError(f"unexpected column {c!r}")
    if list(header) != list(columns):
        raise SchemaError(f"columns out of order: expected {','.join(columns)}")
    for k, r in enumerate(rows):
        if len(r) != len(columns):
            raise SchemaError(f"row {k + 1} has {len(r)} cells, expected {len(columns)}")
    return rows


def _float(v):
    return float(v)


def _grid(ox_col, xi_col):
    """Recover the axes of a row-major grid, rejecting anything else."""
    ox = list(dict.fromkeys(ox_col))
    xi = list(dict.fromkeys(xi_col))
    nx, ny = len(ox), len(xi)
    if nx * ny != len(ox_col):
        raise SchemaError(f"non-rectangular grid: {len(ox_col)} rows for {nx} x {ny} axes")
    for k, (a, b) in enumerate(zip(ox_col, xi_col)):
        if a != ox[k % nx] or b != xi[k // nx]:
            raise SchemaError(f"row {k + 1} breaks the omega_x-fastest grid order")
    return np.array(ox, float), np.array(xi, float)


def field_rows(f):
    rows = []
    det = f.det_g
    for iy, xi in enumerate(f.xi_y):
        for ix, ox in enumerate(f.omega_x):
            st = str(f.status[iy, ix])
            if st == "ok":
                vals = [f.g11[iy, ix], f.g12[iy, ix], f.g22[iy, ix], f.f12[iy, ix],
                        det[iy, ix], f.min_gap[iy, ix]]
            else:
                vals = [math.nan] * 6
            rows.append([ox, xi] + vals + [st])
    return rows


def write_field(path, f, fmt=None):
    """Write a QgtField as a FieldFile."""
    write_table(path, FIELD_COLUMNS, field_rows(f), fmt)


def read_field(path, fmt=None):
    """Read a FieldFile into a QgtField (det_g is recomputed, not stored)."""
    rows = read_table(path, FIELD_COLUMNS, fmt)
    if not rows:
        raise SchemaError("field file has no data rows")
    ox, xi = _grid([_float(r[0]) for r in rows], [_float(r[1]) for r in rows])
    shape = (len(xi), len(ox))
    cols = np.array([[_float(v) for v in r[2:8]] for r in rows]).T.reshape(6, *shape)
    status = np.array([str(r[8]) for r in rows], dtype=object).reshape(shape)
    return QgtField(ox, xi, cols[0], cols[1], cols[2], cols[3], cols[5], status)


def curvature_rows(c):
    return [[ox, xi, c.R[iy, ix], str(c.status[iy, ix])]
            for iy, xi in enumerate(c.xi_y) for ix, ox in enumerate(c.omega_x)]


def write_curvature(path, c, fmt=None):
    write_table(path, CURVATURE_COLUMNS, curvature_rows(c), fmt)


def read_curvature(path, fmt=None):
    rows = read_table(path, CURVATURE_COLUMNS, fmt)
    if not rows:
        raise SchemaError("curvature file has no data rows")
    ox, xi = _grid([_float(r[0]) for r in rows], [_float(r[1]) for r in rows])
    shape = (len(xi), len(ox))
    R = np.array([_float(r[2]) for r in rows]).reshape(shape)
    status = np.array([str(r[3]) for r in rows], dtype=object).reshape(shape)
    return CurvatureField(ox, xi, R, status)


def dos_rows(h):
    e = h.bin_edges
    return [[e[k], e[k + 1], int(c)] for k, c in enumerate(h.counts)]


def write_dos(path, h, fmt=None):
    write_table(path, DOS_COLUMNS, dos_rows(h), fmt)
