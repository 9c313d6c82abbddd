"""Deterministic CSV writing/reading with ``#`` metadata comment lines.

All CSV files the package emits share one shape: a ``# schema: <name>`` line,
further ``# key: value`` metadata lines (package version, seed where one
exists), one header row, then data rows.  Floats are rendered with repr()
(shortest round-trip form) so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from . import __version__


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def render_csv(schema: str, columns, rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    buf.write(f"# version: {__version__}\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {format_value(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, schema: str, columns, rows, meta: dict | None = None) -> None:
    text = render_csv(schema, columns, rows, meta)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_csv(path):
    """Read back a package CSV: returns (meta dict, column list, row lists)."""
    meta, columns, rows = {}, None, []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    k, v = body.split(":", 1)
                    meta[k.strip()] = v.strip()
                continue
            cells = next(csv.reader([line]))
            if columns is None:
                columns = cells
            else:
                rows.append(cells)
    return meta, columns or [], rows
