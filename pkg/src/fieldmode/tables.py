"""Deterministic table, grid and summary emission with provenance headers.

Every artifact starts with '#'-prefixed header lines carrying the tool
version, the run parameters and any block-specific metadata, so a table can be
traced back to its exact inputs.  Floats are always written as '%.12e', which
makes repeated runs byte-identical.
"""

from __future__ import annotations

import json
import os
from typing import Mapping

import numpy as np

from . import __version__

_FLOAT_FMT = "%.12e"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % float(value)
    return str(value)


def _header_lines(meta: Mapping) -> list[str]:
    lines = [f"# fieldmode {__version__}"]
    for key in sorted(meta):
        val = meta[key]
        if isinstance(val, Mapping):
            val = json.dumps(val, sort_keys=True, default=_fmt)
        lines.append(f"# {key} = {_fmt(val) if not isinstance(val, str) else val}")
    return lines


def write_table(path: str, columns: Mapping[str, np.ndarray], meta: Mapping) -> None:
    """Comma-separated table with one header block; columns share a length."""
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[k])) for k in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("all columns must have equal length")
    lines = _header_lines(meta)
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    _write(path, lines)


def write_grid(path: str, matrix: np.ndarray, axis: np.ndarray, meta: Mapping) -> None:
    """Plain real matrix block after the header; axis coordinates as one header row."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("grid payload must be a 2-D matrix")
    if np.iscomplexobj(m):
        raise ValueError("grid payload must be real; split complex data beforehand")
    lines = _header_lines(meta)
    lines.append("# axis = " + " ".join(_FLOAT_FMT % v for v in np.asarray(axis)))
    for row in m:
        lines.append(" ".join(_FLOAT_FMT % v for v in row))
    _write(path, lines)


def write_summary(path: str, payload: Mapping) -> None:
    """Run summary as canonical JSON (sorted keys, fixed float formatting)."""
    def default(obj):
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating, float)):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, complex):
            return {"re": obj.real, "im": obj.imag}
        raise TypeError(f"cannot serialize {type(obj)}")

    text = json.dumps(payload, sort_keys=True, indent=2, default=default)
    _write(path, text.splitlines())


def _write(path: str, lines: list[str]) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_table(path: str) -> tuple[dict[str, np.ndarray], list[str]]:
    """Read back a table written by write_table; returns (columns, header lines)."""
    header: list[str] = []
    rows: list[list[str]] = []
    names: list[str] | None = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                header.append(line)
            elif names is None:
                names = line.split(",")
            elif line:
                rows.append(line.split(","))
    if names is None:
        raise ValueError(f"{path}: no column header found")
    data = np.array(rows, dtype=object)
    out: dict[str, np.ndarray] = {}
    for k, name in enumerate(names):
        col = data[:, k] if len(rows) else np.array([])
        try:
            out[name] = col.astype(float)
        except ValueError:
            out[name] = col.astype(str)
    return out, header
