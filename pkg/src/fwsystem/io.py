"""Artifact I/O: lossless CSV, JSON and atomic file replacement."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidField
from .spectral import Field, Grid
from .state import State

FLOAT_FMT = "{:.17g}"


def atomic_write_bytes(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    return str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    atomic_write_text(path, buf.getvalue())


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidField(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    return header, data.reshape(-1, len(header))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def write_json(path, obj):
    atomic_write_text(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_field_csv(path, f: Field):
    write_csv(path, ["x", "value"], zip(f.grid.x, f.values))


def write_state_csv(path, s: State):
    write_csv(path, ["x", "u", "rho_bar"], zip(s.grid.x, s.u, s.rho_bar))


def _check_x(grid: Grid, x: np.ndarray, path):
    if x.shape != grid.x.shape or not np.allclose(x, grid.x, rtol=0, atol=1e-12 * max(1.0, grid.half_period)):
        raise InvalidField(f"{path}: x column does not match the {grid.n_points}-point grid on "
                           f"[-{grid.half_period}, {grid.half_period})")


def read_field_csv(path, grid: Grid, column: str = "value") -> Field:
    header, data = read_csv(path)
    if "x" not in header or column not in header:
        raise InvalidField(f"{path}: expected columns 'x' and {column!r}, got {header}")
    _check_x(grid, data[:, header.index("x")], path)
    return Field(grid, data[:, header.index(column)])


def read_state_csv(path, grid: Grid, t: float = 0.0) -> State:
    header, data = read_csv(path)
    if header[:3] != ["x", "u", "rho_bar"]:
        raise InvalidField(f"{path}: expected header x,u,rho_bar, got {header}")
    _check_x(grid, data[:, 0], path)
    return State(grid, data[:, 1], data[:, 2], t)
