"""File formats: flat binary grids, CSV tables, and binary PGM rasters.

Binary grid layout (little-endian):

    bytes 0-3    magic, b"LQGF" for fields / b"LQGD" for distance maps
    bytes 4-7    format version (u32, currently 1)
    bytes 8-11   n (u32)
    bytes 12-15  field kind code (LQGF) or flag word (LQGD)
    bytes 16-23  spacing (f64)
    bytes 24-    n*n f64 values, row-major

Distance maps never serialize raw floating infinity: unreached vertices are
written as the largest finite double and bit 0 of the flag word records
that unreached vertices are present. Readers restore +inf.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .field import FieldGrid, FieldKind

MAGIC_FIELD = b"LQGF"
MAGIC_DIST = b"LQGD"
FORMAT_VERSION = 1
DIST_SENTINEL = np.finfo(np.float64).max
FLAG_HAS_UNREACHED = 1

_HEADER = struct.Struct("<4sIII")
_SPACING = struct.Struct("<d")


def _write_grid(path, magic: bytes, n: int, word: int, spacing: float,
                values: np.ndarray) -> None:
    payload = np.ascontiguousarray(values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, FORMAT_VERSION, n, word))
        fh.write(_SPACING.pack(spacing))
        fh.write(payload.tobytes())


def _read_grid(path, magic: bytes):
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise InvalidParameterError(f"{path}: truncated header")
        got, version, n, word = _HEADER.unpack(head)
        if got != magic:
            raise InvalidParameterError(
                f"{path}: bad magic {got!r}, expected {magic!r}")
        if version != FORMAT_VERSION:
            raise InvalidParameterError(f"{path}: unsupported version {version}")
        (spacing,) = _SPACING.unpack(fh.read(_SPACING.size))
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8")
        if data.size != n * n:
            raise InvalidParameterError(f"{path}: truncated payload")
    return n, word, spacing, data.reshape(n, n).astype(np.float64)


def write_field_bin(field: FieldGrid, path) -> None:
    _write_grid(path, MAGIC_FIELD, field.n, int(field.kind), field.spacing,
                field.values)


def read_field_bin(path) -> FieldGrid:
    """Read a field grid. Sampler metadata (seed, scale range) is not stored
    in the format, so those attributes come back empty."""
    n, word, spacing, values = _read_grid(path, MAGIC_FIELD)
    return FieldGrid(n, spacing, values, FieldKind(word))


def write_dist_bin(dist: np.ndarray, spacing: float, path) -> None:
    dist = np.asarray(dist, dtype=np.float64)
    unreached = ~np.isfinite(dist)
    flags = FLAG_HAS_UNREACHED if unreached.any() else 0
    out = dist.copy()
    out[unreached] = DIST_SENTINEL
    _write_grid(path, MAGIC_DIST, dist.shape[0], flags, spacing, out)


def read_dist_bin(path) -> tuple[np.ndarray, float]:
    _, word, spacing, values = _read_grid(path, MAGIC_DIST)
    if word & FLAG_HAS_UNREACHED:
        values[values == DIST_SENTINEL] = np.inf
    return values, spacing


# -- CSV tables ----------------------------------------------------------------


def _write_xy_table(path, header: str, spacing: float, grid: np.ndarray,
                    transform=None) -> None:
    n = grid.shape[0]
    cols, rows = np.meshgrid(np.arange(n), np.arange(n))
    val = grid if transform is None else transform(grid)
    table = np.column_stack([
        (cols * spacing).reshape(-1),
        (rows * spacing).reshape(-1),
        np.asarray(val, dtype=np.float64).reshape(-1),
    ])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=header,
               comments="")


def write_field_csv(field: FieldGrid, path) -> None:
    _write_xy_table(path, "x,y,value", field.spacing, np.asarray(field.values))


def write_dist_csv(dist: np.ndarray, spacing: float, path) -> None:
    def clamp(d):
        out = np.array(d, dtype=np.float64)
        out[~np.isfinite(out)] = DIST_SENTINEL
        return out

    _write_xy_table(path, "x,y,dist", spacing, np.asarray(dist), clamp)


def write_measure_csv(cell_mass: np.ndarray, spacing: float, path) -> None:
    _write_xy_table(path, "x,y,mass", spacing, np.asarray(cell_mass))


def write_vertices_csv(vertices, spacing: float, path) -> None:
    """CSV list of (x, y) physical positions of a vertex path."""
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for r, c in vertices:
            fh.write(f"{c * spacing:.17g},{r * spacing:.17g}\n")


# -- PGM rasters ---------------------------------------------------------------


def pgm_bytes(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 2:
        raise InvalidParameterError("raster must be a 2-D uint8 array")
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()


def write_pgm(img: np.ndarray, path) -> None:
    Path(path).write_bytes(pgm_bytes(img))


def json_dumps(obj) -> str:
    """Deterministic JSON encoding (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, indent=2)
