"""Snapshot matrices and their binary/CSV persistence.

A snapshot matrix stacks flattened (ny, nx) fields as columns, one per
sampling instant.  Flattening is fixed: linear index = iy * nx + ix.
The on-disk format (KSNP v1) is sealed and bit-exact:

    bytes 0-3   ASCII "KSNP"
    u32 LE      version (= 1)
    u32 LE      field tag (0 = h, 1 = u, 2 = v, 3 = other)
    u32 LE      flags (bit 0 = nondimensional)
    u32 LE      nx
    u32 LE      ny
    u32 LE      nsnap
    f64 LE      dt (sampling interval)
    f64 LE      dx
    f64 LE      dy
    payload     nsnap snapshots, each nx*ny f64 LE, flattening order
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (BadMagic, CorruptHeader, IndexOutOfRange, ShapeMismatch,
                     TooFewColumns, UnsupportedVersion)
from .swe import Grid

_MAGIC = b"KSNP"
_VERSION = 1
_HEADER = struct.Struct("<4s6I3d")


class FieldTag(enum.IntEnum):
    h = 0
    u = 1
    v = 2
    other = 3


@dataclass(frozen=True)
class SnapshotMatrix:
    """Space-time data matrix, shape (nx*ny, nsnap), plus sampling metadata."""

    data: np.ndarray
    nx: int
    ny: int
    dt: float
    dx: float
    dy: float
    field_tag: FieldTag
    nondimensional: bool = False

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] != self.nx * self.ny:
            raise ShapeMismatch(
                f"data shape {self.data.shape} does not match nx*ny = {self.nx * self.ny}")
        if self.data.shape[1] < 2:
            raise TooFewColumns("snapshot matrix needs at least 2 columns")

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]

    def field(self, index: int) -> np.ndarray:
        """Un-flatten snapshot ``index`` back to a (ny, nx) array."""
        if not 0 <= index < self.n_snapshots:
            raise IndexOutOfRange(f"snapshot index {index} not in [0, {self.n_snapshots})")
        return self.data[:, index].reshape(self.ny, self.nx)


@dataclass(frozen=True)
class ShiftedPair:
    """The snapshot matrix split into its first and last Nt columns."""

    v0: np.ndarray
    v1: np.ndarray


def assemble(fields: Sequence[np.ndarray], dt: float, tag: FieldTag, grid: Grid,
             nondimensional: bool = False) -> SnapshotMatrix:
    """Stack (ny, nx) fields, ordered by time, into a snapshot matrix."""
    if len(fields) < 2:
        raise TooFewColumns("need at least 2 fields to assemble")
    shape = (grid.ny, grid.nx)
    for i, f in enumerate(fields):
        if f.shape != shape:
            raise ShapeMismatch(f"field {i} has shape {f.shape}, expected {shape}")
    data = np.empty((grid.nx * grid.ny, len(fields)), dtype=np.float64)
    for i, f in enumerate(fields):
        data[:, i] = np.asarray(f, dtype=np.float64).reshape(-1)
    return SnapshotMatrix(data=data, nx=grid.nx, ny=grid.ny, dt=dt,
                          dx=grid.dx, dy=grid.dy, field_tag=FieldTag(tag),
                          nondimensional=nondimensional)


def split(matrix: SnapshotMatrix) -> ShiftedPair:
    """Form the shifted pair: v0 = columns 0..Nt-1, v1 = columns 1..Nt."""
    if matrix.n_snapshots < 2:
        raise TooFewColumns("need at least 2 columns to split")
    return ShiftedPair(v0=matrix.data[:, :-1], v1=matrix.data[:, 1:])


def save(matrix: SnapshotMatrix, path) -> None:
    """Write a KSNP v1 file; load(save(m)) is bit-identical to m."""
    header = _HEADER.pack(_MAGIC, _VERSION, int(matrix.field_tag),
                          1 if matrix.nondimensional else 0,
                          matrix.nx, matrix.ny, matrix.n_snapshots,
                          matrix.dt, matrix.dx, matrix.dy)
    payload = np.ascontiguousarray(matrix.data.T, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load(path) -> SnapshotMatrix:
    """Read a KSNP v1 file written by :func:`save`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise CorruptHeader(f"{path}: file shorter than the magic")
    if raw[:4] != _MAGIC:
        raise BadMagic(f"{path}: expected {_MAGIC!r}, found {raw[:4]!r}")
    if len(raw) < _HEADER.size:
        raise CorruptHeader(f"{path}: truncated header ({len(raw)} bytes)")
    _, version, tag, flags, nx, ny, nsnap, dt, dx, dy = _HEADER.unpack_from(raw)
    if version != _VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, expected {_VERSION}")
    if tag > 3 or nx == 0 or ny == 0 or nsnap < 2:
        raise CorruptHeader(f"{path}: implausible header (tag={tag}, nx={nx}, "
                            f"ny={ny}, nsnap={nsnap})")
    expected = _HEADER.size + 8 * nx * ny * nsnap
    if len(raw) != expected:
        raise CorruptHeader(f"{path}: {len(raw)} bytes, expected {expected}")
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    data = payload.reshape(nsnap, nx * ny).T.copy()
    return SnapshotMatrix(data=data, nx=nx, ny=ny, dt=dt, dx=dx, dy=dy,
                          field_tag=FieldTag(tag), nondimensional=bool(flags & 1))


def write_field_csv(field: np.ndarray, path) -> None:
    """Write a 2D field as bare CSV: one line per y-row, LF endings,
    17 significant digits (lossless for doubles)."""
    with open(path, "w", newline="") as fh:
        for row in np.asarray(field):
            fh.write(",".join("%.17g" % x for x in row))
            fh.write("\n")


def export_csv(matrix: SnapshotMatrix, snapshot_index: int, path) -> None:
    """Export one snapshot as an ny x nx CSV grid, no header."""
    write_field_csv(matrix.field(snapshot_index), path)


__all__ = [
    "FieldTag", "SnapshotMatrix", "ShiftedPair",
    "assemble", "split", "save", "load", "export_csv", "write_field_csv",
]
