"""Binary field snapshots.

Format: magic bytes "KSF1"; unsigned 32-bit little-endian dimension d;
d unsigned 32-bit little-endian extents; row-major float64 little-endian
values. Round trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from ksflow.spectral import ScalarField, TorusGrid

MAGIC = b"KSF1"


class SnapshotFormatError(Exception):
    """Malformed snapshot file (bad magic, truncation, extent mismatch)."""


def write_snapshot(field: ScalarField, path) -> None:
    grid = field.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", grid.d))
        fh.write(struct.pack(f"<{grid.d}I", *grid.shape))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path, grid: TorusGrid | None = None) -> ScalarField:
    """Read a snapshot; if `grid` is given the extents must match it."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic, not a KSF1 snapshot")
    offset = 4
    if len(raw) < offset + 4:
        raise SnapshotFormatError(f"{path}: truncated header")
    (d,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if d < 1 or d > 8:
        raise SnapshotFormatError(f"{path}: implausible dimension {d}")
    if len(raw) < offset + 4 * d:
        raise SnapshotFormatError(f"{path}: truncated extents")
    extents = struct.unpack_from(f"<{d}I", raw, offset)
    offset += 4 * d
    npoints = 1
    for e in extents:
        npoints *= e
    expected = offset + 8 * npoints
    if len(raw) < expected:
        raise SnapshotFormatError(
            f"{path}: truncated payload, expected {expected} bytes, got {len(raw)}"
        )
    if len(raw) > expected:
        raise SnapshotFormatError(f"{path}: trailing bytes beyond payload")
    values = np.frombuffer(raw, dtype="<f8", count=npoints, offset=offset)
    values = values.reshape(extents).astype(np.float64)
    if grid is not None:
        if tuple(extents) != grid.shape:
            raise SnapshotFormatError(
                f"{path}: extents {tuple(extents)} do not match grid {grid.shape}"
            )
        return ScalarField(grid, values)
    if len(set(extents)) != 1:
        raise SnapshotFormatError(
            f"{path}: anisotropic extents {tuple(extents)} are not supported"
        )
    return ScalarField(TorusGrid(d, extents[0]), values)


def describe_snapshot(path) -> dict:
    """Header and basic statistics, for the CLI inspect verb."""
    field = read_snapshot(path)
    v = field.values
    return {
        "dim": field.grid.d,
        "extents": "x".join(str(s) for s in field.grid.shape),
        "min": float(v.min()),
        "max": float(v.max()),
        "mean": float(v.mean()),
    }
