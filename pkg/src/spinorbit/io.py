"""Binary field and map dumps, PGM quick-looks and CSV exports.

Both dump formats are little-endian: a 16-byte magic, ``u32 nx``, ``u32 ny``,
``f64 half_width``, then ``f64`` payload in C order of the ``(nx, ny)``
arrays (``iy`` varies fastest). Spinor dumps interleave
``up.re, up.im, down.re, down.im`` per pixel; scalar dumps hold one value per
pixel.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .analysis import RadialCurve, ScalarMap2D, VectorMap2D
from .field import GridSpec, SpinorField

__all__ = [
    "FormatError",
    "SPINOR_MAGIC",
    "SCALAR_MAGIC",
    "write_spinorfield",
    "read_spinorfield",
    "write_scalarmap",
    "read_scalarmap",
    "write_pgm",
    "write_curve_csv",
    "read_curve_csv",
    "write_texture_csv",
]

SPINOR_MAGIC = b"SPINORFIELD\0\0\0\0\0"
SCALAR_MAGIC = b"SCALARMAP2D\0\0\0\0\0"
_HEADER = struct.Struct("<16sIId")


class FormatError(ValueError):
    """A dump file is truncated or carries the wrong magic."""


def _write_dump(path, magic: bytes, grid: GridSpec, payload: np.ndarray) -> None:
    header = _HEADER.pack(magic, grid.nx, grid.ny, grid.half_width)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(payload, dtype="<f8").tobytes())


def _read_dump(path, magic: bytes, per_pixel: int) -> tuple[GridSpec, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file too short for a header")
    found, nx, ny, half_width = _HEADER.unpack_from(raw)
    if found != magic:
        raise FormatError(f"{path}: bad magic {found!r}, expected {magic!r}")
    expected = _HEADER.size + nx * ny * per_pixel * 8
    if len(raw) != expected:
        raise FormatError(f"{path}: {len(raw)} bytes, expected {expected} for {nx}x{ny}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    return GridSpec(nx, ny, half_width), data


def write_spinorfield(psi: SpinorField, path) -> None:
    payload = np.stack([psi.up.real, psi.up.imag, psi.down.real, psi.down.imag], axis=-1)
    _write_dump(path, SPINOR_MAGIC, psi.grid, payload)


def read_spinorfield(path) -> SpinorField:
    grid, data = _read_dump(path, SPINOR_MAGIC, 4)
    v = data.reshape(grid.nx, grid.ny, 4)
    return SpinorField(grid, v[..., 0] + 1j * v[..., 1], v[..., 2] + 1j * v[..., 3])


def write_scalarmap(m: ScalarMap2D, path) -> None:
    _write_dump(path, SCALAR_MAGIC, m.grid, m.values)


def read_scalarmap(path, kind: str = "position") -> ScalarMap2D:
    """The dump does not record whether axes are positions or momenta; pass ``kind``."""
    grid, data = _read_dump(path, SCALAR_MAGIC, 1)
    return ScalarMap2D(grid, data.reshape(grid.shape), kind=kind)


def write_pgm(m: ScalarMap2D, path) -> None:
    """8-bit binary PGM with linear min/max scaling.

    Gray level ``round(255 (v - min) / (max - min))``; a constant map is all
    zeros. The top image row is the largest ``y``, columns run along ``x``.
    """
    v = m.values
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        gray = np.rint(255.0 * (v - lo) / (hi - lo)).astype(np.uint8)
    else:
        gray = np.zeros(v.shape, dtype=np.uint8)
    image = gray.T[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image).tobytes())


def write_curve_csv(curve: RadialCurve, path) -> None:
    """Populated bins as ``rho_over_sigma,value``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rho_over_sigma", "value"])
        for r, v in zip(curve.rho[curve.present], curve.values[curve.present]):
            writer.writerow([repr(float(r)), repr(float(v))])


def read_curve_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["rho_over_sigma", "value"]:
        raise FormatError(f"{path}: unexpected header {rows[0]}")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def write_texture_csv(texture: VectorMap2D, path, stride: int | None = None) -> None:
    """Unmasked Bloch vectors on every ``stride``-th pixel as ``x,y,Px,Py,Pz``.

    The default stride keeps at most 64 samples per axis.
    """
    grid = texture.grid
    if stride is None:
        stride = max(1, -(-max(grid.nx, grid.ny) // 64))
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    offset = stride // 2
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "Px", "Py", "Pz"])
        for i in range(offset, grid.nx, stride):
            for j in range(offset, grid.ny, stride):
                if texture.mask[i, j]:
                    p = texture.values[i, j]
                    writer.writerow(
                        [repr(float(grid.x[i])), repr(float(grid.y[j]))] + [repr(float(c)) for c in p]
                    )
