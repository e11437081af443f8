"""Transverse grid, spinor fields and inner products.

Lengths are dimensionless, in units of the transverse coherence length
sigma_perp. Arrays are indexed ``[ix, iy]`` so ``field.up[i, j]`` sits at
``(grid.x[i], grid.y[j])``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "GridError",
    "GridSpec",
    "SpinDirection",
    "SpinorField",
    "make_grid",
    "gaussian_wavepacket",
    "inner_product",
    "norm",
    "normalize",
    "UP_Z",
    "DOWN_Z",
    "UP_X",
    "DOWN_X",
    "UP_Y",
    "DOWN_Y",
]

# Gaussian support (in sigma) required between the packet centre and the box edge.
CONTAINMENT_SIGMA = 6.0


class GridError(ValueError):
    """Raised for invalid grids or fields living on mismatched grids."""


@dataclass(frozen=True)
class GridSpec:
    """Cell-centred square sampling box of half-extent ``half_width``.

    No sample lies on an axis, so the azimuth ``atan2(y, x)`` is defined at
    every pixel.
    """

    nx: int
    ny: int
    half_width: float

    @property
    def pitch(self) -> tuple[float, float]:
        return 2.0 * self.half_width / self.nx, 2.0 * self.half_width / self.ny

    @property
    def cell_area(self) -> float:
        dx, dy = self.pitch
        return dx * dy

    @property
    def shape(self) -> tuple[int, int]:
        return self.nx, self.ny

    @property
    def x(self) -> np.ndarray:
        dx = self.pitch[0]
        return (np.arange(self.nx) - self.nx / 2 + 0.5) * dx

    @property
    def y(self) -> np.ndarray:
        dy = self.pitch[1]
        return (np.arange(self.ny) - self.ny / 2 + 0.5) * dy

    def mesh(self, center: tuple[float, float] = (0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape ``(nx, ny)`` relative to ``center``."""
        return np.meshgrid(self.x - center[0], self.y - center[1], indexing="ij")

    def polar(self, center: tuple[float, float] = (0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
        """Radius and azimuth about ``center``."""
        X, Y = self.mesh(center)
        return np.hypot(X, Y), np.arctan2(Y, X)

    def contains(self, x: float, y: float) -> bool:
        return abs(x) <= self.half_width and abs(y) <= self.half_width


def make_grid(nx: int, ny: int, half_width: float) -> GridSpec:
    """Build a cell-centred grid; ``nx`` and ``ny`` must be even and >= 32."""
    for name, n in (("nx", nx), ("ny", ny)):
        if int(n) != n or n % 2 or n < 32:
            raise GridError(f"{name} must be an even integer >= 32, got {n!r}")
    if not half_width > 0 or not math.isfinite(half_width):
        raise GridError(f"half_width must be positive and finite, got {half_width!r}")
    return GridSpec(int(nx), int(ny), float(half_width))


@dataclass(frozen=True)
class SpinDirection:
    """Point on the Bloch sphere given by polar angle ``theta`` and azimuth ``phi``."""

    theta: float
    phi: float = 0.0

    @classmethod
    def from_axis(cls, axis: Sequence[float]) -> "SpinDirection":
        v = np.asarray(axis, dtype=float)
        length = np.linalg.norm(v)
        if v.shape != (3,) or length == 0 or not np.isfinite(length):
            raise ValueError(f"spin axis must be a finite nonzero 3-vector, got {axis!r}")
        v = v / length
        return cls(float(np.arctan2(np.hypot(v[0], v[1]), v[2])), float(np.arctan2(v[1], v[0])))

    @property
    def axis(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @property
    def spinor(self) -> np.ndarray:
        """Two-component state ``(cos(theta/2), e^{i phi} sin(theta/2))``."""
        return np.array(
            [math.cos(self.theta / 2), np.exp(1j * self.phi) * math.sin(self.theta / 2)],
            dtype=complex,
        )

    def opposite(self) -> "SpinDirection":
        return SpinDirection(math.pi - self.theta, self.phi + math.pi)


UP_Z = SpinDirection(0.0, 0.0)
DOWN_Z = SpinDirection(math.pi, 0.0)
UP_X = SpinDirection(math.pi / 2, 0.0)
DOWN_X = SpinDirection(math.pi / 2, math.pi)
UP_Y = SpinDirection(math.pi / 2, math.pi / 2)
DOWN_Y = SpinDirection(math.pi / 2, -math.pi / 2)


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Spin-up and spin-down amplitudes on a grid.

    ``metadata`` carries warnings and per-operation bookkeeping such as the
    survival probability of a projection. Treat instances as immutable;
    operations always return new fields.
    """

    grid: GridSpec
    up: np.ndarray
    down: np.ndarray
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        up = np.asarray(self.up, dtype=complex)
        down = np.asarray(self.down, dtype=complex)
        if up.shape != self.grid.shape or down.shape != self.grid.shape:
            raise GridError(
                f"component shapes {up.shape}, {down.shape} do not match grid {self.grid.shape}"
            )
        up.flags.writeable = False
        down.flags.writeable = False
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def warnings(self) -> tuple[str, ...]:
        return tuple(self.metadata.get("warnings", ()))

    def replace(self, up=None, down=None, **metadata: Any) -> "SpinorField":
        """Copy with new components; ``metadata`` keys are merged in."""
        meta = dict(self.metadata)
        meta.update(metadata)
        return dataclasses.replace(
            self,
            up=self.up if up is None else up,
            down=self.down if down is None else down,
            metadata=meta,
        )

    def with_warning(self, message: str) -> "SpinorField":
        return self.replace(warnings=self.warnings + (message,))

    def validate(self) -> "SpinorField":
        """Raise ``FloatingPointError`` if any amplitude is NaN or infinite."""
        if not (np.all(np.isfinite(self.up)) and np.all(np.isfinite(self.down))):
            raise FloatingPointError("spinor field contains non-finite amplitudes")
        return self

    def density(self) -> np.ndarray:
        return np.abs(self.up) ** 2 + np.abs(self.down) ** 2

    def component(self, direction: SpinDirection) -> np.ndarray:
        """Amplitude ``<s|psi>`` at every pixel."""
        s = direction.spinor
        return np.conj(s[0]) * self.up + np.conj(s[1]) * self.down

    def __add__(self, other: "SpinorField") -> "SpinorField":
        _check_same_grid(self, other)
        return SpinorField(self.grid, self.up + other.up, self.down + other.down)

    def __mul__(self, scalar: complex) -> "SpinorField":
        return self.replace(up=self.up * scalar, down=self.down * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: SpinorField, b: SpinorField) -> None:
    if a.grid != b.grid:
        raise GridError(f"grid mismatch: {a.grid} vs {b.grid}")


def _pairwise_sum(values: np.ndarray) -> complex:
    # numpy's contiguous sum is a fixed-topology pairwise reduction; BLAS dot
    # products are avoided because their blocking depends on the thread count.
    return np.sum(np.ascontiguousarray(values).ravel())


def inner_product(a: SpinorField, b: SpinorField) -> complex:
    """``<a|b>`` as a Riemann sum over the grid."""
    _check_same_grid(a, b)
    total = _pairwise_sum(np.conj(a.up) * b.up) + _pairwise_sum(np.conj(a.down) * b.down)
    return complex(total * a.grid.cell_area)


def norm(a: SpinorField) -> float:
    return math.sqrt(inner_product(a, a).real)


def normalize(a: SpinorField) -> SpinorField:
    n = norm(a)
    if n == 0 or not math.isfinite(n):
        raise ValueError("cannot normalize a field with zero or non-finite norm")
    return a.replace(up=a.up / n, down=a.down / n)


def _spinor_pair(spin) -> np.ndarray:
    if isinstance(spin, SpinDirection):
        return spin.spinor
    pair = np.asarray(spin, dtype=complex)
    if pair.shape != (2,):
        raise ValueError(f"spin must be a SpinDirection or a pair of amplitudes, got {spin!r}")
    length = np.linalg.norm(pair)
    if abs(length - 1.0) > 1e-9:
        raise ValueError(f"explicit spinor must be normalized, |spinor| = {length}")
    return pair


def gaussian_wavepacket(
    grid: GridSpec,
    center: tuple[float, float] = (0.0, 0.0),
    spin: SpinDirection | Sequence[complex] = UP_Z,
) -> SpinorField:
    """Normalized ``n = l = 0`` packet centred at polar position ``(rho0, phi0)``.

    The amplitude is ``exp(-|r - r0|^2 / 2)`` times the requested spinor. A
    ``warnings`` entry is added when fewer than six sigma separate the packet
    from the box edge.
    """
    rho0, phi0 = center
    if rho0 < 0:
        raise ValueError(f"radial offset must be non-negative, got {rho0}")
    x0, y0 = rho0 * math.cos(phi0), rho0 * math.sin(phi0)
    if not grid.contains(x0, y0):
        raise GridError(f"packet centre ({x0:.3g}, {y0:.3g}) lies outside the box")
    X, Y = grid.mesh((x0, y0))
    envelope = np.exp(-(X**2 + Y**2) / 2)
    s = _spinor_pair(spin)
    psi = normalize(SpinorField(grid, s[0] * envelope, s[1] * envelope))
    margin = grid.half_width - max(abs(x0), abs(y0))
    if margin < CONTAINMENT_SIGMA:
        psi = psi.with_warning(
            f"packet is only {margin:.2f} sigma from the box edge (< {CONTAINMENT_SIGMA:g})"
        )
    return psi
