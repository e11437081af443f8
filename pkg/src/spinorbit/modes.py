"""Laguerre-Gauss basis, mode decomposition and orbital angular momentum."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import scipy.fft

from .field import GridSpec, SpinorField, _pairwise_sum, norm

__all__ = [
    "MAX_N",
    "MAX_ELL",
    "ModeIndex",
    "ModeDecomposition",
    "laguerre",
    "lg_mode",
    "decompose",
    "synthesize",
    "oam_expectation",
    "angular_momentum",
    "write_decomposition_csv",
]

MAX_N = 64
MAX_ELL = 64

SPINS = ("up", "down")


def laguerre(n_max: int, alpha: int, x: np.ndarray) -> np.ndarray:
    """Generalized Laguerre polynomials ``L_n^alpha(x)`` for ``n = 0..n_max``.

    Uses the three-term upward recurrence in ``n``; returns an array of shape
    ``(n_max + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 + alpha - x
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 1 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1)
    return out


def _check_indices(n: int, ell: int) -> None:
    if int(n) != n or not 0 <= n <= MAX_N:
        raise ValueError(f"radial index n must be an integer in [0, {MAX_N}], got {n!r}")
    if int(ell) != ell or abs(ell) > MAX_ELL:
        raise ValueError(f"azimuthal index must be an integer with |l| <= {MAX_ELL}, got {ell!r}")


def _radial_stack(
    grid: GridSpec, n_max: int, ell: int, rho: np.ndarray, multiplicity: int = 1
) -> np.ndarray:
    """Real radial profiles for ``n = 0..n_max`` at fixed ``|ell|``, grid-normalized.

    ``multiplicity`` counts how many grid pixels each entry of ``rho`` stands for.
    """
    a = abs(ell)
    rho2 = rho**2
    # log-space prefactor keeps xi^|l| and the factorial ratio in range for large l
    log_env = a * np.log(rho) - rho2 / 2
    log_norm = np.array(
        [0.5 * (math.lgamma(n + 1) - math.lgamma(n + a + 1) - math.log(math.pi)) for n in range(n_max + 1)]
    )
    L = laguerre(n_max, a, rho2)
    profiles = L * np.exp(log_env + log_norm[:, None, None])
    norms = np.sqrt(
        np.array([_pairwise_sum(p**2) for p in profiles]) * grid.cell_area * multiplicity
    )
    return profiles / norms[:, None, None]


def lg_mode(
    grid: GridSpec, n: int, ell: int, center: tuple[float, float] = (0.0, 0.0)
) -> np.ndarray:
    """Scalar Laguerre-Gauss mode ``|n, ell>`` with unit norm on ``grid``.

    ``center`` is the Cartesian position of the mode axis.
    """
    _check_indices(n, ell)
    rho, phi = grid.polar(center)
    radial = _radial_stack(grid, n, ell, rho)[n]
    return radial * np.exp(1j * ell * phi)


@dataclass(frozen=True, order=True)
class ModeIndex:
    n: int
    ell: int
    spin: str

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if self.spin not in SPINS:
            raise ValueError(f"spin must be one of {SPINS}, got {self.spin!r}")


@dataclass(frozen=True)
class ModeDecomposition:
    """Coefficients ``c(n, l, s) = <n, l, s | psi>`` on a truncated window."""

    coefficients: dict[ModeIndex, complex]
    n_max: int
    ell_min: int
    ell_max: int
    captured: float
    residual: float
    center: tuple[float, float] = (0.0, 0.0)
    grid: GridSpec | None = field(default=None, compare=False)

    def __getitem__(self, key: tuple[int, int, str]) -> complex:
        return self.coefficients[ModeIndex(*key)]

    def probability(self, n: int, ell: int, spin: str | None = None) -> float:
        """``|c|^2`` for one spin, or summed over both spins when ``spin`` is None."""
        spins = SPINS if spin is None else (spin,)
        return sum(abs(self.coefficients[ModeIndex(n, ell, s)]) ** 2 for s in spins)

    def ell_weights(self) -> dict[tuple[int, str], float]:
        """Total ``|c|^2`` per ``(l, spin)`` summed over ``n``."""
        out: dict[tuple[int, str], float] = {}
        for idx, c in self.coefficients.items():
            out[(idx.ell, idx.spin)] = out.get((idx.ell, idx.spin), 0.0) + abs(c) ** 2
        return out

    def items(self) -> Iterator[tuple[ModeIndex, complex]]:
        return iter(self.coefficients.items())


def _fold_quadrants(a: np.ndarray) -> np.ndarray:
    """Sum of the four mirror images of ``a`` on the upper-right quadrant."""
    h, k = a.shape[0] // 2, a.shape[1] // 2
    return a[h:, k:] + a[h - 1 :: -1, k:] + a[h:, k - 1 :: -1] + a[h - 1 :: -1, k - 1 :: -1]


def decompose(
    psi: SpinorField,
    n_max: int = 20,
    ell_range: tuple[int, int] = (-8, 8),
    center: tuple[float, float] = (0.0, 0.0),
) -> ModeDecomposition:
    """Project ``psi`` onto ``|n, l> (x) |s>`` for ``n <= n_max`` and ``l`` in ``ell_range``.

    Coefficients are stored in ``(n, l, s)`` order. ``residual`` is
    ``||psi||^2 - captured`` (``1 - captured`` for a normalized input).
    """
    ell_min, ell_max = ell_range
    if ell_min > ell_max:
        raise ValueError(f"empty azimuthal range {ell_range}")
    _check_indices(n_max, ell_min)
    _check_indices(n_max, ell_max)
    grid = psi.grid
    rho, phi = grid.polar(center)
    dA = grid.cell_area
    # about the grid centre the radius is mirror symmetric, so the radial
    # basis is evaluated on one quadrant and the integrand folded onto it
    fold = tuple(center) == (0.0, 0.0)
    if fold:
        rho = rho[grid.nx // 2 :, grid.ny // 2 :]
    raw: dict[ModeIndex, complex] = {}
    for ell in range(ell_min, ell_max + 1):
        radial = _radial_stack(grid, n_max, ell, rho, 4 if fold else 1)
        twist = np.exp(-1j * ell * phi)
        for spin, comp in zip(SPINS, (psi.up, psi.down)):
            weighted = _fold_quadrants(twist * comp) if fold else twist * comp
            for n in range(n_max + 1):
                raw[ModeIndex(n, ell, spin)] = complex(_pairwise_sum(radial[n] * weighted) * dA)
    coefficients = dict(sorted(raw.items()))
    captured = float(sum(abs(c) ** 2 for c in coefficients.values()))
    total = norm(psi) ** 2
    return ModeDecomposition(
        coefficients, n_max, ell_min, ell_max, captured, total - captured, tuple(center), grid
    )


def synthesize(decomposition: ModeDecomposition, grid: GridSpec | None = None) -> SpinorField:
    """Rebuild the field ``sum c(n,l,s) |n,l,s>`` from a decomposition."""
    grid = grid or decomposition.grid
    if grid is None:
        raise ValueError("a grid is required to synthesize a decomposition")
    rho, phi = grid.polar(decomposition.center)
    up = np.zeros(grid.shape, dtype=complex)
    down = np.zeros(grid.shape, dtype=complex)
    for ell in range(decomposition.ell_min, decomposition.ell_max + 1):
        radial = _radial_stack(grid, decomposition.n_max, ell, rho)
        twist = np.exp(1j * ell * phi)
        for n in range(decomposition.n_max + 1):
            mode = radial[n] * twist
            up += decomposition.coefficients[ModeIndex(n, ell, "up")] * mode
            down += decomposition.coefficients[ModeIndex(n, ell, "down")] * mode
    return SpinorField(grid, up, down)


def _wavenumbers(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    dx, dy = grid.pitch
    kx = 2 * np.pi * scipy.fft.fftfreq(grid.nx, dx)
    ky = 2 * np.pi * scipy.fft.fftfreq(grid.ny, dy)
    return kx[:, None], ky[None, :]


def angular_momentum(psi: SpinorField, axis: tuple[float, float] = (0.0, 0.0)) -> float:
    """``<(x - x0) k_y - (y - y0) k_x>`` with spectral derivatives, both spins summed.

    No normalization is applied; divide by ``norm(psi)**2`` for a mean value.
    """
    kx, ky = _wavenumbers(psi.grid)
    X, Y = psi.grid.mesh(axis)
    total = 0.0
    for comp in (psi.up, psi.down):
        spectrum = scipy.fft.fft2(comp)
        dx_comp = scipy.fft.ifft2(1j * kx * spectrum)
        dy_comp = scipy.fft.ifft2(1j * ky * spectrum)
        lz = -1j * (X * dy_comp - Y * dx_comp)
        total += _pairwise_sum(np.conj(comp) * lz).real
    return float(total * psi.grid.cell_area)


def oam_expectation(psi: SpinorField, axis: tuple[float, float] = (0.0, 0.0), tol: float = 1e-6) -> float:
    """Mean orbital angular momentum (units of hbar) about ``axis`` for a normalized field."""
    n2 = norm(psi) ** 2
    if abs(n2 - 1.0) > tol:
        raise ValueError(f"oam_expectation needs a normalized field, got norm^2 = {n2:.6g}")
    return angular_momentum(psi, axis)


def write_decomposition_csv(decomposition: ModeDecomposition, path) -> None:
    """CSV with header ``n,ell,spin,re,im,prob`` and trailing ``captured``/``residual`` rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "ell", "spin", "re", "im", "prob"])
        for idx, c in decomposition.items():
            writer.writerow([idx.n, idx.ell, idx.spin, repr(c.real), repr(c.imag), repr(abs(c) ** 2)])
        writer.writerow(["captured", "", "", "", "", repr(decomposition.captured)])
        writer.writerow(["residual", "", "", "", "", repr(decomposition.residual)])
