"""Characterization of spin-orbit states.

Radial overlap curves, intrinsic/extrinsic OAM, spin textures, spin-projected
intensity and momentum maps, and rotational-symmetry diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
import scipy.fft
import scipy.ndimage
import scipy.optimize

from .field import (
    UP_Z,
    GridSpec,
    SpinDirection,
    SpinorField,
    _pairwise_sum,
    gaussian_wavepacket,
    make_grid,
    norm,
)
from .modes import decompose, oam_expectation
from .operators import apply_spp

__all__ = [
    "ScalarMap2D",
    "VectorMap2D",
    "RadialCurve",
    "DisplacedModeCurves",
    "intensity_map",
    "phase_map",
    "momentum_grid",
    "momentum_map",
    "radial_overlap",
    "local_overlap",
    "spin_texture",
    "extrinsic_oam",
    "displaced_mode_probabilities",
    "fit_gaussian_falloff",
    "polar_resample",
    "angular_harmonics",
    "rotational_symmetry_order",
    "rotation_between",
]

POLAR_ANGLES = 256
POLAR_RADII = 128
SYMMETRY_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class ScalarMap2D:
    """Real map on a cell-centred grid.

    ``kind`` is ``"position"`` (axes in sigma_perp) or ``"momentum"`` (axes in
    1/sigma_perp).
    """

    grid: GridSpec
    values: np.ndarray
    kind: str = "position"
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        return float(_pairwise_sum(self.values) * self.grid.cell_area)

    def centroid(self) -> tuple[float, float]:
        X, Y = self.grid.mesh()
        total = _pairwise_sum(self.values)
        return float(_pairwise_sum(self.values * X) / total), float(_pairwise_sum(self.values * Y) / total)


@dataclass(frozen=True, eq=False)
class VectorMap2D:
    """Per-pixel Bloch vector; ``mask`` is False where the density is negligible."""

    grid: GridSpec
    values: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True, eq=False)
class RadialCurve:
    rho: np.ndarray
    values: np.ndarray
    bin_width: float
    present: np.ndarray

    def at(self, rho: float) -> float:
        """Value in the bin containing ``rho``."""
        i = int(rho // self.bin_width)
        if not 0 <= i < len(self.rho) or not self.present[i]:
            raise ValueError(f"no populated bin at rho = {rho}")
        return float(self.values[i])

    def select(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Populated ``(rho, values)`` with bin centres in ``[lo, hi]``."""
        keep = self.present & (self.rho >= lo) & (self.rho <= hi)
        return self.rho[keep], self.values[keep]


def intensity_map(psi: SpinorField, s: SpinDirection) -> ScalarMap2D:
    """``|<s|psi>|^2`` at every pixel."""
    return ScalarMap2D(psi.grid, np.abs(psi.component(s)) ** 2)


def phase_map(psi: SpinorField, s: SpinDirection) -> ScalarMap2D:
    """``arg <s|psi>`` in ``(-pi, pi]``."""
    return ScalarMap2D(psi.grid, np.angle(psi.component(s)), metadata={"quantity": "phase"})


def momentum_grid(grid: GridSpec) -> GridSpec:
    """Cell-centred wavevector grid conjugate to ``grid`` (square grids only)."""
    if grid.nx != grid.ny:
        raise ValueError("momentum maps need a square grid (nx == ny)")
    dx = grid.pitch[0]
    return GridSpec(grid.nx, grid.ny, math.pi / dx)


def _half_bin_phase(n: int) -> np.ndarray:
    # shifts the DFT frequencies by half a bin so the k samples are cell-centred
    c = n / 2 - 0.5
    return np.exp(2j * np.pi * c * np.arange(n) / n)


def momentum_map(psi: SpinorField, s: SpinDirection) -> ScalarMap2D:
    """``|F{<s|psi>}|^2`` on the conjugate cell-centred grid.

    The continuous unitary Fourier convention is used, so the map integrates
    to the survival probability ``||<s|psi>||^2``. A warning is attached when
    more than 1e-8 of the projected density sits on the outermost pixels.
    """
    grid = psi.grid
    kgrid = momentum_grid(grid)
    amp = psi.component(s)
    ramp = _half_bin_phase(grid.nx)
    spectrum = scipy.fft.fft2(amp * ramp[:, None] * ramp[None, :])
    P = np.abs(spectrum) ** 2 * (grid.cell_area / (2 * np.pi)) ** 2
    dens = np.abs(amp) ** 2
    edge = (
        dens[0].sum() + dens[-1].sum() + dens[1:-1, 0].sum() + dens[1:-1, -1].sum()
    ) * grid.cell_area
    meta: dict[str, Any] = {"survival": float(_pairwise_sum(dens) * grid.cell_area)}
    if edge > 1e-8:
        meta["warnings"] = (f"projected field not contained in the box (edge mass {edge:.2e})",)
    return ScalarMap2D(kgrid, P, kind="momentum", metadata=meta)


def radial_overlap(
    a: SpinorField, b: SpinorField, nbins: int = 256, r_max: float | None = None
) -> RadialCurve:
    """Per-ring normalized overlap ``|sum a^* b| / sqrt(sum |a|^2 sum |b|^2)``.

    Rings have uniform width ``r_max / nbins`` (``r_max`` defaults to the
    half width) and are reported at the mean radius of their pixels. Rings
    without pixels or with no amplitude are flagged absent.
    """
    if a.grid != b.grid:
        raise ValueError("radial_overlap needs fields on the same grid")
    if nbins < 16:
        raise ValueError(f"nbins must be >= 16, got {nbins}")
    grid = a.grid
    r_max = grid.half_width if r_max is None else float(r_max)
    width = r_max / nbins
    rho, _ = grid.polar()
    idx = np.floor(rho / width).astype(np.int64).ravel()
    keep = idx < nbins
    idx = idx[keep]

    def binned(values: np.ndarray) -> np.ndarray:
        return np.bincount(idx, weights=values.ravel()[keep], minlength=nbins)

    cross = a.up.conj() * b.up + a.down.conj() * b.down
    cross_re = binned(cross.real)
    cross_im = binned(cross.imag)
    wa = binned(a.density())
    wb = binned(b.density())
    denom = np.sqrt(wa * wb)
    scale = max(wa.max(), wb.max())
    present = denom > 1e-300 + 1e-30 * scale
    values = np.zeros(nbins)
    values[present] = np.hypot(cross_re[present], cross_im[present]) / denom[present]
    # abscissa is the mean pixel radius in each ring; sparse inner rings sit
    # well off their geometric centre
    counts = np.bincount(idx, minlength=nbins)
    centers = (np.arange(nbins) + 0.5) * width
    filled = counts > 0
    centers[filled] = binned(rho)[filled] / counts[filled]
    return RadialCurve(centers, values, width, present)


def local_overlap(a: SpinorField, b: SpinorField) -> np.ndarray:
    """Pointwise ``|<a(r)|b(r)>| / (|a(r)| |b(r)|)`` between local spinors."""
    cross = a.up.conj() * b.up + a.down.conj() * b.down
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.abs(cross) / np.sqrt(a.density() * b.density())


def spin_texture(psi: SpinorField, threshold: float = 1e-12) -> VectorMap2D:
    """Local Bloch vector ``<chi|sigma|chi> / <chi|chi>``.

    Pixels whose density is below ``threshold`` times the maximum are masked
    and carry a zero vector.
    """
    u, d = psi.up, psi.down
    dens = psi.density()
    mask = dens > threshold * dens.max()
    cross = np.conj(u) * d
    P = np.zeros(psi.grid.shape + (3,))
    P[..., 0] = 2 * cross.real
    P[..., 1] = 2 * cross.imag
    P[..., 2] = np.abs(u) ** 2 - np.abs(d) ** 2
    P[mask] /= dens[mask][:, None]
    P[~mask] = 0.0
    return VectorMap2D(psi.grid, P, mask)


def extrinsic_oam(psi: SpinorField, axis: tuple[float, float]) -> float:
    """Mean OAM of a normalized field about the Cartesian ``axis`` position."""
    if not psi.grid.contains(*axis):
        raise ValueError(f"axis {axis} lies outside the box")
    return oam_expectation(psi, axis)


@dataclass(frozen=True)
class DisplacedModeCurves:
    """Mode probabilities about the packet axis as a function of displacement."""

    rho0: np.ndarray
    probabilities: dict[tuple[int, int], np.ndarray]
    intrinsic_oam: np.ndarray
    extrinsic_oam: np.ndarray


def _displacement_grid(rho0_max: float) -> GridSpec:
    half_width = max(8.0, rho0_max + 8.0)
    n = int(math.ceil(2 * half_width * 16 / 2)) * 2
    return make_grid(n, n, half_width)


def displaced_mode_probabilities(
    q: int, rho0_values: Sequence[float], grid: GridSpec | None = None
) -> DisplacedModeCurves:
    """Probabilities of ``|n, l>`` (``n, l`` in {0, 1}) about the displaced packet axis.

    For each offset a spin-up Gaussian centred at ``(rho0, 0)`` passes an SPP
    of charge ``q`` centred on the grid origin; the output is decomposed
    about the packet's own axis. The default grid keeps at least eight sigma
    of margin around the furthest packet at a pitch of 1/16.
    """
    if int(q) != q:
        raise ValueError(f"q must be an integer, got {q!r}")
    rho0 = np.asarray(rho0_values, dtype=float)
    if rho0.ndim != 1 or rho0.size == 0 or np.any(rho0 < 0):
        raise ValueError("rho0_values must be a non-empty 1D array of non-negative offsets")
    if grid is None:
        grid = _displacement_grid(float(rho0.max()))
    limit = grid.half_width - 6.0
    if rho0.max() > limit:
        raise ValueError(f"rho0 = {rho0.max():g} exceeds box half width minus 6 sigma ({limit:g})")
    keys = [(n, ell) for n in (0, 1) for ell in (0, 1)]
    probs = {k: np.empty(rho0.size) for k in keys}
    intrinsic = np.empty(rho0.size)
    extrinsic = np.empty(rho0.size)
    for i, r0 in enumerate(rho0):
        psi = apply_spp(gaussian_wavepacket(grid, (r0, 0.0), UP_Z), q)
        dec = decompose(psi, n_max=1, ell_range=(0, 1), center=(r0, 0.0))
        for k in keys:
            probs[k][i] = dec.probability(*k)
        intrinsic[i] = oam_expectation(psi, (r0, 0.0))
        extrinsic[i] = oam_expectation(psi, (0.0, 0.0))
    return DisplacedModeCurves(rho0, probs, intrinsic, extrinsic)


def fit_gaussian_falloff(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit of ``A exp(-x^2 / w^2)``; returns ``(A, w, R^2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def model(t, A, w):
        return A * np.exp(-(t**2) / w**2)

    (A, w), _ = scipy.optimize.curve_fit(model, x, y, p0=(max(y.max(), 1e-12), 1.0))
    ss_res = float(np.sum((y - model(x, A, w)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(A), float(abs(w)), r2


def _mass_radius(m: ScalarMap2D, fraction: float = 0.999) -> float:
    rho, _ = m.grid.polar()
    w = np.clip(m.values, 0, None).ravel()
    order = np.argsort(rho.ravel(), kind="stable")
    cum = np.cumsum(w[order])
    i = int(np.searchsorted(cum, fraction * cum[-1]))
    return float(rho.ravel()[order][min(i, cum.size - 1)])


def polar_resample(
    m: ScalarMap2D,
    n_angles: int = POLAR_ANGLES,
    n_radii: int = POLAR_RADII,
    r_max: float | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bilinear resampling onto ``(n_radii, n_angles)`` polar samples about the origin.

    ``r_max`` defaults to 1.5 times the radius enclosing 99.9% of the map's
    mass, capped at the half width. Returns ``(radii, angles, samples)``.
    """
    grid = m.grid
    if r_max is None:
        r_max = min(grid.half_width, 1.5 * _mass_radius(m))
    radii = (np.arange(n_radii) + 0.5) * r_max / n_radii
    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    R, T = np.meshgrid(radii, angles, indexing="ij")
    dx, dy = grid.pitch
    ix = (R * np.cos(T) - grid.x[0]) / dx
    iy = (R * np.sin(T) - grid.y[0]) / dy
    samples = scipy.ndimage.map_coordinates(m.values, [ix, iy], order=1, mode="constant")
    return radii, angles, samples


def angular_harmonics(m: ScalarMap2D, **polar_kwargs) -> np.ndarray:
    """Magnitudes of the angular DFT of the radius-weighted azimuthal profile."""
    radii, _, samples = polar_resample(m, **polar_kwargs)
    profile = np.sum(samples * radii[:, None], axis=0)
    return np.abs(scipy.fft.rfft(profile))


def rotational_symmetry_order(
    m: ScalarMap2D, threshold: float = SYMMETRY_THRESHOLD, **polar_kwargs
) -> int:
    """Dominant nonzero angular harmonic of a non-negative map.

    Returns 0 when every harmonic is at most ``threshold`` times the DC term.
    Ties (within 1e-6 relative) go to the smaller order.
    """
    if not np.all(np.isfinite(m.values)) or m.values.max() <= 0:
        raise ValueError("rotational_symmetry_order needs a map with positive maximum")
    h = angular_harmonics(m, **polar_kwargs)
    dc, rest = h[0], h[1:]
    peak = rest.max()
    if peak <= threshold * dc:
        return 0
    return int(np.flatnonzero(rest >= peak * (1 - 1e-6))[0]) + 1


def rotation_between(a: ScalarMap2D, b: ScalarMap2D, n_angles: int = POLAR_ANGLES) -> float:
    """Angle ``alpha`` in ``(-pi, pi]`` such that ``b`` is ``a`` rotated counterclockwise by ``alpha``.

    Found as the peak of the radius-weighted circular cross-correlation of
    the polar resamplings; resolution is one angular bin ``2 pi / n_angles``.
    """
    r_max = min(a.grid.half_width, 1.5 * max(_mass_radius(a), _mass_radius(b)))
    radii, _, pa = polar_resample(a, n_angles=n_angles, r_max=r_max)
    _, _, pb = polar_resample(b, n_angles=n_angles, r_max=r_max)
    fa = scipy.fft.fft(pa, axis=1)
    fb = scipy.fft.fft(pb, axis=1)
    corr = np.sum(scipy.fft.ifft(np.conj(fa) * fb, axis=1).real * radii[:, None], axis=0)
    shift = int(np.argmax(corr))
    alpha = 2 * np.pi * shift / n_angles
    return alpha - 2 * np.pi if alpha > np.pi else alpha
