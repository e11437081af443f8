"""Spin-orbit preparation operators and physical-parameter converters.

Every operator acts pointwise on the transverse grid as a 2x2 matrix on the
spinor ``(up, down)``. Operator products follow the usual convention: the
rightmost factor acts first. Projections never renormalize; the fraction of
the norm that survives is recorded in ``metadata["survival"]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import SpinDirection, SpinorField, norm

__all__ = [
    "BB1_DELTA1",
    "BB1_DELTA2",
    "COMPARISON_BETA",
    "OPTIMAL_RHO_C",
    "NEUTRON_GYROMAGNETIC_RATIO",
    "PhysicalParams",
    "apply_spp",
    "apply_magnetic_spp",
    "quadrupole_matrix",
    "apply_quadrupole",
    "apply_bb1",
    "apply_higher_order",
    "apply_gradient",
    "apply_lov",
    "lov_cell_pitch",
    "apply_spin_rotation",
    "project_spin",
    "rho_c_from_physical",
    "lattice_constant",
]

BB1_DELTA1 = math.acos(-1.0 / 8.0)
BB1_DELTA2 = 3.0 * BB1_DELTA1
# relative spin phase used when comparing preparation methods against the mSPP state
COMPARISON_BETA = math.pi / 2
# quadrupole strength maximizing spin-orbit entanglement, in units of sigma_perp
OPTIMAL_RHO_C = 1.82
# CODATA value, rad s^-1 T^-1
NEUTRON_GYROMAGNETIC_RATIO = 1.83247171e8

LOV_QUADRUPOLE_SIGNS = (-1, 1)
LOV_MONOPOLE_SIGNS = (1, 1)


def _derive(psi: SpinorField, up: np.ndarray, down: np.ndarray, **meta) -> SpinorField:
    """New field on the same grid that keeps only the accumulated warnings."""
    return SpinorField(psi.grid, up, down, {"warnings": psi.warnings, **meta})


def _apply_matrix(psi: SpinorField, u00, u01, u10, u11, **meta) -> SpinorField:
    return _derive(psi, u00 * psi.up + u01 * psi.down, u10 * psi.up + u11 * psi.down, **meta)


def _require_positive(name: str, value: float) -> None:
    if not value > 0 or not math.isfinite(value):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


def apply_spp(psi: SpinorField, q: float, alpha0: float = 0.0) -> SpinorField:
    """Spiral phase plate: multiply both spins by ``exp(i (alpha0 + q phi))``."""
    _, phi = psi.grid.polar()
    phase = np.exp(1j * (alpha0 + q * phi))
    out = _derive(psi, phase * psi.up, phase * psi.down)
    if q != int(q):
        out = out.with_warning(f"non-integer topological charge q={q} gives a multivalued wavefront")
    return out


def apply_magnetic_spp(psi: SpinorField, q: float, beta: float = 0.0) -> SpinorField:
    """Magnetic SPP with equal nuclear and magnetic scattering lengths.

    Spin-up passes unchanged; spin-down acquires ``exp(i (beta + q phi))``.
    """
    _, phi = psi.grid.polar()
    out = _derive(psi, psi.up, np.exp(1j * (beta + q * phi)) * psi.down)
    if q != int(q):
        out = out.with_warning(f"non-integer topological charge q={q} gives a multivalued wavefront")
    return out


def quadrupole_matrix(grid, rho_c: float, delta: float = 0.0):
    """Pointwise entries ``(u00, u01, u10, u11)`` of the rotated quadrupole.

    Closed form of ``exp(-i delta sz/2) U_Q(rho_c) exp(+i delta sz/2)``::

        cos(a) 1 + i sin(a) (e^{i(phi-delta)} s+ + e^{-i(phi-delta)} s-),
        a = pi rho / (2 rho_c).
    """
    _require_positive("rho_c", rho_c)
    rho, phi = grid.polar()
    a = np.pi * rho / (2 * rho_c)
    c = np.cos(a)
    s = np.sin(a)
    winding = np.exp(1j * (phi - delta))
    return c, 1j * s * winding, 1j * s * np.conj(winding), c


def apply_quadrupole(psi: SpinorField, rho_c: float, delta: float = 0.0) -> SpinorField:
    """Quadrupole field with full spin flip at radius ``rho_c``, rotated by ``delta`` about z."""
    return _apply_matrix(psi, *quadrupole_matrix(psi.grid, rho_c, delta))


def apply_bb1(psi: SpinorField, rho_c: float) -> SpinorField:
    """Broadband BB1 composite quadrupole sequence.

    Applies ``U(rho_c/2, d1) U(rho_c/4, d2) U(rho_c/2, d1) U(rho_c, 0)`` with
    ``d1 = arccos(-1/8)``, ``d2 = 3 d1``; the rightmost factor acts first.
    """
    _require_positive("rho_c", rho_c)
    out = apply_quadrupole(psi, rho_c, 0.0)
    out = apply_quadrupole(out, rho_c / 2, BB1_DELTA1)
    out = apply_quadrupole(out, rho_c / 4, BB1_DELTA2)
    return apply_quadrupole(out, rho_c / 2, BB1_DELTA1)


def apply_higher_order(psi: SpinorField, j: int, rho_c: float) -> SpinorField:
    """``(U_Q exp(-i pi sx/2) |down><down|)^j U_Q`` for higher-order OAM.

    With a spin-up Gaussian input the result correlates ``l = -j`` with
    spin-up and ``l = -(j+1)`` with spin-down. The post-selection losses stay
    in the norm; ``metadata["survival"]`` is ``||out||^2 / ||in||^2``.
    """
    if int(j) != j or j < 0:
        raise ValueError(f"j must be a non-negative integer, got {j!r}")
    n_in = norm(psi) ** 2
    out = apply_quadrupole(psi, rho_c)
    for _ in range(int(j)):
        # |down><down| then exp(-i pi sx / 2) = -i sx
        out = _derive(out, -1j * out.down, np.zeros_like(out.down))
        out = apply_quadrupole(out, rho_c)
    return out.replace(survival=norm(out) ** 2 / n_in if n_in else 0.0)


def apply_gradient(psi: SpinorField, phi_g: float, phi_m: float, rho_c: float) -> SpinorField:
    """Linear field gradient along ``phi_g`` with field direction ``phi_m``.

    ``exp(-i pi/(2 rho_c) (x cos phi_g + y sin phi_g)(sx cos phi_m + sy sin phi_m))``.
    """
    _require_positive("rho_c", rho_c)
    X, Y = psi.grid.mesh()
    a = np.pi / (2 * rho_c) * (X * np.cos(phi_g) + Y * np.sin(phi_g))
    c = np.cos(a)
    s = np.sin(a)
    return _apply_matrix(
        psi, c, -1j * s * np.exp(-1j * phi_m), -1j * s * np.exp(1j * phi_m), c
    )


def apply_lov(
    psi: SpinorField,
    N: int,
    signs: tuple[int, int] = LOV_QUADRUPOLE_SIGNS,
    rho_c: float = OPTIMAL_RHO_C,
    phi_g: float = math.pi,
    phi_m: float = 0.0,
) -> SpinorField:
    """``N`` repetitions of a perpendicular gradient pair.

    Applies ``(U(phi_g, phi_m) U(phi_g + s_g pi/2, phi_m + s_m pi/2))^N``
    where ``(s_g, s_m) = signs``. Each gradient is given characteristic
    radius ``N rho_c`` so that the sequence is the ``N``-step Trotter
    approximation of a quadrupole with ``rho_c``. The defaults reproduce the
    quadrupole-like lattice (``l_down = -1`` for a spin-up input);
    ``signs=(1, 1)`` gives the monopole-like variant (``l_down = +1``).
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    s_g, s_m = signs
    if s_g not in (-1, 1) or s_m not in (-1, 1):
        raise ValueError(f"signs must be a pair of +1/-1, got {signs!r}")
    _require_positive("rho_c", rho_c)
    step = N * rho_c
    out = psi
    for _ in range(int(N)):
        out = apply_gradient(out, phi_g + s_g * math.pi / 2, phi_m + s_m * math.pi / 2, step)
        out = apply_gradient(out, phi_g, phi_m, step)
    return out


def lov_cell_pitch(N: int, rho_c: float) -> float:
    """Translation period (sigma_perp units) of observables after ``apply_lov``.

    Each gradient factor changes sign when its argument advances by ``2 N rho_c``.
    """
    return 2.0 * N * rho_c


def apply_spin_rotation(psi: SpinorField, axis: SpinDirection, angle: float) -> SpinorField:
    """Uniform SU(2) rotation ``exp(-i angle/2 n.sigma)``."""
    nx, ny, nz = axis.axis
    c = math.cos(angle / 2)
    s = math.sin(angle / 2)
    return _apply_matrix(
        psi,
        c - 1j * s * nz,
        -1j * s * (nx - 1j * ny),
        -1j * s * (nx + 1j * ny),
        c + 1j * s * nz,
    )


def project_spin(psi: SpinorField, direction: SpinDirection) -> SpinorField:
    """Apply ``|s><s|`` without renormalizing; records the survival probability."""
    s = direction.spinor
    amp = psi.component(direction)
    n_in = norm(psi) ** 2
    out = _derive(psi, s[0] * amp, s[1] * amp)
    return out.replace(survival=norm(out) ** 2 / n_in if n_in else 0.0)


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory parameters in SI units; all must be positive.

    Fields that a conversion does not use may be left as ``None``.
    """

    v_z: float
    gamma_n: float = NEUTRON_GYROMAGNETIC_RATIO
    K: float | None = None
    d: float | None = None
    B: float | None = None
    theta: float | None = None
    sigma_perp: float | None = None

    def __post_init__(self) -> None:
        for name in ("v_z", "gamma_n", "K", "d", "B", "theta", "sigma_perp"):
            value = getattr(self, name)
            if value is not None:
                _require_positive(name, value)


def rho_c_from_physical(p: PhysicalParams) -> tuple[float, float | None]:
    """Quadrupole spin-flip radius ``pi v_z / (gamma_n K d)`` in metres.

    Returns ``(rho_c, rho_c / sigma_perp)``; the ratio is ``None`` when
    ``sigma_perp`` is not given.
    """
    if p.K is None or p.d is None:
        raise ValueError("rho_c needs the gradient K and magnet length d")
    rho_c = math.pi * p.v_z / (p.gamma_n * p.K * p.d)
    return rho_c, (rho_c / p.sigma_perp if p.sigma_perp else None)


def lattice_constant(p: PhysicalParams) -> float:
    """LOV lattice constant ``2 pi v_z / (gamma_n |B| tan(theta))`` in metres."""
    if p.B is None or p.theta is None:
        raise ValueError("the lattice constant needs the prism field B and inclination theta")
    if abs(math.cos(p.theta)) < 1e-12:
        raise ValueError("prism inclination of pi/2 is degenerate (tan(theta) diverges)")
    t = math.tan(p.theta)
    if t == 0:
        raise ValueError("tan(theta) must be nonzero")
    return 2 * math.pi * p.v_z / (p.gamma_n * abs(p.B) * abs(t))
