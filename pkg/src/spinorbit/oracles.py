"""Independent 1D radial quadratures for checking grid results.

These use ``scipy.special.eval_genlaguerre`` and adaptive quadrature, sharing
no code with the grid-based basis in ``modes``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special


def _radial_lg(n: int, ell: int, rho: float) -> float:
    """Continuum-normalized radial factor, so that ``int |R|^2 rho drho dphi = 1``."""
    a = abs(ell)
    log_norm = 0.5 * (math.lgamma(n + 1) - math.lgamma(n + a + 1) - math.log(math.pi))
    return math.exp(log_norm - rho * rho / 2) * rho**a * special.eval_genlaguerre(n, a, rho * rho)


def displaced_spp_coefficient(n: int, ell: int, q: int, rho0: float) -> float:
    """``<n, ell| e^{i q phi} |gaussian at rho0>`` in modulus.

    The angular integral of the displaced Gaussian gives a modified Bessel
    function, leaving a radial quadrature.
    """
    m = abs(ell - q)

    def integrand(rho: float) -> float:
        bessel = special.ive(m, rho * rho0) * math.exp(-((rho - rho0) ** 2) / 2)
        return _radial_lg(n, ell, rho) * bessel * rho

    upper = rho0 + 12.0 + 2.0 * math.sqrt(n + abs(ell) + 1)
    value, _ = integrate.quad(integrand, 0.0, upper, limit=400, epsabs=1e-14, epsrel=1e-12)
    return abs(2 * math.pi * value / math.sqrt(math.pi))


def spp_probability(n: int, q: int) -> float:
    """``|c(n, q)|^2`` for an on-axis Gaussian after a charge-``q`` phase plate."""
    return displaced_spp_coefficient(n, q, q, 0.0) ** 2


def spp_captured(q: int, n_max: int) -> float:
    """Mass of the on-axis SPP state captured by ``n <= n_max`` at ``ell = q``."""
    return float(sum(spp_probability(n, q) for n in range(n_max + 1)))


def flip_probability(rho_c: float) -> float:
    """Spin-flip probability of a spin-up Gaussian under one quadrupole.

    ``int 2 rho exp(-rho^2) sin^2(pi rho / (2 rho_c)) drho``, which is also the
    survival of a single ``j = 1`` higher-order step.
    """
    f = lambda rho: 2 * rho * math.exp(-rho * rho) * math.sin(math.pi * rho / (2 * rho_c)) ** 2
    value, _ = integrate.quad(f, 0.0, 12.0, limit=400, epsabs=1e-15, epsrel=1e-13)
    return value


def quadrupole_overlap(rho: np.ndarray, rho_c: float) -> np.ndarray:
    """Local overlap of the quadrupole state with the ``beta = pi/2`` mSPP state."""
    return np.abs(np.sin(np.pi * np.asarray(rho) / (2 * rho_c) + np.pi / 4))
