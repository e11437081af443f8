"""Acceptance checks.

Each criterion builds its states from scratch, compares against closed forms
or independent 1D quadratures (:mod:`spinorbit.oracles`) and reports a single
pass/fail line. ``run_criteria(size=512)`` is the full suite; the ``selftest``
command runs it at ``size=256``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import oracles
from .analysis import (
    displaced_mode_probabilities,
    extrinsic_oam,
    fit_gaussian_falloff,
    intensity_map,
    momentum_map,
    radial_overlap,
    rotation_between,
    rotational_symmetry_order,
)
from .field import UP_X, SpinDirection, SpinorField, gaussian_wavepacket, make_grid, norm
from .modes import decompose, lg_mode, oam_expectation
from .operators import (
    OPTIMAL_RHO_C,
    COMPARISON_BETA,
    PhysicalParams,
    apply_bb1,
    apply_gradient,
    apply_higher_order,
    apply_lov,
    apply_magnetic_spp,
    apply_quadrupole,
    apply_spin_rotation,
    apply_spp,
    lattice_constant,
    rho_c_from_physical,
)
from .tomography import (
    Sinogram,
    central_window,
    make_sinogram_filter_rotation,
    nrmse,
    reconstruct_fbp,
    sinogram_from_map,
)

__all__ = ["Outcome", "Criterion", "CRITERIA", "SIZES", "run_criteria", "check_selection_rule"]

UNITARITY_TOL = 1e-12
UNITARITY_CASES = 100
OAM_TOL = 1e-6
LEAK_TOL = 1e-8
IDENTITY_TOL = 1e-12
OVERLAP_CURVE_TOL = 5e-3
OVERLAP_RHO_MAX = 3.0
BB1_WIDTH_RATIO = 2.0
P01_TOL = 1e-3
CAPTURED_MIN = 0.999
P01_FAR_MAX = 0.02
FALLOFF_R2 = 0.99
EXTRINSIC_TOL = 1e-2
NRMSE_MAX = 0.10
EQUIVALENCE_TOL = 1e-3
SURVIVAL_TOL = 1e-6
SIG_FIGS = 4
# hand arithmetic for v_z = 2000 m/s, gamma_n = 1.832e8, K = 10 T/m, d = 1 m, B = 0.5 T, tan(theta) = 1
HAND_RHO_C = 3.430e-6
HAND_LATTICE = 1.372e-4

RHO_C = OPTIMAL_RHO_C


@dataclass(frozen=True)
class Settings:
    """Grid choices per suite size."""

    base: int  # nx = ny for the default half width 8
    tomo_half_width: float  # position box for the FBP round trip
    equivalence_half_width: float  # position box for the filter-rotation check
    overlap_bins: int
    displaced_pitch: float


SIZES = {
    512: Settings(512, 32.0, 16.0, 256, 1 / 16),
    256: Settings(256, 16.0, 12.0, 256, 1 / 8),
}


@dataclass(frozen=True)
class Outcome:
    passed: bool
    detail: str


@dataclass(frozen=True)
class Criterion:
    ident: str
    title: str
    check: Callable[[Settings], Outcome]


@dataclass(frozen=True)
class Result:
    ident: str
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.ident} {self.title}: {self.detail} [{self.seconds:.1f}s]"


def _grid(s: Settings, half_width: float = 8.0):
    n = int(round(s.base * half_width / 8.0 / 2)) * 2
    return make_grid(n, n, half_width)


def _msp_target(grid) -> SpinorField:
    """mSPP state with q = -1 and the comparison phase, from an x-polarized Gaussian."""
    return apply_magnetic_spp(gaussian_wavepacket(grid, (0, 0), UP_X), -1, COMPARISON_BETA)


def _fmt(x: float) -> str:
    return f"{x:.3g}"


# 1 ---------------------------------------------------------------------------

def check_unitarity(s: Settings) -> Outcome:
    rng = np.random.default_rng(20240501)
    grid = _grid(s)
    worst = 0.0
    worst_case = ""
    kinds = ["spp", "mspp", "quadrupole", "bb1", "higher0", "gradient", "lov", "rotation"]
    for i in range(UNITARITY_CASES):
        kind = kinds[i % len(kinds)]
        theta, phi = rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi)
        psi = gaussian_wavepacket(grid, (rng.uniform(0, 1.5), rng.uniform(-np.pi, np.pi)), SpinDirection(theta, phi))
        rho_c = rng.uniform(0.5, 4.0)
        if kind == "spp":
            out = apply_spp(psi, int(rng.integers(-4, 5)), rng.uniform(0, 2 * np.pi))
        elif kind == "mspp":
            out = apply_magnetic_spp(psi, int(rng.integers(-4, 5)), rng.uniform(0, 2 * np.pi))
        elif kind == "quadrupole":
            out = apply_quadrupole(psi, rho_c, rng.uniform(0, 2 * np.pi))
        elif kind == "bb1":
            out = apply_bb1(psi, rho_c)
        elif kind == "higher0":
            out = apply_higher_order(psi, 0, rho_c)
        elif kind == "gradient":
            out = apply_gradient(psi, rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi), rho_c)
        elif kind == "lov":
            signs = (int(rng.choice([-1, 1])), int(rng.choice([-1, 1])))
            out = apply_lov(psi, int(rng.integers(1, 5)), signs, rho_c)
        else:
            axis = SpinDirection(rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi))
            out = apply_spin_rotation(psi, axis, rng.uniform(-4 * np.pi, 4 * np.pi))
        drift = abs(norm(out) - norm(psi))
        if drift > worst:
            worst, worst_case = drift, f"case {i} ({kind})"
    return Outcome(worst <= UNITARITY_TOL, f"max norm drift {_fmt(worst)} over {UNITARITY_CASES} cases{' at ' + worst_case if worst_case else ''} (tol {UNITARITY_TOL:g})")


# 2 ---------------------------------------------------------------------------

def _leak(dec, keep: Iterable[tuple[int, str]]) -> float:
    keep = set(keep)
    return max((abs(c) for idx, c in dec.items() if (idx.ell, idx.spin) not in keep), default=0.0)


def check_spp_oam(s: Settings) -> Outcome:
    grid = _grid(s)
    g = gaussian_wavepacket(grid)
    bad = []
    worst_oam = worst_leak = 0.0
    for q in range(-3, 4):
        psi = apply_spp(g, q)
        err = abs(oam_expectation(psi) - q)
        leak = _leak(decompose(psi, 20, (-8, 8)), [(q, "up")])
        worst_oam, worst_leak = max(worst_oam, err), max(worst_leak, leak)
        if err > OAM_TOL or leak > LEAK_TOL:
            bad.append(f"q={q}: |<Lz>-q|={_fmt(err)}, leak={_fmt(leak)}")
    detail = f"max |<Lz>-q| {_fmt(worst_oam)} (tol {OAM_TOL:g}), max leak {_fmt(worst_leak)} (tol {LEAK_TOL:g})"
    if bad:
        detail += "; failing " + "; ".join(bad)
    return Outcome(not bad, detail)


def check_selection_rule(size: int = 256) -> Outcome:
    """``spp(-2 l)`` maps the pure mode ``|n, l>`` onto ``|n, -l>`` alone.

    Both modes share ``|l|``, so the whole norm must land on one coefficient;
    a faulty radial basis spreads it over other ``n``.
    """
    grid = make_grid(size, size, 8.0)
    worst = 0.0
    for n, ell in ((2, 1), (3, 2), (5, 1)):
        psi = apply_spp(SpinorField(grid, lg_mode(grid, n, ell), np.zeros(grid.shape)), -2 * ell)
        dec = decompose(psi, 8, (-ell, -ell))
        off = max(abs(c) for idx, c in dec.items() if (idx.n, idx.spin) != (n, "up"))
        worst = max(worst, off, abs(abs(dec[(n, -ell, "up")]) - 1))
    return Outcome(worst <= LEAK_TOL, f"max off-target |c| {_fmt(worst)} (tol {LEAK_TOL:g})")


# 3 ---------------------------------------------------------------------------

def check_quadrupole_identity(s: Settings) -> Outcome:
    psi = gaussian_wavepacket(_grid(s), (0.7, 0.4), SpinDirection(1.1, 0.3))
    worst = 0.0
    for N in (2, 3, 4, 8):
        rep = psi
        for _ in range(N):
            rep = apply_quadrupole(rep, RHO_C)
        direct = apply_quadrupole(psi, RHO_C / N)
        worst = max(worst, np.abs(rep.up - direct.up).max(), np.abs(rep.down - direct.down).max())
    return Outcome(worst <= IDENTITY_TOL, f"max pointwise error {_fmt(worst)} for N in {{2,3,4,8}} (tol {IDENTITY_TOL:g})")


# 4 ---------------------------------------------------------------------------

def _band_width(curve, level: float = 0.99) -> float:
    _, v = curve.select(0.0, np.inf)
    return float(np.count_nonzero(v >= level) * curve.bin_width)


def check_overlap_curves(s: Settings) -> Outcome:
    grid = _grid(s)
    up = gaussian_wavepacket(grid)
    target = _msp_target(grid)
    q_curve = radial_overlap(target, apply_quadrupole(up, RHO_C), s.overlap_bins)
    b_curve = radial_overlap(target, apply_bb1(up, RHO_C), s.overlap_bins)
    r, v = q_curve.select(0.0, OVERLAP_RHO_MAX)
    dev = float(np.abs(v - oracles.quadrupole_overlap(r, RHO_C)).max())
    _, vq = q_curve.select(0.25 * RHO_C, 0.9 * RHO_C)
    _, vb = b_curve.select(0.25 * RHO_C, 0.9 * RHO_C)
    margin = float((vb - vq).min())
    ratio = _band_width(b_curve) / max(_band_width(q_curve), 1e-300)
    ok = dev <= OVERLAP_CURVE_TOL and margin >= 0 and ratio >= BB1_WIDTH_RATIO
    return Outcome(
        ok,
        f"max |overlap - closed form| {_fmt(dev)} (tol {OVERLAP_CURVE_TOL:g}); "
        f"min(BB1 - Q) on [0.25,0.9]rho_c {_fmt(margin)}; width ratio {ratio:.2f} (need >= {BB1_WIDTH_RATIO:g})",
    )


# 5 ---------------------------------------------------------------------------

def check_trotter(s: Settings) -> Outcome:
    grid = _grid(s)
    up = gaussian_wavepacket(grid)
    ref = apply_quadrupole(up, RHO_C)
    X, Y = grid.mesh()
    cell = (np.abs(X) <= RHO_C) & (np.abs(Y) <= RHO_C)
    errors = []
    for N in (1, 2, 4):
        lov = apply_lov(up, N, rho_c=RHO_C)
        diff = np.abs(lov.up - ref.up) ** 2 + np.abs(lov.down - ref.down) ** 2
        errors.append(math.sqrt(float(np.sum(diff[cell])) * grid.cell_area))
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    target = _msp_target(grid)
    c1 = radial_overlap(target, apply_lov(up, 1, rho_c=RHO_C), s.overlap_bins)
    c2 = radial_overlap(target, apply_lov(up, 2, rho_c=RHO_C), s.overlap_bins)
    _, v1 = c1.select(0.2 * RHO_C, 0.8 * RHO_C)
    _, v2 = c2.select(0.2 * RHO_C, 0.8 * RHO_C)
    margin = float((v2 - v1).min())
    return Outcome(
        decreasing and margin >= 0,
        f"central-cell errors N=1,2,4: {', '.join(_fmt(e) for e in errors)}; min(N2 - N1 overlap) {_fmt(margin)}",
    )


# 6 ---------------------------------------------------------------------------

def check_mode_oracle(s: Settings) -> Outcome:
    psi = apply_spp(gaussian_wavepacket(_grid(s)), 1)
    dec = decompose(psi, 20, (-8, 8))
    p01 = dec.probability(0, 1)
    exact = oracles.spp_probability(0, 1)
    captured = dec.captured
    oracle_captured = oracles.spp_captured(1, 20)
    ok = abs(p01 - math.pi / 4) <= P01_TOL and abs(exact - math.pi / 4) <= P01_TOL and captured >= CAPTURED_MIN
    return Outcome(
        ok,
        f"|c(0,1)|^2 {p01:.6f} vs pi/4 {math.pi / 4:.6f} (quadrature {exact:.6f}, tol {P01_TOL:g}); "
        f"captured n<=20 {captured:.5f} (need >= {CAPTURED_MIN}; quadrature {oracle_captured:.5f})",
    )


# 7 ---------------------------------------------------------------------------

def check_displaced_modes(s: Settings) -> Outcome:
    rho0 = np.linspace(0.0, 6.0, 25)
    half_width = 14.0
    n = int(round(2 * half_width / s.displaced_pitch / 2)) * 2
    curves = displaced_mode_probabilities(1, rho0, make_grid(n, n, half_width))
    p01 = curves.probabilities[(0, 1)]
    p00 = curves.probabilities[(0, 0)]
    at0 = float(p01[0])
    monotone = bool(np.all(np.diff(p01) < 0))
    _, _, r2 = fit_gaussian_falloff(rho0, curves.intrinsic_oam)
    ok = abs(at0 - math.pi / 4) <= P01_TOL and monotone and p01[-1] <= P01_FAR_MAX and p00[-1] >= 0.9 and r2 >= FALLOFF_R2
    return Outcome(
        ok,
        f"P(0,1) at 0: {at0:.6f} (pi/4 +- {P01_TOL:g}); strictly decreasing {monotone}; "
        f"P(0,1) at 6: {p01[-1]:.2e} (<= {P01_FAR_MAX}); P(0,0) at 6: {p00[-1]:.4f}; intrinsic OAM fit R^2 {r2:.4f} (>= {FALLOFF_R2})",
    )


# 8 ---------------------------------------------------------------------------

def check_extrinsic(s: Settings) -> Outcome:
    grid = _grid(s, 12.0)
    psi = apply_spp(gaussian_wavepacket(grid, (4.0, 0.0)), 1)
    lz = extrinsic_oam(psi, (0.0, 0.0))
    return Outcome(abs(lz - 1) <= EXTRINSIC_TOL, f"<Lz> about the SPP axis {lz:.6f} (1 +- {EXTRINSIC_TOL:g})")


# 9 ---------------------------------------------------------------------------

def check_symmetry(s: Settings) -> Outcome:
    grid = _grid(s)
    sx = gaussian_wavepacket(grid, (0, 0), UP_X)
    orders = []
    worst_bins = 0.0
    chi = math.pi / 3
    bin_width = 2 * math.pi / 256
    for q in (1, 2, 3):
        psi = apply_magnetic_spp(sx, q)
        i_map = intensity_map(psi, UP_X)
        k_map = momentum_map(psi, UP_X)
        orders.append((rotational_symmetry_order(i_map), rotational_symmetry_order(k_map)))
        turned = intensity_map(apply_magnetic_spp(sx, q, chi), UP_X)
        alpha = rotation_between(i_map, turned)
        # the pattern turns by -chi/q, defined modulo its own symmetry period 2 pi/q
        period = 2 * math.pi / q
        miss = abs((alpha + chi / q + period / 2) % period - period / 2)
        worst_bins = max(worst_bins, miss / bin_width)
    ok = all(o == (q, q) for o, q in zip(orders, (1, 2, 3))) and worst_bins <= 1.0
    return Outcome(
        ok,
        f"symmetry orders (intensity, momentum) for q=1,2,3: {orders}; beta rotation miss {worst_bins:.2f} bins (<= 1)",
    )


# 10 --------------------------------------------------------------------------

def check_tomography(s: Settings) -> Outcome:
    n = s.base
    grid = make_grid(n, n, s.tomo_half_width)
    sx = gaussian_wavepacket(grid, (0, 0), UP_X)
    parts = []
    ok = True
    for q in (1, 2):
        m = momentum_map(apply_magnetic_spp(sx, q), UP_X)
        full = sinogram_from_map(m, 72)
        errs = []
        for n_angles in (12, 36, 72):
            # i pi / n_angles is every (72 / n_angles)-th row of the 72-angle sinogram
            step = 72 // n_angles
            sg = Sinogram(full.angles[::step], full.k, full.projections[::step], full.provenance)
            rec = reconstruct_fbp(sg)
            errs.append(nrmse(rec.raw, central_window(m, rec.raw.grid.nx)))
        ok &= errs[1] <= NRMSE_MAX and errs[2] <= errs[1] <= errs[0]
        parts.append(f"q={q} NRMSE 12/36/72: {'/'.join(f'{e:.4f}' for e in errs)}")
    eq_grid = make_grid(n, n, s.equivalence_half_width)
    sx = gaussian_wavepacket(eq_grid, (0, 0), UP_X)
    worst = 0.0
    for q in (1, 2):
        psi = apply_magnetic_spp(sx, q)
        P = sinogram_from_map(momentum_map(psi, UP_X), 36).projections
        F = make_sinogram_filter_rotation(psi, 36, winding=q).projections
        # filter azimuth q*omega_i turns the map by omega_i: row i is the crystal row at -omega_i
        mapped = np.concatenate([P[:1], P[:0:-1][:, ::-1]])
        worst = max(worst, float(np.linalg.norm(F - mapped) / np.linalg.norm(P)))
    ok &= worst <= EQUIVALENCE_TOL
    parts.append(f"filter-rotation equivalence {_fmt(worst)} (tol {EQUIVALENCE_TOL:g})")
    return Outcome(bool(ok), "; ".join(parts) + f" (NRMSE tol {NRMSE_MAX:g})")


# 11 --------------------------------------------------------------------------

def check_higher_order(s: Settings) -> Outcome:
    up = gaussian_wavepacket(_grid(s))
    j0 = apply_higher_order(up, 0, RHO_C)
    plain = apply_quadrupole(up, RHO_C)
    bitwise = np.array_equal(j0.up, plain.up) and np.array_equal(j0.down, plain.down)
    j1 = apply_higher_order(up, 1, RHO_C)
    leak = _leak(decompose(j1, 20, (-8, 8)), [(-1, "up"), (-2, "down")])
    survival = j1.metadata["survival"]
    exact = oracles.flip_probability(RHO_C)
    ok = bitwise and leak <= LEAK_TOL and abs(survival - exact) <= SURVIVAL_TOL
    return Outcome(
        ok,
        f"j=0 bitwise equal {bitwise}; j=1 leak {_fmt(leak)} (tol {LEAK_TOL:g}); "
        f"survival {survival:.9f} vs quadrature {exact:.9f} (tol {SURVIVAL_TOL:g})",
    )


# 12 --------------------------------------------------------------------------

def _sig(x: float, digits: int = SIG_FIGS) -> float:
    return float(f"{x:.{digits - 1}e}")


def check_converters(s: Settings) -> Outcome:
    p = PhysicalParams(v_z=2000.0, gamma_n=1.832e8, K=10.0, d=1.0, B=0.5, theta=math.pi / 4)
    rho_c, _ = rho_c_from_physical(p)
    a = lattice_constant(p)
    ok = _sig(rho_c) == HAND_RHO_C and _sig(a) == HAND_LATTICE
    return Outcome(ok, f"rho_c {rho_c:.6e} m (hand {HAND_RHO_C:.3e}); a {a:.6e} m (hand {HAND_LATTICE:.3e})")


CRITERIA: tuple[Criterion, ...] = (
    Criterion("C01", "unitarity sweep", check_unitarity),
    Criterion("C02", "SPP OAM shift and l-support", check_spp_oam),
    Criterion("C03", "quadrupole power identity", check_quadrupole_identity),
    Criterion("C04", "radial overlap curves (Q, BB1 vs mSPP)", check_overlap_curves),
    Criterion("C05", "LOV Trotter convergence", check_trotter),
    Criterion("C06", "SPP mode coefficients vs quadrature", check_mode_oracle),
    Criterion("C07", "displaced packet mode probabilities", check_displaced_modes),
    Criterion("C08", "extrinsic OAM of a displaced packet", check_extrinsic),
    Criterion("C09", "rotational symmetry and beta rotation", check_symmetry),
    Criterion("C10", "sinogram round trip and filter rotation", check_tomography),
    Criterion("C11", "higher-order quadrupole sequence", check_higher_order),
    Criterion("C12", "physical converters", check_converters),
)


def run_criteria(
    ids: Sequence[str] | None = None,
    size: int = 512,
    report: Callable[[str], None] | None = None,
) -> list[Result]:
    """Run the selected criteria (all by default) and return their results."""
    if size not in SIZES:
        raise ValueError(f"suite size must be one of {sorted(SIZES)}, got {size}")
    settings = SIZES[size]
    chosen = CRITERIA if not ids else [c for c in CRITERIA if c.ident in set(ids)]
    unknown = set(ids or ()) - {c.ident for c in CRITERIA}
    if unknown:
        raise ValueError(f"unknown criterion id(s) {sorted(unknown)}")
    results = []
    for c in chosen:
        start = time.perf_counter()
        try:
            outcome = c.check(settings)
        except Exception as exc:  # a crash is a failure of that criterion, not of the suite
            outcome = Outcome(False, f"raised {type(exc).__name__}: {exc}")
        res = Result(c.ident, c.title, outcome.passed, outcome.detail, time.perf_counter() - start)
        if report:
            report(res.line())
        results.append(res)
    return results
