import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinorbit import (
    DOWN_Z,
    UP_X,
    UP_Z,
    SpinDirection,
    apply_bb1,
    apply_gradient,
    apply_higher_order,
    apply_lov,
    apply_magnetic_spp,
    apply_quadrupole,
    apply_spin_rotation,
    apply_spp,
    decompose,
    gaussian_wavepacket,
    make_grid,
    norm,
    project_spin,
)
from spinorbit.operators import (
    COMPARISON_BETA,
    LOV_MONOPOLE_SIGNS,
    PhysicalParams,
    lattice_constant,
    lov_cell_pitch,
    quadrupole_matrix,
    rho_c_from_physical,
)

SMALL = make_grid(64, 64, 8.0)
angles = st.floats(-2 * math.pi, 2 * math.pi)
radii = st.floats(0.3, 6.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(-4, 4), angles)
def test_spp_unitary(q, alpha0):
    psi = gaussian_wavepacket(SMALL, spin=UP_X)
    assert norm(apply_spp(psi, q, alpha0)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(radii, angles, angles)
def test_gradient_and_quadrupole_unitary(rho_c, a, b):
    psi = gaussian_wavepacket(SMALL, spin=SpinDirection(0.7, 0.2))
    assert norm(apply_quadrupole(psi, rho_c, a)) == pytest.approx(1.0, abs=1e-12)
    assert norm(apply_gradient(psi, a, b, rho_c)) == pytest.approx(1.0, abs=1e-12)
    assert norm(apply_spin_rotation(psi, SpinDirection(a % math.pi, b), rho_c)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, math.pi), angles)
def test_projection_idempotent(theta, phi):
    psi = gaussian_wavepacket(SMALL, spin=UP_X)
    s = SpinDirection(theta, phi)
    once = project_spin(psi, s)
    twice = project_spin(once, s)
    assert np.allclose(once.up, twice.up, atol=1e-15)
    assert norm(once) <= 1.0 + 1e-12
    assert once.metadata["survival"] == pytest.approx(norm(once) ** 2)


def test_non_integer_charge_warns(up):
    out = apply_spp(up, 0.5)
    assert any("non-integer" in w for w in out.warnings)


def test_magnetic_spp_leaves_up_alone(plus_x):
    out = apply_magnetic_spp(plus_x, -1, COMPARISON_BETA)
    assert np.array_equal(out.up, plus_x.up)
    assert out.down[70, 64] == pytest.approx(plus_x.down[70, 64] * np.exp(1j * (math.pi / 2 - np.arctan2(0.0625, 6 * 0.125 + 0.0625))))


def test_quadrupole_flips_at_rho_c(grid):
    u00, u01, u10, u11 = quadrupole_matrix(grid, 2.0)
    rho, _ = grid.polar()
    assert np.allclose(np.abs(u00), np.abs(np.cos(np.pi * rho / 4.0)))
    assert np.allclose(u00 * u11 - u01 * u10, 1.0)


def test_quadrupole_ring_has_dark_core(up):
    out = apply_quadrupole(up, 1.82)
    rho, phi = up.grid.polar()
    inner = rho < 3.6
    expected = np.sin(np.pi * rho / 3.64) * np.abs(up.up)
    assert np.allclose(np.abs(out.down)[inner], expected[inner], atol=1e-14)
    # flipped part winds as exp(-i phi), i.e. l = -1
    unit = out.down[inner] / np.abs(out.down[inner])
    assert np.allclose(unit, 1j * np.exp(-1j * phi[inner]), atol=1e-12)


def test_quadrupole_power_identity(up):
    for N in (2, 3):
        out = up
        for _ in range(N):
            out = apply_quadrupole(out, 1.82)
        ref = apply_quadrupole(up, 1.82 / N)
        assert np.max(np.abs(out.down - ref.down)) < 1e-12


def test_quadrupole_rejects_bad_radius(up):
    with pytest.raises(ValueError):
        apply_quadrupole(up, 0.0)
    with pytest.raises(ValueError):
        apply_bb1(up, -1.0)


def test_bb1_widens_half_flip_band(up):
    # the entangled target has equal spin weights, i.e. a flip fraction of 1/2
    rho = (np.arange(400) + 0.5) * 0.01
    on_axis = up.grid.polar()[0]

    def band(fn):
        frac = np.abs(fn(up, 1.82).down) ** 2 / np.abs(up.up) ** 2
        order = np.argsort(on_axis.ravel())
        f = np.interp(rho, on_axis.ravel()[order], frac.ravel()[order])
        good = np.abs(f - 0.5) < 0.05
        return good.sum()

    assert band(apply_bb1) > 2 * band(apply_quadrupole)


def test_higher_order_j0_is_quadrupole(up):
    a = apply_higher_order(up, 0, 1.82)
    b = apply_quadrupole(up, 1.82)
    assert np.array_equal(a.up, b.up) and np.array_equal(a.down, b.down)
    assert a.metadata["survival"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        apply_higher_order(up, -1, 1.82)


def test_higher_order_survival(up):
    out = apply_higher_order(up, 1, 1.82)
    # frozen quadrature value of the single flip probability
    assert out.metadata["survival"] == pytest.approx(0.46515650374671963, abs=2e-3)


def test_lov_signs_choose_handedness(fine_grid):
    up = gaussian_wavepacket(fine_grid)
    quad = decompose(apply_lov(up, 2), 6, (-2, 2))
    mono = decompose(apply_lov(up, 2, LOV_MONOPOLE_SIGNS), 6, (-2, 2))
    down = lambda d, l: sum(d.probability(n, l, "down") for n in range(7))
    assert down(quad, -1) > 10 * down(quad, 1)
    assert down(mono, 1) > 10 * down(mono, -1)


def test_lov_rejects_bad_inputs(up):
    with pytest.raises(ValueError):
        apply_lov(up, 0)
    with pytest.raises(ValueError):
        apply_lov(up, 1, (2, 1))
    assert lov_cell_pitch(2, 1.82) == pytest.approx(7.28)


def test_spin_rotation_pi_about_x_flips(up):
    out = apply_spin_rotation(up, UP_X, math.pi)
    assert norm(project_spin(out, DOWN_Z)) == pytest.approx(1.0, abs=1e-12)


def test_converters_hand_values():
    p = PhysicalParams(v_z=2000.0, gamma_n=1.832e8, K=10.0, d=1.0, B=0.5, theta=math.pi / 4, sigma_perp=1e-6)
    rho_c, ratio = rho_c_from_physical(p)
    assert rho_c == pytest.approx(3.4297e-6, rel=1e-4)
    assert ratio == pytest.approx(3.4297, rel=1e-4)
    assert lattice_constant(p) == pytest.approx(1.3719e-4, rel=1e-4)


def test_converters_errors():
    with pytest.raises(ValueError):
        PhysicalParams(v_z=-1.0)
    with pytest.raises(ValueError):
        rho_c_from_physical(PhysicalParams(v_z=1.0, K=1.0))
    with pytest.raises(ValueError):
        lattice_constant(PhysicalParams(v_z=1.0, B=1.0, theta=math.pi / 2))
