import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinorbit import (
    DOWN_Z,
    UP_X,
    UP_Z,
    GridError,
    SpinDirection,
    SpinorField,
    gaussian_wavepacket,
    inner_product,
    make_grid,
    norm,
    normalize,
)


def test_grid_is_cell_centred(grid):
    assert grid.pitch == (0.125, 0.125)
    assert grid.x[0] == pytest.approx(-8 + 0.0625)
    assert np.allclose(grid.x, -grid.x[::-1])
    assert not np.any(grid.x == 0)


@pytest.mark.parametrize("args", [(31, 64, 8.0), (64, 63, 8.0), (16, 16, 8.0), (64, 64, 0.0), (64, 64, math.inf)])
def test_bad_grids_rejected(args):
    with pytest.raises(GridError):
        make_grid(*args)


def test_gaussian_is_normalized(grid):
    psi = gaussian_wavepacket(grid, (1.5, 0.3), UP_X)
    assert norm(psi) == pytest.approx(1.0, abs=1e-14)
    assert psi.warnings == ()


def test_gaussian_edge_warning(grid):
    psi = gaussian_wavepacket(grid, (4.0, 0.0))
    assert any("box edge" in w for w in psi.warnings)


def test_gaussian_outside_box(grid):
    with pytest.raises(GridError):
        gaussian_wavepacket(grid, (20.0, 0.0))
    with pytest.raises(ValueError):
        gaussian_wavepacket(grid, (-1.0, 0.0))


def test_explicit_spinor_must_be_normalized(grid):
    with pytest.raises(ValueError):
        gaussian_wavepacket(grid, spin=(1.0, 1.0))
    psi = gaussian_wavepacket(grid, spin=(1 / math.sqrt(2), 1j / math.sqrt(2)))
    assert norm(psi) == pytest.approx(1.0)


def test_orthogonal_spins(grid):
    a = gaussian_wavepacket(grid, spin=UP_Z)
    b = gaussian_wavepacket(grid, spin=DOWN_Z)
    assert abs(inner_product(a, b)) < 1e-15


def test_fields_are_read_only(up):
    with pytest.raises(ValueError):
        up.up[0, 0] = 1.0


def test_shape_mismatch(grid):
    with pytest.raises(GridError):
        SpinorField(grid, np.zeros((4, 4)), np.zeros((4, 4)))


def test_mixed_grids_rejected(up):
    other = gaussian_wavepacket(make_grid(64, 64, 8.0))
    with pytest.raises(GridError):
        inner_product(up, other)


def test_validate_flags_nan(grid):
    bad = np.zeros(grid.shape, dtype=complex)
    bad[3, 4] = np.nan
    with pytest.raises(FloatingPointError):
        SpinorField(grid, bad, bad).validate()


def test_normalize_zero_field(grid):
    zero = SpinorField(grid, np.zeros(grid.shape), np.zeros(grid.shape))
    with pytest.raises(ValueError):
        normalize(zero)


@given(st.floats(0, math.pi), st.floats(-math.pi, math.pi))
def test_spin_direction_round_trip(theta, phi):
    s = SpinDirection(theta, phi)
    back = SpinDirection.from_axis(s.axis)
    assert np.allclose(back.axis, s.axis, atol=1e-12)
    assert abs(np.linalg.norm(s.spinor) - 1) < 1e-14


@given(st.floats(0, math.pi), st.floats(-math.pi, math.pi))
def test_opposite_is_orthogonal(theta, phi):
    s = SpinDirection(theta, phi)
    assert abs(np.vdot(s.spinor, s.opposite().spinor)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 2.0), st.floats(-math.pi, math.pi))
def test_inner_product_hermitian(rho0, phi0):
    g = make_grid(64, 64, 8.0)
    a = gaussian_wavepacket(g, (rho0, phi0), UP_X)
    b = gaussian_wavepacket(g, (0.5, 0.0), UP_Z)
    assert inner_product(a, b) == pytest.approx(inner_product(b, a).conjugate(), abs=1e-15)


def test_spp_gaussian_overlaps(fine_grid):
    g = gaussian_wavepacket(fine_grid)
    from spinorbit import apply_spp, lg_mode

    twisted = apply_spp(g, 1)
    # the azimuthal integral kills the overlap with the untwisted packet
    assert abs(inner_product(g, twisted)) < 1e-10
    # the amplitude sqrt(pi)/2 sits in the l = 1 ground mode
    lg01 = SpinorField(fine_grid, lg_mode(fine_grid, 0, 1), np.zeros(fine_grid.shape, complex))
    assert abs(inner_product(lg01, twisted)) == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-4)
