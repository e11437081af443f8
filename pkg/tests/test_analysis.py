import math

import numpy as np
import pytest

from spinorbit import (
    UP_X,
    UP_Z,
    apply_magnetic_spp,
    apply_quadrupole,
    apply_spp,
    gaussian_wavepacket,
    make_grid,
    project_spin,
)
from spinorbit.analysis import (
    ScalarMap2D,
    displaced_mode_probabilities,
    extrinsic_oam,
    fit_gaussian_falloff,
    intensity_map,
    local_overlap,
    momentum_grid,
    momentum_map,
    phase_map,
    radial_overlap,
    rotation_between,
    rotational_symmetry_order,
    spin_texture,
)
from spinorbit.oracles import quadrupole_overlap

BETA = math.pi / 2


def msp_state(psi, q):
    return project_spin(apply_magnetic_spp(psi, q, 0.0), UP_X)


def test_intensity_integrates_to_norm(up):
    assert intensity_map(up, UP_Z).integral() == pytest.approx(1.0, abs=1e-13)
    assert intensity_map(up, UP_X).integral() == pytest.approx(0.5, abs=1e-13)


def test_phase_map_range(up):
    ph = phase_map(apply_spp(up, 2), UP_Z).values
    assert ph.min() >= -math.pi and ph.max() <= math.pi


def test_momentum_grid_is_conjugate(grid):
    k = momentum_grid(grid)
    assert k.half_width == pytest.approx(math.pi / grid.pitch[0])
    with pytest.raises(ValueError):
        momentum_grid(make_grid(64, 32, 8.0))


def test_momentum_map_parseval(plus_x):
    m = momentum_map(apply_spp(plus_x, 1), UP_Z)
    assert m.integral() == pytest.approx(0.5, abs=1e-12)
    assert m.metadata["survival"] == pytest.approx(0.5, abs=1e-12)


def test_momentum_of_gaussian_is_gaussian(up):
    m = momentum_map(up, UP_Z)
    K2 = sum(c**2 for c in m.grid.mesh())
    assert np.allclose(m.values, np.exp(-K2) / math.pi, atol=1e-12)


def test_momentum_edge_warning(grid):
    psi = gaussian_wavepacket(grid, (7.0, 0.0))
    m = momentum_map(psi, UP_Z)
    assert any("not contained" in w for w in m.metadata["warnings"])


def test_radial_overlap_closed_form(fine_grid):
    up = gaussian_wavepacket(fine_grid)
    target = apply_magnetic_spp(gaussian_wavepacket(fine_grid, spin=UP_X), -1, BETA)
    curve = radial_overlap(target, apply_quadrupole(up, 1.82), nbins=128, r_max=3.0)
    r, v = curve.select(0.0, 3.0)
    assert np.max(np.abs(v - quadrupole_overlap(r, 1.82))) < 5e-3


def test_radial_overlap_identity(up):
    curve = radial_overlap(up, up, nbins=64)
    assert np.allclose(curve.values[curve.present], 1.0)
    with pytest.raises(ValueError):
        radial_overlap(up, up, nbins=8)
    with pytest.raises(ValueError):
        curve.at(100.0)


def test_local_overlap_bounded(up, plus_x):
    v = local_overlap(up, plus_x)
    assert np.allclose(v, 1 / math.sqrt(2))


def test_spin_texture_of_quadrupole_state(up):
    tex = spin_texture(apply_quadrupole(up, 1.82))
    P = tex.values[tex.mask]
    assert np.allclose(np.linalg.norm(P, axis=1), 1.0)
    assert not tex.mask[0, 0] or tex.mask.all()


def test_extrinsic_oam_outside_box(up):
    with pytest.raises(ValueError):
        extrinsic_oam(up, (20.0, 0.0))


@pytest.mark.parametrize("q", [1, 2, 3])
def test_symmetry_order(fine_grid, q):
    psi = msp_state(gaussian_wavepacket(fine_grid, spin=UP_X), q)
    assert rotational_symmetry_order(intensity_map(psi, UP_X)) == q
    assert rotational_symmetry_order(momentum_map(psi, UP_X)) == q


def test_symmetry_of_gaussian_is_zero(up):
    assert rotational_symmetry_order(intensity_map(up, UP_Z)) == 0
    with pytest.raises(ValueError):
        rotational_symmetry_order(ScalarMap2D(up.grid, np.zeros(up.grid.shape)))


def test_rotation_between_recovers_beta_rule(fine_grid):
    plus = gaussian_wavepacket(fine_grid, spin=UP_X)
    a = intensity_map(project_spin(apply_magnetic_spp(plus, 2, 0.0), UP_X), UP_X)
    b = intensity_map(project_spin(apply_magnetic_spp(plus, 2, 1.0), UP_X), UP_X)
    alpha = rotation_between(a, b)
    period = math.pi
    miss = (alpha + 1.0 / 2 + period / 2) % period - period / 2
    assert abs(miss) <= 2 * math.pi / 256


def test_gaussian_falloff_fit():
    x = np.linspace(0, 4, 30)
    A, w, r2 = fit_gaussian_falloff(x, 0.8 * np.exp(-(x**2) / 1.7**2))
    assert A == pytest.approx(0.8) and w == pytest.approx(1.7) and r2 == pytest.approx(1.0)


def test_displaced_probabilities_at_origin():
    curves = displaced_mode_probabilities(1, [0.0, 1.0], grid=make_grid(256, 256, 8.0))
    assert curves.probabilities[(0, 1)][0] == pytest.approx(math.pi / 4, abs=1e-3)
    assert curves.probabilities[(0, 1)][1] < curves.probabilities[(0, 1)][0]
    assert np.allclose(curves.extrinsic_oam, 1.0, atol=1e-4)
    with pytest.raises(ValueError):
        displaced_mode_probabilities(1.5, [0.0])
    with pytest.raises(ValueError):
        displaced_mode_probabilities(1, [-1.0])
