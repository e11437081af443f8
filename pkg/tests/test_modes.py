import math

import numpy as np
import pytest
from scipy import special

from spinorbit import UP_Z, apply_spp, decompose, gaussian_wavepacket, lg_mode, synthesize
from spinorbit.field import SpinorField, inner_product
from spinorbit.modes import angular_momentum, laguerre, oam_expectation, write_decomposition_csv


def test_laguerre_matches_scipy():
    x = np.linspace(0, 30, 101)
    for alpha in (0, 1, 3, 7):
        L = laguerre(12, alpha, x)
        for n in range(13):
            assert np.allclose(L[n], special.eval_genlaguerre(n, alpha, x), rtol=1e-10, atol=1e-10)


def test_modes_orthonormal(fine_grid):
    modes = {(n, l): lg_mode(fine_grid, n, l) for n in range(3) for l in (-2, 0, 1, 3)}
    dA = fine_grid.cell_area
    for a, ma in modes.items():
        for b, mb in modes.items():
            overlap = np.sum(np.conj(ma) * mb) * dA
            assert abs(overlap - (a == b)) < 1e-10, (a, b)


def test_mode_index_limits(grid):
    with pytest.raises(ValueError):
        lg_mode(grid, -1, 0)
    with pytest.raises(ValueError):
        lg_mode(grid, 0, 65)
    with pytest.raises(ValueError):
        decompose(gaussian_wavepacket(grid), 4, (3, 1))


def test_gaussian_is_ground_mode(grid):
    dec = decompose(gaussian_wavepacket(grid), 4, (-2, 2))
    assert dec.probability(0, 0, "up") == pytest.approx(1.0, abs=1e-12)
    assert dec.residual == pytest.approx(0.0, abs=1e-12)


def test_synthesize_round_trip(fine_grid):
    psi = SpinorField(fine_grid, lg_mode(fine_grid, 2, -1) + 0.5j * lg_mode(fine_grid, 0, 3), lg_mode(fine_grid, 1, 0))
    dec = decompose(psi, 4, (-3, 3))
    back = synthesize(dec)
    assert np.max(np.abs(back.up - psi.up)) < 1e-9
    assert np.max(np.abs(back.down - psi.down)) < 1e-9


def test_spp_coefficient_values(fine_grid):
    psi = apply_spp(gaussian_wavepacket(fine_grid), 1)
    dec = decompose(psi, 2, (0, 2))
    # closed forms of the on-axis overlaps: pi/4 and pi/32
    assert dec.probability(0, 1) == pytest.approx(math.pi / 4, abs=1e-3)
    assert dec.probability(1, 1) == pytest.approx(math.pi / 32, abs=1e-3)


@pytest.mark.parametrize("ell", [-2, 0, 1, 3])
def test_lz_of_modes(fine_grid, ell):
    psi = SpinorField(fine_grid, lg_mode(fine_grid, 1, ell), np.zeros(fine_grid.shape))
    assert oam_expectation(psi) == pytest.approx(ell, abs=1e-9)


def test_oam_needs_normalized(grid):
    psi = gaussian_wavepacket(grid) * 2.0
    with pytest.raises(ValueError):
        oam_expectation(psi)
    assert angular_momentum(psi) == pytest.approx(0.0, abs=1e-12)


def test_decomposition_csv(tmp_path, grid):
    dec = decompose(gaussian_wavepacket(grid), 1, (0, 0))
    path = tmp_path / "modes.csv"
    write_decomposition_csv(dec, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,ell,spin,re,im,prob"
    assert len(lines) == 1 + 4 + 2
    assert lines[-2].startswith("captured")
