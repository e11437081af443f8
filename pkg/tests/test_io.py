import struct

import numpy as np
import pytest

from spinorbit import UP_X, apply_quadrupole, apply_spp, gaussian_wavepacket
from spinorbit.analysis import ScalarMap2D, intensity_map, radial_overlap, spin_texture
from spinorbit.io import (
    SCALAR_MAGIC,
    FormatError,
    read_curve_csv,
    read_scalarmap,
    read_spinorfield,
    write_curve_csv,
    write_pgm,
    write_scalarmap,
    write_spinorfield,
    write_texture_csv,
)


def test_spinorfield_round_trip(tmp_path, plus_x):
    psi = apply_spp(plus_x, 2)
    path = tmp_path / "psi.bin"
    write_spinorfield(psi, path)
    back = read_spinorfield(path)
    assert back.grid == psi.grid
    assert np.array_equal(back.up, psi.up) and np.array_equal(back.down, psi.down)


def test_scalarmap_layout(tmp_path, grid):
    values = np.arange(grid.nx * grid.ny, dtype=float).reshape(grid.shape)
    path = tmp_path / "m.bin"
    write_scalarmap(ScalarMap2D(grid, values), path)
    raw = path.read_bytes()
    magic, nx, ny, hw = struct.unpack_from("<16sIId", raw)
    assert (magic, nx, ny, hw) == (SCALAR_MAGIC, 128, 128, 8.0)
    # y index runs fastest
    first = np.frombuffer(raw, "<f8", count=2, offset=32)
    assert list(first) == [values[0, 0], values[0, 1]]
    assert np.array_equal(read_scalarmap(path).values, values)


def test_truncated_dump(tmp_path, up):
    path = tmp_path / "psi.bin"
    write_spinorfield(up, path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError):
        read_spinorfield(path)
    with pytest.raises(FormatError):
        read_scalarmap(path)
    (tmp_path / "short.bin").write_bytes(b"xx")
    with pytest.raises(FormatError):
        read_scalarmap(tmp_path / "short.bin")


def test_pgm(tmp_path, up):
    m = intensity_map(up, UP_X)
    path = tmp_path / "q.pgm"
    write_pgm(m, path)
    data = path.read_bytes()
    assert data.startswith(b"P5\n128 128\n255\n")
    pixels = np.frombuffer(data[len(b"P5\n128 128\n255\n") :], np.uint8)
    assert pixels.size == 128 * 128 and pixels.max() == 255


def test_pgm_constant_map(tmp_path, grid):
    path = tmp_path / "c.pgm"
    write_pgm(ScalarMap2D(grid, np.ones(grid.shape)), path)
    assert set(path.read_bytes()[-10:]) == {0}


def test_curve_csv(tmp_path, up):
    curve = radial_overlap(up, apply_quadrupole(up, 1.82), nbins=32)
    path = tmp_path / "c.csv"
    write_curve_csv(curve, path)
    r, v = read_curve_csv(path)
    assert np.array_equal(r, curve.rho[curve.present])
    assert np.array_equal(v, curve.values[curve.present])
    path.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError):
        read_curve_csv(path)


def test_texture_csv(tmp_path, up):
    tex = spin_texture(apply_quadrupole(up, 1.82))
    path = tmp_path / "t.csv"
    write_texture_csv(tex, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,Px,Py,Pz"
    assert 1 < len(lines) <= 1 + 64 * 64
    with pytest.raises(ValueError):
        write_texture_csv(tex, path, stride=0)
