import json
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from spinorbit.cli import build_parser, main
from spinorbit.io import read_scalarmap

SMALL = "grid: {nx: 64, ny: 64, half_width: 8.0}\n"


def write(tmp_path, text, name="job.cfg"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def test_empty_steps_gives_gaussian(tmp_path):
    out = tmp_path / "out"
    assert main(["--quiet", "run", "empty-steps", "--out", str(out)]) == 0
    m = read_scalarmap(out / "intensity.bin")
    X, Y = m.grid.mesh()
    assert np.allclose(m.values, np.exp(-(X**2 + Y**2)) / np.pi, atol=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"intensity.bin", "intensity.pgm"}
    assert manifest["config"]["name"] == "empty-steps.cfg"


def test_global_flags_either_side(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert main(["--threads", "2", "run", cfg, "--out", str(tmp_path / "a"), "--quiet"]) == 0
    assert main(["run", "--threads", "1", cfg, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "manifest.json").exists()


def test_schema_error_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, SMALL + "steps:\n  - {kind: Quadrupole, rho_c: 0}\n")
    assert main(["run", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "job.cfg:3: steps[0].rho_c" in err


def test_analysis_error_exit_2(tmp_path):
    cfg = write(tmp_path, SMALL + "analyses:\n  - {kind: oam, axis: [50, 0], output: o.json}\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 2


def test_missing_config_exit_4(tmp_path):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 4


def test_unwritable_output_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write(tmp_path, SMALL + "analyses:\n  - {kind: intensity, spin: '+z', output: a.bin}\n")
    assert main(["run", cfg, "--out", str(blocker / "sub")]) == 4


def test_nan_exit_3(tmp_path, monkeypatch):
    import spinorbit.jobs as jobs

    def broken(config, ref):
        raise FloatingPointError("step 0 (SPP) produced non-finite amplitudes")

    monkeypatch.setattr(jobs, "_prepare", broken)
    cfg = write(tmp_path, SMALL)
    assert main(["run", cfg, "--out", str(tmp_path)]) == 3


def test_list_configs(capsys):
    assert main(["run", "--list-configs"]) == 0
    names = capsys.readouterr().out.split()
    assert "fig2" in names and "empty-steps" in names


def test_convert_json(capsys):
    args = ["convert", "--v-z", "2000", "--gamma-n", "1.832e8", "--K", "10", "--d", "1", "--B", "0.5", "--theta-deg", "45", "--json"]
    assert main(args) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["rho_c_m"] == pytest.approx(3.430e-6, rel=2e-4)
    assert data["lattice_constant_m"] == pytest.approx(1.372e-4, rel=2e-4)


def test_convert_text(capsys):
    assert main(["convert", "--v-z", "2000", "--K", "10", "--d", "1", "--sigma-perp", "1e-6"]) == 0
    out = capsys.readouterr().out
    assert "rho_c = " in out and " m" in out and "rho_c / sigma_perp" in out


def test_convert_usage_errors(capsys):
    assert main(["convert", "--v-z", "2000"]) == 2
    assert main(["convert", "--v-z", "-1", "--K", "1", "--d", "1"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["convert", "--K", "1"])
    assert info.value.code == 2


def test_selftest_list(capsys):
    assert main(["selftest", "--list"]) == 0
    ids = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert ids == [f"C{i:02d}" for i in range(1, 13)]


def test_selftest_subset(capsys):
    assert main(["selftest", "--only", "C03", "C12"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2


def test_selftest_unknown_id():
    assert main(["selftest", "--only", "C99"]) == 2


def test_bad_threads():
    assert main(["--threads", "0", "selftest", "--list"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "spinorbit", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout


def test_parser_has_subcommands():
    text = build_parser().format_help()
    for cmd in ("run", "convert", "selftest", "--threads", "--out", "--quiet"):
        assert cmd in text
