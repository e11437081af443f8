"""Execute a :class:`~spinorbit.config.JobConfig` and write its artifacts."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import io
from .analysis import (
    displaced_mode_probabilities,
    intensity_map,
    momentum_map,
    phase_map,
    radial_overlap,
    spin_texture,
)
from .config import Analysis, ConfigError, JobConfig, Reference
from .field import SpinorField, gaussian_wavepacket, norm
from .modes import angular_momentum, decompose, write_decomposition_csv
from .pipeline import run_pipeline
from .tomography import make_sinogram, make_sinogram_filter_rotation, reconstruct_fbp, write_sinogram_csv

__all__ = ["JobResult", "run_job", "sha256_file"]

MANIFEST_NAME = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class JobResult:
    def __init__(self, field: SpinorField, manifest: dict[str, Any], manifest_path: Path):
        self.field = field
        self.manifest = manifest
        self.manifest_path = manifest_path


def _prepare(config: JobConfig, ref: Reference) -> tuple[SpinorField, list]:
    psi = gaussian_wavepacket(config.grid, ref.center, ref.spin)
    return run_pipeline(psi, ref.steps)


def _finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("analysis produced non-finite values")


def _json_dump(data: Any, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _analyze(config: JobConfig, psi: SpinorField, a: Analysis, out: Path, warn: Callable[[str], None]) -> None:
    p = a.params
    target = out / a.output
    if a.kind in ("intensity", "momentum"):
        m = intensity_map(psi, p["spin"]) if a.kind == "intensity" else momentum_map(psi, p["spin"])
        _finite(m.values)
        for w in m.metadata.get("warnings", ()):
            warn(w)
        io.write_scalarmap(m, target)
        if p.get("quicklook"):
            io.write_pgm(m, out / p["quicklook"])
        if p.get("phase_output"):
            io.write_scalarmap(phase_map(psi, p["spin"]), out / p["phase_output"])
    elif a.kind == "decompose":
        dec = decompose(psi, p["n_max"], p["ell_range"], p["center"])
        write_decomposition_csv(dec, target)
    elif a.kind == "radial_overlap":
        ref, _ = _prepare(config, p["reference"])
        state = psi if p["state"] is None else _prepare(config, p["state"])[0]
        curve = radial_overlap(state, ref, p["nbins"], p["r_max"])
        io.write_curve_csv(curve, target)
    elif a.kind == "texture":
        tex = spin_texture(psi, p["threshold"])
        _finite(tex.values)
        io.write_texture_csv(tex, target, p["stride"])
    elif a.kind in ("sinogram", "reconstruct"):
        if a.kind == "sinogram" and p["method"] == "filter_rotation":
            sg = make_sinogram_filter_rotation(psi, p["n_angles"], winding=p["winding"])
        else:
            sg = make_sinogram(psi, p["spin"], p["n_angles"])
        _finite(sg.projections)
        if a.kind == "sinogram":
            write_sinogram_csv(sg, target)
        else:
            rec = reconstruct_fbp(sg, p["out_size"])
            _finite(rec.raw.values)
            io.write_scalarmap(rec.raw, target)
            if p.get("quicklook"):
                io.write_pgm(rec.display, out / p["quicklook"])
    elif a.kind == "oam":
        axis = p["axis"]
        if not config.grid.contains(*axis):
            raise ValueError(f"OAM axis {axis} lies outside the box")
        n2 = norm(psi) ** 2
        if n2 == 0:
            raise ValueError("OAM of a field with zero norm is undefined")
        lz = angular_momentum(psi, axis) / n2
        if not math.isfinite(lz):
            raise FloatingPointError("OAM evaluation produced a non-finite value")
        _json_dump({"axis": list(axis), "lz_mean": lz, "norm_squared": n2}, target)
    elif a.kind == "displaced_probabilities":
        curves = displaced_mode_probabilities(p["q"], p["rho0"])
        keys = sorted(curves.probabilities)
        with open(target, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["rho0_over_sigma"] + [f"P_n{n}_l{l}" for n, l in keys] + ["intrinsic_oam", "extrinsic_oam"])
            for i, r0 in enumerate(curves.rho0):
                row = [r0] + [curves.probabilities[k][i] for k in keys] + [curves.intrinsic_oam[i], curves.extrinsic_oam[i]]
                writer.writerow([repr(float(v)) for v in row])


def run_job(
    config: JobConfig,
    out_dir,
    config_bytes: bytes | None = None,
    config_name: str = "",
    progress: Callable[[str], None] | None = None,
) -> JobResult:
    """Run the pipeline, then every analysis, then write ``manifest.json``.

    Raises ``ConfigError`` for analyses whose parameters do not fit the
    state, ``FloatingPointError`` on non-finite numbers and ``OSError`` when
    outputs cannot be written.
    """
    say = progress or (lambda msg: None)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for a in config.analyses:
        for rel in a.outputs():
            (out / rel).parent.mkdir(parents=True, exist_ok=True)

    psi, log = _prepare(config, Reference(config.center, config.spin, config.steps))
    say(f"pipeline: {len(log)} step(s), final norm {norm(psi):.12g}")
    warnings: list[str] = list(psi.warnings)

    outputs: dict[str, str] = {}
    for i, a in enumerate(config.analyses):
        try:
            _analyze(config, psi, a, out, warnings.append)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc), f"analyses[{i}]", None, config_name or "<config>") from None
        for rel in a.outputs():
            outputs[rel] = sha256_file(out / rel)
        say(f"analysis {i} ({a.kind}) -> {', '.join(a.outputs())}")

    manifest = {
        "tool": "spinorbit",
        "version": __version__,
        "config": {
            "name": Path(config_name).name if config_name else config.name,
            "sha256": hashlib.sha256(config_bytes).hexdigest() if config_bytes is not None else None,
        },
        "steps": [r.to_data() for r in log],
        "final_norm": norm(psi),
        "warnings": warnings,
        "outputs": dict(sorted(outputs.items())),
    }
    path = out / MANIFEST_NAME
    _json_dump(manifest, path)
    return JobResult(psi, manifest, path)
