"""Command line front-end: ``spinorbit run | convert | selftest``.

Exit codes: 0 success, 1 selftest failure, 2 usage or config error,
3 non-finite numbers, 4 file I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

import scipy.fft

from . import __version__
from .config import ConfigError, parse_config
from .operators import NEUTRON_GYROMAGNETIC_RATIO, PhysicalParams, lattice_constant, rho_c_from_physical
from .pipeline import PipelineError

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

SELFTEST_SIZE = 256


def bundled_configs() -> list[str]:
    root = resources.files("spinorbit") / "configs"
    return sorted(p.name[: -len(".cfg")] for p in root.iterdir() if p.name.endswith(".cfg"))


def _resolve_config(name: str) -> Path:
    path = Path(name)
    if path.exists() or path.suffix or "/" in name:
        return path
    bundled = resources.files("spinorbit") / "configs" / f"{name}.cfg"
    return Path(str(bundled)) if bundled.is_file() else path


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--threads", type=int, metavar="N", default=default if suppress else 1,
                        help="FFT worker threads (results do not depend on it)")
    parser.add_argument("--out", metavar="DIR", default=default if suppress else ".",
                        help="output directory for run artifacts (default: current directory)")
    parser.add_argument("--quiet", action="store_true", default=default if suppress else False,
                        help="print only errors and final status")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinorbit", description="Neutron spin-orbit state simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a job config")
    _global_options(run, suppress=True)
    run.add_argument("config", nargs="?", help="config file, or the name of a bundled config")
    run.add_argument("--list-configs", action="store_true", help="list bundled configs and exit")

    conv = sub.add_parser("convert", help="convert laboratory parameters to rho_c and the LOV lattice constant")
    _global_options(conv, suppress=True)
    conv.add_argument("--v-z", type=float, required=True, help="longitudinal velocity [m/s]")
    conv.add_argument("--gamma-n", type=float, default=NEUTRON_GYROMAGNETIC_RATIO,
                      help="gyromagnetic ratio [rad/(s T)] (default: CODATA neutron value)")
    conv.add_argument("--K", type=float, help="quadrupole gradient [T/m]")
    conv.add_argument("--d", type=float, help="quadrupole length [m]")
    conv.add_argument("--B", type=float, help="prism field [T]")
    angle = conv.add_mutually_exclusive_group()
    angle.add_argument("--theta", type=float, help="prism inclination [rad]")
    angle.add_argument("--theta-deg", type=float, help="prism inclination [deg]")
    angle.add_argument("--tan-theta", type=float, help="tangent of the prism inclination")
    conv.add_argument("--sigma-perp", type=float, help="transverse coherence length [m]")
    conv.add_argument("--json", action="store_true", help="print a JSON object instead of text")

    st = sub.add_parser("selftest", help=f"run the acceptance suite at {SELFTEST_SIZE}x{SELFTEST_SIZE}")
    _global_options(st, suppress=True)
    st.add_argument("--list", action="store_true", help="print criterion identifiers without running")
    st.add_argument("--only", nargs="+", metavar="ID", help="run only these criteria")
    st.add_argument("--size", type=int, default=SELFTEST_SIZE, help="grid size (256 or 512)")
    return parser


def _err(msg: str) -> None:
    print(f"spinorbit: {msg}", file=sys.stderr, flush=True)


def _say(msg: str) -> None:
    print(msg, flush=True)


def cmd_run(args) -> int:
    from .jobs import run_job

    if args.list_configs:
        for name in bundled_configs():
            print(name)
        return EXIT_OK
    if not args.config:
        _err("run needs a config path (or --list-configs)")
        return EXIT_CONFIG
    path = _resolve_config(args.config)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    try:
        config = parse_config(raw.decode("utf-8"), str(path))
    except UnicodeDecodeError:
        _err(f"{path}: config is not UTF-8 text")
        return EXIT_CONFIG
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    say = (lambda msg: None) if args.quiet else print
    try:
        result = run_job(config, args.out, raw, str(path), progress=say)
    except (ConfigError, PipelineError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except ValueError as exc:
        _err(f"{path}: {exc}")
        return EXIT_CONFIG
    except FloatingPointError as exc:
        _err(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    except OSError as exc:
        _err(f"I/O failure: {exc}")
        return EXIT_IO
    for w in result.manifest["warnings"]:
        _err(f"warning: {w}")
    if not args.quiet:
        print(f"wrote {len(result.manifest['outputs'])} output(s) and {result.manifest_path}")
    return EXIT_OK


def cmd_convert(args) -> int:
    theta = args.theta
    if args.theta_deg is not None:
        theta = math.radians(args.theta_deg)
    elif args.tan_theta is not None:
        if args.tan_theta <= 0:
            _err("--tan-theta must be positive")
            return EXIT_CONFIG
        theta = math.atan(args.tan_theta)
    want_rho = args.K is not None or args.d is not None
    want_a = args.B is not None or theta is not None
    if not want_rho and not want_a:
        _err("convert needs --K and --d (for rho_c) and/or --B and an inclination (for a)")
        return EXIT_CONFIG
    try:
        p = PhysicalParams(args.v_z, args.gamma_n, args.K, args.d, args.B, theta, args.sigma_perp)
        out: dict[str, float | None] = {}
        if want_rho:
            out["rho_c_m"], out["rho_c_over_sigma"] = rho_c_from_physical(p)
        if want_a:
            out["lattice_constant_m"] = lattice_constant(p)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        if "rho_c_m" in out:
            print(f"rho_c = {out['rho_c_m']:.6e} m")
            if out["rho_c_over_sigma"] is not None:
                print(f"rho_c / sigma_perp = {out['rho_c_over_sigma']:.6g}")
        if "lattice_constant_m" in out:
            print(f"a = {out['lattice_constant_m']:.6e} m")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import CRITERIA, run_criteria

    if args.list:
        for c in CRITERIA:
            print(f"{c.ident}  {c.title}")
        return EXIT_OK
    try:
        results = run_criteria(args.only, size=args.size, report=None if args.quiet else _say)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    failed = [r for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    if failed:
        for r in failed:
            _err(f"FAILED {r.ident} {r.title}: {r.detail}")
        print(f"{len(results) - len(failed)}/{len(results)} criteria passed in {total:.1f}s")
        return EXIT_SELFTEST
    print(f"all {len(results)} criteria passed in {total:.1f}s")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None or args.threads < 1:
        _err("--threads must be a positive integer")
        return EXIT_CONFIG
    handlers = {"run": cmd_run, "convert": cmd_convert, "selftest": cmd_selftest}
    with scipy.fft.set_workers(args.threads):
        return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
