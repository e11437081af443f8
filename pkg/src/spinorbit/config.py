"""Job configuration files.

A job is a YAML document with ``grid``, ``input``, ``steps``, ``analyses`` and
an optional ``units`` block; the schema is described in ``docs/config.md``.
Validation errors carry the line number and the dotted path of the
offending field.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Any, Mapping, Sequence

import yaml

from .field import UP_Z, GridError, GridSpec, SpinDirection, make_grid
from .operators import PhysicalParams, rho_c_from_physical
from .pipeline import OperatorStep, StepError, parse_spin, spin_to_data

__all__ = [
    "ANALYSIS_KINDS",
    "ConfigError",
    "Analysis",
    "JobConfig",
    "parse_config",
    "load_config",
    "dump_config",
]


class ConfigError(ValueError):
    """Schema violation; ``line`` is 1-based (``None`` if unknown), ``path`` is dotted."""

    def __init__(self, message: str, path: str = "", line: int | None = None, source: str = "<config>"):
        self.message = message
        self.path = path
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {path + ': ' if path else ''}{message}")


_REQ = object()


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e8`` and ``1.5e-3`` as floats (YAML 1.2 style)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def _spin(v: Any) -> SpinDirection:
    return parse_spin(v)


def _pos_int(v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ValueError(f"expected a positive integer, got {v!r}")
    return v


def _opt(check):
    return lambda v: None if v is None else check(v)


def _number(v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {v!r}")
    return float(v)


def _pair(v: Any) -> tuple[float, float]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ValueError(f"expected a pair of numbers, got {v!r}")
    return _number(v[0]), _number(v[1])


def _int_pair(v: Any) -> tuple[int, int]:
    if not isinstance(v, (list, tuple)) or len(v) != 2 or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
        raise ValueError(f"expected a pair of integers, got {v!r}")
    if v[0] > v[1]:
        raise ValueError(f"empty range {list(v)}")
    return int(v[0]), int(v[1])


def _choice(*options: str):
    def check(v: Any) -> str:
        if v not in options:
            raise ValueError(f"expected one of {list(options)}, got {v!r}")
        return v

    return check


def _output(v: Any) -> str:
    if not isinstance(v, str) or not v.strip():
        raise ValueError(f"expected a relative file path, got {v!r}")
    p = PurePosixPath(v)
    if p.is_absolute() or ".." in p.parts:
        raise ValueError(f"output paths must stay inside the output directory, got {v!r}")
    return v


def _rho0_values(v: Any) -> list[float]:
    if isinstance(v, Mapping):
        if set(v) != {"start", "stop", "num"}:
            raise ValueError("rho0 range needs exactly start, stop and num")
        start, stop, num = _number(v["start"]), _number(v["stop"]), _pos_int(v["num"])
        if num == 1:
            return [start]
        return [start + (stop - start) * i / (num - 1) for i in range(num)]
    if isinstance(v, list) and v:
        return [_number(x) for x in v]
    raise ValueError(f"rho0 must be a list or a {{start, stop, num}} range, got {v!r}")


# kind -> {param: (validator, default)}; ``output`` is required for every kind
_ANALYSIS_SCHEMA: dict[str, dict[str, tuple[Any, Any]]] = {
    "intensity": {"spin": (_spin, _REQ), "quicklook": (_opt(_output), None), "phase_output": (_opt(_output), None)},
    "momentum": {"spin": (_spin, _REQ), "quicklook": (_opt(_output), None)},
    "decompose": {"n_max": (_pos_int, 20), "ell_range": (_int_pair, (-8, 8)), "center": (_pair, (0.0, 0.0))},
    "radial_overlap": {"reference": (None, _REQ), "state": (None, None), "nbins": (_pos_int, 256), "r_max": (_opt(_number), None)},
    "texture": {"stride": (_opt(_pos_int), None), "threshold": (_number, 1e-12)},
    "sinogram": {
        "spin": (_spin, _REQ),
        "n_angles": (_pos_int, 36),
        "method": (_choice("crystal", "filter_rotation"), "crystal"),
        "winding": (lambda v: int(_number(v)), 1),
    },
    "reconstruct": {
        "spin": (_spin, _REQ),
        "n_angles": (_pos_int, 36),
        "out_size": (_opt(_pos_int), None),
        "quicklook": (_opt(_output), None),
    },
    "oam": {"axis": (_pair, (0.0, 0.0))},
    "displaced_probabilities": {"q": (lambda v: int(_number(v)), 1), "rho0": (_rho0_values, _REQ)},
}
ANALYSIS_KINDS = tuple(_ANALYSIS_SCHEMA)


@dataclass(frozen=True)
class Reference:
    """A state prepared on the job grid: packet centre, spin and its own steps."""

    center: tuple[float, float] = (0.0, 0.0)
    spin: Any = UP_Z
    steps: tuple[OperatorStep, ...] = ()

    def to_data(self) -> dict[str, Any]:
        return {
            "center": list(self.center),
            "spin": spin_to_data(self.spin) if isinstance(self.spin, SpinDirection) else [list(map(_complex_data, self.spin))],
            "steps": [s.to_data() for s in self.steps],
        }


def _complex_data(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


@dataclass(frozen=True)
class Analysis:
    kind: str
    output: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_data(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "output": self.output}
        for name, value in self.params.items():
            if isinstance(value, SpinDirection):
                value = spin_to_data(value)
            elif isinstance(value, Reference):
                value = value.to_data()
            elif isinstance(value, tuple):
                value = list(value)
            out[name] = value
        return out

    def outputs(self) -> list[str]:
        extra = [self.params.get(k) for k in ("quicklook", "phase_output")]
        return [self.output] + [p for p in extra if p]


@dataclass(frozen=True)
class JobConfig:
    grid: GridSpec
    center: tuple[float, float] = (0.0, 0.0)
    spin: Any = UP_Z
    steps: tuple[OperatorStep, ...] = ()
    analyses: tuple[Analysis, ...] = ()
    units: PhysicalParams | None = None
    name: str = ""

    def to_data(self) -> dict[str, Any]:
        """Canonical plain-data form; parsing it back gives an equal config."""
        data: dict[str, Any] = {}
        if self.name:
            data["name"] = self.name
        data["grid"] = {"nx": self.grid.nx, "ny": self.grid.ny, "half_width": self.grid.half_width}
        data["input"] = Reference(self.center, self.spin).to_data()
        del data["input"]["steps"]
        if self.units is not None:
            data["units"] = {k: v for k, v in vars(self.units).items() if v is not None}
        data["steps"] = [s.to_data() for s in self.steps]
        data["analyses"] = [a.to_data() for a in self.analyses]
        return data


class _Parser:
    def __init__(self, text: str, source: str):
        self.source = source
        try:
            self.root = yaml.compose(text, Loader=_Loader)
            self.data = yaml.load(text, Loader=_Loader)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", "", mark.line + 1 if mark else None, source) from None

    def line(self, path: Sequence[str | int]) -> int | None:
        """Line of the deepest node along ``path`` that exists."""
        node = self.root
        best = node.start_mark.line + 1 if node is not None else None
        for key in path:
            if isinstance(node, yaml.MappingNode):
                for k, v in node.value:
                    if k.value == key:
                        best = k.start_mark.line + 1
                        node = v
                        break
                else:
                    return best
            elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
                best = node.start_mark.line + 1
            else:
                return best
        return best

    def fail(self, message: str, path: Sequence[str | int]) -> ConfigError:
        dotted = ""
        for key in path:
            dotted += f"[{key}]" if isinstance(key, int) else (f".{key}" if dotted else str(key))
        return ConfigError(message, dotted, self.line(path), self.source)

    def mapping(self, value: Any, path: list, allowed: Sequence[str]) -> dict:
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise self.fail(f"expected a mapping, got {type(value).__name__}", path)
        for key in value:
            if key not in allowed:
                raise self.fail(f"unknown field {key!r}; allowed: {list(allowed)}", path + [key])
        return value

    def check(self, func, value: Any, path: list):
        try:
            return func(value)
        except (ValueError, TypeError, StepError) as exc:
            raise self.fail(str(exc), path) from None

    def input_block(self, value: Any, path: list, allow_steps: bool) -> Reference:
        allowed = ["center", "spin"] + (["steps"] if allow_steps else [])
        block = self.mapping(value, path, allowed)
        center = self.check(_pair, block.get("center", [0.0, 0.0]), path + ["center"])
        if center[0] < 0:
            raise self.fail("radial offset rho0 must be non-negative", path + ["center"])
        spin = self.check(self.spinor_or_direction, block.get("spin", "+z"), path + ["spin"])
        steps = self.steps(block.get("steps", []), path + ["steps"], None) if allow_steps else ()
        return Reference(center, spin, steps)

    @staticmethod
    def spinor_or_direction(v: Any):
        # explicit amplitude pair: [[re, im], [re, im]]
        if isinstance(v, list) and len(v) == 1 and isinstance(v[0], list) and len(v[0]) == 2:
            pair = [complex(_number(a[0]), _number(a[1])) for a in v[0]]
            if abs(math.hypot(abs(pair[0]), abs(pair[1])) - 1) > 1e-9:
                raise ValueError("explicit spinor must be normalized")
            return tuple(pair)
        return parse_spin(v)

    def steps(self, value: Any, path: list, units: PhysicalParams | None) -> tuple[OperatorStep, ...]:
        if value is None:
            return ()
        if not isinstance(value, list):
            raise self.fail("steps must be a list", path)
        out = []
        for i, raw in enumerate(value):
            if not isinstance(raw, dict) or "kind" not in raw:
                raise self.fail("each step must be a mapping with a 'kind' entry", path + [i])
            raw = dict(raw)
            if raw.get("rho_c") == "units":
                if units is None or units.K is None or units.d is None or units.sigma_perp is None:
                    raise self.fail("rho_c: units needs v_z, K, d and sigma_perp in the units block", path + [i, "rho_c"])
                raw["rho_c"] = rho_c_from_physical(units)[1]
            try:
                out.append(OperatorStep.from_data(raw))
            except StepError as exc:
                raise self.fail(str(exc), path + [i] + ([exc.field] if exc.field else [])) from None
        return tuple(out)

    def analysis(self, value: Any, path: list, units) -> Analysis:
        if not isinstance(value, dict) or "kind" not in value:
            raise self.fail("each analysis must be a mapping with a 'kind' entry", path)
        kind = value["kind"]
        if kind not in _ANALYSIS_SCHEMA:
            raise self.fail(f"unknown analysis kind {kind!r}; expected one of {list(ANALYSIS_KINDS)}", path + ["kind"])
        schema = _ANALYSIS_SCHEMA[kind]
        self.mapping(value, path, ["kind", "output"] + list(schema))
        if "output" not in value:
            raise self.fail("missing required field 'output'", path)
        output = self.check(_output, value["output"], path + ["output"])
        params: dict[str, Any] = {}
        for name, (check, default) in schema.items():
            if name not in value:
                if default is _REQ:
                    raise self.fail(f"missing required field {name!r}", path)
                params[name] = default
            elif name in ("reference", "state"):
                if value[name] is None and default is None:
                    params[name] = None
                else:
                    params[name] = self.input_block(value[name], path + [name], allow_steps=True)
            else:
                params[name] = self.check(check, value[name], path + [name])
        return Analysis(kind, output, params)

    def job(self) -> JobConfig:
        root = self.mapping(self.data, [], ["name", "grid", "input", "units", "steps", "analyses"])
        name = root.get("name", "")
        if not isinstance(name, str):
            raise self.fail("name must be a string", ["name"])
        g = self.mapping(root.get("grid"), ["grid"], ["nx", "ny", "half_width"])
        try:
            grid = make_grid(g.get("nx", 512), g.get("ny", 512), g.get("half_width", 8.0))
        except (GridError, TypeError) as exc:
            key = next((k for k in ("nx", "ny", "half_width") if k in str(exc)), None)
            raise self.fail(str(exc), ["grid"] + ([key] if key else [])) from None
        inp = self.input_block(root.get("input"), ["input"], allow_steps=False)
        if not grid.contains(inp.center[0] * math.cos(inp.center[1]), inp.center[0] * math.sin(inp.center[1])):
            raise self.fail("packet centre lies outside the grid box", ["input", "center"])
        units = None
        if root.get("units") is not None:
            fields = ["v_z", "gamma_n", "K", "d", "B", "theta", "sigma_perp"]
            u = self.mapping(root["units"], ["units"], fields)
            if "v_z" not in u:
                raise self.fail("units block needs v_z", ["units"])
            values = {k: self.check(_number, v, ["units", k]) for k, v in u.items()}
            try:
                units = PhysicalParams(**values)
            except ValueError as exc:
                bad = next((k for k in values if k in str(exc)), None)
                raise self.fail(str(exc), ["units"] + ([bad] if bad else [])) from None
        steps = self.steps(root.get("steps", []), ["steps"], units)
        raw_analyses = root.get("analyses", [])
        if raw_analyses is None:
            raw_analyses = []
        if not isinstance(raw_analyses, list):
            raise self.fail("analyses must be a list", ["analyses"])
        analyses = tuple(self.analysis(a, ["analyses", i], units) for i, a in enumerate(raw_analyses))
        seen: dict[str, int] = {}
        for i, a in enumerate(analyses):
            for out in a.outputs():
                if out in seen:
                    raise self.fail(f"output {out!r} is also written by analyses[{seen[out]}]", ["analyses", i, "output"])
                seen[out] = i
        return JobConfig(grid, inp.center, inp.spin, steps, analyses, units, name)


def parse_config(text: str, source: str = "<config>") -> JobConfig:
    return _Parser(text, source).job()


def load_config(path) -> JobConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def dump_config(config: JobConfig) -> str:
    """YAML text of the canonical form."""
    return yaml.safe_dump(config.to_data(), sort_keys=False, default_flow_style=None)
