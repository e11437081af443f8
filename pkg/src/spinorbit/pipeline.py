"""Declarative operator steps and the pipeline runner.

A pipeline is a list of :class:`OperatorStep` in traversal order: the first
element acts first. Operator products written the other way round (rightmost
factor first) convert with :func:`from_operator_product`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import operators as ops
from .field import DOWN_X, DOWN_Y, DOWN_Z, UP_X, UP_Y, UP_Z, SpinDirection, SpinorField, norm

__all__ = [
    "STEP_KINDS",
    "NAMED_SPINS",
    "StepError",
    "PipelineError",
    "OperatorStep",
    "StepRecord",
    "parse_spin",
    "spin_to_data",
    "from_operator_product",
    "to_operator_product",
    "run_pipeline",
]

NAMED_SPINS = {"+z": UP_Z, "-z": DOWN_Z, "+x": UP_X, "-x": DOWN_X, "+y": UP_Y, "-y": DOWN_Y}
# named value accepted for the mSPP relative phase
BETA_PRESETS = {"comparison": ops.COMPARISON_BETA}


class StepError(ValueError):
    """An operator step has a missing, unknown or out-of-range parameter."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class PipelineError(ValueError):
    """A pipeline step failed; ``index`` is its position in traversal order."""

    def __init__(self, index: int, message: str, field: str | None = None):
        super().__init__(f"step {index}: {message}")
        self.index = index
        self.field = field


def parse_spin(value: Any) -> SpinDirection:
    """Spin direction from a name (``"+x"``), a 3-vector, ``{theta, phi}`` or a :class:`SpinDirection`."""
    if isinstance(value, SpinDirection):
        return value
    if isinstance(value, str):
        if value not in NAMED_SPINS:
            raise StepError(f"unknown spin name {value!r}; expected one of {sorted(NAMED_SPINS)}")
        return NAMED_SPINS[value]
    if isinstance(value, Mapping) and set(value) == {"theta", "phi"}:
        if all(_is_number(v) and math.isfinite(v) for v in value.values()):
            return SpinDirection(float(value["theta"]), float(value["phi"]))
    if isinstance(value, (list, tuple)) and len(value) == 3 and all(_is_number(v) for v in value):
        try:
            return SpinDirection.from_axis([float(v) for v in value])
        except ValueError as exc:
            raise StepError(str(exc)) from None
    raise StepError(f"spin must be a name like '+x', a 3-vector or {{theta, phi}}, got {value!r}")


def spin_to_data(s: SpinDirection) -> str | dict[str, float]:
    """Canonical form: a name for the six axis directions, else ``{theta, phi}``."""
    for name, named in NAMED_SPINS.items():
        if named == s:
            return name
    return {"theta": float(s.theta), "phi": float(s.phi)}


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)


def _real(name: str, positive: bool = False) -> Callable[[Any], float]:
    def check(v: Any) -> float:
        if not _is_number(v) or not math.isfinite(v):
            raise StepError(f"{name} must be a finite number, got {v!r}", name)
        if positive and not v > 0:
            raise StepError(f"{name} must be positive, got {v!r}", name)
        return float(v)

    return check


def _integer(name: str, minimum: int | None = None) -> Callable[[Any], int]:
    def check(v: Any) -> int:
        if not _is_number(v) or int(v) != v:
            raise StepError(f"{name} must be an integer, got {v!r}", name)
        if minimum is not None and v < minimum:
            raise StepError(f"{name} must be >= {minimum}, got {v!r}", name)
        return int(v)

    return check


def _beta(v: Any) -> float:
    if isinstance(v, str):
        if v not in BETA_PRESETS:
            raise StepError(f"beta preset must be one of {sorted(BETA_PRESETS)}, got {v!r}", "beta")
        return BETA_PRESETS[v]
    return _real("beta")(v)


def _signs(v: Any) -> tuple[int, int]:
    if not isinstance(v, (list, tuple)) or len(v) != 2 or any(s not in (-1, 1) or isinstance(s, bool) for s in v):
        raise StepError(f"signs must be a pair of +1/-1, got {v!r}", "signs")
    return int(v[0]), int(v[1])


def _spin_param(name: str) -> Callable[[Any], SpinDirection]:
    def check(v: Any) -> SpinDirection:
        try:
            return parse_spin(v)
        except StepError as exc:
            raise StepError(str(exc), name) from None

    return check


_REQUIRED = object()

# kind -> {param: (validator, default)}
_SCHEMA: dict[str, dict[str, tuple[Callable[[Any], Any], Any]]] = {
    "SPP": {"q": (_real("q"), _REQUIRED), "alpha0": (_real("alpha0"), 0.0)},
    "MagneticSPP": {"q": (_integer("q"), _REQUIRED), "beta": (_beta, 0.0)},
    "Quadrupole": {"rho_c": (_real("rho_c", True), _REQUIRED), "delta": (_real("delta"), 0.0)},
    "BB1": {"rho_c": (_real("rho_c", True), _REQUIRED)},
    "HigherOrderQ": {"j": (_integer("j", 0), _REQUIRED), "rho_c": (_real("rho_c", True), _REQUIRED)},
    "LinearGradient": {
        "phi_g": (_real("phi_g"), _REQUIRED),
        "phi_m": (_real("phi_m"), _REQUIRED),
        "rho_c": (_real("rho_c", True), _REQUIRED),
    },
    "LOV": {
        "N": (_integer("N", 1), _REQUIRED),
        "signs": (_signs, ops.LOV_QUADRUPOLE_SIGNS),
        "rho_c": (_real("rho_c", True), ops.OPTIMAL_RHO_C),
        "phi_g": (_real("phi_g"), math.pi),
        "phi_m": (_real("phi_m"), 0.0),
    },
    "SpinRotation": {"axis": (_spin_param("axis"), _REQUIRED), "angle": (_real("angle"), _REQUIRED)},
    "SpinProjection": {"direction": (_spin_param("direction"), _REQUIRED)},
}
STEP_KINDS = tuple(_SCHEMA)


@dataclass(frozen=True)
class OperatorStep:
    """One preparation element. ``params`` is validated and completed with defaults."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _SCHEMA:
            raise StepError(f"unknown step kind {self.kind!r}; expected one of {list(STEP_KINDS)}", "kind")
        schema = _SCHEMA[self.kind]
        unknown = sorted(set(self.params) - set(schema))
        if unknown:
            raise StepError(f"{self.kind} does not take parameter(s) {unknown}", unknown[0])
        clean = {}
        for name, (check, default) in schema.items():
            if name in self.params:
                clean[name] = check(self.params[name])
            elif default is _REQUIRED:
                raise StepError(f"{self.kind} requires parameter {name!r}", name)
            else:
                clean[name] = default
        object.__setattr__(self, "params", clean)

    def apply(self, psi: SpinorField) -> SpinorField:
        p = self.params
        if self.kind == "SPP":
            return ops.apply_spp(psi, p["q"], p["alpha0"])
        if self.kind == "MagneticSPP":
            return ops.apply_magnetic_spp(psi, p["q"], p["beta"])
        if self.kind == "Quadrupole":
            return ops.apply_quadrupole(psi, p["rho_c"], p["delta"])
        if self.kind == "BB1":
            return ops.apply_bb1(psi, p["rho_c"])
        if self.kind == "HigherOrderQ":
            return ops.apply_higher_order(psi, p["j"], p["rho_c"])
        if self.kind == "LinearGradient":
            return ops.apply_gradient(psi, p["phi_g"], p["phi_m"], p["rho_c"])
        if self.kind == "LOV":
            return ops.apply_lov(psi, p["N"], p["signs"], p["rho_c"], p["phi_g"], p["phi_m"])
        if self.kind == "SpinRotation":
            return ops.apply_spin_rotation(psi, p["axis"], p["angle"])
        return ops.project_spin(psi, p["direction"])

    def to_data(self) -> dict[str, Any]:
        """Plain-data form with every parameter spelled out."""
        out: dict[str, Any] = {"kind": self.kind}
        for name, value in self.params.items():
            if isinstance(value, SpinDirection):
                value = spin_to_data(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[name] = value
        return out

    @classmethod
    def from_data(cls, data: Mapping[str, Any]) -> "OperatorStep":
        if not isinstance(data, Mapping) or "kind" not in data:
            raise StepError("a step must be a mapping with a 'kind' entry", "kind")
        params = {k: v for k, v in data.items() if k != "kind"}
        return cls(data["kind"], params)


@dataclass(frozen=True)
class StepRecord:
    index: int
    kind: str
    params: Mapping[str, Any]
    norm: float
    survival: float
    warnings: tuple[str, ...] = ()

    def to_data(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "kind": self.kind,
            "params": OperatorStep(self.kind, self.params).to_data(),
            "norm": self.norm,
            "survival": self.survival,
            "warnings": list(self.warnings),
        }


def from_operator_product(factors: Sequence[OperatorStep]) -> list[OperatorStep]:
    """Traversal order for a product written with the rightmost factor acting first."""
    return list(reversed(factors))


def to_operator_product(steps: Sequence[OperatorStep]) -> list[OperatorStep]:
    return list(reversed(steps))


def run_pipeline(
    psi: SpinorField, steps: Sequence[OperatorStep | Mapping[str, Any]]
) -> tuple[SpinorField, list[StepRecord]]:
    """Apply ``steps`` in list order.

    Every step is validated before any runs; the first invalid one raises
    :class:`PipelineError` with its index. Non-finite amplitudes after a
    step raise ``FloatingPointError`` naming the step. The log records the
    norm after each step and its survival ``||out||^2 / ||in||^2``.
    """
    parsed: list[OperatorStep] = []
    for i, step in enumerate(steps):
        try:
            parsed.append(step if isinstance(step, OperatorStep) else OperatorStep.from_data(step))
        except StepError as exc:
            raise PipelineError(i, str(exc), exc.field) from None
    log: list[StepRecord] = []
    current = psi
    for i, step in enumerate(parsed):
        before = norm(current) ** 2
        try:
            out = step.apply(current)
        except ValueError as exc:
            raise PipelineError(i, str(exc)) from None
        try:
            out.validate()
        except FloatingPointError:
            raise FloatingPointError(f"step {i} ({step.kind}) produced non-finite amplitudes") from None
        after = norm(out) ** 2
        new_warnings = out.warnings[len(current.warnings) :]
        log.append(
            StepRecord(i, step.kind, step.params, math.sqrt(after), after / before if before else 0.0, new_warnings)
        )
        current = out
    return current, log
