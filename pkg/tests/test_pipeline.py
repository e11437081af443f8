import math

import numpy as np
import pytest

from spinorbit import UP_X, SpinorField, apply_quadrupole, gaussian_wavepacket
from spinorbit.pipeline import (
    OperatorStep,
    PipelineError,
    StepError,
    from_operator_product,
    parse_spin,
    run_pipeline,
    spin_to_data,
    to_operator_product,
)


def test_defaults_filled():
    step = OperatorStep("LOV", {"N": 2})
    assert step.params["signs"] == (-1, 1)
    assert step.params["rho_c"] == 1.82
    assert OperatorStep("MagneticSPP", {"q": -1, "beta": "comparison"}).params["beta"] == math.pi / 2


@pytest.mark.parametrize(
    "kind, params",
    [
        ("Nope", {}),
        ("SPP", {}),
        ("SPP", {"q": 1, "extra": 2}),
        ("MagneticSPP", {"q": 0.5}),
        ("Quadrupole", {"rho_c": 0}),
        ("HigherOrderQ", {"j": -1, "rho_c": 1}),
        ("LOV", {"N": 1, "signs": [1, 0]}),
        ("LOV", {"N": 1, "signs": [True, 1]}),
        ("SpinProjection", {"direction": "up"}),
        ("SpinRotation", {"axis": [0, 0, 0], "angle": 1}),
        ("BB1", {"rho_c": float("nan")}),
    ],
)
def test_invalid_steps(kind, params):
    with pytest.raises(StepError):
        OperatorStep(kind, params)


def test_parse_spin_forms():
    assert parse_spin("+x") == UP_X
    assert np.allclose(parse_spin([1, 0, 0]).axis, [1, 0, 0])
    assert parse_spin({"theta": 0.3, "phi": 1.0}).theta == 0.3
    assert spin_to_data(UP_X) == "+x"
    assert spin_to_data(parse_spin({"theta": 0.3, "phi": 1.0})) == {"theta": 0.3, "phi": 1.0}


def test_step_round_trip():
    step = OperatorStep("SpinRotation", {"axis": "+y", "angle": 0.4})
    assert OperatorStep.from_data(step.to_data()) == step


def test_operator_product_order():
    a, b = OperatorStep("SPP", {"q": 1}), OperatorStep("BB1", {"rho_c": 1.0})
    assert from_operator_product([a, b]) == [b, a]
    assert to_operator_product(from_operator_product([a, b])) == [a, b]


def test_run_matches_direct_call(up):
    out, log = run_pipeline(up, [{"kind": "Quadrupole", "rho_c": 1.82}])
    assert np.array_equal(out.down, apply_quadrupole(up, 1.82).down)
    assert log[0].norm == pytest.approx(1.0)
    assert log[0].to_data()["params"]["delta"] == 0.0


def test_projection_survival_logged(plus_x):
    _, log = run_pipeline(plus_x, [{"kind": "SpinProjection", "direction": "+z"}])
    assert log[0].survival == pytest.approx(0.5)


def test_invalid_step_reported_before_running(up):
    steps = [{"kind": "SPP", "q": 1}, {"kind": "SPP"}]
    with pytest.raises(PipelineError) as info:
        run_pipeline(up, steps)
    assert info.value.index == 1 and info.value.field == "q"


def test_empty_pipeline(up):
    out, log = run_pipeline(up, [])
    assert out is up and log == []


def test_nan_detected(grid):
    bad = np.ones(grid.shape, dtype=complex)
    bad[5, 5] = np.nan
    psi = SpinorField(grid, bad, bad)
    with pytest.raises(FloatingPointError, match="step 0"):
        run_pipeline(psi, [{"kind": "SPP", "q": 1}])
