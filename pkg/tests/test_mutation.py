"""A corrupted Laguerre recurrence must be caught by the l-selection check."""

import numpy as np

from spinorbit import modes
from spinorbit.acceptance import check_selection_rule


def corrupted_laguerre(n_max, alpha, x):
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 + alpha - x
    for k in range(1, n_max):
        # wrong sign on the second term
        out[k + 1] = ((2 * k + 1 + alpha - x) * out[k] + (k + alpha) * out[k - 1]) / (k + 1)
    return out


def test_selection_rule_holds():
    assert check_selection_rule(128).passed


def test_selection_rule_catches_mutation(monkeypatch):
    monkeypatch.setattr(modes, "laguerre", corrupted_laguerre)
    outcome = check_selection_rule(128)
    assert not outcome.passed
    assert "off-target" in outcome.detail
