import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiscalpanel.errors import HorizonZero, NonPositiveGrossRate, NonStationaryInertia, ValidationError
from fiscalpanel.sustainability import (
    DebtPathResult,
    EconomyPath,
    FiscalRule,
    OverAdjustmentWarning,
    UnboundedDeterminantWarning,
    Verdict,
    classify_sustainability,
    long_run_response,
    ponzi_decay_factor,
    simulate_debt_path,
)


@pytest.mark.parametrize("phi,rho,expected", [
    (0.358, 0.033, 0.033 / 0.642),
    (0.0, 0.05, 0.05),
    (0.5, -0.1, -0.2),
])
def test_long_run_response(phi, rho, expected):
    assert long_run_response(phi, rho) == pytest.approx(expected, rel=1e-15)
    assert ponzi_decay_factor(phi, rho) == pytest.approx(1 - expected, rel=1e-15)


def test_over_adjustment_warning():
    with pytest.warns(OverAdjustmentWarning):
        value = ponzi_decay_factor(0.5, 0.6)
    assert value == pytest.approx(-0.2)


@pytest.mark.parametrize("phi", [1.0, 1.5])
def test_nonstationary_inertia(phi):
    with pytest.raises(NonStationaryInertia):
        long_run_response(phi, 0.01)
    with pytest.raises(NonStationaryInertia):
        FiscalRule(phi, 0.01)


def test_rule_validation():
    with pytest.raises(ValidationError):
        FiscalRule(-0.1, 0.01)
    with pytest.raises(ValidationError):
        FiscalRule(0.3, float("inf"))
    with pytest.warns(UnboundedDeterminantWarning):
        FiscalRule(0.3, 0.01, mu=500.0)
    rule = FiscalRule(0.3, 0.01, mu=[1, 2, 3])
    np.testing.assert_array_equal(rule.mu_path(2), [1.0, 2.0])
    with pytest.raises(ValidationError):
        rule.mu_path(5)


def test_economy_validation():
    with pytest.raises(NonPositiveGrossRate):
        EconomyPath(-1.0, 0.02)
    with pytest.raises(NonPositiveGrossRate):
        EconomyPath(0.03, [0.01, -1.5])
    r, g, d = EconomyPath(0.03, 0.01).paths(3)
    np.testing.assert_allclose(d, 1.01 / 1.03)


def test_closed_form_one_step_example():
    res = simulate_debt_path(FiscalRule(0.0, 0.05), EconomyPath(0.02, 0.02), 100.0, 0.0, 3)
    np.testing.assert_allclose(res.b, [95.0, 90.25, 85.7375], rtol=1e-15)
    np.testing.assert_allclose(res.s, [5.0, 4.75, 4.5125], rtol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 0.5), st.floats(-0.05, 0.1), st.floats(1, 200), st.integers(1, 200))
def test_closed_form_geometric_decay(rho, r, b0, n):
    res = simulate_debt_path(FiscalRule(0.0, rho), EconomyPath(r, r), b0, 0.0, n)
    t = np.arange(1, n + 1)
    np.testing.assert_allclose(res.b, (1 - rho) ** t * b0, rtol=1e-12)
    assert res.horizon == n


def test_law_of_motion_step_by_step():
    rule = FiscalRule(0.4, 0.03, mu=[0.5, -0.2, 0.1, 0.0])
    eco = EconomyPath([0.03, 0.04, 0.02, 0.05], [0.01, 0.02, 0.03, 0.0])
    res = simulate_debt_path(rule, eco, 60.0, 1.0, 4)
    b, s = 60.0, 1.0
    disc = 1.0
    for t in range(4):
        s = 0.4 * s + 0.03 * b + rule.mu[t]
        b = (1 + eco.r[t]) / (1 + eco.g[t]) * (b - s)
        disc *= (1 + eco.g[t]) / (1 + eco.r[t])
        assert res.s[t] == pytest.approx(s, rel=1e-14)
        assert res.b[t] == pytest.approx(b, rel=1e-14)
        assert res.discounted_b[t] == pytest.approx(b * disc, rel=1e-13)


def test_explicit_discount_sequence():
    res = simulate_debt_path(FiscalRule(0.0, 0.0), EconomyPath(0.0, 0.0, discount=[0.5] * 4),
                             8.0, 0.0, 4)
    np.testing.assert_allclose(res.discounted_b, [4.0, 2.0, 1.0, 0.5])


def test_sustainable_reference_path():
    res = simulate_debt_path(FiscalRule(0.358, 0.033), EconomyPath(0.03, 0.02), 74.8, 0.0, 500)
    assert res.verdict is Verdict.SUSTAINABLE
    assert abs(res.discounted_b[-1]) < 1e-6 * 74.8


def test_ponzi_path():
    res = simulate_debt_path(FiscalRule(0.358, 0.0), EconomyPath(0.04, 0.02), 74.8, 0.0, 300)
    assert res.verdict is Verdict.PONZI_VIOLATION


def test_short_horizon_inconclusive_and_zero_horizon():
    res = simulate_debt_path(FiscalRule(0.358, 0.033), EconomyPath(0.03, 0.02), 74.8, 0.0, 15)
    assert res.verdict is Verdict.INCONCLUSIVE
    with pytest.raises(HorizonZero):
        simulate_debt_path(FiscalRule(0.3, 0.03), EconomyPath(0.03, 0.02), 74.8, 0.0, 0)


def test_classifier_oscillating_tail_is_inconclusive():
    d = np.array([1.0, 2.0] * 50)
    res = DebtPathResult(b=d, s=np.zeros(100), discounted_b=d, b0=1.0, s0=0.0,
                         r=np.zeros(100), g=np.zeros(100))
    assert classify_sustainability(res) is Verdict.INCONCLUSIVE


def test_decay_factor_approximates_long_horizon_growth():
    # with r = g, small rho and s0 on its long-run path, debt shrinks roughly geometrically
    phi, rho = 0.358, 0.005
    res = simulate_debt_path(FiscalRule(phi, rho), EconomyPath(0.02, 0.02), 100.0, 0.0, 400)
    n = np.array([50, 100, 200, 400])
    approx = ponzi_decay_factor(phi, rho) ** n * 100.0
    np.testing.assert_allclose(res.b[n - 1], approx, rtol=0.05)


def test_warning_free_reference_rule():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        FiscalRule(0.358, 0.033).long_run


def test_decay_factor_reference_value():
    assert ponzi_decay_factor(0.358, 0.033) == pytest.approx(0.9486, abs=5e-5)
