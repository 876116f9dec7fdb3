import math

import numpy as np
import pytest

from qpscope.device_model import kelvin_to_ghz
from qpscope.errors import ConfigError, NumericsError
from qpscope.inference import arrhenius_fit, joint_fit, rates_vs_population
from qpscope.transmon_spectrum import transition_frequency
from qpscope.tunneling_rates import state_rate


def test_line_fit_exact_through_two_rate_points():
    records = [(0.0, 0.14, 1e-3), (1.0, 4.76, 1e-3), (0.5, 2.45, 1e-3)]
    fit = rates_vs_population(records)
    assert fit.gamma0 == pytest.approx(0.14, abs=1e-9)
    assert fit.gamma1 == pytest.approx(4.76, abs=1e-9)


def test_line_fit_recovers_under_noise():
    rng = np.random.default_rng(0)
    g0, g1 = 0.14, 4.76
    p = np.linspace(0.0, 1.0, 12)
    sigma = 0.05 * (g0 + (g1 - g0) * p)
    vals = g0 + (g1 - g0) * p + sigma * rng.standard_normal(p.size)
    fit = rates_vs_population(list(zip(p, vals, sigma)))
    assert abs(fit.gamma0 - g0) < 3 * fit.gamma0_err
    assert abs(fit.gamma1 - g1) < 3 * fit.gamma1_err


def test_line_fit_residual_curvature_consistent_with_zero():
    rng = np.random.default_rng(1)
    p = np.linspace(0.0, 1.0, 24)
    sigma = np.full(p.size, 0.05)
    vals = 0.2 + 4.0 * p + sigma * rng.standard_normal(p.size)
    fit = rates_vs_population(list(zip(p, vals, sigma)))
    resid = (vals - (fit.intercept + fit.slope * p)) / sigma
    # weighted quadratic coefficient of the residuals, with its standard error
    x = p - p.mean()
    q = x**2 - (x**2).mean()
    coef = float(q @ resid) / float(q @ q)
    se = 1.0 / math.sqrt(float(q @ q))
    assert abs(coef) < 3 * se
    assert fit.chi2 / fit.ndof < 2.0


def test_line_fit_errors():
    with pytest.raises(ConfigError):
        rates_vs_population([(0.0, 1.0, 0.1), (1.0, 2.0, 0.1)])
    with pytest.raises(NumericsError, match="singular"):
        rates_vs_population([(0.3, 1.0, 0.1), (0.3, 2.0, 0.1), (0.3, 1.5, 0.1)])
    with pytest.raises(ConfigError):
        rates_vs_population([(0.0, 1.0, 0.0), (0.5, 2.0, 0.1), (1.0, 3.0, 0.1)])


def test_arrhenius_exact_recovery():
    prefactor, activation, offset = 3.0, 2.5, 0.14
    series = [
        (t, prefactor * math.exp(-activation / kelvin_to_ghz(t)) + offset)
        for t in (0.03, 0.045, 0.06, 0.075, 0.09)
    ]
    fit = arrhenius_fit(series, offset=offset)
    assert fit.activation_ghz == pytest.approx(activation, rel=1e-10)
    assert fit.prefactor == pytest.approx(prefactor, rel=1e-10)
    assert fit.activation_err_ghz == pytest.approx(0.0, abs=1e-8)


def test_arrhenius_errors():
    with pytest.raises(ConfigError):
        arrhenius_fit([(0.03, 1.0), (0.05, 2.0)])
    with pytest.raises(ConfigError, match="positive"):
        arrhenius_fit([(0.03, 0.1), (0.05, 0.2), (0.07, 0.3)], offset=0.2)


def _model_rows(device, noise=0.0, seed=0, temps=(0.020, 0.030, 0.045, 0.060, 0.075, 0.095, 0.110)):
    rng = np.random.default_rng(seed)
    f21 = transition_frequency(device, 0.163, 1, 2)
    rows = []
    for t in temps:
        g0 = 0.14 + state_rate(0, device, 0.163, t)
        g1 = 0.14 + state_rate(1, device, 0.163, t)
        w = math.exp(-f21 / kelvin_to_ghz(t))
        g2 = 0.14 + state_rate(2, device, 0.163, t)
        g1w = (g1 + w * g2) / (1.0 + w)
        for state, g in ((0, g0), (1, g1w)):
            fac = 1.0 + noise * rng.standard_normal() if noise else 1.0
            rows.append((t, g * fac, max(noise, 0.01) * g, state))
    return rows


def test_joint_fit_noiseless_self_consistency(device):
    fit = joint_fit(_model_rows(device), device, ng=0.163)
    assert fit.converged
    assert fit.values["delta_ghz"][0] == pytest.approx(46.0, rel=0.01)
    assert fit.values["ddelta_ghz"][0] == pytest.approx(4.52, rel=0.01)
    assert fit.values["x_res"][0] == pytest.approx(5.6e-10, rel=0.01)
    assert fit.values["gamma_offset"][0] == pytest.approx(0.14, rel=0.01)
    assert fit.residual_norm < 1e-6


def test_joint_fit_under_multiplicative_noise(device):
    fit = joint_fit(_model_rows(device, noise=0.10, seed=3), device, ng=0.163)
    assert fit.values["ddelta_ghz"][0] == pytest.approx(4.52, rel=0.05)
    assert fit.values["x_res"][0] == pytest.approx(5.6e-10, rel=0.20)
    # uncertainties are meaningful
    val, sig = fit.values["ddelta_ghz"]
    assert abs(val - 4.52) < 4 * sig


def test_joint_fit_input_validation(device):
    rows = _model_rows(device)
    with pytest.raises(ConfigError):
        joint_fit(rows[:4], device)
    with pytest.raises(ConfigError, match="both"):
        joint_fit([r for r in rows if r[3] == 0], device)
    bad = [(t, -g, s, st) for (t, g, s, st) in rows]
    with pytest.raises(ConfigError):
        joint_fit(bad, device)
