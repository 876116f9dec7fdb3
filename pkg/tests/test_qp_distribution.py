import math

import numpy as np
import pytest

from qpscope.device_model import DeviceParams, kelvin_to_ghz
from qpscope.errors import ConfigError
from qpscope.qp_distribution import occupation_F, thermal_density, xqp_total, zeta


def test_xqp_total_cold_is_resident(device):
    # thermal term below 1e-45 at 20 mK
    assert thermal_density(device, 0.020) < 1e-45
    assert xqp_total(device, 0.020) == pytest.approx(5.6e-10, rel=1e-12)


def test_xqp_total_at_100mk(device):
    th = thermal_density(device, 0.100)
    assert th == pytest.approx(4.84e-10, rel=0.01)
    assert xqp_total(device, 0.100) == pytest.approx(5.6e-10 + th, rel=1e-12)


def test_xqp_zero_resident_cold_limit():
    params = DeviceParams(ej_ghz=6.24, ec_ghz=0.357, delta_ghz=46.0, ddelta_ghz=4.52, x_res=0.0)
    assert xqp_total(params, 0.002) == 0.0


def test_xqp_monotone_in_temperature_and_resident(device):
    temps = np.linspace(0.02, 0.3, 15)
    vals = [xqp_total(device, t) for t in temps]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    richer = DeviceParams(
        ej_ghz=device.ej_ghz, ec_ghz=device.ec_ghz, delta_ghz=device.delta_ghz,
        ddelta_ghz=device.ddelta_ghz, x_res=2 * device.x_res,
    )
    assert xqp_total(richer, 0.05) > xqp_total(device, 0.05)


def test_crossover_temperature_by_bisection(device):
    # where the thermal density equals the resident fraction
    lo, hi = 0.05, 0.3
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if thermal_density(device, mid) < device.x_res:
            lo = mid
        else:
            hi = mid
    assert 0.095 <= lo <= 0.110


def test_standard_prefactor_flag(device):
    kbt = kelvin_to_ghz(0.1)
    ratio = thermal_density(device, 0.1, "paper") / thermal_density(device, 0.1, "standard")
    assert ratio == pytest.approx(device.delta_ghz / (2 * math.pi * kbt), rel=1e-12)
    with pytest.raises(ConfigError):
        thermal_density(device, 0.1, "bogus")


def test_zeta_values(device):
    assert zeta(device, 0.020) == pytest.approx(0.99998, abs=2e-5)
    assert zeta(device, 0.100) == pytest.approx(1.0 / (1.0 + 0.1143), rel=1e-3)


def test_zeta_cold_limit_any_volume_ratio():
    for vr in (0.1, 1.0, 10.0):
        params = DeviceParams(
            ej_ghz=6.24, ec_ghz=0.357, delta_ghz=46.0, ddelta_ghz=4.52, x_res=0.0, vol_ratio=vr
        )
        assert zeta(params, 0.001) == pytest.approx(1.0, abs=1e-12)


def test_occupation_at_gap_value(device):
    val = occupation_F(device.delta_ghz, device, 0.020)
    expected = zeta(device, 0.020) * 5.6e-10 * math.sqrt(46.0 / (2 * math.pi * kelvin_to_ghz(0.020)))
    assert val == pytest.approx(expected, rel=1e-10)
    assert val == pytest.approx(2.35e-9, rel=0.01)


def test_occupation_monotone_decreasing(device):
    eps = np.linspace(46.0, 60.0, 40)
    vals = [occupation_F(e, device, 0.05) for e in eps]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(0.0 <= v < 1e-3 for v in vals)


def test_occupation_pure_boltzmann_without_residents():
    params = DeviceParams(ej_ghz=6.24, ec_ghz=0.357, delta_ghz=46.0, ddelta_ghz=4.52, x_res=0.0)
    kbt = kelvin_to_ghz(0.15)
    for eps in (46.0, 50.0, 55.0):
        assert occupation_F(eps, params, 0.15) == pytest.approx(math.exp(-eps / kbt), rel=1e-12)


def test_occupation_below_gap_rejected(device):
    with pytest.raises(ConfigError, match="below the low gap"):
        occupation_F(45.9, device, 0.02)


def test_no_underflow_warnings(device):
    # Delta/kT beyond 1000: must silently clamp to zero
    with np.errstate(all="raise"):
        assert occupation_F(80.0, device, 0.001) >= 0.0


def test_zeta_bounded(device):
    for temp in np.linspace(0.005, 0.5, 20):
        z = zeta(device, float(temp))
        assert 0.0 < z <= 1.0
