import math

import numpy as np
import pytest

from qpscope.constants import GHZ_TO_HZ
from qpscope.device_model import DeviceParams, kelvin_to_ghz
from qpscope.errors import ConfigError, NumericsError
from qpscope.qp_distribution import xqp_total
from qpscope import tunneling_rates as tr
from qpscope.transmon_spectrum import qubit_frequency, transition_frequency


def test_quadrature_matches_bessel_in_dominant_channel(device):
    # the channel carrying Gamma_1; the closed form is excellent here
    fq = qubit_frequency(device)
    for temp in (0.020, 0.030, 0.045, 0.060):
        nu = tr.structure_factor(tr.L_TO_R, +1, -fq, device, temp, "numeric")
        be = tr.structure_factor(tr.L_TO_R, +1, -fq, device, temp, "bessel")
        assert be == pytest.approx(nu, rel=0.02)


def test_quadrature_matches_bessel_at_small_gap_asymmetry():
    # the closed forms are leading order in dDelta/Delta; at dDelta/Delta
    # = 1/25 every (direction, sign, transition) combo agrees within 2%
    params = DeviceParams(ej_ghz=6.24, ec_ghz=0.357, delta_ghz=46.0, ddelta_ghz=1.84, x_res=1e-10)
    for f_fi in (-1.2, 0.0, 1.2):
        for direction in tr.DIRECTIONS:
            for sign in (+1, -1):
                for temp in (0.010, 0.017):
                    nu = tr.structure_factor(direction, sign, f_fi, params, temp, "numeric")
                    be = tr.structure_factor(direction, sign, f_fi, params, temp, "bessel")
                    assert be == pytest.approx(nu, rel=0.02)


def test_bessel_deviation_scales_with_barrier(device):
    # measured numeric/bessel ratio for S_+ tracks 1 + (dDelta + h f_fi)/4
    # (Delta + dDelta/2), the first correction beyond the printed forms
    dbar = device.delta_ghz + 0.5 * device.ddelta_ghz
    for f_fi in (-3.0, 0.0, 3.0):
        nu = tr.structure_factor(tr.L_TO_R, +1, f_fi, device, 0.020, "numeric")
        be = tr.structure_factor(tr.L_TO_R, +1, f_fi, device, 0.020, "bessel")
        predicted = 1.0 + (device.ddelta_ghz + f_fi) / (4.0 * dbar)
        assert nu / be == pytest.approx(predicted, abs=0.01)


def test_structure_factor_empty_distribution():
    params = DeviceParams(ej_ghz=6.24, ec_ghz=0.357, delta_ghz=46.0, ddelta_ghz=4.52, x_res=0.0)
    for method in ("numeric", "bessel"):
        val = tr.structure_factor(tr.L_TO_R, +1, 0.0, params, 0.002, method)
        assert val == 0.0


def test_coherence_suppression_s_minus_below_s_plus(device):
    for f_fi in (-3.0, 0.0, 3.0):
        for direction in tr.DIRECTIONS:
            sp = tr.structure_factor(direction, +1, f_fi, device, 0.030)
            sm = tr.structure_factor(direction, -1, f_fi, device, 0.030)
            assert sm < sp


def test_bessel_regime_violation_raises(device):
    with pytest.raises(NumericsError, match="regime"):
        tr.structure_factor(tr.L_TO_R, +1, 5.0, device, 0.02, "bessel")
    # auto falls back to the quadrature there
    val = tr.structure_factor(tr.L_TO_R, +1, 5.0, device, 0.02, "auto")
    assert val > 0.0


def test_log_divergent_edge_raises(device):
    with pytest.raises(NumericsError, match="divergent"):
        tr.structure_factor(tr.L_TO_R, +1, -device.ddelta_ghz, device, 0.02, "numeric")


def test_structure_factor_argument_checks(device):
    with pytest.raises(ConfigError):
        tr.structure_factor("sideways", +1, 0.0, device, 0.02)
    with pytest.raises(ConfigError):
        tr.structure_factor(tr.L_TO_R, 2, 0.0, device, 0.02)
    with pytest.raises(ConfigError):
        tr.structure_factor(tr.L_TO_R, +1, 0.0, device, 0.02, "magic")


def _approx_sin_partial(device, barrier_ghz, me_factor, activation_ghz, temp):
    kbt = kelvin_to_ghz(temp)
    me = me_factor * 0.25 * math.sqrt(2 * device.ec_ghz / device.ej_ghz)
    return (
        16.0 * device.ej_ghz * GHZ_TO_HZ * me * xqp_total(device, temp)
        * math.sqrt(device.delta_ghz / (2 * barrier_ghz))
        * math.exp(-activation_ghz / kbt)
    )


def test_partial_rates_match_printed_low_temperature_forms(device):
    # independent oracle: the printed activation formulas, evaluated directly
    temp = 0.020
    f10 = -transition_frequency(device, 0.25, 1, 0)
    got = tr.partial_rate(1, 0, tr.L_TO_R, device, 0.163, temp, method="approx")
    want = _approx_sin_partial(device, device.ddelta_ghz - f10, 1.0, device.ddelta_ghz - f10, temp)
    assert got == pytest.approx(want, rel=1e-9)
    got = tr.partial_rate(0, 1, tr.R_TO_L, device, 0.163, temp, method="approx")
    want = _approx_sin_partial(device, device.ddelta_ghz - f10, 1.0, device.ddelta_ghz, temp)
    assert got == pytest.approx(want, rel=1e-9)
    # the bessel path differs from the printed activation form by exactly the
    # finite-argument K0 factor (and the zeta weight), which is 10% here
    from scipy.special import k0e

    got_b = tr.partial_rate(1, 0, tr.L_TO_R, device, 0.163, temp, method="bessel", me_source="approx")
    want_b = _approx_sin_partial(device, device.ddelta_ghz - f10, 1.0, device.ddelta_ghz - f10, temp)
    z = 0.5 * (device.ddelta_ghz - f10) / kelvin_to_ghz(temp)
    k0_correction = k0e(z) * math.sqrt(2 * z / math.pi)
    assert got_b / want_b == pytest.approx(k0_correction, rel=1e-3)
    # and genuinely converges to it deep in the activation regime
    got_cold = tr.partial_rate(1, 0, tr.L_TO_R, device, 0.163, 0.002, method="bessel", me_source="approx")
    want_cold = _approx_sin_partial(device, device.ddelta_ghz - f10, 1.0, device.ddelta_ghz - f10, 0.002)
    assert got_cold == pytest.approx(want_cold, rel=0.02)


def test_partial_rate_hierarchy(device):
    temp = 0.020
    b = tr.rate_bundle(device, 0.163, temp, method="bessel")
    top = b.partials[(1, 0, tr.L_TO_R)]
    middle = [
        b.partials[(0, 1, tr.R_TO_L)],
        b.partials[(1, 0, tr.R_TO_L)],
        b.partials[(1, 2, tr.R_TO_L)],
        b.partials[(0, 0, tr.R_TO_L)],
        b.partials[(0, 0, tr.L_TO_R)],
        b.partials[(1, 1, tr.R_TO_L)],
        b.partials[(1, 1, tr.L_TO_R)],
    ]
    bottom = [b.partials[(0, 1, tr.L_TO_R)], b.partials[(1, 2, tr.L_TO_R)]]
    assert top > 50 * max(middle)
    assert min(middle) > 50 * max(bottom)


@pytest.mark.parametrize("method", ["approx", "bessel", "numeric"])
def test_detailed_balance(device, method):
    temp = 0.020
    f10 = qubit_frequency(device, 0.163)
    up = sum(tr.partial_rate(0, 1, d, device, 0.163, temp, method, "approx") for d in tr.DIRECTIONS)
    down = sum(tr.partial_rate(1, 0, d, device, 0.163, temp, method, "approx") for d in tr.DIRECTIONS)
    assert down == pytest.approx(math.exp(f10 / kelvin_to_ghz(temp)) * up, rel=0.01)


def test_ground_and_first_excited_diagonal_partials_equal(device):
    for method in ("approx", "bessel"):
        vals = [
            tr.partial_rate(i, i, d, device, 0.163, 0.02, method, "approx")
            for i in (0, 1)
            for d in tr.DIRECTIONS
        ]
        assert max(vals) == pytest.approx(min(vals), rel=1e-12)


def test_state_rates_at_base_temperature(device):
    g1 = tr.state_rate(1, device, 0.163, 0.020, "approx")
    assert g1 == pytest.approx(4.7, rel=0.05)
    g0 = tr.state_rate(0, device, 0.163, 0.020, "approx")
    assert g0 == pytest.approx(7.0e-4, rel=0.05)
    # measured Gamma_0 = 0.14/s is offset-dominated
    assert g0 < 0.01 * 0.14 / 0.001


def test_state_rates_vanish_without_quasiparticles():
    params = DeviceParams(ej_ghz=6.24, ec_ghz=0.357, delta_ghz=46.0, ddelta_ghz=4.52, x_res=0.0)
    for state in (0, 1, 2):
        assert tr.state_rate(state, params, 0.163, 0.002) == 0.0


def test_rates_linear_in_resident_fraction(device):
    doubled = DeviceParams(
        ej_ghz=device.ej_ghz, ec_ghz=device.ec_ghz, delta_ghz=device.delta_ghz,
        ddelta_ghz=device.ddelta_ghz, x_res=2 * device.x_res,
    )
    for temp in (0.02, 0.04, 0.06):
        ratio = tr.state_rate(1, doubled, 0.163, temp) / tr.state_rate(1, device, 0.163, temp)
        assert ratio == pytest.approx(2.0, rel=1e-3)


def test_eta_prefactor(device):
    assert tr.activation_prefactor_eta(device) == pytest.approx(16.76, abs=0.05)


def test_qp_only_rate_ratio(device):
    g0 = tr.approx_state_rate(0, device, 0.020)
    g1 = tr.approx_state_rate(1, device, 0.020)
    assert g1 / g0 == pytest.approx(6.7e3, rel=0.05)


def test_activation_laws_cold_limit(device):
    assert tr.approx_state_rate(0, device, 0.001) < 1e-80
    assert tr.approx_state_rate(1, device, 0.001) < 1e-10
    # ratio diverges as T -> 0
    r_cold = tr.approx_state_rate(1, device, 0.010) / tr.approx_state_rate(0, device, 0.010)
    r_warm = tr.approx_state_rate(1, device, 0.020) / tr.approx_state_rate(0, device, 0.020)
    assert r_cold > r_warm


def test_activation_laws_regime_warning(device):
    with pytest.warns(UserWarning, match="outside their regime"):
        tr.approx_state_rate(1, device, 0.060)


def test_activation_laws_require_barrier():
    params = DeviceParams(ej_ghz=6.24, ec_ghz=0.357, delta_ghz=46.0, ddelta_ghz=3.0, x_res=1e-10)
    with pytest.raises(NumericsError, match="dDelta > h f_q"):
        tr.approx_state_rate(0, params, 0.02)


def test_effective_rate_endpoints_and_linearity(device, env20):
    g0 = tr.state_rate(0, device, 0.163, 0.020) + env20.gamma_offset
    assert tr.effective_rate(0.0, device, env20, 0.163, 0.020) == pytest.approx(g0, rel=1e-12)
    vals = [tr.effective_rate(p, device, env20, 0.163, 0.020) for p in (0.0, 0.5, 1.0)]
    second_diff = vals[0] - 2 * vals[1] + vals[2]
    assert second_diff == pytest.approx(0.0, abs=1e-12 * vals[2])


def test_second_excited_weight_at_110mk(device, env20):
    f21 = transition_frequency(device, 0.163, 1, 2)
    w = math.exp(-f21 / kelvin_to_ghz(0.110))
    weight = w / (1.0 + w)
    assert weight == pytest.approx(0.18, abs=0.015)
    # effective_rate at p_exc = 1 equals the weighted excited-state mix
    g1 = tr.state_rate(1, device, 0.163, 0.110) + env20.gamma_offset
    g2 = tr.state_rate(2, device, 0.163, 0.110) + env20.gamma_offset
    want = (g1 + w * g2) / (1.0 + w)
    got = tr.effective_rate(1.0, device, env20, 0.163, 0.110)
    assert got == pytest.approx(want, rel=1e-12)


def test_no_gap_ratio(device):
    ratio = tr.no_gap_ratio(device, 0.020)
    assert ratio == pytest.approx(5.5, abs=1.0)
    # scales as T^(-1/2)
    assert tr.no_gap_ratio(device, 0.020) / tr.no_gap_ratio(device, 0.080) == pytest.approx(2.0, rel=1e-9)
    # measured ratio 34 is far above it, ruling the gapless model out
    assert 34.0 / ratio > 5.0


def test_rate_bundle_totals_are_partial_sums(device):
    b = tr.rate_bundle(device, 0.163, 0.020)
    assert b.method == "bessel"
    g0 = sum(b.partials[(i, f, d)] for (i, f) in ((0, 0), (0, 1)) for d in tr.DIRECTIONS)
    g1 = sum(b.partials[(i, f, d)] for (i, f) in ((1, 0), (1, 1), (1, 2)) for d in tr.DIRECTIONS)
    assert b.gamma0 == pytest.approx(g0, rel=1e-12)
    assert b.gamma1 == pytest.approx(g1, rel=1e-12)
    assert all(v >= 0 for v in b.partials.values())
    assert b.gamma2 == pytest.approx(b.gamma1, rel=0.6)  # second excited close to first


def test_arrhenius_slope_difference_matches_qubit_energy(device):
    from qpscope.inference import arrhenius_fit

    temps = np.linspace(0.035, 0.095, 7)
    s0 = arrhenius_fit([(t, tr.state_rate(0, device, 0.163, t)) for t in temps]).activation_ghz
    s1 = arrhenius_fit([(t, tr.state_rate(1, device, 0.163, t)) for t in temps]).activation_ghz
    fq = qubit_frequency(device, 0.163)
    assert s0 - s1 == pytest.approx(fq, rel=0.15)
    # the single-rate slope sits above the bare activation energy because the
    # K0 prefactor drifts and thermal quasiparticles switch on near 95 mK
    assert 1.0 <= s1 / (device.ddelta_ghz - fq) <= 1.25
