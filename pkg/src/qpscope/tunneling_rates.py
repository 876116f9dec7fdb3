"""Quasiparticle tunneling structure factors and parity-switching rates.

Three evaluation paths are provided:

``numeric``
    Adaptive quadrature of the single-variable structure-factor integral,
    with the inverse-square-root endpoint singularity removed by the
    substitution u^2 = eps - eps_min and the upper limit truncated at
    eps_min + 60 k_B T.
``bessel``
    Closed forms in terms of scaled modified Bessel functions K0/K1, valid
    for dDelta > |h f_fi| (and quantitatively accurate for k_B T, dDelta
    small against Delta).
``approx``
    The low-temperature activation laws, including the eta pre-factor for
    the ground state.

``auto`` (default) picks ``bessel`` whenever its regime predicate holds and
falls back to ``numeric`` otherwise.  All rates are returned in 1/s.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.special import k0e, k1e

from qpscope.constants import GHZ_TO_HZ
from qpscope.device_model import DeviceParams, EnvConditions, kelvin_to_ghz
from qpscope.errors import ConfigError, NumericsError
from qpscope.qp_distribution import occupation_F, occupation_at_gap, xqp_total
from qpscope.transmon_spectrum import (
    approx_matrix_elements,
    matrix_elements_parity_averaged,
    qubit_frequency,
    transition_frequency,
)

L_TO_R = "L->R"
R_TO_L = "R->L"
DIRECTIONS = (L_TO_R, R_TO_L)

# transitions feeding the state rates, per qubit state
_STATE_TRANSITIONS = {
    0: ((0, 0), (0, 1)),
    1: ((1, 0), (1, 1), (1, 2)),
    2: ((2, 1), (2, 2), (2, 3)),
}

_QUAD_RTOL = 1.0e-8
_TAIL_KBT = 60.0


@dataclass(frozen=True)
class RateBundle:
    """Partial rates keyed by (i, f, direction), state totals, and the method used."""

    partials: dict
    gamma0: float
    gamma1: float
    gamma2: float
    method: str


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ConfigError(f"direction must be one of {DIRECTIONS}")


def bessel_regime(params: DeviceParams, f_fi_ghz: float) -> bool:
    """True where the printed closed forms apply: dDelta > |h f_fi|."""
    return params.ddelta_ghz > abs(f_fi_ghz)


def _structure_factor_bessel(
    direction: str, sign: int, f_fi_ghz: float, params: DeviceParams, temp_k: float
) -> float:
    if not bessel_regime(params, f_fi_ghz):
        raise NumericsError("bessel structure factor outside its regime dDelta > |h f_fi|")
    kbt = kelvin_to_ghz(temp_k)
    dd = params.ddelta_ghz
    pref = occupation_at_gap(params, temp_k)
    # K argument carries the direction; the e^{-(dDelta + h f_fi)/2kT} factor does not
    arg = dd + f_fi_ghz if direction == L_TO_R else dd - f_fi_ghz
    z = 0.5 * arg / kbt
    exponent = -0.5 * (dd + f_fi_ghz) / kbt - z
    if exponent < -700.0:
        return 0.0
    if sign > 0:
        return pref * k0e(z) * math.exp(exponent)
    return pref * 0.5 * (arg / params.delta_ghz) * k1e(z) * math.exp(exponent)


def _structure_factor_numeric(
    direction: str, sign: int, f_fi_ghz: float, params: DeviceParams, temp_k: float
) -> float:
    kbt = kelvin_to_ghz(temp_k)
    delta = params.delta_ghz
    delta_hi = delta + params.ddelta_ghz
    hf = f_fi_ghz
    # low-gap energy eps is the integration variable; the high-gap side sits
    # at eps -+ hf depending on direction
    s = -1.0 if direction == L_TO_R else +1.0
    eps_min_low = delta
    eps_min_high = delta_hi - s * hf  # where the high-gap root turns on
    eps_min = max(eps_min_low, eps_min_high)
    if math.isclose(eps_min_low, eps_min_high, rel_tol=0.0, abs_tol=1e-12):
        raise NumericsError(
            "structure factor integrand log-divergent at dDelta = -+ h f_fi"
        )

    def raw(eps: float) -> float:
        ehi = eps + s * hf
        num = eps * ehi + sign * delta * delta_hi
        if direction == L_TO_R:
            occ = occupation_F(eps, params, temp_k) * (1.0 - occupation_F(ehi, params, temp_k))
        else:
            occ = occupation_F(ehi, params, temp_k) * (1.0 - occupation_F(eps, params, temp_k))
        return num * occ

    singular_high = eps_min_high > eps_min_low

    def integrand(u: float) -> float:
        eps = eps_min + u * u
        ehi = eps + s * hf
        if singular_high:
            # sqrt(ehi^2 - delta_hi^2) = u * sqrt(ehi + delta_hi) after substitution
            den = math.sqrt(eps * eps - delta * delta) * math.sqrt(ehi + delta_hi)
        else:
            den = math.sqrt(eps + delta) * math.sqrt(ehi * ehi - delta_hi * delta_hi)
        return 2.0 * raw(eps) / den

    u_max = math.sqrt(_TAIL_KBT * kbt)
    value, abserr = quad(integrand, 0.0, u_max, epsabs=0.0, epsrel=_QUAD_RTOL, limit=200)
    if value != 0.0 and abserr > 1e-4 * abs(value):
        raise NumericsError("structure factor quadrature did not converge")
    return value / (delta + 0.5 * params.ddelta_ghz)


def structure_factor(
    direction: str,
    sign: int,
    f_fi_ghz: float,
    params: DeviceParams,
    temp_k: float,
    method: str = "auto",
) -> float:
    """Dimensionless structure factor S_sign^direction(f_fi).

    Parameters
    ----------
    direction : "L->R" or "R->L" (low-gap to high-gap side or back).
    sign : +1 for S_+ (pairs with sin^2), -1 for S_- (pairs with cos^2).
    f_fi_ghz : signed qubit transition frequency (E_f - E_i)/h.
    method : "numeric", "bessel", or "auto".
    """
    _check_direction(direction)
    if sign not in (+1, -1):
        raise ConfigError("sign must be +1 or -1")
    if method == "auto":
        method = "bessel" if bessel_regime(params, f_fi_ghz) else "numeric"
    if method == "bessel":
        return _structure_factor_bessel(direction, sign, f_fi_ghz, params, temp_k)
    if method == "numeric":
        return _structure_factor_numeric(direction, sign, f_fi_ghz, params, temp_k)
    raise ConfigError("method must be 'numeric', 'bessel', or 'auto'")


def _approx_partial(i: int, f: int, direction: str, params: DeviceParams, temp_k: float) -> float:
    """Printed low-temperature partial rates (and their i->i+-1 extension)."""
    kbt = kelvin_to_ghz(temp_k)
    dd = params.ddelta_ghz
    xqp = xqp_total(params, temp_k)
    scale = 16.0 * params.ej_ghz * GHZ_TO_HZ
    if f == i:
        return scale * math.sqrt(dd / (8.0 * params.delta_ghz)) * xqp * math.exp(-dd / kbt)
    if abs(f - i) != 1:
        raise ConfigError("approx partials exist only for f in {i, i-1, i+1}")
    f_fi = transition_frequency(params, 0.25, i, f)
    me = approx_matrix_elements(params.ej_ghz, params.ec_ghz, i, f).sin2
    if direction == L_TO_R:
        barrier = dd + f_fi
        if barrier <= 0.0:
            raise NumericsError("approx partial undefined: dDelta + h f_fi <= 0")
        return scale * me * xqp * math.sqrt(params.delta_ghz / (2.0 * barrier)) * math.exp(-barrier / kbt)
    barrier = dd - f_fi
    if barrier <= 0.0:
        raise NumericsError("approx partial undefined: dDelta - h f_fi <= 0")
    return scale * me * xqp * math.sqrt(params.delta_ghz / (2.0 * barrier)) * math.exp(-dd / kbt)


def partial_rate(
    i: int,
    f: int,
    direction: str,
    params: DeviceParams,
    ng: float,
    temp_k: float,
    method: str = "auto",
    me_source: str = "numeric",
) -> float:
    """Partial parity-switching rate Gamma_if^direction in 1/s.

    16 (E_J/h) [S_- cos2 + S_+ sin2] with the parity-averaged transition
    frequency and matrix elements from the spectrum module (``me_source =
    "numeric"``) or the deep-transmon forms (``"approx"``).
    """
    _check_direction(direction)
    if method == "approx":
        return _approx_partial(i, f, direction, params, temp_k)
    f_fi = transition_frequency(params, ng, i, f)
    if me_source == "numeric":
        me = matrix_elements_parity_averaged(params, ng, i, f)
    elif me_source == "approx":
        me = approx_matrix_elements(params.ej_ghz, params.ec_ghz, i, f)
    else:
        raise ConfigError("me_source must be 'numeric' or 'approx'")
    s_minus = structure_factor(direction, -1, f_fi, params, temp_k, method) if me.cos2 else 0.0
    s_plus = structure_factor(direction, +1, f_fi, params, temp_k, method) if me.sin2 else 0.0
    return 16.0 * params.ej_ghz * GHZ_TO_HZ * (s_minus * me.cos2 + s_plus * me.sin2)


def state_rate(
    state: int,
    params: DeviceParams,
    ng: float,
    temp_k: float,
    method: str = "auto",
    me_source: str = "numeric",
) -> float:
    """Total QP parity-switching rate out of qubit state 0, 1, or 2 (1/s).

    Sums the printed partials for the state; no offset is added here.
    """
    if state not in _STATE_TRANSITIONS:
        raise ConfigError("state must be 0, 1, or 2")
    if method == "approx" and state in (0, 1):
        return approx_state_rate(state, params, temp_k)
    total = 0.0
    for (i, f) in _STATE_TRANSITIONS[state]:
        for direction in DIRECTIONS:
            total += partial_rate(i, f, direction, params, ng, temp_k, method, me_source)
    return total


def approx_state_rate(state: int, params: DeviceParams, temp_k: float, fq_ghz: float | None = None) -> float:
    """Main-text activation laws for the ground and excited state (1/s).

    Gamma_0 = eta f_q x_qp exp(-dDelta/k_B T) with
    eta = 4 sqrt((E_J/E_C)(dDelta/Delta)) + sqrt(2 Delta/(dDelta - h f_q));
    Gamma_1 = f_q sqrt(2 Delta/(dDelta - h f_q)) x_qp
    exp(-(dDelta - h f_q)/k_B T).
    """
    if state not in (0, 1):
        raise ConfigError("approx_state_rate supports states 0 and 1 only")
    fq = qubit_frequency(params) if fq_ghz is None else fq_ghz
    dd = params.ddelta_ghz
    if dd <= fq:
        raise NumericsError("activation laws require dDelta > h f_q")
    kbt = kelvin_to_ghz(temp_k)
    if kbt > dd - fq:
        warnings.warn(
            "activation laws outside their regime k_B T << dDelta - h f_q",
            stacklevel=2,
        )
    xqp = xqp_total(params, temp_k)
    sqrt_term = math.sqrt(2.0 * params.delta_ghz / (dd - fq))
    if state == 0:
        eta = 4.0 * math.sqrt((params.ej_ghz / params.ec_ghz) * (dd / params.delta_ghz)) + sqrt_term
        return eta * fq * GHZ_TO_HZ * xqp * math.exp(-dd / kbt)
    return fq * GHZ_TO_HZ * sqrt_term * xqp * math.exp(-(dd - fq) / kbt)


def activation_prefactor_eta(params: DeviceParams, fq_ghz: float | None = None) -> float:
    """The dimensionless eta multiplying f_q x_qp in the ground-state law."""
    fq = qubit_frequency(params) if fq_ghz is None else fq_ghz
    dd = params.ddelta_ghz
    if dd <= fq:
        raise NumericsError("activation laws require dDelta > h f_q")
    return 4.0 * math.sqrt((params.ej_ghz / params.ec_ghz) * (dd / params.delta_ghz)) + math.sqrt(
        2.0 * params.delta_ghz / (dd - fq)
    )


def effective_rate(
    p_exc: float,
    params: DeviceParams,
    env: EnvConditions,
    ng: float,
    temp_k: float,
    method: str = "auto",
) -> float:
    """Measured parity-switching rate at excitation probability p_exc (1/s).

    (1 - p) Gamma_0 + p [Gamma_1 + w Gamma_2]/(1 + w) with w =
    exp(-h f_21/k_B T) and Gamma_i = state QP rate + gamma_offset; reduces to
    the two-state linear form when w < 1e-6.
    """
    if not 0.0 <= p_exc <= 1.0:
        raise ConfigError("p_exc must lie in [0, 1]")
    g0 = state_rate(0, params, ng, temp_k, method) + env.gamma_offset
    g1 = state_rate(1, params, ng, temp_k, method) + env.gamma_offset
    f21 = transition_frequency(params, ng, 1, 2)
    w = math.exp(-f21 / kelvin_to_ghz(temp_k))
    if w < 1.0e-6:
        excited = g1
    else:
        g2 = state_rate(2, params, ng, temp_k, method) + env.gamma_offset
        excited = (g1 + w * g2) / (1.0 + w)
    return (1.0 - p_exc) * g0 + p_exc * excited


def no_gap_ratio(params: DeviceParams, temp_k: float) -> float:
    """Gamma_1/Gamma_0 predicted by any model without a gap difference.

    sqrt(pi Delta^2 / (h f_q k_B T)) * sqrt(E_C / 8 E_J); the QP density
    cancels in the ratio, so traps or other density modifiers drop out.
    """
    kbt = kelvin_to_ghz(temp_k)
    fq = qubit_frequency(params)
    return math.sqrt(math.pi * params.delta_ghz**2 / (fq * kbt)) * math.sqrt(
        params.ec_ghz / (8.0 * params.ej_ghz)
    )


def rate_bundle(
    params: DeviceParams,
    ng: float,
    temp_k: float,
    method: str = "auto",
    me_source: str = "numeric",
) -> RateBundle:
    """All partial rates plus the three state totals.

    For ``method="approx"`` the partials are the printed low-temperature
    forms (parity-averaged frequencies, deep-transmon matrix elements).
    """
    partials = {}
    for state, pairs in _STATE_TRANSITIONS.items():
        for (i, f) in pairs:
            for direction in DIRECTIONS:
                if method == "approx":
                    rate = _approx_partial(i, f, direction, params, temp_k)
                else:
                    rate = partial_rate(i, f, direction, params, ng, temp_k, method, me_source)
                partials[(i, f, direction)] = rate
    totals = {
        state: sum(partials[(i, f, d)] for (i, f) in pairs for d in DIRECTIONS)
        for state, pairs in _STATE_TRANSITIONS.items()
    }
    resolved = method
    if method == "auto":
        resolved = "bessel" if all(
            bessel_regime(params, transition_frequency(params, ng, i, f))
            for pairs in _STATE_TRANSITIONS.values()
            for (i, f) in pairs
        ) else "numeric"
    return RateBundle(
        partials=partials,
        gamma0=totals[0],
        gamma1=totals[1],
        gamma2=totals[2],
        method=resolved,
    )
