"""Photon-assisted pair-breaking contribution to parity switching.

A stray photon with frequency above twice the gap breaks a Cooper pair,
leaving one quasiparticle on each side of the junction and flipping the
parity.  The filtered photon flux is modeled with a sharp exponential
cutoff exp(-f/f0), under which the pair-breaking structure factors reduce
to closed forms; the overall scale g0 is calibrated, not predicted.
"""

from __future__ import annotations

import math

from qpscope.device_model import DeviceParams, EnvConditions
from qpscope.errors import ConfigError
from qpscope.transmon_spectrum import approx_matrix_elements, qubit_frequency, transition_frequency

_STATE_TRANSITIONS = {
    0: ((0, 0), (0, 1)),
    1: ((1, 0), (1, 1), (1, 2)),
}


def photon_structure_factor(sign: int, f_fi_ghz: float, env: EnvConditions, params: DeviceParams) -> float:
    """Pair-breaking structure factors under the exponential photon cutoff.

    S_+ = g0 exp(-f_fi/f0); S_- = S_+ * h f0 / (2 Delta).  Rate-like (1/s).
    """
    if sign not in (+1, -1):
        raise ConfigError("sign must be +1 or -1")
    s_plus = env.g0 * math.exp(-f_fi_ghz / env.f0_ghz)
    if sign > 0:
        return s_plus
    return s_plus * env.f0_ghz / (2.0 * params.delta_ghz)


def photon_state_rate(state: int, env: EnvConditions, params: DeviceParams, ng: float = 0.163) -> float:
    """Photon-assisted parity-switching rate out of qubit state 0 or 1 (1/s).

    Partial rates S_- cos2 + S_+ sin2 with the deep-transmon matrix elements
    and spectrum transition frequencies, summed over the allowed final states
    (0 -> 0,1; 1 -> 0,1,2).
    """
    if state not in _STATE_TRANSITIONS:
        raise ConfigError("state must be 0 or 1")
    total = 0.0
    for (i, f) in _STATE_TRANSITIONS[state]:
        me = approx_matrix_elements(params.ej_ghz, params.ec_ghz, i, f)
        f_fi = 0.0 if i == f else transition_frequency(params, ng, i, f)
        rate = 0.0
        if me.cos2:
            rate += photon_structure_factor(-1, f_fi, env, params) * me.cos2
        if me.sin2:
            rate += photon_structure_factor(+1, f_fi, env, params) * me.sin2
        total += rate
    return total


def photon_rate_ratio(env: EnvConditions, params: DeviceParams, ng: float = 0.163) -> float:
    """Excited-to-ground ratio of the summed photon-assisted rates.

    Independent of g0.  This keeps the double weight of the 1 -> 2 channel
    and the exact 1 -> 2 frequency, which the compact printed estimate
    (photon_ratio) drops.
    """
    probe = EnvConditions(temp_k=env.temp_k, gamma_offset=env.gamma_offset, f0_ghz=env.f0_ghz, g0=1.0)
    return photon_state_rate(1, probe, params, ng) / photon_state_rate(0, probe, params, ng)


def photon_ratio(env: EnvConditions, params: DeviceParams) -> float:
    """Compact closed-form estimate of the excited-to-ground photon ratio.

    [h f0/Delta + sqrt(E_C/2E_J)(e^{-fq/f0} + e^{fq/f0})] /
    [h f0/Delta + sqrt(E_C/2E_J) e^{-fq/f0}], with both plasmon-changing
    channels taken at the 0-1 frequency and unit weight.
    """
    fq = qubit_frequency(params)
    hf0_delta = env.f0_ghz / params.delta_ghz
    root = math.sqrt(params.ec_ghz / (2.0 * params.ej_ghz))
    down = math.exp(-fq / env.f0_ghz)
    up = math.exp(fq / env.f0_ghz)
    return (hf0_delta + root * (down + up)) / (hf0_delta + root * down)


def calibrate_g0(gamma_offset: float, env: EnvConditions, params: DeviceParams, ng: float = 0.163) -> EnvConditions:
    """Set g0 so the ground-state photon rate equals the measured offset."""
    if gamma_offset < 0:
        raise ConfigError("gamma_offset must be nonnegative")
    probe = EnvConditions(temp_k=env.temp_k, gamma_offset=env.gamma_offset, f0_ghz=env.f0_ghz, g0=1.0)
    per_unit = photon_state_rate(0, probe, params, ng)
    return EnvConditions(
        temp_k=env.temp_k,
        gamma_offset=env.gamma_offset,
        f0_ghz=env.f0_ghz,
        g0=gamma_offset / per_unit,
    )
