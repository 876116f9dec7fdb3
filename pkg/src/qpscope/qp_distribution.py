"""Quasiparticle density and energy-distribution functions.

The resident QP population has a fixed density ``x_res`` but a thermal energy
profile; on top of it rides the genuinely thermal population.  Everything
here is a pure function of (device, temperature).

The default thermal density prefactor is sqrt(Delta / 2 pi k_B T); the
textbook BCS result carries the inverted prefactor sqrt(2 pi k_B T / Delta).
``thermal_prefactor`` selects between the two conventions ("paper", the
default, is the one every quoted device number assumes).
"""

from __future__ import annotations

import math

from qpscope.device_model import DeviceParams, kelvin_to_ghz
from qpscope.errors import ConfigError

# exp() underflows to subnormals near -708; clamp well before that
_EXP_FLOOR = -700.0


def _exp(arg: float) -> float:
    if arg < _EXP_FLOOR:
        return 0.0
    return math.exp(arg)


def zeta(params: DeviceParams, temp_k: float) -> float:
    """Fraction of resident QPs localized in the low-gap film.

    1 / (1 + vol_ratio * exp(-dDelta / k_B T)); tends to 1 as T -> 0.
    """
    kbt = kelvin_to_ghz(temp_k)
    return 1.0 / (1.0 + params.vol_ratio * _exp(-params.ddelta_ghz / kbt))


def thermal_density(params: DeviceParams, temp_k: float, thermal_prefactor: str = "paper") -> float:
    """Thermal-equilibrium QP density (per Cooper pair) in the low-gap film."""
    kbt = kelvin_to_ghz(temp_k)
    ratio = params.delta_ghz / (2.0 * math.pi * kbt)
    if thermal_prefactor == "paper":
        pref = math.sqrt(ratio)
    elif thermal_prefactor == "standard":
        pref = math.sqrt(1.0 / ratio)
    else:
        raise ConfigError("thermal_prefactor must be 'paper' or 'standard'")
    return pref * _exp(-params.delta_ghz / kbt)


def xqp_total(params: DeviceParams, temp_k: float, thermal_prefactor: str = "paper") -> float:
    """Total QP density: resident fraction plus the thermal population."""
    return params.x_res + thermal_density(params, temp_k, thermal_prefactor)


def occupation_F(eps_ghz: float, params: DeviceParams, temp_k: float) -> float:
    """Occupation probability of a QP eigenstate at energy eps (GHz).

    Resident part: zeta(T) * x_res * sqrt(Delta / 2 pi k_B T)
    * exp(-(eps - Delta)/k_B T); thermal part: exp(-eps/k_B T).

    Parameters
    ----------
    eps_ghz : QP energy as a frequency, must be at or above the low gap.
    """
    if eps_ghz < params.delta_ghz:
        raise ConfigError("eps_ghz below the low gap")
    kbt = kelvin_to_ghz(temp_k)
    resident = (
        zeta(params, temp_k)
        * params.x_res
        * math.sqrt(params.delta_ghz / (2.0 * math.pi * kbt))
        * _exp(-(eps_ghz - params.delta_ghz) / kbt)
    )
    return resident + _exp(-eps_ghz / kbt)


def occupation_at_gap(params: DeviceParams, temp_k: float) -> float:
    """F evaluated at eps = Delta; the common prefactor of the closed-form
    structure factors: zeta * x_res * sqrt(Delta / 2 pi k_B T) + exp(-Delta/k_B T)."""
    return occupation_F(params.delta_ghz, params, temp_k)
