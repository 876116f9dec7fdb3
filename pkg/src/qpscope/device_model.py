"""Device constants, unit conventions, and validation.

``DeviceParams`` collects the junction/device constants; ``EnvConditions``
the environment knobs (temperature, photon channel).  Both are immutable and
safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from qpscope.constants import KB_GHZ_PER_K
from qpscope.errors import ConfigError

# n_cp has no measured value for this device; it only rescales per-QP
# kinetics (qp_kinetics), never the measured total rates.
DEFAULT_N_CP = 1.0e12


@dataclass(frozen=True)
class DeviceParams:
    """Junction and device constants.

    Attributes
    ----------
    ej_ghz : Josephson energy E_J/h (GHz).
    ec_ghz : charging energy E_C/h (GHz).
    delta_ghz : low-side superconducting gap /h (GHz).
    ddelta_ghz : gap difference across the junction /h (GHz).
    x_res : resident quasiparticle fraction (per Cooper pair, dimensionless).
    vol_ratio : high-gap to low-gap film volume ratio within one pad.
    n_cp : Cooper-pair count in one low-gap pad film (sets per-QP rates only).
    """

    ej_ghz: float
    ec_ghz: float
    delta_ghz: float
    ddelta_ghz: float
    x_res: float
    vol_ratio: float = 1.0
    n_cp: float = DEFAULT_N_CP


@dataclass(frozen=True)
class EnvConditions:
    """Bath temperature and the photon-channel parameters.

    Attributes
    ----------
    temp_k : bath temperature (K).
    gamma_offset : temperature-independent rate offset (1/s).
    f0_ghz : photon flux exponential cutoff (GHz).
    g0 : photon coupling scale (1/s).
    """

    temp_k: float
    gamma_offset: float = 0.0
    f0_ghz: float = 10.0
    g0: float = 0.0


def validate(params: DeviceParams) -> DeviceParams:
    """Return ``params`` unchanged if every invariant holds.

    Raises
    ------
    ConfigError
        Naming the first violated invariant.
    """
    if not params.ej_ghz > 0:
        raise ConfigError("ej_ghz must be positive")
    if not params.ec_ghz > 0:
        raise ConfigError("ec_ghz must be positive")
    if not params.delta_ghz > 0:
        raise ConfigError("delta_ghz must be positive")
    if not params.ddelta_ghz > 0:
        raise ConfigError("ddelta_ghz must be positive")
    if params.ddelta_ghz >= params.delta_ghz:
        raise ConfigError("gap difference exceeds gap")
    if params.x_res < 0:
        raise ConfigError("x_res must be nonnegative")
    if not params.vol_ratio > 0:
        raise ConfigError("vol_ratio must be positive")
    if not params.n_cp > 0:
        raise ConfigError("n_cp must be positive")
    return params


def validate_env(env: EnvConditions) -> EnvConditions:
    """Return ``env`` unchanged if every invariant holds."""
    if not env.temp_k > 0:
        raise ConfigError("temp_k must be positive")
    if env.gamma_offset < 0:
        raise ConfigError("gamma_offset must be nonnegative")
    if not env.f0_ghz > 0:
        raise ConfigError("f0_ghz must be positive")
    if env.g0 < 0:
        raise ConfigError("g0 must be nonnegative")
    return env


def kelvin_to_ghz(temp_k: float) -> float:
    """Thermal energy k_B*T as a frequency (GHz)."""
    if not temp_k > 0:
        raise ConfigError("temp_k must be positive")
    return KB_GHZ_PER_K * temp_k


def josephson_coupling(params: DeviceParams) -> float:
    """Squared tunneling constant t^2 nu_0^2 implied by E_J.

    E_J relates to the junction tunneling constant through the gap midpoint:
    t^2 nu_0^2 = E_J / [pi^2 (Delta + dDelta/2)], dimensionless in the
    frequency convention.  Applied as written; no small-dDelta requirement.
    """
    return params.ej_ghz / (math.pi**2 * (params.delta_ghz + 0.5 * params.ddelta_ghz))


def measured_device() -> DeviceParams:
    """Parameters of the measured device (joint-fit values)."""
    return DeviceParams(
        ej_ghz=6.24,
        ec_ghz=0.357,
        delta_ghz=46.0,
        ddelta_ghz=4.52,
        x_res=5.6e-10,
    )
