"""Two-pad quasiparticle generation/trapping/tunneling kinetics.

Tracks the per-pad QP densities x_L, x_R (per Cooper pair of the low-gap
film) under generation g, trapping s, recombination r, and qubit-state
dependent tunneling.  With symmetric pads and recombination neglected the
steady state is closed-form; when the trapping rate is comparable to the
per-QP tunneling rates, driving the qubit piles QPs onto one pad and the
measured parity-switching rate bends away from linear in p1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qpscope.device_model import DeviceParams
from qpscope.errors import ConfigError, NumericsError
from qpscope.qp_distribution import xqp_total
from qpscope.tunneling_rates import DIRECTIONS, L_TO_R, R_TO_L, partial_rate

# transitions feeding the directional ground/excited tunneling rates
_GROUND_PAIRS = ((0, 0), (0, 1))
_EXCITED_PAIRS = ((1, 0), (1, 1), (1, 2))


@dataclass(frozen=True)
class KineticsParams:
    """Generation g (1/s, density units), trapping s (1/s), recombination r
    (1/s per unit density).  Literature-sourced defaults; not measured here."""

    g: float = 0.0
    s: float = 10.0
    r: float = 1.0e7


def validate_kinetics(kin: KineticsParams) -> KineticsParams:
    if kin.g < 0:
        raise ConfigError("g must be nonnegative")
    if kin.s < 0:
        raise ConfigError("s must be nonnegative")
    if kin.r < 0:
        raise ConfigError("r must be nonnegative")
    return kin


def directional_state_rate(
    state: int, direction: str, params: DeviceParams, ng: float, temp_k: float, method: str = "auto"
) -> float:
    """QP tunneling rate (1/s) in one direction for qubit state 0 or 1."""
    pairs = _GROUND_PAIRS if state == 0 else _EXCITED_PAIRS
    if state not in (0, 1):
        raise ConfigError("state must be 0 or 1")
    return sum(partial_rate(i, f, direction, params, ng, temp_k, method) for (i, f) in pairs)


def per_qp_rate(
    direction: str,
    p1: float,
    params: DeviceParams,
    ng: float,
    temp_k: float,
    method: str = "auto",
) -> float:
    """Tunneling rate per quasiparticle (1/s) at excited-state population p1.

    gamma_dir = [(1-p1) Gamma_0^dir + p1 Gamma_1^dir] / N_qp with
    N_qp = n_cp * x_qp; independent of x_qp since the totals scale with it.
    """
    if not 0.0 <= p1 <= 1.0:
        raise ConfigError("p1 must lie in [0, 1]")
    n_qp = params.n_cp * xqp_total(params, temp_k)
    if n_qp == 0.0:
        raise NumericsError("per-QP rate undefined at N_qp = 0")
    g0 = directional_state_rate(0, direction, params, ng, temp_k, method)
    g1 = directional_state_rate(1, direction, params, ng, temp_k, method)
    return ((1.0 - p1) * g0 + p1 * g1) / n_qp


def steady_densities(kin: KineticsParams, gammas: tuple[float, float]) -> tuple[float, float]:
    """Steady-state (x_L, x_R) with recombination neglected.

    x_{R/L} = (g/s)(1 +- (gamma_LR - gamma_RL)/(s + gamma_LR + gamma_RL)).
    """
    gamma_lr, gamma_rl = gammas
    denom = kin.s + gamma_lr + gamma_rl
    if denom <= 0.0:
        raise NumericsError("steady state undefined: s + gamma_LR + gamma_RL must be positive")
    if kin.s <= 0.0:
        raise NumericsError("steady state requires a nonzero trapping rate")
    base = kin.g / kin.s
    imbalance = (gamma_lr - gamma_rl) / denom
    x_r = base * (1.0 + imbalance)
    x_l = base * (1.0 - imbalance)
    return x_l, x_r


def kinetics_rhs(
    x: np.ndarray, kin: KineticsParams, gammas: tuple[float, float], include_recombination: bool = True
) -> np.ndarray:
    """Right-hand side of the two-pad kinetic equations, d(x_L, x_R)/dt."""
    x_l, x_r = x
    gamma_lr, gamma_rl = gammas
    r = kin.r if include_recombination else 0.0
    dx_l = kin.g - kin.s * x_l - r * x_l**2 + gamma_rl * x_r - gamma_lr * x_l
    dx_r = kin.g - kin.s * x_r - r * x_r**2 - gamma_rl * x_r + gamma_lr * x_l
    return np.array([dx_l, dx_r])


def _per_qp_pair(p1, params, ng, temp_k, method):
    return (
        per_qp_rate(L_TO_R, p1, params, ng, temp_k, method),
        per_qp_rate(R_TO_L, p1, params, ng, temp_k, method),
    )


def kinetic_parity_rate(
    p1: float,
    kin: KineticsParams,
    params: DeviceParams,
    ng: float,
    temp_k: float,
    method: str = "auto",
) -> float:
    """Parity-switching rate (1/s) including QP redistribution between pads.

    N_qp (gamma_RL + gamma_LR - (gamma_LR - gamma_RL)^2 / (s + gamma_LR
    + gamma_RL)) with per-QP rates evaluated at p1.  The generation rate is
    fixed so that g/s equals the quasi-equilibrium density x_qp(T), i.e. the
    total QP number matches the undriven device.
    """
    gamma_lr, gamma_rl = _per_qp_pair(p1, params, ng, temp_k, method)
    if kin.s <= 0.0:
        raise NumericsError("kinetic rate requires a nonzero trapping rate")
    n_scale = params.n_cp * xqp_total(params, temp_k)  # n_cp * (g/s) in the fixed-x convention
    correction = (gamma_lr - gamma_rl) ** 2 / (kin.s + gamma_lr + gamma_rl)
    return n_scale * (gamma_rl + gamma_lr - correction)


def linearity_deviation(
    kin: KineticsParams,
    params: DeviceParams,
    ng: float,
    temp_k: float,
    method: str = "auto",
    gamma_offset: float = 0.0,
    n_grid: int = 41,
) -> float:
    """Maximal relative deviation of Gamma(p1) from its endpoint chord.

    max over p1 of |Gamma(p1) - chord(p1)| / chord(p1), with gamma_offset
    added to the rate before the comparison (measured curves carry it).
    """
    grid = np.linspace(0.0, 1.0, n_grid)
    rates = np.array(
        [kinetic_parity_rate(p1, kin, params, ng, temp_k, method) for p1 in grid]
    ) + gamma_offset
    chord = rates[0] + (rates[-1] - rates[0]) * grid
    return float(np.max(np.abs(rates - chord) / chord))
