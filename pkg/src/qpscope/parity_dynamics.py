"""Plasmon-parity master equation for parity pumping.

Driving the qubit at the transition frequency of one parity sector excites
it only there; the excited state switches parity fast (Gamma_1 >> Gamma_0),
so the population accumulates in the ground state of the sector the drive
cannot address.  The four-state generator makes that quantitative; the
closed-form polarization is its timescale-separated limit.

State order everywhere: |0,+>, |1,+>, |0,->, |1,->.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qpscope.errors import ConfigError, NumericsError

STATE_LABELS = ("0+", "1+", "0-", "1-")


@dataclass(frozen=True)
class PumpConfig:
    """Drive and rate parameters for the pumping model.

    p_e_conditional is the steady-state excitation probability of the driven
    parity sector; it saturates at 1/2 under strong driving.
    """

    drive_parity: int
    p_e_conditional: float
    gamma0: float
    gamma1: float
    t1_s: float

    def __post_init__(self):
        if self.drive_parity not in (+1, -1):
            raise ConfigError("drive_parity must be +1 or -1")
        if not 0.0 <= self.p_e_conditional <= 0.5:
            raise ConfigError("p_e_conditional must lie in [0, 0.5]")
        if self.gamma0 < 0 or self.gamma1 < 0:
            raise ConfigError("parity rates must be nonnegative")
        if not self.t1_s > 0:
            raise ConfigError("t1_s must be positive")


def pump_rate_matrix(cfg: PumpConfig) -> np.ndarray:
    """CTMC generator G with columns summing to zero; dp/dt = G p.

    The drive pumps |0,P> -> |1,P> in the resonant sector at the rate that
    makes its stationary conditional excitation equal p_e_conditional;
    relaxation |1,P> -> |0,P> at 1/T1; parity flips |0,P> -> |0,-P> at
    Gamma_0 and |1,P> -> |0,-P> at Gamma_1 (the QP absorbs the qubit
    quantum, so flips out of |1> land in the opposite-parity ground state).
    """
    gamma_down = 1.0 / cfg.t1_s
    if cfg.p_e_conditional >= 1.0:
        raise ConfigError("p_e_conditional must be below 1")
    gamma_up = gamma_down * cfg.p_e_conditional / (1.0 - cfg.p_e_conditional)

    idx = {"0+": 0, "1+": 1, "0-": 2, "1-": 3}
    g = np.zeros((4, 4))

    def add(src: str, dst: str, rate: float) -> None:
        g[idx[dst], idx[src]] += rate
        g[idx[src], idx[src]] -= rate

    driven = "+" if cfg.drive_parity == +1 else "-"
    dark = "-" if cfg.drive_parity == +1 else "+"
    add(f"0{driven}", f"1{driven}", gamma_up)
    for p in ("+", "-"):
        add(f"1{p}", f"0{p}", gamma_down)
    for p, q in (("+", "-"), ("-", "+")):
        add(f"0{p}", f"0{q}", cfg.gamma0)
        add(f"1{p}", f"0{q}", cfg.gamma1)
    # the dark sector sees no drive; nothing populates |1,dark>
    assert g[idx[f"1{dark}"], idx[f"0{dark}"]] == 0.0
    return g


def steady_state(generator: np.ndarray) -> np.ndarray:
    """Stationary distribution of a CTMC generator (columns sum to zero).

    Solved as the null space of the generator with the normalization row
    appended; raises if the null space is degenerate (disconnected chain).
    """
    gen = np.asarray(generator, dtype=float)
    n = gen.shape[0]
    if gen.shape != (n, n):
        raise ConfigError("generator must be square")
    if np.max(np.abs(gen.sum(axis=0))) > 1e-9 * max(1.0, np.max(np.abs(gen))):
        raise ConfigError("generator columns must sum to zero")
    svals = np.linalg.svd(gen, compute_uv=False)
    tol = max(1.0, float(np.max(np.abs(gen)))) * n * np.finfo(float).eps * 100
    if np.sum(svals < tol) > 1:
        raise NumericsError("degenerate null space: chain is not irreducible")
    a = np.vstack([gen, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    if np.any(pi < -1e-12):
        raise NumericsError("steady state came out negative")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def pump_polarization(ratio: float, p_e: float) -> float:
    """Closed-form steady-state polarization under parity-selective driving.

    (1/2)(1 - (ratio-1) p_e / (2 + (ratio-1) p_e)) with ratio = Gamma_1 /
    Gamma_0.  Equals the occupation of the driven parity sector; the dark
    sector holds the complement.
    """
    if ratio < 1.0:
        raise ConfigError("ratio must be at least 1")
    if not 0.0 <= p_e <= 0.5:
        raise ConfigError("p_e must lie in [0, 0.5]")
    x = (ratio - 1.0) * p_e
    return 0.5 * (1.0 - x / (2.0 + x))


def driven_parity_population(cfg: PumpConfig) -> float:
    """Steady-state probability of the driven parity sector from the 4-state model."""
    pi = steady_state(pump_rate_matrix(cfg))
    if cfg.drive_parity == +1:
        return float(pi[0] + pi[1])
    return float(pi[2] + pi[3])
