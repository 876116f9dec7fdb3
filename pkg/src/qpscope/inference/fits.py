"""Population extrapolation, Arrhenius activation fits, and the joint
full-model fit of both temperature series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from qpscope.device_model import DeviceParams, kelvin_to_ghz
from qpscope.errors import ConfigError, NumericsError
from qpscope.transmon_spectrum import transition_frequency
from qpscope.tunneling_rates import state_rate


@dataclass(frozen=True)
class LineFit:
    """Weighted straight-line fit Gamma(p1) with its two extrapolations."""

    gamma0: float
    gamma0_err: float
    gamma1: float
    gamma1_err: float
    slope: float
    intercept: float
    chi2: float
    ndof: int


@dataclass(frozen=True)
class ArrheniusFit:
    """ln(Gamma - offset) = ln(prefactor) - E_A / k_B T."""

    activation_ghz: float
    activation_err_ghz: float
    prefactor: float
    prefactor_err: float


@dataclass(frozen=True)
class FitResult:
    """Parameter estimates with 1-sigma uncertainties from the local Jacobian."""

    values: dict  # name -> (value, sigma)
    residual_norm: float
    converged: bool
    n_points: int


def rates_vs_population(records) -> LineFit:
    """Weighted least-squares line through (p1, Gamma) measurements.

    Records are (p1, gamma, sigma) triples; the intercepts at p1 = 0 and
    p1 = 1 estimate the ground- and excited-state rates.
    """
    records = [(float(p), float(g), float(s)) for (p, g, s) in records]
    if len(records) < 3:
        raise ConfigError("need at least 3 records")
    p = np.array([r[0] for r in records])
    g = np.array([r[1] for r in records])
    s = np.array([r[2] for r in records])
    if np.any(s <= 0):
        raise ConfigError("sigmas must be positive")
    if np.ptp(p) == 0.0:
        raise NumericsError("singular design: all p1 equal")
    w = 1.0 / s**2
    design = np.stack([np.ones_like(p), p], axis=1)
    ata = design.T @ (w[:, None] * design)
    atb = design.T @ (w * g)
    cov = np.linalg.inv(ata)
    beta = cov @ atb
    resid = g - design @ beta
    chi2 = float(np.sum(w * resid**2))
    var0 = cov[0, 0]
    var1 = cov[0, 0] + 2.0 * cov[0, 1] + cov[1, 1]
    return LineFit(
        gamma0=float(beta[0]),
        gamma0_err=math.sqrt(var0),
        gamma1=float(beta[0] + beta[1]),
        gamma1_err=math.sqrt(var1),
        slope=float(beta[1]),
        intercept=float(beta[0]),
        chi2=chi2,
        ndof=len(records) - 2,
    )


def arrhenius_fit(series, offset: float = 0.0) -> ArrheniusFit:
    """Activation fit of (temp_k, gamma) pairs after subtracting the offset.

    Ordinary least squares of ln(gamma - offset) against 1/(k_B T); the
    slope is the activation energy as a frequency (GHz).
    """
    series = [(float(t), float(g)) for (t, g) in series]
    if len(series) < 3:
        raise ConfigError("need at least 3 points")
    temps = np.array([t for t, _ in series])
    gammas = np.array([g for _, g in series])
    if np.any(gammas - offset <= 0.0):
        raise ConfigError("gamma - offset must be positive for every point")
    x = 1.0 / np.array([kelvin_to_ghz(t) for t in temps])
    y = np.log(gammas - offset)
    n = len(series)
    design = np.stack([np.ones(n), x], axis=1)
    beta, res, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    dof = max(n - 2, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(design.T @ design)
    activation = -beta[1]
    return ArrheniusFit(
        activation_ghz=float(activation),
        activation_err_ghz=math.sqrt(cov[1, 1]),
        prefactor=math.exp(beta[0]),
        prefactor_err=math.exp(beta[0]) * math.sqrt(cov[0, 0]),
    )


def _model_log_rates(theta, base: DeviceParams, temps, states, ng, method):
    delta, ddelta, ln_xres, ln_offset = theta
    params = DeviceParams(
        ej_ghz=base.ej_ghz,
        ec_ghz=base.ec_ghz,
        delta_ghz=delta,
        ddelta_ghz=ddelta,
        x_res=math.exp(ln_xres),
        vol_ratio=base.vol_ratio,
        n_cp=base.n_cp,
    )
    offset = math.exp(ln_offset)
    f21 = transition_frequency(params, ng, 1, 2)
    out = np.empty(len(temps))
    cache = {}
    for idx, (t, state) in enumerate(zip(temps, states)):
        key = (t, state)
        if key not in cache:
            if state == 0:
                val = offset + state_rate(0, params, ng, t, method)
            else:
                g1 = offset + state_rate(1, params, ng, t, method)
                w = math.exp(-f21 / kelvin_to_ghz(t))
                if w > 1e-6:
                    g2 = offset + state_rate(2, params, ng, t, method)
                    val = (g1 + w * g2) / (1.0 + w)
                else:
                    val = g1
            cache[key] = val
        out[idx] = cache[key]
    return np.log(out)


_START_GRID = {
    "delta_ghz": (38.0, 46.0, 56.0),
    "ddelta_ghz": (4.0, 5.5, 7.0),
    "x_res": (1e-10, 5e-10, 3e-9),
    "offset": (0.05, 0.15, 0.5),
}


def joint_fit(
    data,
    base: DeviceParams,
    ng: float = 0.163,
    method: str = "auto",
    starts: int = 3,
) -> FitResult:
    """Simultaneous fit of the two temperature series to the full rate model.

    ``data`` rows are (temp_k, gamma, sigma, state) with state 0 or 1; the
    model is the QP state rate plus one common offset, the excited series
    weighted with the second excited state per the thermal occupation of
    level 2.  Weighted nonlinear least squares in log-rate space, multi-start
    from a coarse grid; E_J and E_C are held at their measured values.
    """
    rows = [(float(t), float(g), float(s), int(st)) for (t, g, s, st) in data]
    if len(rows) < 6:
        raise ConfigError("need at least 6 points across the two series")
    states = {st for *_, st in rows}
    if not states <= {0, 1}:
        raise ConfigError("state must be 0 or 1")
    if len(states) < 2:
        raise ConfigError("need both the ground and excited series")
    temps = np.array([r[0] for r in rows])
    gammas = np.array([r[1] for r in rows])
    sigmas = np.array([r[2] for r in rows])
    state_arr = [r[3] for r in rows]
    if np.any(gammas <= 0) or np.any(sigmas <= 0):
        raise ConfigError("rates and sigmas must be positive")
    log_data = np.log(gammas)
    log_w = gammas / sigmas  # d(ln Gamma) weights

    def residuals(theta):
        try:
            model = _model_log_rates(theta, base, temps, state_arr, ng, method)
        except (NumericsError, OverflowError):
            return np.full(len(rows), 1e6)
        return (model - log_data) * log_w

    lo = np.array([25.0, 0.5, math.log(1e-12), math.log(1e-4)])
    hi = np.array([80.0, 12.0, math.log(1e-7), math.log(10.0)])

    candidates = []
    for d in _START_GRID["delta_ghz"]:
        for dd in _START_GRID["ddelta_ghz"]:
            for xr in _START_GRID["x_res"]:
                for off in _START_GRID["offset"]:
                    theta = np.array([d, dd, math.log(xr), math.log(off)])
                    candidates.append((float(np.sum(residuals(theta) ** 2)), tuple(theta)))
    candidates.sort(key=lambda c: c[0])

    best = None
    for _, theta0 in candidates[:starts]:
        res = least_squares(
            residuals,
            np.array(theta0),
            bounds=(lo, hi),
            x_scale=[10.0, 1.0, 1.0, 1.0],
            xtol=1e-12,
            ftol=1e-12,
        )
        if best is None or res.cost < best.cost:
            best = res
    if best is None or not best.success:
        raise NumericsError("joint fit did not converge")

    jac = best.jac
    try:
        cov = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError as exc:
        raise NumericsError("singular Jacobian in joint fit") from exc
    sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    delta, ddelta, ln_xres, ln_offset = best.x
    at_bound = bool(np.any(np.isclose(best.x, lo)) or np.any(np.isclose(best.x, hi)))
    if at_bound:
        raise NumericsError("joint fit parameter stuck at a bound")
    values = {
        "delta_ghz": (float(delta), float(sig[0])),
        "ddelta_ghz": (float(ddelta), float(sig[1])),
        "x_res": (math.exp(ln_xres), math.exp(ln_xres) * float(sig[2])),
        "gamma_offset": (math.exp(ln_offset), math.exp(ln_offset) * float(sig[3])),
    }
    return FitResult(
        values=values,
        residual_norm=float(np.sqrt(2.0 * best.cost)),
        converged=True,
        n_points=len(rows),
    )
