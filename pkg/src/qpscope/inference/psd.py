"""Lorentzian power-spectrum estimate of the parity switching rate.

A random telegraph signal with symmetric per-direction rate Gamma has the
autocorrelation exp(-2 Gamma |tau|) and hence a Lorentzian spectrum with
half-power knee at f_c = Gamma/pi; symbol errors add a white floor.  The
fit model is A / (1 + (f/f_c)^2) + C and the returned rate is pi f_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import periodogram

from qpscope.errors import ConfigError, NumericsError


@dataclass(frozen=True)
class PsdFit:
    """Fitted Lorentzian knee and the implied switching rate."""

    rate: float  # pi * f_c (1/s)
    f_c: float
    amplitude: float
    floor: float
    freqs: np.ndarray
    spectrum: np.ndarray


def _mean_periodogram(seqs, dt_s: float):
    n = None
    acc = None
    for s in seqs:
        s = np.asarray(s, dtype=float)
        if s.ndim != 1 or s.size < 64:
            raise ConfigError("each record must be 1-d with at least 64 samples")
        if n is None:
            n = s.size
        elif s.size != n:
            raise ConfigError("records must share a common length")
        f, pxx = periodogram(s, fs=1.0 / dt_s, detrend="constant")
        acc = pxx if acc is None else acc + pxx
    return f[1:], acc[1:] / len(seqs)


def psd_rate(symbols, dt_s: float) -> PsdFit:
    """Fit the averaged symbol-sequence periodogram to a Lorentzian + floor.

    ``symbols``: one +-1 sequence or a list of equal-length sequences.
    Raises when no knee is resolvable (white spectrum or knee beyond the
    usable band).
    """
    if not dt_s > 0:
        raise ConfigError("dt_s must be positive")
    seqs = symbols if isinstance(symbols, (list, tuple)) else [symbols]
    freqs, spec = _mean_periodogram(seqs, dt_s)
    if np.any(spec <= 0):
        spec = np.clip(spec, np.max(spec) * 1e-12, None)

    n_low = max(3, freqs.size // 20)
    n_high = max(3, freqs.size // 4)
    low = float(np.mean(spec[:n_low]))
    high = float(np.mean(spec[-n_high:]))
    if not low > 2.0 * high:
        raise NumericsError("no Lorentzian knee: spectrum dominated by the noise floor")

    f_nyq = freqs[-1]
    # half-power heuristic for the starting knee
    target = 0.5 * (low + high)
    above = spec > target
    f_c0 = freqs[np.argmin(above)] if not above.all() else 0.5 * f_nyq
    f_c0 = min(max(f_c0, freqs[0]), 0.5 * f_nyq)

    def residuals(theta):
        ln_a, ln_fc, ln_c = theta
        model = math.exp(ln_a) / (1.0 + (freqs / math.exp(ln_fc)) ** 2) + math.exp(ln_c)
        return np.log(model) - np.log(spec)

    theta0 = np.array([math.log(low - high), math.log(f_c0), math.log(max(high, low * 1e-9))])
    res = least_squares(residuals, theta0, xtol=1e-12, ftol=1e-12)
    if not res.success:
        raise NumericsError("Lorentzian fit did not converge")
    amp, f_c, floor = (math.exp(v) for v in res.x)
    if not freqs[0] * 0.5 <= f_c <= 0.9 * f_nyq:
        raise NumericsError("no Lorentzian knee: fitted corner outside the usable band")
    return PsdFit(
        rate=math.pi * f_c,
        f_c=f_c,
        amplitude=amp,
        floor=floor,
        freqs=freqs,
        spectrum=spec,
    )
