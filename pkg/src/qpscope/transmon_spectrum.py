"""Transmon spectrum in the charge basis, parity-resolved.

The charging term reads 4 E_C (N - n_g + P/4)^2 with P = +-1 the charge
parity, so the two parity sectors are the same integer-charge Hamiltonian
evaluated at effective offsets n_g -+ 1/4.  The operators cos(phi/2) and
sin(phi/2) transfer a single electron: on the combined charge coordinate
N + P/4 they shift by 1/2 and therefore connect the two sectors, which live
on interleaved grids.  Matrix elements between sectors are assembled from
eigenvector overlaps on a common charge window.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from qpscope.device_model import DeviceParams
from qpscope.errors import ConfigError, NumericsError

_N_CHARGE_START = 15
_N_CHARGE_MAX = 60
_LEVEL_TOL_GHZ = 1.0e-6  # 1 kHz convergence target on the lowest 4 levels


@dataclass(frozen=True)
class Spectrum:
    """Eigenlevels and charge-basis eigenvectors of one parity sector."""

    ng: float
    parity: int
    levels: np.ndarray  # ascending eigenfrequencies (GHz)
    eigvecs: np.ndarray  # column k = charge-basis amplitudes of level k
    n_charge: int  # basis spans N in [-n_charge, n_charge]


@dataclass(frozen=True)
class MatrixElements:
    """|<f|cos(phi/2)|i>|^2 and |<f|sin(phi/2)|i>|^2."""

    cos2: float
    sin2: float


@lru_cache(maxsize=512)
def _sector_eigensystem(ej_ghz: float, ec_ghz: float, ng_eff: float, n_charge: int):
    """Diagonalize 4 E_C (N - ng_eff)^2 - (E_J/2)(shift + h.c.) on |N| <= n_charge."""
    n = np.arange(-n_charge, n_charge + 1, dtype=float)
    diag = 4.0 * ec_ghz * (n - ng_eff) ** 2
    offdiag = np.full(2 * n_charge, -0.5 * ej_ghz)
    levels, vecs = eigh_tridiagonal(diag, offdiag)
    return levels, vecs


@lru_cache(maxsize=256)
def _converged_n_charge(ej_ghz: float, ec_ghz: float, ng_eff: float) -> int:
    """Smallest basis half-width meeting the 1 kHz criterion on 4 levels."""
    n = _N_CHARGE_START
    levels, _ = _sector_eigensystem(ej_ghz, ec_ghz, ng_eff, n)
    while n + 5 <= _N_CHARGE_MAX:
        bigger, _ = _sector_eigensystem(ej_ghz, ec_ghz, ng_eff, n + 5)
        if np.max(np.abs(bigger[:4] - levels[:4])) < _LEVEL_TOL_GHZ:
            return n
        n += 5
        levels = bigger
    raise NumericsError("charge basis did not converge at maximum size")


def _effective_offset(ng: float, parity: int) -> float:
    return ng - parity / 4.0


def spectrum(params: DeviceParams, ng: float, parity: int = +1, n_levels: int = 5) -> Spectrum:
    """Eigenfrequencies of the parity-``parity`` sector at offset charge ``ng``.

    Parameters
    ----------
    ng : offset charge in units of 2e, in [0, 1).
    parity : +1 or -1; enters as the P/4 shift of the offset charge.
    n_levels : number of levels required (the returned table holds the full
        basis; this only bounds the basis size check).
    """
    if n_levels < 2:
        raise ConfigError("n_levels must be at least 2")
    if not 0.0 <= ng < 1.0:
        raise ConfigError("ng must lie in [0, 1)")
    if parity not in (+1, -1):
        raise ConfigError("parity must be +1 or -1")
    ng_eff = _effective_offset(ng, parity)
    n_charge = _converged_n_charge(params.ej_ghz, params.ec_ghz, ng_eff)
    levels, vecs = _sector_eigensystem(params.ej_ghz, params.ec_ghz, ng_eff, n_charge)
    return Spectrum(ng=ng, parity=parity, levels=levels, eigvecs=vecs, n_charge=n_charge)


def parity_levels(params: DeviceParams, ng: float, n_levels: int = 5):
    """Levels of both parity sectors, as (levels_plus, levels_minus)."""
    sp = spectrum(params, ng, +1, n_levels)
    sm = spectrum(params, ng, -1, n_levels)
    return sp.levels[:n_levels], sm.levels[:n_levels]


def transition_frequency(params: DeviceParams, ng: float, i: int, f: int) -> float:
    """Parity-averaged signed transition frequency f_fi = (E_f - E_i)/h in GHz."""
    need = max(i, f) + 1
    lp, lm = parity_levels(params, ng, n_levels=max(need, 2))
    avg = 0.5 * (lp + lm)
    return float(avg[f] - avg[i])


def qubit_frequency(params: DeviceParams, ng: float = 0.25) -> float:
    """Parity-averaged 0-1 transition frequency (GHz)."""
    return transition_frequency(params, ng, 0, 1)


def charge_dispersion(params: DeviceParams, level_pair: tuple[int, int] = (0, 1)) -> float:
    """Peak-to-peak variation of the level_pair transition over offset charge.

    Computed at fixed parity; by periodicity this equals the maximal
    splitting |f^+ - f^-| over ng.
    """
    i, f = level_pair
    if i >= f:
        raise ConfigError("level_pair must be ordered (lower, upper)")
    # extremes sit at effective offsets 0 and 1/2; sample a grid anyway
    freqs = []
    for ng_eff in np.linspace(0.0, 0.5, 11):
        n_charge = _converged_n_charge(params.ej_ghz, params.ec_ghz, ng_eff)
        levels, _ = _sector_eigensystem(params.ej_ghz, params.ec_ghz, ng_eff, n_charge)
        freqs.append(levels[f] - levels[i])
    return float(max(freqs) - min(freqs))


def _half_shift_overlaps(params: DeviceParams, ng: float, i: int, f: int, parity: int):
    """Overlap sums (raising, lowering) of e^{+-i phi/2} between sectors.

    e^{i phi/2} maps (N, +) -> (N+1, -) and (N, -) -> (N, +); its inverse
    lowers the combined charge by 1/2.
    """
    s_i = spectrum(params, ng, parity, n_levels=max(i + 1, 2))
    s_f = spectrum(params, ng, -parity, n_levels=max(f + 1, 2))
    n_charge = max(s_i.n_charge, s_f.n_charge)
    _, vi = _sector_eigensystem(params.ej_ghz, params.ec_ghz, _effective_offset(ng, parity), n_charge)
    _, vf = _sector_eigensystem(params.ej_ghz, params.ec_ghz, _effective_offset(ng, -parity), n_charge)
    psi_i = vi[:, i]
    psi_f = vf[:, f]
    if parity == +1:
        up = float(psi_f[1:] @ psi_i[:-1])  # <f,-|e^{i phi/2}|i,+>
        down = float(psi_f @ psi_i)  # <f,-|e^{-i phi/2}|i,+>
    else:
        up = float(psi_f @ psi_i)  # <f,+|e^{i phi/2}|i,->
        down = float(psi_f[:-1] @ psi_i[1:])  # <f,+|e^{-i phi/2}|i,->
    return up, down


def transition_matrix_elements(
    params: DeviceParams, ng: float, i: int, f: int, parity: int = +1
) -> MatrixElements:
    """Numeric |cos(phi/2)|^2 and |sin(phi/2)|^2 elements from level i of the
    given parity sector to level f of the opposite sector."""
    up, down = _half_shift_overlaps(params, ng, i, f, parity)
    cos_me = 0.5 * (up + down)
    sin_me = 0.5 * (up - down)  # modulus squared below; the 1/i phase drops
    return MatrixElements(cos2=cos_me**2, sin2=sin_me**2)


def matrix_elements_parity_averaged(params: DeviceParams, ng: float, i: int, f: int) -> MatrixElements:
    """Matrix elements averaged over the initial parity sector."""
    a = transition_matrix_elements(params, ng, i, f, parity=+1)
    b = transition_matrix_elements(params, ng, i, f, parity=-1)
    return MatrixElements(cos2=0.5 * (a.cos2 + b.cos2), sin2=0.5 * (a.sin2 + b.sin2))


def approx_matrix_elements(ej_ghz: float, ec_ghz: float, i: int, f: int) -> MatrixElements:
    """Deep-transmon asymptotic matrix elements.

    cos2 = delta_if; sin2 = (1/4) sqrt(2 E_C/E_J) (i delta_{i-1,f}
    + (i+1) delta_{i+1,f}).
    """
    cos2 = 1.0 if i == f else 0.0
    scale = 0.25 * np.sqrt(2.0 * ec_ghz / ej_ghz)
    if f == i - 1:
        sin2 = scale * i
    elif f == i + 1:
        sin2 = scale * (i + 1)
    else:
        sin2 = 0.0
    return MatrixElements(cos2=cos2, sin2=sin2)
