"""Two-state discrete-symbol hidden Markov model for parity jump traces.

Baum-Welch with per-timestep scaling, pooled over many records of one
experimental condition.  Hidden state 0 is parity +1, state 1 is parity -1;
symbols are the thresholded parity assignments.  Four parameters determine
the model: the two switching probabilities per readout interval and the two
per-parity symbol error probabilities.  Switching probabilities convert to
rates through the exact exponential link Gamma = -ln(1 - p)/dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from qpscope.errors import ConfigError, NumericsError


@dataclass(frozen=True)
class HmmFit:
    """Fitted switching rates, symbol error rates, and diagnostics."""

    gamma_pm: float  # parity +1 -> -1 rate (1/s)
    gamma_mp: float  # parity -1 -> +1 rate (1/s)
    err_p: float  # P(symbol -1 | parity +1)
    err_m: float  # P(symbol +1 | parity -1)
    loglik: float
    n_iter: int
    converged: bool
    trans: np.ndarray  # per-step transition matrix
    emit: np.ndarray
    start: np.ndarray

    @property
    def gamma_avg(self) -> float:
        """The reported parity switching rate, (G+- + G-+)/2."""
        return 0.5 * (self.gamma_pm + self.gamma_mp)


@njit(cache=True)
def _fb_counts(obs, a, b, pi):
    """Scaled forward-backward expected counts for one symbol sequence.

    Returns (loglik, xi_sum[2,2], emit_num[2,2], gamma0[2], gamma_sum[2],
    gamma_sum_no_last[2]).
    """
    t_len = obs.shape[0]
    alpha = np.empty((t_len, 2))
    scale = np.empty(t_len)
    a0 = pi[0] * b[0, obs[0]]
    a1 = pi[1] * b[1, obs[0]]
    scale[0] = a0 + a1
    alpha[0, 0] = a0 / scale[0]
    alpha[0, 1] = a1 / scale[0]
    for t in range(1, t_len):
        o = obs[t]
        a0 = (alpha[t - 1, 0] * a[0, 0] + alpha[t - 1, 1] * a[1, 0]) * b[0, o]
        a1 = (alpha[t - 1, 0] * a[0, 1] + alpha[t - 1, 1] * a[1, 1]) * b[1, o]
        s = a0 + a1
        scale[t] = s
        alpha[t, 0] = a0 / s
        alpha[t, 1] = a1 / s

    beta0 = 1.0
    beta1 = 1.0
    xi = np.zeros((2, 2))
    emit_num = np.zeros((2, 2))
    gamma_sum = np.zeros(2)
    gamma0 = np.zeros(2)
    # contributions at t = T-1
    g0 = alpha[t_len - 1, 0] * beta0
    g1 = alpha[t_len - 1, 1] * beta1
    emit_num[0, obs[t_len - 1]] += g0
    emit_num[1, obs[t_len - 1]] += g1
    gamma_sum[0] += g0
    gamma_sum[1] += g1
    for t in range(t_len - 2, -1, -1):
        o = obs[t + 1]
        w00 = a[0, 0] * b[0, o] * beta0
        w01 = a[0, 1] * b[1, o] * beta1
        w10 = a[1, 0] * b[0, o] * beta0
        w11 = a[1, 1] * b[1, o] * beta1
        xi[0, 0] += alpha[t, 0] * w00 / scale[t + 1]
        xi[0, 1] += alpha[t, 0] * w01 / scale[t + 1]
        xi[1, 0] += alpha[t, 1] * w10 / scale[t + 1]
        xi[1, 1] += alpha[t, 1] * w11 / scale[t + 1]
        nb0 = (w00 + w01) / scale[t + 1]
        nb1 = (w10 + w11) / scale[t + 1]
        beta0 = nb0
        beta1 = nb1
        g0 = alpha[t, 0] * beta0
        g1 = alpha[t, 1] * beta1
        o_now = obs[t]
        emit_num[0, o_now] += g0
        emit_num[1, o_now] += g1
        gamma_sum[0] += g0
        gamma_sum[1] += g1
        if t == 0:
            gamma0[0] = g0
            gamma0[1] = g1

    loglik = 0.0
    for t in range(t_len):
        loglik += math.log(scale[t])
    gamma_no_last = np.empty(2)
    gamma_no_last[0] = xi[0, 0] + xi[0, 1]
    gamma_no_last[1] = xi[1, 0] + xi[1, 1]
    return loglik, xi, emit_num, gamma0, gamma_sum, gamma_no_last


@njit(cache=True)
def _viterbi(obs, a, b, pi):
    t_len = obs.shape[0]
    back = np.empty((t_len, 2), dtype=np.int8)
    v0 = math.log(pi[0] + 1e-300) + math.log(b[0, obs[0]] + 1e-300)
    v1 = math.log(pi[1] + 1e-300) + math.log(b[1, obs[0]] + 1e-300)
    la = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            la[i, j] = math.log(a[i, j] + 1e-300)
    for t in range(1, t_len):
        lb0 = math.log(b[0, obs[t]] + 1e-300)
        lb1 = math.log(b[1, obs[t]] + 1e-300)
        c00 = v0 + la[0, 0]
        c10 = v1 + la[1, 0]
        if c00 >= c10:
            n0 = c00 + lb0
            back[t, 0] = 0
        else:
            n0 = c10 + lb0
            back[t, 0] = 1
        c01 = v0 + la[0, 1]
        c11 = v1 + la[1, 1]
        if c01 >= c11:
            n1 = c01 + lb1
            back[t, 1] = 0
        else:
            n1 = c11 + lb1
            back[t, 1] = 1
        v0 = n0
        v1 = n1
    path = np.empty(t_len, dtype=np.int8)
    path[t_len - 1] = 0 if v0 >= v1 else 1
    for t in range(t_len - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def _as_sequences(symbols) -> list:
    if isinstance(symbols, (list, tuple)):
        seqs = [np.asarray(s) for s in symbols]
    else:
        seqs = [np.asarray(symbols)]
    out = []
    for s in seqs:
        if s.ndim != 1:
            raise ConfigError("each symbol sequence must be one-dimensional")
        if s.size < 2:
            raise ConfigError("each symbol sequence needs at least two samples")
        vals = set(np.unique(s).tolist())
        if not vals <= {-1, 1}:
            raise ConfigError("symbols must be +-1")
        out.append((s < 0).astype(np.int8))  # 0 <-> parity +1, 1 <-> parity -1
    return out


def fit_parity_hmm(
    symbols,
    dt_s: float,
    tol: float = 1e-9,
    max_iter: int = 500,
) -> HmmFit:
    """Baum-Welch fit of the two-state parity HMM to +-1 symbol sequences.

    ``symbols`` is one sequence or a list of sequences (pooled fit: one set
    of parameters, statistics summed across records).
    """
    if not dt_s > 0:
        raise ConfigError("dt_s must be positive")
    seqs = _as_sequences(symbols)
    total = sum(s.size for s in seqs)
    if total < 100:
        raise ConfigError("need at least 100 symbols")

    flips = sum(int(np.count_nonzero(np.diff(s))) for s in seqs)
    steps = sum(s.size - 1 for s in seqs)
    flip_rate = max(flips / max(steps, 1), 1e-6)
    q = min(0.4, 0.5 * flip_rate)
    e = min(0.25, 0.25 * flip_rate + 1e-3)
    a = np.array([[1.0 - q, q], [q, 1.0 - q]])
    b = np.array([[1.0 - e, e], [e, 1.0 - e]])
    pi = np.array([0.5, 0.5])

    prev_ll = -np.inf
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        ll = 0.0
        xi_acc = np.zeros((2, 2))
        emit_acc = np.zeros((2, 2))
        pi_acc = np.zeros(2)
        gamma_acc = np.zeros(2)
        gamma_nl_acc = np.zeros(2)
        for s in seqs:
            l, xi, emit, g0, gs, gnl = _fb_counts(s, a, b, pi)
            ll += l
            xi_acc += xi
            emit_acc += emit
            pi_acc += g0
            gamma_acc += gs
            gamma_nl_acc += gnl
        if not math.isfinite(ll):
            raise NumericsError("HMM log-likelihood is not finite")
        if ll < prev_ll - 1e-8 * (1.0 + abs(ll)):
            raise NumericsError("Baum-Welch log-likelihood decreased")
        if abs(ll - prev_ll) < tol * (1.0 + abs(ll)):
            converged = True
            prev_ll = ll
            break
        prev_ll = ll
        a = xi_acc / np.maximum(gamma_nl_acc[:, None], 1e-300)
        a = np.clip(a, 1e-12, None)
        a /= a.sum(axis=1, keepdims=True)
        b = emit_acc / np.maximum(gamma_acc[:, None], 1e-300)
        b = np.clip(b, 1e-12, None)
        b /= b.sum(axis=1, keepdims=True)
        pi = pi_acc / pi_acc.sum()
    if not converged:
        raise NumericsError("Baum-Welch did not converge")

    # identifiability: state 0 must predominantly emit symbol 0 (parity +1)
    if b[0, 1] + b[1, 0] > 1.0:
        a = a[::-1, ::-1].copy()
        b = b[::-1, ::-1].copy()
        pi = pi[::-1].copy()

    p_pm = float(a[0, 1])
    p_mp = float(a[1, 0])
    if p_pm > 0.5 or p_mp > 0.5:
        raise NumericsError("switching probability beyond the Nyquist bound")
    return HmmFit(
        gamma_pm=-math.log(1.0 - p_pm) / dt_s,
        gamma_mp=-math.log(1.0 - p_mp) / dt_s,
        err_p=float(b[0, 1]),
        err_m=float(b[1, 0]),
        loglik=float(prev_ll),
        n_iter=n_iter,
        converged=converged,
        trans=a,
        emit=b,
        start=pi,
    )


def viterbi_path(fit: HmmFit, symbols) -> np.ndarray:
    """Most likely hidden parity sequence (+-1) for one symbol sequence."""
    (obs,) = _as_sequences(symbols)
    path = _viterbi(obs, fit.trans, fit.emit, fit.start)
    return np.where(path == 0, 1, -1)
