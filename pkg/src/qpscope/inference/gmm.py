"""Gaussian-mixture classification of IQ readout samples.

A five-component mixture absorbs the four (plasmon, parity) clusters plus a
pool for higher excited states.  Components are matched to the configured
cluster angles; the excitation estimate adds the weights of the matched
excited components and of everything left unmatched.  Parity assignment
thresholds the readout angle at the bisectors between adjacent cluster
means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from qpscope.errors import ConfigError, NumericsError
from qpscope.trace_sim import ReadoutModel

_TWO_PI = 2.0 * math.pi


class _DegenerateComponent(Exception):
    pass


@dataclass(frozen=True)
class MixtureFit:
    """Fitted mixture with physical state labels and parity sectors."""

    means: np.ndarray  # (k, 2)
    covariances: np.ndarray  # (k, 2, 2)
    weights: np.ndarray  # (k,)
    labels: dict  # state tuple -> component index
    sector_bounds: np.ndarray  # ascending angles in [0, 2pi)
    sector_states: list  # state owning [bound[i], bound[i+1])
    p1_est: float
    loglik: float
    n_iter: int

    def component_angle(self, index: int) -> float:
        x, y = self.means[index]
        return math.atan2(y, x) % _TWO_PI


def _kmeans_pp_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        probs = d2 / d2.sum()
        centers.append(points[rng.choice(n, p=probs)])
        d2 = np.minimum(d2, np.sum((points - centers[-1]) ** 2, axis=1))
    return np.array(centers)


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 50) -> np.ndarray:
    """Plain k-means refinement of the seeded centers."""
    assign = None
    for _ in range(max_iter):
        d2 = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(d2, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(centers.shape[0]):
            sel = assign == j
            if not np.any(sel):
                raise _DegenerateComponent
            centers[j] = points[sel].mean(axis=0)
    return centers


def _em(points: np.ndarray, k: int, rng: np.random.Generator, tol: float, max_iter: int):
    """EM for an isotropic (spherical-covariance) Gaussian mixture.

    The readout emission is isotropic by construction; restricting the
    components keeps them from straddling two clusters.
    """
    n = points.shape[0]
    means = _lloyd(points, _kmeans_pp_centers(points, k, rng))
    var = np.full(k, float(np.var(points)))  # mean per-axis variance
    weights = np.full(k, 1.0 / k)
    reg = 1e-8 * float(np.var(points))
    prev_ll = -np.inf
    log_resp = np.empty((n, k))
    for it in range(1, max_iter + 1):
        for j in range(k):
            d2 = np.sum((points - means[j]) ** 2, axis=1)
            log_resp[:, j] = (
                math.log(weights[j] + 1e-300)
                - 0.5 * d2 / var[j]
                - math.log(2.0 * math.pi * var[j])
            )
        m = log_resp.max(axis=1)
        lse = m + np.log(np.exp(log_resp - m[:, None]).sum(axis=1))
        ll = float(lse.sum())
        resp = np.exp(log_resp - lse[:, None])
        nk = resp.sum(axis=0)
        if np.any(nk < 1e-6):
            raise _DegenerateComponent
        weights = nk / n
        means = (resp.T @ points) / nk[:, None]
        for j in range(k):
            d2 = np.sum((points - means[j]) ** 2, axis=1)
            var[j] = 0.5 * float(resp[:, j] @ d2) / nk[j] + reg
            if var[j] < 10 * reg:
                raise _DegenerateComponent
        if ll - prev_ll < tol * abs(ll) and it > 1:
            if ll < prev_ll - 1e-9 * abs(ll):
                raise NumericsError("EM log-likelihood decreased")
            break
        prev_ll = ll
    covs = var[:, None, None] * np.eye(2)[None, :, :]
    return means, covs, weights, ll, it


def _label_components(means: np.ndarray, model: ReadoutModel):
    """Match the four physical clusters to mixture components by distance.

    A matched component sitting further from its configured center than half
    the minimum inter-center distance means the mixture missed a cluster
    (k-means stuck in a bad local optimum); treat that as a degenerate fit
    so the caller restarts with a fresh seed.
    """
    states = [(0, +1), (1, +1), (0, -1), (1, -1)]
    centers = np.array([model.center(s) for s in states])
    gaps = [
        np.linalg.norm(centers[a] - centers[b])
        for a in range(4)
        for b in range(a + 1, 4)
    ]
    cost = np.linalg.norm(centers[:, None, :] - means[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    if cost[rows, cols].max() > 0.5 * min(gaps):
        raise _DegenerateComponent
    return {states[r]: int(c) for r, c in zip(rows, cols)}


def _sectors(means: np.ndarray, labels: dict):
    """Bisector boundaries between adjacent labeled components on the circle."""
    angles = {s: math.atan2(means[c][1], means[c][0]) % _TWO_PI for s, c in labels.items()}
    order = sorted(angles, key=angles.get)
    bounds = []
    for a, b in zip(order, order[1:] + order[:1]):
        lo, hi = angles[a], angles[b]
        if hi < lo:
            hi += _TWO_PI
        bounds.append(((lo + hi) / 2.0) % _TWO_PI)
    # bounds[i] separates order[i] from order[i+1]; sector starting at
    # bounds[i] belongs to order[i+1]
    owners = order[1:] + order[:1]
    pairs = sorted(zip(bounds, owners))
    return np.array([b for b, _ in pairs]), [s for _, s in pairs]


def fit_gmm(
    points: np.ndarray,
    k: int = 5,
    seed: int = 0,
    model: ReadoutModel | None = None,
    tol: float = 1e-8,
    max_iter: int = 500,
    max_restarts: int = 10,
) -> MixtureFit:
    """EM fit of a k-component Gaussian mixture to IQ samples.

    Initialization is k-means++ with the given seed; a collapsing component
    triggers a restart with a fresh seed (at most ``max_restarts``).  The
    total excitation estimate sums the weights of the two matched excited
    components and of all unmatched (higher-state) components.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ConfigError("points must have shape (n, 2)")
    if points.shape[0] < 10 * k:
        raise ConfigError("need many more points than components")
    if model is None:
        model = ReadoutModel()
    seed_words = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    last_exc: Exception | None = None
    for attempt in range(max_restarts):
        rng = np.random.default_rng(seed_words + [attempt])
        try:
            means, covs, weights, ll, n_iter = _em(points, k, rng, tol, max_iter)
            labels = _label_components(means, model)
        except _DegenerateComponent as exc:
            last_exc = exc
            continue
        bounds, states = _sectors(means, labels)
        excited = sum(weights[c] for (pl, _), c in labels.items() if pl == 1)
        # components beyond the four matched ones accrue to the state owning
        # their angular sector; a split cluster then rejoins its state while
        # a resolved higher-state blob lands with its excited neighbors
        matched = set(labels.values())
        for j in range(len(weights)):
            if j in matched:
                continue
            theta = math.atan2(means[j][1], means[j][0]) % _TWO_PI
            k_sector = int(np.searchsorted(bounds, theta, side="right")) - 1
            owner = states[k_sector] if k_sector >= 0 else states[-1]
            if owner[0] == 1:
                excited += weights[j]
        return MixtureFit(
            means=means,
            covariances=covs,
            weights=weights,
            labels=labels,
            sector_bounds=bounds,
            sector_states=states,
            p1_est=float(excited),
            loglik=ll,
            n_iter=n_iter,
        )
    raise NumericsError("EM failed: component kept collapsing") from last_exc


def assign_parity(points: np.ndarray, fit: MixtureFit) -> np.ndarray:
    """Map IQ samples to +-1 parity symbols through the angle sectors."""
    points = np.asarray(points, dtype=float)
    theta = np.arctan2(points[:, 1], points[:, 0]) % _TWO_PI
    idx = np.searchsorted(fit.sector_bounds, theta, side="right") - 1
    # angles below the first boundary wrap into the last sector
    idx = np.where(idx < 0, len(fit.sector_states) - 1, idx)
    parities = np.array([s[1] for s in fit.sector_states])
    return parities[idx]
