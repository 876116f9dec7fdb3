"""Forward simulation of dispersive-readout jump traces.

Parity is the only slow variable: the qubit re-equilibrates between readout
pulses (microseconds against the millisecond sampling), so each sample draws
the plasmon state fresh from Bernoulli(p1) while the parity follows a
two-state continuous-time Markov path.  Emissions are Gaussian clusters on
the IQ circle; readout-induced heating enters only as a per-parity
misassignment probability.

Randomness is fully reproducible: every trace owns the stream
default_rng([seed, point_index, trace_index]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qpscope.device_model import DeviceParams, EnvConditions
from qpscope.errors import ConfigError
from qpscope.tunneling_rates import effective_rate

DEFAULT_CLUSTER_ANGLES = {
    (0, +1): 0.0,
    (1, +1): 0.7,
    (1, -1): 2.4,
    (0, -1): 3.1,
}


@dataclass(frozen=True)
class ReadoutModel:
    """IQ emission model: cluster angles on a circle, isotropic noise, and
    per-parity misassignment (heating) probabilities.

    Angle defaults are illustrative configuration, not measured geometry.
    """

    cluster_angles: dict = field(default_factory=lambda: dict(DEFAULT_CLUSTER_ANGLES))
    radius: float = 16.0
    sigma: float = 4.0
    mis_prob: dict = field(default_factory=lambda: {+1: 0.05, -1: 0.01})

    def validate(self) -> "ReadoutModel":
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        if set(self.cluster_angles) != {(0, +1), (1, +1), (0, -1), (1, -1)}:
            raise ConfigError("cluster_angles must cover the four (plasmon, parity) states")
        angles = list(self.cluster_angles.values())
        if len(set(angles)) != len(angles):
            raise ConfigError("cluster angles must be distinct")
        for parity in (+1, -1):
            if not 0.0 <= self.mis_prob.get(parity, 0.0) < 1.0:
                raise ConfigError("mis_prob entries must lie in [0, 1)")
        return self

    @property
    def states(self) -> list:
        return sorted(self.cluster_angles, key=lambda s: self.cluster_angles[s])

    def center(self, state) -> np.ndarray:
        theta = self.cluster_angles[state]
        return self.radius * np.array([math.cos(theta), math.sin(theta)])


@dataclass(frozen=True)
class ParityPath:
    """Piecewise-constant parity: initial value and sorted switch times."""

    initial_parity: int
    switch_times: np.ndarray
    duration_s: float

    def at(self, times: np.ndarray) -> np.ndarray:
        flips = np.searchsorted(self.switch_times, times, side="right")
        return self.initial_parity * np.where(flips % 2 == 0, 1, -1)


@dataclass(frozen=True)
class JumpTrace:
    """Sampled IQ record with the generating truth attached."""

    dt_s: float
    samples: np.ndarray  # shape (n, 2)
    truth_parity: np.ndarray | None = None
    truth_plasmon: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def simulate_parity_path(
    gamma_pm: float, gamma_mp: float, duration_s: float, seed, initial_parity: int | None = None
) -> ParityPath:
    """Two-state CTMC sample path over [0, duration].

    gamma_pm is the +1 -> -1 rate, gamma_mp the reverse.  The initial parity
    is drawn from the stationary distribution unless given.
    """
    if gamma_pm < 0 or gamma_mp < 0:
        raise ConfigError("rates must be nonnegative")
    if not duration_s > 0:
        raise ConfigError("duration must be positive")
    rng = np.random.default_rng(seed)
    if initial_parity is None:
        total = gamma_pm + gamma_mp
        p_plus = 0.5 if total == 0.0 else gamma_mp / total
        initial_parity = +1 if rng.random() < p_plus else -1
    state = initial_parity
    t = 0.0
    switches = []
    while True:
        rate = gamma_pm if state == +1 else gamma_mp
        if rate == 0.0:
            break
        t += rng.exponential(1.0 / rate)
        if t >= duration_s:
            break
        switches.append(t)
        state = -state
    return ParityPath(
        initial_parity=initial_parity,
        switch_times=np.asarray(switches, dtype=float),
        duration_s=duration_s,
    )


def emit_readout(
    path: ParityPath,
    p1: float,
    model: ReadoutModel,
    dt_s: float,
    duration_s: float,
    seed,
) -> JumpTrace:
    """Sample the readout every dt over the parity path.

    Per sample: parity from the path, plasmon ~ Bernoulli(p1); with
    probability mis_prob[parity] the emitted cluster is replaced by a
    uniformly random other cluster; emission = center + N(0, sigma^2) per
    quadrature.
    """
    if not 0.0 <= p1 <= 1.0:
        raise ConfigError("p1 must lie in [0, 1]")
    if not dt_s > 0:
        raise ConfigError("dt_s must be positive")
    model.validate()
    rng = np.random.default_rng(seed)
    times = np.arange(dt_s, duration_s + 0.5 * dt_s, dt_s)
    n = times.size
    if n == 0:
        raise ConfigError("duration shorter than one sampling interval")
    parity = path.at(times)
    plasmon = (rng.random(n) < p1).astype(int)

    states = [(0, +1), (1, +1), (0, -1), (1, -1)]
    state_idx = {s: k for k, s in enumerate(states)}
    emitted = np.array([state_idx[(pl, pa)] for pl, pa in zip(plasmon, parity)])

    mis = np.array([model.mis_prob.get(int(pa), 0.0) for pa in parity])
    flip = rng.random(n) < mis
    # replace by one of the three other clusters, uniformly
    offsets = rng.integers(1, 4, size=n)
    emitted = np.where(flip, (emitted + offsets) % 4, emitted)

    centers = np.array([model.center(s) for s in states])
    samples = centers[emitted] + rng.normal(0.0, model.sigma, size=(n, 2))
    return JumpTrace(
        dt_s=dt_s,
        samples=samples,
        truth_parity=parity,
        truth_plasmon=plasmon,
        meta={"p1": p1, "duration_s": duration_s},
    )


@dataclass(frozen=True)
class PlanPoint:
    """One experimental condition: temperature, target excitation, record count."""

    temp_k: float
    p1: float
    n_traces: int = 10
    duration_s: float = 30.0


def simulate_experiment(
    plan: list,
    params: DeviceParams,
    env: EnvConditions,
    model: ReadoutModel,
    seed: int,
    ng: float = 0.163,
    dt_s: float = 0.002,
    method: str = "auto",
) -> list:
    """Simulate jump traces for every plan point.

    Per point the parity switching rate is the effective rate at (T, p1)
    including gamma_offset; traces are generated with symmetric switching
    rates.  Returns a list of (point, [JumpTrace, ...]) preserving plan
    order; fully deterministic given the seed.
    """
    if not plan:
        raise ConfigError("plan must be nonempty")
    dataset = []
    for k, point in enumerate(plan):
        env_t = EnvConditions(
            temp_k=point.temp_k, gamma_offset=env.gamma_offset, f0_ghz=env.f0_ghz, g0=env.g0
        )
        gamma = effective_rate(point.p1, params, env_t, ng, point.temp_k, method)
        traces = []
        for j in range(point.n_traces):
            path = simulate_parity_path(
                gamma, gamma, point.duration_s, seed=[seed, k, j, 0]
            )
            trace = emit_readout(
                path, point.p1, model, dt_s, point.duration_s, seed=[seed, k, j, 1]
            )
            trace.meta.update(
                {"temp_k": point.temp_k, "gamma_true": gamma, "seed": seed, "point": k, "trace": j}
            )
            traces.append(trace)
        dataset.append((point, traces))
    return dataset
