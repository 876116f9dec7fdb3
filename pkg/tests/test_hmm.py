import itertools
import math

import numpy as np
import pytest

from qpscope.errors import ConfigError, NumericsError
from qpscope.inference import fit_parity_hmm, viterbi_path
from qpscope.inference.hmm import _fb_counts
from qpscope.trace_sim import simulate_parity_path


def _brute_force_loglik(obs, a, b, pi):
    """Sum over all hidden paths; the independent oracle for forward-backward."""
    total = 0.0
    for path in itertools.product((0, 1), repeat=len(obs)):
        p = pi[path[0]] * b[path[0], obs[0]]
        for t in range(1, len(obs)):
            p *= a[path[t - 1], path[t]] * b[path[t], obs[t]]
        total += p
    return math.log(total)


def test_forward_backward_against_enumeration():
    rng = np.random.default_rng(0)
    a = np.array([[0.9, 0.1], [0.2, 0.8]])
    b = np.array([[0.95, 0.05], [0.03, 0.97]])
    pi = np.array([0.6, 0.4])
    for _ in range(5):
        obs = rng.integers(0, 2, size=9).astype(np.int8)
        ll, xi, emit, g0, gs, gnl = _fb_counts(obs, a, b, pi)
        assert ll == pytest.approx(_brute_force_loglik(obs, a, b, pi), abs=1e-10)
        # expected-count identities
        assert gs.sum() == pytest.approx(len(obs), abs=1e-9)
        assert gnl.sum() == pytest.approx(len(obs) - 1, abs=1e-9)
        assert emit.sum() == pytest.approx(len(obs), abs=1e-9)
        assert g0.sum() == pytest.approx(1.0, abs=1e-12)
        assert xi.sum() == pytest.approx(len(obs) - 1, abs=1e-9)


def test_posterior_marginals_against_enumeration():
    a = np.array([[0.8, 0.2], [0.3, 0.7]])
    b = np.array([[0.9, 0.1], [0.2, 0.8]])
    pi = np.array([0.5, 0.5])
    obs = np.array([0, 1, 1, 0, 1], dtype=np.int8)
    # P(z_0 = s | obs) by enumeration
    probs = np.zeros(2)
    for path in itertools.product((0, 1), repeat=len(obs)):
        p = pi[path[0]] * b[path[0], obs[0]]
        for t in range(1, len(obs)):
            p *= a[path[t - 1], path[t]] * b[path[t], obs[t]]
        probs[path[0]] += p
    probs /= probs.sum()
    _, _, _, g0, _, _ = _fb_counts(obs, a, b, pi)
    np.testing.assert_allclose(g0, probs, atol=1e-12)


def _symbols_from_path(path, dt, duration, err, rng):
    times = np.arange(dt, duration + dt / 2, dt)
    sym = path.at(times)
    flip = rng.random(sym.size) < err
    return np.where(flip, -sym, sym)


def test_rate_recovery_within_three_sigma():
    gamma, dt, duration, n = 0.14, 0.002, 30.0, 100
    rng = np.random.default_rng(1)
    seqs = []
    switches = 0
    for j in range(n):
        path = simulate_parity_path(gamma, gamma, duration, seed=[17, j])
        switches += path.switch_times.size
        err = 0.05 if j % 2 == 0 else 0.01
        seqs.append(_symbols_from_path(path, dt, duration, err, rng))
    fit = fit_parity_hmm(seqs, dt)
    sigma = gamma / math.sqrt(switches)
    assert abs(fit.gamma_avg - gamma) < 3 * sigma
    # the two directions were simulated equal; each has half the switches
    sigma_dir = gamma / math.sqrt(switches / 2)
    assert abs(fit.gamma_pm - fit.gamma_mp) < 3 * math.sqrt(2) * sigma_dir
    assert 0.0 <= fit.err_p < 0.5 and 0.0 <= fit.err_m < 0.5
    assert fit.converged


def test_error_rates_recovered():
    gamma, dt, duration = 0.5, 0.002, 30.0
    rng = np.random.default_rng(2)
    seqs = []
    switches = 0
    for j in range(60):
        path = simulate_parity_path(gamma, gamma, duration, seed=[23, j])
        switches += path.switch_times.size
        times = np.arange(dt, duration + dt / 2, dt)
        sym = path.at(times)
        flip_p = (sym == 1) & (rng.random(sym.size) < 0.05)
        flip_m = (sym == -1) & (rng.random(sym.size) < 0.01)
        seqs.append(np.where(flip_p | flip_m, -sym, sym))
    fit = fit_parity_hmm(seqs, dt)
    assert fit.err_p == pytest.approx(0.05, abs=0.01)
    assert fit.err_m == pytest.approx(0.01, abs=0.005)
    assert abs(fit.gamma_avg - gamma) < 3 * gamma / math.sqrt(switches)


def test_symbol_noise_absorbed_by_error_parameters():
    gamma, dt, duration = 0.14, 0.002, 30.0
    rng = np.random.default_rng(3)
    clean, noisy, switches = [], [], 0
    for j in range(80):
        path = simulate_parity_path(gamma, gamma, duration, seed=[29, j])
        switches += path.switch_times.size
        times = np.arange(dt, duration + dt / 2, dt)
        sym = path.at(times)
        clean.append(sym)
        flip = rng.random(sym.size) < 0.05
        noisy.append(np.where(flip, -sym, sym))
    sigma = gamma / math.sqrt(switches)
    fit_clean = fit_parity_hmm(clean, dt)
    fit_noisy = fit_parity_hmm(noisy, dt)
    assert abs(fit_noisy.gamma_avg - gamma) < 3 * sigma
    assert abs(fit_noisy.gamma_avg - fit_clean.gamma_avg) < 3 * sigma


def test_deterministic_block_alternation_gives_zero_error():
    block = 10
    sym = np.tile(np.concatenate([np.ones(block), -np.ones(block)]), 50).astype(int)
    fit = fit_parity_hmm(sym, 1.0)
    assert fit.err_p < 1e-6 and fit.err_m < 1e-6
    # per-step switching probability 1/block, converted through the
    # exponential link
    expected = -math.log(1.0 - 1.0 / block)
    assert fit.gamma_pm == pytest.approx(expected, rel=0.05)


def test_estimator_unbiased_across_seeds():
    gamma, dt, duration = 0.5, 0.002, 30.0
    estimates = []
    total_switches = 0
    for seed in range(50):
        seqs = []
        for j in range(8):
            path = simulate_parity_path(gamma, gamma, duration, seed=[41, seed, j])
            total_switches += path.switch_times.size
            times = np.arange(dt, duration + dt / 2, dt)
            seqs.append(path.at(times))
        estimates.append(fit_parity_hmm(seqs, dt).gamma_avg)
    mean_est = np.mean(estimates)
    sigma_mean = gamma / math.sqrt(total_switches)
    assert abs(mean_est - gamma) < sigma_mean


def test_viterbi_recovers_clean_path():
    gamma, dt, duration = 0.3, 0.002, 30.0
    rng = np.random.default_rng(4)
    path = simulate_parity_path(gamma, gamma, duration, seed=[43, 0])
    times = np.arange(dt, duration + dt / 2, dt)
    truth = path.at(times)
    flip = rng.random(truth.size) < 0.04
    sym = np.where(flip, -truth, truth)
    seqs = [sym]
    for j in range(1, 30):
        p = simulate_parity_path(gamma, gamma, duration, seed=[43, j])
        s = p.at(times)
        f = rng.random(s.size) < 0.04
        seqs.append(np.where(f, -s, s))
    fit = fit_parity_hmm(seqs, dt)
    decoded = viterbi_path(fit, sym)
    assert np.mean(decoded != truth) < 0.01


def test_nyquist_bound_raises():
    sym = np.tile([1, -1], 300).astype(int)  # flips every sample
    with pytest.raises(NumericsError, match="Nyquist"):
        fit_parity_hmm(sym, 1.0)


def test_input_validation():
    with pytest.raises(ConfigError):
        fit_parity_hmm(np.ones(50, dtype=int), 0.002)  # too short
    with pytest.raises(ConfigError):
        fit_parity_hmm(np.array([0, 1] * 100), 0.002)  # not +-1 symbols
    with pytest.raises(ConfigError):
        fit_parity_hmm(np.ones(200, dtype=int), 0.0)
