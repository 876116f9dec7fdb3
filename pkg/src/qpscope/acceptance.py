"""Acceptance suite: every exit criterion, each with its pinned tolerance.

``run_acceptance`` evaluates all ten criteria and returns structured
results; the CLI ``reproduce-all`` subcommand and the pytest acceptance
module both drive it.  Criteria are numbered as in the project contract.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from qpscope import qp_kinetics as qk
from qpscope.config import RunConfig, bundled_config_path, parse_config
from qpscope.device_model import DeviceParams, EnvConditions
from qpscope.inference import arrhenius_fit, fit_gmm, fit_parity_hmm, assign_parity
from qpscope.parity_dynamics import PumpConfig, driven_parity_population, pump_polarization
from qpscope.photon_rates import calibrate_g0, photon_rate_ratio, photon_ratio, photon_state_rate
from qpscope.pipeline import closure_fit
from qpscope.trace_sim import PlanPoint, emit_readout, simulate_parity_path, simulate_experiment
from qpscope.transmon_spectrum import charge_dispersion, qubit_frequency
from qpscope.tunneling_rates import (
    DIRECTIONS,
    no_gap_ratio,
    state_rate,
    structure_factor,
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    checks: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} -- {self.detail}"


def _result(number, name, checks, detail, extras=None) -> CriterionResult:
    return CriterionResult(
        number=number,
        name=name,
        passed=all(ok for ok, _ in checks),
        detail=detail + "; " + "; ".join(f"{'ok' if ok else 'FAIL'}: {msg}" for ok, msg in checks),
        checks=checks,
        extras=extras or {},
    )


def criterion_1_rates(cfg: RunConfig) -> CriterionResult:
    """Gamma_1 within 25% of 4.76/s, total Gamma_0 within 5% of 0.14/s,
    ratio in [25, 45]; runtime under 1 s."""
    p, ng = cfg.device, cfg.ng
    start = time.perf_counter()
    g1 = state_rate(1, p, ng, 0.020, cfg.method) + cfg.env.gamma_offset
    g0 = state_rate(0, p, ng, 0.020, cfg.method) + cfg.env.gamma_offset
    elapsed = time.perf_counter() - start
    ratio = g1 / g0
    checks = [
        (abs(g1 - 4.76) / 4.76 < 0.25, f"Gamma_1 = {g1:.3f}/s vs 4.76/s"),
        (abs(g0 - 0.14) / 0.14 < 0.05, f"Gamma_0 = {g0:.4f}/s vs 0.14/s"),
        (25.0 <= ratio <= 45.0, f"ratio = {ratio:.1f} in [25, 45]"),
        (elapsed < 1.0, f"runtime {elapsed:.3f} s < 1 s"),
    ]
    return _result(1, "rate reproduction at 20 mK", checks, f"ratio {ratio:.1f}")


def criterion_2_method_equivalence(cfg: RunConfig) -> CriterionResult:
    """Numeric vs Bessel structure factors within 2% over the stated grid."""
    p = cfg.device
    fq = qubit_frequency(p)
    start = time.perf_counter()
    worst = 0.0
    worst_at = ""
    for temp_mk in (20, 30, 40, 50, 60):
        for f_fi in (-fq, 0.0, fq):
            for direction in DIRECTIONS:
                for sign in (+1, -1):
                    nu = structure_factor(direction, sign, f_fi, p, temp_mk / 1000.0, "numeric")
                    be = structure_factor(direction, sign, f_fi, p, temp_mk / 1000.0, "bessel")
                    rel = abs(nu - be) / nu
                    if rel > worst:
                        worst = rel
                        worst_at = f"{direction} S{'+' if sign > 0 else '-'} f_fi={f_fi:+.2f} T={temp_mk}mK"
    elapsed = time.perf_counter() - start
    checks = [
        (worst < 0.02, f"max |numeric-bessel|/numeric = {worst:.4f} at {worst_at}"),
        (elapsed < 10.0, f"runtime {elapsed:.2f} s < 10 s"),
    ]
    g1n = state_rate(1, p, cfg.ng, 0.020, "numeric")
    g1b = state_rate(1, p, cfg.ng, 0.020, "bessel")
    detail = (
        f"structure-factor grid max dev {worst:.2%}; state-rate level agreement "
        f"|G1(num)-G1(bes)|/G1 = {abs(g1n - g1b) / g1n:.2%}"
    )
    return _result(2, "numeric vs Bessel structure factors", checks, detail)


def criterion_3_activation(cfg: RunConfig) -> CriterionResult:
    """Arrhenius activation-energy difference equals h f_q within 0.5 GHz."""
    p, ng = cfg.device, cfg.ng
    offset = cfg.env.gamma_offset
    temps = np.linspace(0.035, 0.095, 7)
    ser0 = [(t, state_rate(0, p, ng, t, cfg.method) + offset) for t in temps]
    ser1 = [(t, state_rate(1, p, ng, t, cfg.method) + offset) for t in temps]
    fit0 = arrhenius_fit(ser0, offset=offset)
    fit1 = arrhenius_fit(ser1, offset=offset)
    diff = fit0.activation_ghz - fit1.activation_ghz
    fq = qubit_frequency(p)
    checks = [
        (abs(diff - fq) < 0.5, f"E_A(G0)-E_A(G1) = {diff:.3f} GHz vs f_q = {fq:.3f} GHz"),
    ]
    return _result(3, "Arrhenius activation energies", checks, f"dE_A = {diff:.3f} GHz")


def criterion_4_transmon(cfg: RunConfig) -> CriterionResult:
    """Parity-averaged f01 = 3.826 +- 0.020 GHz; dispersion within 2x of 10 MHz."""
    p = cfg.device
    f01 = qubit_frequency(p, cfg.ng)
    disp_mhz = charge_dispersion(p) * 1e3
    checks = [
        (abs(f01 - 3.826) < 0.020, f"f01 = {f01:.4f} GHz vs 3.826 +- 0.020"),
        (5.0 <= disp_mhz <= 20.0, f"dispersion = {disp_mhz:.2f} MHz within 2x of 10 MHz"),
    ]
    return _result(4, "transmon numbers", checks, f"f01 {f01:.4f} GHz, disp {disp_mhz:.1f} MHz")


def criterion_5_no_gap_ratio(cfg: RunConfig) -> CriterionResult:
    """No-gap-model ratio 5.5 +- 1 at 20 mK, exceeded >= 5x by the measured 34."""
    ratio = no_gap_ratio(cfg.device, 0.020)
    checks = [
        (abs(ratio - 5.5) <= 1.0, f"no-gap ratio = {ratio:.2f} vs 5.5 +- 1"),
        (34.0 / ratio >= 5.0, f"measured 34 exceeds it {34.0 / ratio:.1f}x (>= 5x)"),
    ]
    return _result(5, "no-gap-model ratio", checks, f"ratio {ratio:.2f}")


def criterion_6_photon(cfg: RunConfig) -> CriterionResult:
    """Printed photon ratio range contains 2.2; calibrated excited photon
    rate at most 6% of the total excited rate."""
    p, ng = cfg.device, cfg.ng
    f0_grid = np.linspace(7.0, 12.0, 26)
    printed = [photon_ratio(EnvConditions(temp_k=0.02, f0_ghz=f, g0=1.0), p) for f in f0_grid]
    summed = [photon_rate_ratio(EnvConditions(temp_k=0.02, f0_ghz=f, g0=1.0), p, ng) for f in f0_grid]
    env = calibrate_g0(cfg.env.gamma_offset, cfg.env, p, ng)
    g1_ph = photon_state_rate(1, env, p, ng)
    g1_qp = state_rate(1, p, ng, 0.020, cfg.method)
    frac = g1_ph / (g1_qp + g1_ph)
    checks = [
        (min(printed) <= 2.2 <= max(printed),
         f"photon_ratio range [{min(printed):.3f}, {max(printed):.3f}] contains 2.2"),
        (frac <= 0.06, f"G1_ph = {g1_ph:.3f}/s is {frac:.2%} of total G1 (<= 6%)"),
    ]
    detail = (
        f"partial-sum ratio range [{min(summed):.3f}, {max(summed):.3f}] "
        f"(contains 2.2: {min(summed) <= 2.2 <= max(summed)})"
    )
    return _result(6, "photon channel", checks, detail)


def criterion_7_pumping(cfg: RunConfig) -> CriterionResult:
    """Closed form exact at (37, 0) and (37, 0.5); 4-state model within 10%;
    ratio recovered 37 +- 2 from noisy synthetic points."""
    exact0 = pump_polarization(37.0, 0.0)
    exact5 = pump_polarization(37.0, 0.5)
    worst = 0.0
    for p_e in (0.05, 0.15, 0.3, 0.5):
        cfg4 = PumpConfig(drive_parity=+1, p_e_conditional=p_e, gamma0=0.14,
                          gamma1=0.14 * 37.0, t1_s=193e-6)
        num = driven_parity_population(cfg4)
        worst = max(worst, abs(num - pump_polarization(37.0, p_e)) / pump_polarization(37.0, p_e))
    rng = np.random.default_rng(cfg.seed)
    p_es = np.linspace(0.02, 0.5, 13)
    data = np.array([pump_polarization(37.0, pe) for pe in p_es])
    noisy = data * (1.0 + 0.02 * rng.standard_normal(data.size))

    from scipy.optimize import least_squares

    fit = least_squares(
        lambda r: np.array([pump_polarization(r[0], pe) for pe in p_es]) - noisy,
        x0=[10.0],
        bounds=([1.0], [1000.0]),
    )
    ratio_fit = float(fit.x[0])
    checks = [
        (exact0 == 0.5, f"polarization(37, 0) = {exact0}"),
        (abs(exact5 - 0.050) < 1e-12, f"polarization(37, 0.5) = {exact5:.6f}"),
        (worst < 0.10, f"4-state vs closed form max dev {worst:.2%} (< 10%)"),
        (abs(ratio_fit - 37.0) <= 2.0, f"fitted ratio {ratio_fit:.2f} vs 37 +- 2"),
    ]
    return _result(7, "parity pumping", checks, f"fit ratio {ratio_fit:.2f}")


def criterion_8_kinetics(cfg: RunConfig) -> CriterionResult:
    """Linearity within 5% for the device configuration at s = 10/s; deviation
    monotone as the trapping rate falls; steady state matches the ODE oracle."""
    from scipy.integrate import solve_ivp

    p, ng = cfg.device, cfg.ng
    temp = 0.020
    gamma_max = max(
        qk.per_qp_rate(d, p1, p, ng, temp) for d in DIRECTIONS for p1 in (0.0, 1.0)
    )
    kin10 = qk.KineticsParams(g=0.0, s=10.0, r=cfg.kinetics.r)
    dev10 = qk.linearity_deviation(kin10, p, ng, temp, gamma_offset=cfg.env.gamma_offset)

    # curvature ordering probed at the per-QP bound, where it is visible
    from qpscope.qp_distribution import xqp_total

    scale = gamma_max / 1.0
    p_bound = DeviceParams(
        ej_ghz=p.ej_ghz, ec_ghz=p.ec_ghz, delta_ghz=p.delta_ghz, ddelta_ghz=p.ddelta_ghz,
        x_res=p.x_res, vol_ratio=p.vol_ratio, n_cp=p.n_cp * scale,
    )
    devs = [
        qk.linearity_deviation(qk.KineticsParams(g=0.0, s=s), p_bound, ng, temp,
                               gamma_offset=cfg.env.gamma_offset)
        for s in (100.0, 10.0, 3.0, 1.0)
    ]
    gammas = (
        qk.per_qp_rate(qk.L_TO_R, 0.6, p, ng, temp),
        qk.per_qp_rate(qk.R_TO_L, 0.6, p, ng, temp),
    )
    kin = qk.KineticsParams(g=xqp_total(p, temp) * 10.0, s=10.0, r=0.0)
    ana = np.array(qk.steady_densities(kin, gammas))
    sol = solve_ivp(
        lambda t, x: qk.kinetics_rhs(x, kin, gammas, include_recombination=False),
        (0.0, 100.0 / kin.s),
        [0.0, 0.0],
        rtol=1e-12,
        atol=1e-24,
        method="LSODA",
    )
    ode = sol.y[:, -1]
    ode_err = float(np.max(np.abs(ode - ana) / ana))
    checks = [
        (gamma_max <= 1.0, f"per-QP gamma_max = {gamma_max:.4f}/s <= 1.0/s"),
        (dev10 < 0.05, f"s=10/s chord deviation {dev10:.2e} < 5%"),
        (devs[0] < devs[1] < devs[2] < devs[3],
         "deviation monotone over s = 100, 10, 3, 1: " + ", ".join(f"{d:.3f}" for d in devs)),
        (ode_err < 1e-3, f"steady state vs ODE oracle {ode_err:.2e} (< 0.1%)"),
    ]
    return _result(8, "kinetics linearity and steady state", checks, f"dev(s=10) {dev10:.1e}")


def criterion_9_pipeline(cfg: RunConfig) -> CriterionResult:
    """Statistical closure: HMM within 3 sigma at 0.14/s, GMM within 0.02,
    and the full simulate -> analyze -> fit loop recovers the generator."""
    start = time.perf_counter()
    p = cfg.device
    model = cfg.readout
    gamma = 0.14
    n_traces, duration, dt = 100, 30.0, cfg.dt_s
    traces = []
    n_switch_true = 0
    for j in range(n_traces):
        path = simulate_parity_path(gamma, gamma, duration, seed=[cfg.seed, 9, j, 0])
        n_switch_true += path.switch_times.size
        traces.append(emit_readout(path, 0.0, model, dt, duration, seed=[cfg.seed, 9, j, 1]))
    mix = fit_gmm(np.concatenate([t.samples for t in traces])[::80], k=5,
                  seed=[cfg.seed, 9], model=model)
    symbols = [assign_parity(t.samples, mix) for t in traces]
    hmm = fit_parity_hmm(symbols, dt)
    sigma = gamma / math.sqrt(max(n_switch_true, 1))
    hmm_dev = abs(hmm.gamma_avg - gamma) / sigma

    gmm_traces = []
    for j in range(40):
        path = simulate_parity_path(0.5, 0.5, duration, seed=[cfg.seed, 10, j, 0])
        gmm_traces.append(emit_readout(path, 0.3, model, dt, duration, seed=[cfg.seed, 10, j, 1]))
    mix2 = fit_gmm(np.concatenate([t.samples for t in gmm_traces])[::8], k=5,
                   seed=[cfg.seed, 10], model=model)

    plan = [
        PlanPoint(temp_k=t, p1=p1, n_traces=8, duration_s=duration)
        for t in (0.020, 0.035, 0.050, 0.065, 0.080, 0.095)
        for p1 in (0.0, 0.12, 0.25, 0.38, 0.50)
    ]
    dataset = simulate_experiment(plan, p, cfg.env, model, seed=cfg.seed, ng=cfg.ng, dt_s=dt)
    _, _, fit = closure_fit(dataset, model, p, seed=cfg.seed, ng=cfg.ng)
    dd_est = fit.values["ddelta_ghz"][0]
    xres_est = fit.values["x_res"][0]
    off_est = fit.values["gamma_offset"][0]
    elapsed = time.perf_counter() - start
    checks = [
        (hmm_dev < 3.0, f"HMM Gamma = {hmm.gamma_avg:.4f}/s vs 0.14/s at {hmm_dev:.2f} sigma"),
        (abs(mix2.p1_est - 0.3) <= 0.02, f"GMM p1 = {mix2.p1_est:.3f} vs 0.30 +- 0.02"),
        (abs(dd_est - p.ddelta_ghz) / p.ddelta_ghz < 0.05,
         f"closure dDelta = {dd_est:.3f} GHz vs {p.ddelta_ghz} (5%)"),
        (abs(math.log(xres_est) - math.log(p.x_res)) < 0.3,
         f"closure ln x_res within {abs(math.log(xres_est / p.x_res)):.3f} (0.3)"),
        (elapsed < 300.0, f"runtime {elapsed:.0f} s < 300 s"),
    ]
    detail = f"offset recovered {off_est:.3f}/s (true {cfg.env.gamma_offset}/s)"
    extras = {"fit_values": fit.values, "hmm_gamma": hmm.gamma_avg, "gmm_p1": mix2.p1_est}
    return _result(9, "pipeline statistical closure", checks, detail, extras)


def criterion_10_determinism(cfg: RunConfig, workdir) -> CriterionResult:
    """Byte-identical artifacts across two CLI runs with one config/seed."""
    import subprocess
    import sys
    from pathlib import Path

    from qpscope.io import sha256_file

    workdir = Path(workdir)
    digests = []
    for run in ("a", "b"):
        out = workdir / f"determinism_{run}"
        cmd = [
            sys.executable, "-m", "qpscope.cli",
            "--config", str(bundled_config_path()),
            "--out", str(out),
            "simulate",
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            return _result(10, "artifact determinism",
                           [(False, f"CLI failed: {proc.stderr.strip()[:200]}")], "run error")
        files = sorted(x for x in out.rglob("*") if x.is_file())
        digests.append({str(x.relative_to(out)): sha256_file(x) for x in files})
    same = digests[0] == digests[1]
    checks = [(same, f"{len(digests[0])} artifacts byte-identical across runs")]
    return _result(10, "artifact determinism", checks, f"{len(digests[0])} files compared")


def run_acceptance(config_path=None, workdir=None, criteria=None) -> list:
    """Run the acceptance criteria (all by default) and return results."""
    import tempfile

    cfg = parse_config(config_path or bundled_config_path())
    if workdir is None:
        workdir = tempfile.mkdtemp(prefix="qpscope-acceptance-")
    table = {
        1: lambda: criterion_1_rates(cfg),
        2: lambda: criterion_2_method_equivalence(cfg),
        3: lambda: criterion_3_activation(cfg),
        4: lambda: criterion_4_transmon(cfg),
        5: lambda: criterion_5_no_gap_ratio(cfg),
        6: lambda: criterion_6_photon(cfg),
        7: lambda: criterion_7_pumping(cfg),
        8: lambda: criterion_8_kinetics(cfg),
        9: lambda: criterion_9_pipeline(cfg),
        10: lambda: criterion_10_determinism(cfg, workdir),
    }
    selected = criteria or sorted(table)
    return [table[n]() for n in selected]
