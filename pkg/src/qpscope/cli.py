"""Batch front-end: config in, deterministic artifacts out.

Subcommands map one-to-one onto the figure-level reproductions: ``spectrum``
(levels and matrix elements), ``rates`` (temperature sweep), ``pump``
(polarization curves), ``kinetics`` (linearity vs trapping rate),
``simulate`` (jump-trace dataset), ``analyze`` (pipeline on a dataset),
``fit`` (joint fit on a rate table), and ``reproduce-all`` (acceptance
suite).  Exit codes: 0 success, 2 config error, 3 numeric failure,
4 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from qpscope import __version__
from qpscope import qp_kinetics as qk
from qpscope.config import RunConfig, parse_config
from qpscope.errors import ConfigError, NumericsError
from qpscope.inference import joint_fit
from qpscope.io import (
    read_trace_csv,
    trace_csv_header,
    trace_csv_rows,
    sha256_file,
    write_csv,
    write_json,
    write_manifest,
)
from qpscope.parity_dynamics import PumpConfig, driven_parity_population, pump_polarization
from qpscope.pipeline import analyze_dataset, rate_table
from qpscope.trace_sim import JumpTrace, PlanPoint, simulate_experiment
from qpscope.transmon_spectrum import (
    charge_dispersion,
    matrix_elements_parity_averaged,
    parity_levels,
    qubit_frequency,
)
from qpscope.tunneling_rates import rate_bundle, state_rate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ACCEPTANCE = 4

DEFAULT_SWEEP_MK = tuple(range(20, 112, 5))


def max_threads() -> int:
    """Parallelism cap from QPSCOPE_THREADS (subcommands are sequential, so
    the cap is honored trivially; the value is still validated)."""
    raw = os.environ.get("QPSCOPE_THREADS")
    if raw is None:
        return 1
    try:
        val = int(raw)
    except ValueError as exc:
        raise ConfigError("QPSCOPE_THREADS must be an integer") from exc
    if val < 1:
        raise ConfigError("QPSCOPE_THREADS must be at least 1")
    return val


def _manifest(cfg: RunConfig, config_path: str, out: Path, command: str) -> None:
    write_manifest(
        out,
        {
            "command": command,
            "config_sha256": sha256_file(config_path),
            "seed": cfg.seed,
            "versions": {"qpscope": __version__, "numpy": np.__version__},
        },
    )


def cmd_spectrum(cfg: RunConfig, out: Path, config_path: str) -> int:
    p = cfg.device
    lp, lm = parity_levels(p, cfg.ng, n_levels=5)
    mes = {}
    for (i, f) in [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3)]:
        me = matrix_elements_parity_averaged(p, cfg.ng, i, f)
        mes[f"{i}->{f}"] = {"cos2": me.cos2, "sin2": me.sin2}
    payload = {
        "ng": cfg.ng,
        "levels_parity_plus_ghz": [float(x) for x in lp],
        "levels_parity_minus_ghz": [float(x) for x in lm],
        "f01_parity_averaged_ghz": qubit_frequency(p, cfg.ng),
        "charge_dispersion_f01_ghz": charge_dispersion(p),
        "matrix_elements": mes,
    }
    write_json(out / "spectrum.json", payload)
    _manifest(cfg, config_path, out, "spectrum")
    return EXIT_OK


def cmd_rates(cfg: RunConfig, out: Path, config_path: str) -> int:
    p = cfg.device
    bundle = rate_bundle(p, cfg.ng, cfg.env.temp_k, cfg.method)
    write_json(
        out / "rates.json",
        {
            "temp_k": cfg.env.temp_k,
            "method": bundle.method,
            "gamma0": bundle.gamma0,
            "gamma1": bundle.gamma1,
            "gamma2": bundle.gamma2,
            "gamma_offset": cfg.env.gamma_offset,
            "partials": {f"{i}->{f} {d}": v for (i, f, d), v in sorted(bundle.partials.items())},
        },
    )
    temps = sorted({pt.temp_k for pt in cfg.plan} | {mk / 1000.0 for mk in DEFAULT_SWEEP_MK})
    rows = []
    for t in temps:
        b = rate_bundle(p, cfg.ng, t, cfg.method)
        rows.append((t, b.gamma0, b.gamma1, b.gamma2, b.method))
    write_csv(out / "rates_sweep.csv", ["temp_k", "gamma0", "gamma1", "gamma2", "method"], rows)
    _manifest(cfg, config_path, out, "rates")
    return EXIT_OK


def cmd_pump(cfg: RunConfig, out: Path, config_path: str) -> int:
    g0 = state_rate(0, cfg.device, cfg.ng, cfg.env.temp_k, cfg.method) + cfg.env.gamma_offset
    g1 = state_rate(1, cfg.device, cfg.ng, cfg.env.temp_k, cfg.method) + cfg.env.gamma_offset
    ratio = g1 / g0
    t1_s = 193e-6
    rows = []
    for p_e in np.linspace(0.0, 0.5, 26):
        closed = pump_polarization(max(ratio, 1.0), p_e)
        pops = {}
        for parity in (+1, -1):
            c = PumpConfig(drive_parity=parity, p_e_conditional=float(p_e),
                           gamma0=g0, gamma1=g1, t1_s=t1_s)
            pops[parity] = driven_parity_population(c)
        # probability of parity -1: complement of the driven sector for +1 drive
        rows.append((p_e, 1.0 - pops[+1], pops[-1], closed))
    write_csv(
        out / "pump.csv",
        ["p_e", "p_minus_drive_plus", "p_minus_drive_minus", "closed_form_driven_sector"],
        rows,
    )
    _manifest(cfg, config_path, out, "pump")
    return EXIT_OK


def cmd_kinetics(cfg: RunConfig, out: Path, config_path: str) -> int:
    rows = []
    for s in (1.0, 3.0, 10.0, 100.0):
        kin = replace(cfg.kinetics, s=s)
        for p1 in np.linspace(0.0, 1.0, 21):
            rate = qk.kinetic_parity_rate(float(p1), kin, cfg.device, cfg.ng,
                                          cfg.env.temp_k, cfg.method) + cfg.env.gamma_offset
            rows.append((s, p1, rate))
    write_csv(out / "kinetics.csv", ["trapping_s", "p1", "gamma"], rows)
    _manifest(cfg, config_path, out, "kinetics")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path, config_path: str) -> int:
    dataset = simulate_experiment(
        cfg.plan, cfg.device, cfg.env, cfg.readout, seed=cfg.seed, ng=cfg.ng, dt_s=cfg.dt_s,
        method=cfg.method,
    )
    plan_rows = []
    for k, (point, traces) in enumerate(dataset):
        for j, trace in enumerate(traces):
            path = out / "traces" / f"point_{k:03d}_trace_{j:03d}.csv"
            write_csv(path, trace_csv_header(trace), trace_csv_rows(trace))
        plan_rows.append(
            {
                "point": k,
                "temp_k": point.temp_k,
                "p1": point.p1,
                "n_traces": point.n_traces,
                "duration_s": point.duration_s,
                "gamma_true": traces[0].meta["gamma_true"],
            }
        )
    write_json(out / "plan.json", {"plan": plan_rows, "dt_s": cfg.dt_s, "seed": cfg.seed})
    _manifest(cfg, config_path, out, "simulate")
    return EXIT_OK


def _load_dataset(cfg: RunConfig, data_dir: Path):
    plan_file = data_dir / "plan.json"
    if not plan_file.is_file():
        raise ConfigError(f"no plan.json in {data_dir}")
    meta = json.loads(plan_file.read_text())
    dataset = []
    for entry in meta["plan"]:
        point = PlanPoint(
            temp_k=entry["temp_k"], p1=entry["p1"],
            n_traces=entry["n_traces"], duration_s=entry["duration_s"],
        )
        traces = []
        for j in range(point.n_traces):
            path = data_dir / "traces" / f"point_{entry['point']:03d}_trace_{j:03d}.csv"
            _, iq, truth = read_trace_csv(path)
            traces.append(JumpTrace(dt_s=meta["dt_s"], samples=iq,
                                    truth_parity=truth, meta={"temp_k": point.temp_k}))
        dataset.append((point, traces))
    return dataset


def cmd_analyze(cfg: RunConfig, out: Path, config_path: str, data_dir: str) -> int:
    dataset = _load_dataset(cfg, Path(data_dir))
    estimates = analyze_dataset(dataset, cfg.readout, seed=cfg.seed)
    write_csv(
        out / "point_estimates.csv",
        ["temp_k", "p1_true", "p1_est", "gamma_est", "gamma_sigma"],
        [(e.temp_k, e.p1_true, e.p1_est, e.gamma_est, e.gamma_sigma) for e in estimates],
    )
    temps = {e.temp_k for e in estimates}
    enough = all(sum(1 for e in estimates if e.temp_k == t) >= 3 for t in temps)
    if enough:
        rows = rate_table(estimates)
        write_csv(out / "rate_table.csv", ["temp_k", "gamma", "sigma", "state"], rows)
        if len(temps) >= 3:
            fit = joint_fit(rows, cfg.device, ng=cfg.ng, method=cfg.method)
            write_json(out / "fit.json", _fit_payload(fit))
    _manifest(cfg, config_path, out, "analyze")
    return EXIT_OK


def _fit_payload(fit) -> dict:
    return {
        "values": {k: {"value": v, "sigma": s} for k, (v, s) in fit.values.items()},
        "residual_norm": fit.residual_norm,
        "converged": fit.converged,
        "n_points": fit.n_points,
    }


def cmd_fit(cfg: RunConfig, out: Path, config_path: str, table_path: str) -> int:
    lines = Path(table_path).read_text().strip().split("\n")
    header = lines[0].split(",")
    expected = ["temp_k", "gamma", "sigma", "state"]
    if header != expected:
        raise ConfigError(f"rate table header must be {','.join(expected)}")
    rows = []
    for line in lines[1:]:
        t, g, s, st = line.split(",")
        rows.append((float(t), float(g), float(s), int(st)))
    fit = joint_fit(rows, cfg.device, ng=cfg.ng, method=cfg.method)
    write_json(out / "fit.json", _fit_payload(fit))
    _manifest(cfg, config_path, out, "fit")
    return EXIT_OK


def cmd_reproduce_all(cfg: RunConfig, out: Path, config_path: str) -> int:
    from qpscope.acceptance import run_acceptance

    results = run_acceptance(config_path=config_path, workdir=out / "work")
    for res in results:
        print(res.line())
    write_json(
        out / "acceptance.json",
        [
            {"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results
        ],
    )
    _manifest(cfg, config_path, out, "reproduce-all")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpscope", description=__doc__)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the config output_dir")
    parser.add_argument(
        "--method", default=None, choices=["auto", "numeric", "bessel", "approx"],
        help="override the rate evaluation method",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "rates", "pump", "kinetics", "simulate", "reproduce-all"):
        sub.add_parser(name)
    analyze = sub.add_parser("analyze")
    analyze.add_argument("--data", required=True, help="directory written by simulate")
    fit = sub.add_parser("fit")
    fit.add_argument("--table", required=True, help="rate table CSV (temp_k,gamma,sigma,state)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        max_threads()
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, output_dir=args.out)
        if args.method is not None:
            cfg = replace(cfg, method=args.method)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out, args.config)
        if args.command == "rates":
            return cmd_rates(cfg, out, args.config)
        if args.command == "pump":
            return cmd_pump(cfg, out, args.config)
        if args.command == "kinetics":
            return cmd_kinetics(cfg, out, args.config)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.config)
        if args.command == "analyze":
            return cmd_analyze(cfg, out, args.config, args.data)
        if args.command == "fit":
            return cmd_fit(cfg, out, args.config, args.table)
        if args.command == "reproduce-all":
            return cmd_reproduce_all(cfg, out, args.config)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(json.dumps({"error": {"code": EXIT_CONFIG, "message": str(exc)}}), file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(json.dumps({"error": {"code": EXIT_NUMERIC, "message": str(exc)}}), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
