"""Strict JSON configuration for the batch front-end.

Unknown keys are rejected, missing required fields are named, and every
sub-config is validated on load.  All randomness downstream flows from the
single ``seed``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from qpscope.device_model import DeviceParams, EnvConditions, validate, validate_env
from qpscope.errors import ConfigError
from qpscope.qp_kinetics import KineticsParams, validate_kinetics
from qpscope.trace_sim import PlanPoint, ReadoutModel

_STATE_KEYS = {"0+": (0, +1), "1+": (1, +1), "0-": (0, -1), "1-": (1, -1)}
_PARITY_KEYS = {"+1": +1, "-1": -1}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run configuration."""

    device: DeviceParams
    env: EnvConditions
    readout: ReadoutModel
    kinetics: KineticsParams
    plan: list
    seed: int
    output_dir: str
    ng: float = 0.163
    dt_s: float = 0.002
    method: str = "auto"
    thermal_prefactor: str = "paper"


def _require_mapping(obj, name: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{name} must be a JSON object")
    return obj


def _build(section: str, obj: dict, required: dict, optional: dict):
    """Pick fields from a raw dict, rejecting unknowns and naming gaps."""
    _require_mapping(obj, section)
    known = set(required) | set(optional)
    for key in obj:
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key}")
    out = {}
    for key, conv in required.items():
        if key not in obj:
            raise ConfigError(f"missing field {section}.{key}")
        out[key] = conv(obj[key])
    for key, conv in optional.items():
        if key in obj:
            out[key] = conv(obj[key])
    return out


def _parse_readout(obj: dict) -> ReadoutModel:
    fields = _build(
        "readout",
        obj,
        required={},
        optional={
            "cluster_angles": dict,
            "radius": float,
            "sigma": float,
            "mis_prob": dict,
        },
    )
    if "cluster_angles" in fields:
        raw = fields["cluster_angles"]
        try:
            fields["cluster_angles"] = {_STATE_KEYS[k]: float(v) for k, v in raw.items()}
        except KeyError as exc:
            raise ConfigError(f"unknown key readout.cluster_angles.{exc.args[0]}") from None
    if "mis_prob" in fields:
        raw = fields["mis_prob"]
        try:
            fields["mis_prob"] = {_PARITY_KEYS[k]: float(v) for k, v in raw.items()}
        except KeyError as exc:
            raise ConfigError(f"unknown key readout.mis_prob.{exc.args[0]}") from None
    return ReadoutModel(**fields).validate()


def _parse_plan(obj) -> list:
    if not isinstance(obj, list) or not obj:
        raise ConfigError("plan must be a nonempty list")
    plan = []
    for k, entry in enumerate(obj):
        fields = _build(
            f"plan[{k}]",
            entry,
            required={"temp_k": float, "p1": float},
            optional={"n_traces": int, "duration_s": float},
        )
        point = PlanPoint(**fields)
        if not point.temp_k > 0:
            raise ConfigError(f"plan[{k}].temp_k must be positive")
        if not 0.0 <= point.p1 <= 1.0:
            raise ConfigError(f"plan[{k}].p1 must lie in [0, 1]")
        if point.n_traces < 1:
            raise ConfigError(f"plan[{k}].n_traces must be at least 1")
        if not point.duration_s > 0:
            raise ConfigError(f"plan[{k}].duration_s must be positive")
        plan.append(point)
    return plan


_TOP_KEYS = {
    "device", "env", "readout", "kinetics", "plan", "seed", "output_dir",
    "ng", "dt_s", "method", "thermal_prefactor",
}


def parse_config_dict(raw: dict) -> RunConfig:
    _require_mapping(raw, "config")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown key {key}")
    # sections are validated first and default to {}, so an empty config
    # names the first missing leaf (device.ej_ghz)
    device_fields = _build(
        "device",
        raw.get("device", {}),
        required={
            "ej_ghz": float,
            "ec_ghz": float,
            "delta_ghz": float,
            "ddelta_ghz": float,
            "x_res": float,
        },
        optional={"vol_ratio": float, "n_cp": float},
    )
    device = validate(DeviceParams(**device_fields))
    env_fields = _build(
        "env",
        raw.get("env", {}),
        required={"temp_k": float},
        optional={"gamma_offset": float, "f0_ghz": float, "g0": float},
    )
    env = validate_env(EnvConditions(**env_fields))
    readout = _parse_readout(raw.get("readout", {}))
    kin_fields = _build(
        "kinetics",
        raw.get("kinetics", {}),
        required={},
        optional={"g": float, "s": float, "r": float},
    )
    kinetics = validate_kinetics(KineticsParams(**kin_fields))
    for key, kind in (("plan", list), ("seed", int), ("output_dir", str)):
        if key not in raw:
            raise ConfigError(f"missing field {key}")
        if not isinstance(raw[key], kind) or isinstance(raw[key], bool):
            raise ConfigError(f"{key} has the wrong type")
    plan = _parse_plan(raw["plan"])
    cfg = RunConfig(
        device=device,
        env=env,
        readout=readout,
        kinetics=kinetics,
        plan=plan,
        seed=raw["seed"],
        output_dir=raw["output_dir"],
        ng=float(raw.get("ng", 0.163)),
        dt_s=float(raw.get("dt_s", 0.002)),
        method=raw.get("method", "auto"),
        thermal_prefactor=raw.get("thermal_prefactor", "paper"),
    )
    if not 0.0 <= cfg.ng < 1.0:
        raise ConfigError("ng must lie in [0, 1)")
    if cfg.method not in ("auto", "numeric", "bessel", "approx"):
        raise ConfigError("method must be auto, numeric, bessel, or approx")
    if cfg.thermal_prefactor not in ("paper", "standard"):
        raise ConfigError("thermal_prefactor must be paper or standard")
    if not cfg.dt_s > 0:
        raise ConfigError("dt_s must be positive")
    return cfg


def parse_config(path) -> RunConfig:
    """Load, validate, and freeze a run configuration from a JSON file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_text()
    if not text.strip():
        return parse_config_dict({})
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config_dict(raw)


def bundled_config_path() -> Path:
    """The bundled configuration with the measured device parameters."""
    return Path(__file__).parent / "data" / "paper_device.json"
