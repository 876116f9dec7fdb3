"""Deterministic artifact emission: CSV/JSON writers and the run manifest.

Every file is written atomically (temp file, then rename) and with explicit
float formatting, so identical (config, seed) runs produce byte-identical
artifacts.  Manifests carry no timestamps for the same reason.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def trace_csv_rows(trace):
    """Rows of the trace CSV: index,time_s,i_quad,q_quad[,truth_parity,truth_plasmon]."""
    n = trace.samples.shape[0]
    with_truth = trace.truth_parity is not None
    for idx in range(n):
        row = [
            idx,
            (idx + 1) * trace.dt_s,
            trace.samples[idx, 0],
            trace.samples[idx, 1],
        ]
        if with_truth:
            row.extend([int(trace.truth_parity[idx]), int(trace.truth_plasmon[idx])])
        yield row


def trace_csv_header(trace) -> list:
    header = ["index", "time_s", "i_quad", "q_quad"]
    if trace.truth_parity is not None:
        header += ["truth_parity", "truth_plasmon"]
    return header


def read_trace_csv(path: Path):
    """Load one trace CSV back into arrays (times, iq, truth or None)."""
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    cols = {name: k for k, name in enumerate(header)}
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    times = data[:, cols["time_s"]]
    iq = data[:, [cols["i_quad"], cols["q_quad"]]]
    truth = None
    if "truth_parity" in cols:
        truth = data[:, cols["truth_parity"]].astype(int)
    return times, iq, truth


def write_manifest(out_dir: Path, entries: dict) -> None:
    """Manifest with config hash, package versions, seed, and artifact digests."""
    out_dir = Path(out_dir)
    artifacts = {}
    for p in sorted(out_dir.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            artifacts[str(p.relative_to(out_dir))] = sha256_file(p)
    manifest = dict(entries)
    manifest["artifacts"] = artifacts
    write_json(out_dir / "manifest.json", manifest)
