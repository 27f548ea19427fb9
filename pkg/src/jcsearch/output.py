"""CSV and manifest writers.

Numbers are written with ``format(x, '.17g')`` (round-trip precision,
``.`` decimal separator regardless of locale).  ``JCSEARCH_CSV_DIGITS``
overrides the number of significant digits.
"""
from __future__ import annotations

import csv
import json
import os
import platform
from pathlib import Path

import numpy as np

from . import __version__

DIGITS_ENV = "JCSEARCH_CSV_DIGITS"


def digits() -> int:
    raw = os.environ.get(DIGITS_ENV)
    if raw is None:
        return 17
    value = int(raw)
    if not 1 <= value <= 17:
        raise ValueError(f"{DIGITS_ENV} must be in 1..17")
    return value


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), f".{digits()}g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def trace_rows(trace):
    return zip(trace.times, trace.t_over_tau, trace.P_j, trace.P_s, trace.leakage, trace.norm)


TRACE_HEADER = ["t", "t_over_tau", "P_j", "P_s", "leakage", "norm"]


def write_trace(path, trace) -> Path:
    return write_csv(path, TRACE_HEADER, trace_rows(trace))


def write_manifest(outdir, command: str, config: dict, derived: dict, integrator: dict,
                   outputs, duration: float, norm_drift: float | None) -> Path:
    """One manifest per output directory describing every file written there."""
    manifest = {
        "command": command,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": config,
        "derived": derived,
        "integrator": integrator,
        "outputs": sorted(str(Path(p).name) for p in outputs),
        "wall_clock_seconds": round(duration, 3),
        "max_norm_drift": norm_drift,
    }
    path = Path(outdir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
