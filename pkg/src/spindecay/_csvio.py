"""CSV readers/writers for decay curves, gate maps, fits, and trajectories.

All floats are written with repr(), which round-trips float64 exactly, so a
written file can be re-read and byte-identically re-written.  Writes go
through a temp file + rename so a crashed run never leaves a truncated CSV.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .ensemble import DecayCurve
from .estimation import RestartEnsemble
from .gatemap import ErrorGrid

__all__ = [
    "CsvFormatError",
    "write_decay_csv",
    "read_decay_csv",
    "write_gatemap_csv",
    "read_gatemap_csv",
    "write_restarts_csv",
    "write_fit_csv",
    "write_trajectory_csv",
    "write_json",
]

DECAY_HEADER = "total_time_s,signal,stderr,n_realizations,n_pulses,tau_s"
GATEMAP_HEADER = "eps,delta_rad_s,fidelity"


class CsvFormatError(Exception):
    """Malformed CSV; the message carries path and line number."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_decay_csv(path: str, curve: DecayCurve) -> None:
    lines = [DECAY_HEADER]
    for i in range(len(curve.total_time_s)):
        lines.append(",".join([
            _fmt(curve.total_time_s[i]),
            _fmt(curve.signal[i]),
            _fmt(curve.stderr[i]),
            str(int(curve.n_realizations[i])),
            str(int(curve.n_pulses[i])),
            _fmt(curve.tau_s[i]),
        ]))
    _atomic_write(path, "\n".join(lines) + "\n")


def _split_row(path: str, lineno: int, line: str, n_fields: int) -> list:
    fields = line.split(",")
    if len(fields) != n_fields:
        raise CsvFormatError(
            f"{path}:{lineno}: expected {n_fields} fields, got {len(fields)}")
    return fields


def read_decay_csv(path: str, label: str = "") -> DecayCurve:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != DECAY_HEADER:
        raise CsvFormatError(f"{path}:1: expected header '{DECAY_HEADER}'")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = _split_row(path, lineno, line, 6)
        try:
            rows.append((float(fields[0]), float(fields[1]), float(fields[2]),
                         int(fields[3]), int(fields[4]), float(fields[5])))
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    cols = list(zip(*rows))
    return DecayCurve(
        label=label or os.path.splitext(os.path.basename(path))[0],
        total_time_s=np.array(cols[0]),
        signal=np.array(cols[1]),
        stderr=np.array(cols[2]),
        n_realizations=np.array(cols[3], dtype=np.int64),
        n_pulses=np.array(cols[4], dtype=np.int64),
        tau_s=np.array(cols[5]),
    )


def write_gatemap_csv(path: str, grid: ErrorGrid) -> None:
    """Row order: eps outer loop, delta inner loop (both as stored)."""
    lines = [GATEMAP_HEADER]
    for i, eps in enumerate(grid.eps_values):
        for j, delta in enumerate(grid.delta_values):
            lines.append(f"{_fmt(eps)},{_fmt(delta)},{_fmt(grid.fidelities[i, j])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_gatemap_csv(path: str) -> ErrorGrid:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != GATEMAP_HEADER:
        raise CsvFormatError(f"{path}:1: expected header '{GATEMAP_HEADER}'")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = _split_row(path, lineno, line, 3)
        try:
            rows.append(tuple(float(f) for f in fields))
        except ValueError as exc:
            raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    eps = np.array(sorted({r[0] for r in rows}))
    delta = np.array(sorted({r[1] for r in rows}))
    if len(rows) != len(eps) * len(delta):
        raise CsvFormatError(f"{path}: rows do not form a complete grid")
    fid = np.empty((len(eps), len(delta)))
    ei = {v: i for i, v in enumerate(eps)}
    dj = {v: j for j, v in enumerate(delta)}
    for e, d, f in rows:
        fid[ei[e], dj[d]] = f
    return ErrorGrid(eps_values=eps, delta_values=delta, fidelities=fid)


def write_restarts_csv(path: str, ensemble: RestartEnsemble) -> None:
    lines = ["restart,tau_c_s,r_squared"]
    for r in range(len(ensemble.estimates)):
        lines.append(f"{r},{_fmt(ensemble.estimates[r])},{_fmt(ensemble.r2_values[r])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_fit_csv(path: str, values: dict, stderr: dict) -> None:
    """name,value,stderr rows; stderr cell left empty for metadata entries."""
    lines = ["name,value,stderr"]
    for name, value in values.items():
        err = stderr.get(name)
        if isinstance(value, bool):
            cell = str(int(value))
        elif isinstance(value, (int, np.integer)):
            cell = str(int(value))
        elif isinstance(value, str):
            cell = value
        else:
            cell = _fmt(value)
        lines.append(f"{name},{cell},{'' if err is None else _fmt(err)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_trajectory_csv(path: str, times, values, value_name: str = "value") -> None:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    lines = [f"time_s,{value_name}"]
    for t, v in zip(times, values):
        lines.append(f"{_fmt(t)},{_fmt(v)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, obj: dict) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
