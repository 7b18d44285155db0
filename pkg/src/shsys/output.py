"""Artifact writers: snapshot/monitor CSVs, verdict tables, and the
append-only ndjson run log.

Floats are written with repr (the shortest form that parses back exactly)
so artifact trees diff cleanly and reruns are byte-identical.  No
timestamps or other run-varying data enter any artifact.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .grid import GridField


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_snapshot_csv(path, field: GridField):
    """One row per cell, lexicographic: coordinate columns then u^1..u^m."""
    coords = field.coords().reshape(-1, field.n)
    data = field.data.reshape(-1, field.m)
    header = ([f"x{j + 1}" for j in range(field.n)]
              + [f"u{a + 1}" for a in range(field.m)])
    with open(path, "w", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for i in range(coords.shape[0]):
            row = [fmt(v) for v in coords[i]] + [fmt(v) for v in data[i]]
            handle.write(",".join(row) + "\n")


def write_monitor_csv(path, series, header=("t", "value")):
    """Rows of (t, value) pairs under a two-column header."""
    with open(path, "w", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for t, value in series:
            handle.write(f"{fmt(t)},{fmt(value)}\n")


@dataclass(frozen=True)
class VerdictRow:
    name: str
    passed: bool
    value: float
    tolerance: object  # float or descriptive string


def write_verdicts_csv(path, rows):
    with open(path, "w", newline="") as handle:
        handle.write("name,pass,value,tolerance\n")
        for row in rows:
            handle.write(",".join([row.name, fmt(row.passed), fmt(row.value),
                                   fmt(row.tolerance)]) + "\n")


class RunLog:
    """Append-only ndjson event log; every line is a complete object, so a
    log from an aborted run still parses."""

    def __init__(self, path):
        self.path = path
        with open(self.path, "w"):
            pass

    def event(self, kind: str, **payload):
        record = {"event": kind}
        record.update(payload)
        with open(self.path, "a") as handle:
            handle.write(json.dumps(record, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return str(value)


def write_trace(out_dir, trace):
    """snapshots/NNNN.csv and monitors/<name>.csv under out_dir; returns
    the snapshot index -> time mapping."""
    snap_dir = os.path.join(out_dir, "snapshots")
    os.makedirs(snap_dir, exist_ok=True)
    mapping = []
    for i, (t, snap) in enumerate(zip(trace.times, trace.snapshots)):
        name = f"{i:04d}.csv"
        write_snapshot_csv(os.path.join(snap_dir, name), snap)
        mapping.append((name, t))
    if trace.monitors:
        mon_dir = os.path.join(out_dir, "monitors")
        os.makedirs(mon_dir, exist_ok=True)
        for name, series in trace.monitors.items():
            write_monitor_csv(os.path.join(mon_dir, f"{name}.csv"), series)
    return mapping
