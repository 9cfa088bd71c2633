"""Bit-stable trace and summary serialization.

Traces are line-delimited JSON records (one object per retained step:
``n``, ``x``, optional ``theta``, ``proposals``) or CSV with header
``n,x0,...,x{d-1},theta,proposals``.  Floats are serialized with their
shortest round-trip decimal representation, so write/read cycles are exact
and two identical runs produce byte-identical files.

Summaries are single JSON documents with sorted keys.  The only field that
may differ between two runs of the same configuration is listed in
``VOLATILE_FIELDS``; determinism comparisons must ignore exactly those.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .engine import RunResult

SCHEMA_VERSION = 1

#: summary fields excluded from determinism comparisons
VOLATILE_FIELDS = ("wall_clock_s",)


@dataclass(frozen=True)
class TraceRecord:
    n: int
    x: tuple
    theta: Optional[float]  # interior angle at x (d = 2 only)
    proposals: int          # proposals used to arrive at x (0 for n = 0)


def iter_trace_records(run) -> Iterator[TraceRecord]:
    d2 = run.trace_theta is not None
    for i in range(run.trace_n.shape[0]):
        theta = None
        if d2:
            t = float(run.trace_theta[i])
            theta = None if math.isnan(t) else t
        yield TraceRecord(n=int(run.trace_n[i]),
                          x=tuple(float(v) for v in run.trace_x[i]),
                          theta=theta,
                          proposals=int(run.trace_prop[i]))


def _cleanup_and_raise(path: Path, exc: Exception):
    try:
        path.unlink()
    except OSError:
        pass
    raise RuntimeError(f"failed writing {path}: {exc}") from exc


def write_trace(run, path, fmt: str = "jsonl") -> Path:
    """Serialize a run's retained records; removes the partial file on failure."""
    path = Path(path)
    if fmt not in ("jsonl", "csv"):
        raise ValueError(f"unknown trace format {fmt!r}")
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            if fmt == "jsonl":
                for rec in iter_trace_records(run):
                    obj = {"n": rec.n, "x": list(rec.x), "theta": rec.theta,
                           "proposals": rec.proposals}
                    fh.write(json.dumps(obj, allow_nan=False) + "\n")
            else:
                d = run.trace_x.shape[1]
                w = csv.writer(fh)
                w.writerow(["n"] + [f"x{i}" for i in range(d)]
                           + ["theta", "proposals"])
                for rec in iter_trace_records(run):
                    theta = "" if rec.theta is None else repr(rec.theta)
                    w.writerow([rec.n] + [repr(v) for v in rec.x]
                               + [theta, rec.proposals])
    except Exception as exc:  # noqa: BLE001 - cleanup path
        _cleanup_and_raise(path, exc)
    return path


def read_trace(path) -> list:
    """Read a trace file back into records (format sniffed from content)."""
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first:
            return records
        if first.lstrip().startswith("{"):
            for line in [first] + fh.readlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                records.append(TraceRecord(
                    n=int(obj["n"]), x=tuple(float(v) for v in obj["x"]),
                    theta=None if obj.get("theta") is None else float(obj["theta"]),
                    proposals=int(obj["proposals"])))
        else:
            header = next(csv.reader([first]))
            d = len(header) - 3
            for row in csv.reader(fh):
                if not row:
                    continue
                records.append(TraceRecord(
                    n=int(row[0]), x=tuple(float(v) for v in row[1:1 + d]),
                    theta=None if row[1 + d] == "" else float(row[1 + d]),
                    proposals=int(row[2 + d])))
    return records


@dataclass
class SummaryDocument:
    command: str
    config: dict
    results: dict
    wall_clock_s: float
    schema_version: int = SCHEMA_VERSION

    def as_dict(self) -> dict:
        return {"schema_version": self.schema_version, "command": self.command,
                "config": self.config, "results": self.results,
                "wall_clock_s": self.wall_clock_s}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_summary(doc: SummaryDocument, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            json.dump(_jsonable(doc.as_dict()), fh, sort_keys=True, indent=2)
            fh.write("\n")
    except Exception as exc:  # noqa: BLE001 - cleanup path
        _cleanup_and_raise(path, exc)
    return path


def read_summary(path) -> dict:
    with Path(path).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def strip_volatile(summary: dict) -> dict:
    """Drop the documented volatile fields before determinism comparisons."""
    return {k: v for k, v in summary.items() if k not in VOLATILE_FIELDS}
