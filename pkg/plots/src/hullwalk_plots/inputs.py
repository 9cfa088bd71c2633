"""Readers for the walk's trace and summary file formats.

Traces are line-delimited JSON records ``{n, x, theta, proposals}`` or CSV
with header ``n,x0,...,x{d-1},theta,proposals``; summaries are single JSON
documents.  This package talks to the simulator only through these files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path


class SchemaError(ValueError):
    """Input file does not match the expected schema; names the field."""


@dataclass
class Trace:
    n: list          # retained step indices
    x: list          # list of [x0, ..., x{d-1}]
    theta: list      # interior angle per record, None where absent
    proposals: list

    @property
    def dim(self) -> int:
        return len(self.x[0]) if self.x else 0


def _record_from_obj(obj, lineno):
    for field in ("n", "x", "proposals"):
        if field not in obj:
            raise SchemaError(f"trace record on line {lineno} lacks field '{field}'")
    if not isinstance(obj["x"], list) or not obj["x"]:
        raise SchemaError(f"trace record on line {lineno}: field 'x' must be a "
                          "non-empty coordinate list")
    theta = obj.get("theta")
    return (int(obj["n"]), [float(v) for v in obj["x"]],
            None if theta is None else float(theta), int(obj["proposals"]))


def read_trace(path) -> Trace:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SchemaError(f"trace file {path} is empty")
    rows = []
    if lines[0].lstrip().startswith("{"):
        for i, ln in enumerate(lines, start=1):
            try:
                obj = json.loads(ln)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"trace line {i} is not valid JSON: {exc}") from exc
            rows.append(_record_from_obj(obj, i))
    else:
        header = next(csv.reader([lines[0]]))
        expected_tail = ["theta", "proposals"]
        if header[:1] != ["n"] or header[-2:] != expected_tail:
            raise SchemaError(
                f"trace header must be n,x0,...,theta,proposals; got {header}")
        d = len(header) - 3
        if d < 1 or header[1:1 + d] != [f"x{i}" for i in range(d)]:
            raise SchemaError(f"trace header coordinate columns malformed: {header}")
        for i, row in enumerate(csv.reader(lines[1:]), start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"trace line {i} has {len(row)} columns, "
                                  f"expected {len(header)}")
            theta = None if row[1 + d] == "" else float(row[1 + d])
            rows.append((int(row[0]), [float(v) for v in row[1:1 + d]],
                         theta, int(row[2 + d])))
    dims = {len(r[1]) for r in rows}
    if len(dims) != 1:
        raise SchemaError(f"trace mixes coordinate dimensions {sorted(dims)}")
    rows.sort(key=lambda r: r[0])
    return Trace(n=[r[0] for r in rows], x=[r[1] for r in rows],
                 theta=[r[2] for r in rows], proposals=[r[3] for r in rows])


def read_summary(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"summary {path} is not valid JSON: {exc}") from exc
    for field in ("schema_version", "command", "results"):
        if field not in doc:
            raise SchemaError(f"summary {path} lacks field '{field}'")
    return doc
