"""Trace serialization: fixed-column CSV and lossless JSON.

CSV columns are fixed to
``iter,f_value,f_gap,dist_to_opt,grad_norm,step_size,oracle_calls``
with '.' decimal points, 17 significant digits and LF line endings;
unknown optional fields are emitted as empty cells.  JSON keeps every
recorded field (including x vectors and tags) plus the terminal status
and reported point, and round-trips losslessly.

Writes are atomic: the file is written next to the target and renamed.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Optional

import numpy as np

from ..core.oracles import RunStatus, Trace, TraceRow

CSV_HEADER = "iter,f_value,f_gap,dist_to_opt,grad_norm,step_size,oracle_calls"
FORMATS = ("csv", "json")


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else format(float(v), ".17g")


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".trace-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_for_path(path: str) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "json"


def write_trace(trace: Trace, path: str, format: str = "csv"):
    """Serialize a trace; see the module docstring for the formats."""
    if format not in FORMATS:
        raise ValueError(f"unknown trace format {format!r}; choose from {FORMATS}")
    if format == "csv":
        lines = [CSV_HEADER]
        for r in trace.rows:
            lines.append(",".join([
                str(r.iter), _fmt(r.f_value), _fmt(r.f_gap), _fmt(r.dist_to_opt),
                _fmt(r.grad_norm), _fmt(r.step_size), str(r.oracle_calls),
            ]))
        _atomic_write(path, "\n".join(lines) + "\n")
        return

    doc = {
        "status": None if trace.status is None else trace.status.value,
        "x_out": None if trace.x_out is None else [float(v) for v in trace.x_out],
        "f_out": trace.f_out,
        "rows": [_row_to_json(r) for r in trace.rows],
    }
    _atomic_write(path, json.dumps(doc, indent=1) + "\n")


def _row_to_json(r: TraceRow) -> dict:
    d = {
        "iter": r.iter,
        "f_value": r.f_value,
        "f_gap": r.f_gap,
        "dist_to_opt": r.dist_to_opt,
        "grad_norm": r.grad_norm,
        "step_size": r.step_size,
        "oracle_calls": r.oracle_calls,
    }
    if r.x is not None:
        d["x"] = [float(v) for v in r.x]
    if r.tag is not None:
        d["tag"] = r.tag
    return d


def read_trace(path: str, format: Optional[str] = None) -> Trace:
    """Read a trace written by :func:`write_trace`."""
    format = format or format_for_path(path)
    if format == "csv":
        with open(path, "r", newline="") as fh:
            lines = [ln for ln in fh.read().split("\n") if ln]
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError(f"{path}: not a trace CSV (bad header)")
        rows = []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 7:
                raise ValueError(f"{path}: malformed row {ln!r}")
            rows.append(TraceRow(
                iter=int(parts[0]),
                f_value=float(parts[1]),
                f_gap=float(parts[2]) if parts[2] else None,
                dist_to_opt=float(parts[3]) if parts[3] else None,
                grad_norm=float(parts[4]) if parts[4] else None,
                step_size=float(parts[5]) if parts[5] else 0.0,
                oracle_calls=int(parts[6]),
            ))
        return Trace(rows=rows, status=None)

    with open(path, "r") as fh:
        doc = json.load(fh)
    rows = [TraceRow(
        iter=int(rd["iter"]),
        f_value=float(rd["f_value"]),
        f_gap=rd.get("f_gap"),
        dist_to_opt=rd.get("dist_to_opt"),
        grad_norm=rd.get("grad_norm"),
        step_size=float(rd["step_size"]),
        oracle_calls=int(rd["oracle_calls"]),
        x=None if rd.get("x") is None else np.array(rd["x"], dtype=float),
        tag=rd.get("tag"),
    ) for rd in doc["rows"]]
    status = None if doc.get("status") is None else RunStatus(doc["status"])
    x_out = None if doc.get("x_out") is None else np.array(doc["x_out"], dtype=float)
    return Trace(rows=rows, status=status, x_out=x_out, f_out=doc.get("f_out"))
