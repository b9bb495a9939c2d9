"""Deterministic JSON report envelope shared by every CLI command."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from importlib import resources

import numpy as np

from . import __version__

SCHEMA_NAME = "report.schema.json"


def jsonable(x):
    """Convert numpy scalars/arrays, complex numbers and dataclasses to plain JSON values.

    Complex numbers become ``[re, im]``; non-finite floats become ``null``.
    """
    if is_dataclass(x) and not isinstance(x, type):
        return jsonable(asdict(x))
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        return f if math.isfinite(f) else None
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(x.real), jsonable(x.imag)]
    if x is None or isinstance(x, str):
        return x
    return str(x)


def envelope(command: str, config: dict, *, metrics=None, result=None, verdict=None,
             residual_maxima=None, tolerances=None, exit_status=0, error=None, figures=None) -> dict:
    return jsonable({
        "tool": "cfinsler",
        "version": __version__,
        "command": command,
        "config": config,
        "metrics": metrics or [],
        "verdict": verdict,
        "residual_maxima": residual_maxima or {},
        "tolerances": tolerances or {},
        "result": result or {},
        "figures": figures or [],
        "exit_status": exit_status,
        "error": error,
    })


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def table_csv(rows: list[dict]) -> str:
    """Flat CSV of per-sample rows (nested values are JSON-encoded)."""
    if not rows:
        return ""
    keys = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        out = []
        for k in keys:
            v = jsonable(r.get(k))
            out.append(json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else ("" if v is None else repr(v)))
        w.writerow(out)
    return buf.getvalue()


def load_schema() -> dict:
    return json.loads(resources.files("cfinsler").joinpath(SCHEMA_NAME).read_text())
