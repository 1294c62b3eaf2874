"""CSV / JSON writers and readers for the command-line outputs.

Floats are written with ``repr`` so every file reads back bit-for-bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import astuple, fields

import numpy as np

from .engine import SweepRow

SWEEP_COLUMNS = [f.name for f in fields(SweepRow)]
HEXGRID_COLUMNS = ["q", "r", "center_x_km", "center_y_km", "label"]
LAYOUT_COLUMNS = ["index", "ux", "uy", "uz"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(columns, rows, comments=()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _read(text: str) -> tuple[list[str], list[dict[str, str]]]:
    comments = [ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")]
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return comments, list(csv.DictReader(body))


def sweep_csv(rows) -> str:
    return _write(SWEEP_COLUMNS, [astuple(r) for r in rows])


def read_sweep_csv(text: str) -> list[SweepRow]:
    _, recs = _read(text)
    out = []
    for rec in recs:
        out.append(
            SweepRow(
                axis=rec["axis"],
                value=float(rec["value"]),
                gamma_rad=float(rec["gamma_rad"]),
                theta_hat=float(rec["theta_hat"]),
                ci95=float(rec["ci95"]),
                trials=int(rec["trials"]),
                p_cov_analytic=float(rec["p_cov_analytic"]),
                seed=int(rec["seed"]),
                critical_marker=float(rec["critical_marker"]),
            )
        )
    return out


def hexgrid_csv(cells, labels) -> str:
    return _write(HEXGRID_COLUMNS, [(c.q, c.r, c.center.x, c.center.y, lab) for c, lab in zip(cells, labels)])


def read_hexgrid_csv(text: str) -> list[tuple[int, int, float, float, str]]:
    _, recs = _read(text)
    return [
        (int(r["q"]), int(r["r"]), float(r["center_x_km"]), float(r["center_y_km"]), r["label"])
        for r in recs
    ]


def layout_csv(centers: np.ndarray, comments=()) -> str:
    return _write(LAYOUT_COLUMNS, [(i, float(x), float(y), float(z)) for i, (x, y, z) in enumerate(centers)], comments)


def read_layout_csv(text: str) -> tuple[np.ndarray, dict[str, str]]:
    comments, recs = _read(text)
    meta = dict(c.split("=", 1) for c in comments if "=" in c)
    pts = np.array([[float(r["ux"]), float(r["uy"]), float(r["uz"])] for r in recs]).reshape(-1, 3)
    return pts, meta


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"
