"""Deterministic JSON/CSV emission and gnuplot script text.

Floats are written with 17 significant digits, so every value read back
is bit-identical to the one written. Keys keep insertion order, and no
timestamps are recorded, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__

BRANCH_COLUMNS = ("a", "lambda", "sup_norm", "mu1", "nedev_integral", "key_ineq_min_slack")
PROFILE_COLUMNS = ("r", "u", "du", "w")
EIGEN_COLUMNS = ("r", "v")


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _to_json(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        # JSON has no NaN or infinity
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_to_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _to_json(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _to_json(obj, indent, 0) + "\n"


def atomic_write(path, text: str) -> Path:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def provenance(module: str, tolerances: dict | None = None, grid: dict | None = None, seed: int | None = None) -> dict:
    return {"module": module, "version": __version__, "tolerances": tolerances or {}, "grid": grid or {},
            "seed": seed}


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if v is None else fmt_float(v) for v in row])
    return buf.getvalue()


def profile_csv(solution) -> str:
    return csv_text(PROFILE_COLUMNS, solution.to_rows())


def branch_rows(branch):
    for pt in branch.points:
        if pt.failure is not None:
            continue
        est = pt.estimates or {}
        yield (pt.a, pt.lam, pt.sup_norm, pt.mu1, est.get("nedev"), est.get("key_ineq_min_slack"))


def branch_csv(branch) -> str:
    return csv_text(BRANCH_COLUMNS, branch_rows(branch))


def read_csv(path) -> list:
    """Rows of a CSV written by this module; empty cells become None."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: (float(v) if v != "" else None) for k, v in row.items()} for row in reader]


def gnuplot_script(kind: str, data_file: str) -> str:
    """Plot script text for a data file; nothing is rendered here."""
    head = ["set datafile separator ','", "set key autotitle columnhead", "set grid"]
    if kind == "branch":
        body = ["set xlabel 'lambda'", "set ylabel 'sup u'",
                f"plot '{data_file}' using 2:3 with linespoints title 'minimal branch'"]
    elif kind == "profile":
        body = ["set xlabel 'r'", "set ylabel 'u'", f"plot '{data_file}' using 1:2 with lines title 'u(r)'"]
    elif kind == "eigenfunction":
        body = ["set xlabel 'r'", "set ylabel 'v'", f"plot '{data_file}' using 1:2 with lines title 'first eigenfunction'"]
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    return "\n".join(head + body) + "\n"
