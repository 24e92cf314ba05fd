"""Write a ResultSet as CSV tables or a single JSON document.

Floats are written with 17 significant digits so values round-trip exactly;
complex numbers become ``[re, im]``.  Keys keep insertion order, which is
fixed by the runner, so identical runs give identical bytes apart from the
``created_at`` and ``hostname`` provenance fields.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .runner import ResultSet

FORMATS = ("csv", "json")


class EmitError(OSError):
    def __init__(self, path, cause: OSError):
        super().__init__(f"cannot write {path}: {cause.strerror or cause}")
        self.path = str(path)


def format_number(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    if x == 0.0:
        return "0.0"
    s = f"{x:.17g}"
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _plain(v):
    """Convert numpy scalars and arrays to Python objects, complex to ``[re, im]``."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    return v


def _dump(v, out: list, indent: int):
    pad = "  " * indent
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, x) in enumerate(v.items()):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _dump(x, out, indent + 1)
            out.append(",\n" if i < len(v) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(v, list):
        if all(not isinstance(x, (dict, list)) for x in v):
            out.append("[" + ", ".join(_scalar(x) for x in v) + "]")
            return
        out.append("[\n")
        for i, x in enumerate(v):
            out.append(pad + "  ")
            _dump(x, out, indent + 1)
            out.append(",\n" if i < len(v) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(v))


def _scalar(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, (str, int)):
        return json.dumps(v)
    if isinstance(v, float):
        # JSON has no NaN; the compiled-kernel timing column is NaN when absent
        return format_number(v) if math.isfinite(v) else "null"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(rs: ResultSet) -> str:
    out: list[str] = []
    _dump(_plain(rs.as_dict()), out, 0)
    return "".join(out) + "\n"


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return format_number(v)
    if isinstance(v, list):
        return json.dumps(v)
    if v is None:
        return ""
    return str(v)


def table_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise EmitError(path, exc) from exc


def emit(rs: ResultSet, fmt: str, path) -> list[Path]:
    """Write ``rs`` under directory ``path``; returns the files written.

    ``csv`` writes one ``<table>.csv`` per table plus ``result.json`` holding
    the scenario echo, summary and provenance.  ``json`` writes everything to
    ``result.json``.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise EmitError(out, exc) from exc
    written = []
    if fmt == "csv":
        for name, t in rs.tables.items():
            p = out / f"{name}.csv"
            _write(p, table_csv(t.columns, t.rows))
            written.append(p)
        meta = ResultSet(rs.scenario, {}, rs.summary, rs.provenance)
        d = meta.as_dict()
        d["tables"] = {n: {"file": f"{n}.csv", "columns": list(t.columns)} for n, t in rs.tables.items()}
        parts: list[str] = []
        _dump(_plain(d), parts, 0)
        text = "".join(parts) + "\n"
    else:
        text = to_json(rs)
    p = out / "result.json"
    _write(p, text)
    written.append(p)
    return written
