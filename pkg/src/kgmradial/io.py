"""Deterministic JSON and CSV writers.

JSON floats use 17 significant digits so a value round-trips exactly and two
runs producing the same numbers produce the same bytes.  Non-finite floats
become ``null``.  CSV cells use the shortest round-trip ``repr``.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["dumps_json", "write_json", "write_csv", "format_float"]


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = "%.17g" % x
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for j, (k, v) in enumerate(items):
            out.append(pad + json.dumps(str(k)) + ": ")
            _emit(v, indent, level + 1, out)
            out.append(",\n" if j < len(items) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            out.append("[")
            for j, v in enumerate(seq):
                _emit(v, indent, level + 1, out)
                if j < len(seq) - 1:
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for j, v in enumerate(seq):
            out.append(pad)
            _emit(v, indent, level + 1, out)
            out.append(",\n" if j < len(seq) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    out = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps_json(obj))


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_cell(v) for v in row])
