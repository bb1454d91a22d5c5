"""Deterministic CSV/JSON writers.

Identical inputs must produce byte-identical files: floats are formatted
with 17 significant digits (exact double round trip), rows keep their
generation order, and JSON keys are sorted.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

FLOAT_FORMAT = "%.17g"


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return FLOAT_FORMAT % value
    return str(value)


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row width {len(row)} != header width {len(header)}")
            fh.write(",".join(format_value(v) for v in row) + "\n")
    return path


def _jsonify(obj):
    """Make numpy scalars/arrays and tuples JSON-serializable, recursively."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def json_string(record: dict) -> str:
    return json.dumps(_jsonify(record), indent=2, sort_keys=True) + "\n"


def write_json(path: Path | str, record: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json_string(record), encoding="utf-8")
    return path
