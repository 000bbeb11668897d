"""Train files and result documents.

A train file holds one train per line, spike times in ms separated by
whitespace. Lines starting with ``#`` and blank lines are skipped. Results are
written as CSV or JSON with 12 significant digits.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Bounds, SpikeTrainError, validate_train

SIG_DIGITS = 12


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ValueError):
    def __init__(self, line: int, reason: str, kind: str = "invalid"):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason
        self.kind = kind


def parse_trains(text: str, bounds: Bounds | None = None,
                 merge_duplicates: bool = False) -> list[np.ndarray]:
    """Parse a train document.

    Examples
    --------
    >>> parse_trains("# comment\\n\\n10 20\\n")
    [array([10., 20.])]
    """
    trains = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values = [float(tok) for tok in line.split()]
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        try:
            t = validate_train(values, bounds, merge_duplicates=merge_duplicates)
        except SpikeTrainError as exc:
            raise ValidationError(lineno, str(exc), type(exc).__name__) from None
        trains.append(np.array(t))
    return trains


def read_trains(path, bounds: Bounds | None = None, merge_duplicates: bool = False):
    return parse_trains(Path(path).read_text(), bounds, merge_duplicates)


def fmt(x) -> str:
    """Number with 12 significant digits; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return f"{x:.{SIG_DIGITS}g}"


def format_trains(trains: Iterable[Sequence[float]]) -> str:
    return "".join(" ".join(fmt(v) for v in t) + "\n" for t in trains)


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else None
    return obj


def to_json(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def load_config(path) -> dict:
    """Read a JSON config file into a dict."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return data
