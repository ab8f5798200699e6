"""File formats: problems (CSV or JSON), paths, ledgers and result documents."""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from .core import Event, Kink, LassoProblem, RegularisationPath
from .errors import InputError


def _float(tok: str, row: int, col: int) -> float:
    try:
        val = float(tok)
    except ValueError as exc:
        raise InputError(f"row {row}, column {col}: {tok!r} is not a number") from exc
    if not math.isfinite(val):
        raise InputError(f"row {row}, column {col}: value {tok!r} is not finite")
    return val


def read_csv_problem(path: str | Path) -> LassoProblem:
    """CSV with one observation per row; the last column is y. A header is optional."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(tok.strip() for tok in r)]
    if not rows:
        raise InputError(f"{path}: no data rows")

    def numeric(r):
        try:
            [float(t) for t in r]
            return True
        except ValueError:
            return False

    start = 0 if numeric(rows[0]) else 1
    data = rows[start:]
    if not data:
        raise InputError(f"{path}: header but no data rows")
    width = len(data[0])
    if width < 2:
        raise InputError(f"{path}: need at least one feature column and one y column")
    out = np.empty((len(data), width))
    for k, r in enumerate(data):
        rowno = k + start + 1
        if len(r) != width:
            raise InputError(f"row {rowno}: expected {width} fields, found {len(r)}")
        out[k] = [_float(t.strip(), rowno, c + 1) for c, t in enumerate(r)]
    return LassoProblem(out[:, :-1], out[:, -1])


def read_json_problem(path: str | Path) -> LassoProblem:
    doc = read_json(path)
    if not isinstance(doc, dict) or "X" not in doc or "y" not in doc:
        raise InputError(f"{path}: expected an object with keys 'X' and 'y'")
    try:
        X = np.array(doc["X"], dtype=float)
        y = np.array(doc["y"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: X and y must be numeric arrays") from exc
    return LassoProblem(X, y)


def load_problem(path: str | Path) -> LassoProblem:
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: no such file")
    if path.suffix.lower() == ".json":
        return read_json_problem(path)
    return read_csv_problem(path)


def problem_to_dict(problem: LassoProblem) -> dict:
    return {"X": problem.X.tolist(), "y": problem.y.tolist()}


def read_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def path_to_dict(path: RegularisationPath) -> dict:
    return {
        "mode": path.mode,
        "epsilon": path.epsilon,
        "algo": path.algo,
        "d": path.d,
        "truncated": path.truncated,
        "kinks": [
            {"lambda": k.lam, "beta": {str(int(i)): float(v) for i, v in zip(k.indices, k.values)},
             "event": str(k.event), "active": list(k.active)}
            for k in path.kinks
        ],
    }


def path_from_dict(doc: dict, d: int | None = None) -> RegularisationPath:
    if not isinstance(doc, dict) or not isinstance(doc.get("kinks"), list):
        raise InputError("path document needs a 'kinks' list")
    if not doc["kinks"]:
        raise InputError("path document has no kinks")
    kinks = []
    max_idx = -1
    for t, kd in enumerate(doc["kinks"]):
        try:
            beta = {int(k): float(v) for k, v in kd["beta"].items()}
            lam = float(kd["lambda"])
            event = Event.parse(str(kd.get("event", "Join")))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"kink {t}: malformed entry") from exc
        idx = np.array(sorted(beta), dtype=np.int64)
        max_idx = max(max_idx, int(idx.max(initial=-1)))
        active = tuple(kd.get("active", [i for i in idx if beta[int(i)] != 0]))
        kinks.append(Kink(lam, idx, np.array([beta[int(i)] for i in idx]), event, active))
    dim = d if d is not None else int(doc.get("d", max_idx + 1))
    if dim <= max_idx:
        raise InputError("path references features beyond the problem dimension")
    return RegularisationPath(tuple(kinks), dim, doc.get("mode", "exact"),
                              float(doc.get("epsilon") or 0.0), doc.get("algo", "exact"),
                              bool(doc.get("truncated", False)))


def with_meta(doc: dict, no_meta: bool, **extra) -> dict:
    if no_meta:
        return doc
    from . import __version__
    out = dict(doc)
    out["meta"] = {"created": datetime.now(timezone.utc).isoformat(), "version": __version__, **extra}
    return out


def _plain(obj: Any) -> Any:
    """JSON fallback for numpy scalars and arrays."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serialisable")


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True, default=_plain) + "\n"


def write_json(doc: Any, path: str | Path | None) -> str:
    text = dumps(doc)
    if path is not None:
        Path(path).write_text(text)
    return text
