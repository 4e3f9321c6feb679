"""File formats, JSON with 17 significant digits, and flat key=value configs."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import re
from fractions import Fraction
from pathlib import Path

import numpy as np

from .boxcomplex import Graph
from .codes import ProjectiveCode
from .masspartition import Mass
from .oddmaps import map_from_dict
from .thickening import FiniteMeasure

_FLOAT_TAG = "\x1ef:"
_FLOAT_RE = re.compile(r'"\\u001ef:([^"]*)"')


class ConfigError(ValueError):
    """Malformed configuration or input file."""


def to_jsonable(obj):
    """Recursively convert numpy values, fractions and dataclasses."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


def _tag_floats(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return _FLOAT_TAG + format(obj, ".17g")
    if isinstance(obj, dict):
        return {k: _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_tag_floats(v) for v in obj]
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    text = json.dumps(_tag_floats(to_jsonable(obj)), indent=indent, sort_keys=True)
    return _FLOAT_RE.sub(lambda m: _fix_float(m.group(1)), text)


def _fix_float(s: str) -> str:
    # JSON needs a digit after the sign and no bare exponent-only forms
    return s if any(c in s for c in ".e") else s + ".0"


def content_hash(payload: dict, exclude=("timestamp", "reproducibility_hash")) -> str:
    body = {k: v for k, v in payload.items() if k not in exclude}
    return hashlib.sha256(dumps(body, indent=None).encode()).hexdigest()


# --- config ---------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path} not found")
    out = {}
    for num, line in enumerate(p.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{num}: empty key")
        out[key.replace("-", "_")] = value
    return out


# --- domain files ---------------------------------------------------------

def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read JSON from {path}: {err}") from None


def code_to_dict(code: ProjectiveCode) -> dict:
    return {"d": code.d, "lines": code.lines, "min_distance": code.min_distance}


def read_code(path) -> tuple[ProjectiveCode, dict]:
    data = _load_json(path)
    try:
        code = ProjectiveCode.from_lines(np.asarray(data["lines"], dtype=float))
    except (KeyError, ValueError, TypeError) as err:
        raise ConfigError(f"bad code file {path}: {err}") from None
    if "d" in data and int(data["d"]) != code.d:
        raise ConfigError(f"code file {path}: 'd' does not match the line length")
    return code, data


def measure_to_dict(mu: FiniteMeasure) -> dict:
    return {"d": mu.d, "atoms": mu.atoms, "weights": mu.weights}


def read_measure(path) -> FiniteMeasure:
    data = _load_json(path)
    try:
        mu = FiniteMeasure(np.asarray(data["atoms"], dtype=float), data.get("weights"))
    except (KeyError, ValueError, TypeError) as err:
        raise ConfigError(f"bad measure file {path}: {err}") from None
    if "d" in data and int(data["d"]) != mu.d:
        raise ConfigError(f"measure file {path}: 'd' does not match the atoms")
    return mu


def read_map(path):
    data = _load_json(path)
    try:
        return map_from_dict(data)
    except (KeyError, ValueError, TypeError) as err:
        raise ConfigError(f"bad map file {path}: {err}") from None


def read_mass(path, disk: bool = False) -> Mass:
    """CSV with a header row; each row holds coordinates then a weight.

    Disk masses list the d+1 disk coordinates and are embedded with a
    trailing zero.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise ConfigError(f"cannot read mass file {path}: {err}") from None
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if not body:
        raise ConfigError(f"mass file {path} has no atoms")
    try:
        A = np.array([[float(c) for c in r] for r in body])
    except ValueError as err:
        raise ConfigError(f"mass file {path}: {err}") from None
    if A.ndim != 2 or A.shape[1] < 2:
        raise ConfigError(f"mass file {path}: need coordinates and a weight per row")
    P, w = A[:, :-1], A[:, -1]
    if disk:
        P = np.hstack([P, np.zeros((P.shape[0], 1))])
    try:
        return Mass(P, w, disk=disk)
    except ValueError as err:
        raise ConfigError(f"mass file {path}: {err}") from None


def write_mass(path, mass: Mass):
    P = mass.points[:, :-1] if mass.disk else mass.points
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([f"x{i}" for i in range(P.shape[1])] + ["weight"])
        for row, w in zip(P, mass.weights):
            wr.writerow([format(v, ".17g") for v in row] + [format(w, ".17g")])


def read_graph(path) -> Graph:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read graph file {path}: {err}") from None
    try:
        return Graph.from_edge_list(text)
    except ValueError as err:
        raise ConfigError(f"bad graph file {path}: {err}") from None


def write_csv(path, rows: list[dict]):
    """Header from the union of keys in first-seen order."""
    keys: list[str] = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=keys)
        wr.writeheader()
        for r in rows:
            wr.writerow({k: _csv_cell(v) for k, v in r.items()})


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return v
