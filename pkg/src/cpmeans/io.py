"""Serialization of matrices and run configuration files."""
import csv
import io
import json
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["ConfigError", "load_config", "matrix_from_csv", "matrix_from_json", "matrix_to_csv", "matrix_to_json", "read_matrix"]


class ConfigError(ValueError):
    """Malformed or unknown configuration."""


def _num(z):
    z = complex(z)
    return float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)]


def matrix_to_json(M):
    """``{"n": n, "data": rows}``; complex entries become ``[re, im]`` pairs."""
    M = np.atleast_2d(np.asarray(M))
    return json.dumps({"n": M.shape[0], "data": [[_num(z) for z in row] for row in M]})


def matrix_from_json(text):
    obj = json.loads(text)
    rows = obj["data"]
    M = np.array([[complex(*z) if isinstance(z, list) else z for z in row] for row in rows])
    if M.shape != (obj["n"], obj["n"]):
        raise ConfigError(f"matrix data does not match declared dimension {obj['n']}")
    return M.real.copy() if not np.iscomplexobj(M) or not np.any(M.imag) else M


def matrix_to_csv(M):
    M = np.asarray(M)
    if np.iscomplexobj(M) and np.any(M.imag):
        raise ConfigError("CSV output supports real matrices only")
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows([[f"{float(np.real(z)):.17g}" for z in row] for row in M])
    return buf.getvalue()


def matrix_from_csv(text):
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    M = np.array([[float(v) for v in r] for r in rows])
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError("CSV matrix must be square")
    return M


def read_matrix(path):
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return matrix_from_json(text)
    return matrix_from_csv(text)


def load_config(path, allowed, required=()):
    """Read a TOML file and validate its top-level keys against ``allowed``."""
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    return cfg
