"""Run-directory files: diagnostics.csv, raw float64 snapshots, JSON reports."""

import csv
import json
from pathlib import Path

import numpy as np

COLUMNS = (
    "t",
    "mean_phi",
    "mean_theta",
    "norm_phi",
    "vprime_phi",
    "norm_theta",
    "energy",
    "energy_residual",
    "lyapunov",
    "max_abs_phi",
)


def _fmt(x) -> str:
    # 17 significant digits round-trip every float64
    return format(float(x), ".17g")


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in COLUMNS])


def read_csv(path) -> dict:
    """Columns of a diagnostics file as float arrays keyed by name."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected diagnostics header {header}")
        data = np.array([[float(x) for x in row] for row in r]).reshape(-1, len(COLUMNS))
    return {c: data[:, i] for i, c in enumerate(COLUMNS)}


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def snapshot_paths(directory, name, step):
    base = Path(directory) / f"{name}_{step}"
    return base.with_suffix(".f64"), Path(str(base) + ".meta.json")


def write_field(directory, name, step, field, domain, t, extra=None):
    data_path, meta_path = snapshot_paths(directory, name, step)
    np.ascontiguousarray(field, dtype="<f8").tofile(data_path)
    meta = {
        "field": name,
        "step": int(step),
        "t": float(t),
        "dim": domain.dim,
        "n": list(domain.n),
        "lengths": list(domain.lengths),
        "dtype": "<f8",
        "order": "C",
    }
    if extra:
        meta.update(extra)
    write_json(meta_path, meta)
    return data_path


def read_field(path):
    """Load ``<name>_<step>.f64`` and its sidecar; returns ``(array, meta)``."""
    path = Path(path)
    meta = read_json(Path(str(path.with_suffix("")) + ".meta.json"))
    arr = np.fromfile(path, dtype=meta["dtype"]).reshape(meta["n"])
    return arr.astype(float), meta
