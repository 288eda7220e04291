"""Run configuration: JSON file -> validated blocks -> library objects.

Every block has defaults, so ``{}`` is a valid config (the shipped default).
See ``docs/config.md`` for the field reference.
"""

import copy
import json
from pathlib import Path

import numpy as np

from ..domain import Domain
from ..dynamics import Params
from ..errors import ConfigError
from ..potential import PotentialSpec

DEFAULTS = {
    "problem": "relaxation",
    "domain": {"dim": 1, "lengths": [1.0], "n": [64]},
    "kernel": {"family": "gaussian", "amplitude": 1.0, "width": 0.5, "target_cJ": 1.0},
    "potential": {
        "family": "double_well",
        "kappa": 2.5,
        "s_max": 2.0,
        "n_samples": 4001,
        "p": 4.0 / 3.0,
        "q": 1.0,
        "c3": 8.0,
        "c4_max": 10.0,
    },
    "params": {
        "alpha": 0.1,
        "epsilon": 0.1,
        "delta": 0.5,
        "delta0": 1.0,
        "m": 1.0,
        "dt": 1e-3,
        "T": 10.0,
        "S": None,
    },
    "initial": {
        "phi": {"kind": "seeded-random", "mean": 0.1, "amplitude": 0.5, "cutoff": 4, "seed": 1},
        "theta": {"kind": "homogeneous", "value": 0.05},
    },
    "output": {"directory": "runs/simulate", "stride": 100},
    "sweep": {
        "T": 0.5,
        "grid": {"start": 1e-1, "stop": 1e-5, "num": 9},
        "pairs": None,
        "include_identity_pair": True,
        "slope_threshold": 0.9,
        "r2_threshold": 0.95,
    },
    "dissipate": {
        "T": 2.0,
        "amplitudes": [0.25, 0.5, 1.0],
        "radius": None,
        "stride": 5,
    },
    "lyapunov": {"xi": 0.1, "tau": 0.05},
}

GENERATORS = ("homogeneous", "cosine-modes", "seeded-random")


def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if key == "initial":
            bad = set(val) - {"phi", "theta"}
            if bad or not isinstance(val, dict):
                raise ConfigError(f"initial block takes only 'phi' and 'theta', got {sorted(bad)}")
            out[key] = {**base[key], **copy.deepcopy(val)}
        elif isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path + key!r} must be an object")
            out[key] = _merge(base[key], val, path + key + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve(raw: dict) -> dict:
    """Fill defaults and validate; returns the resolved config dict."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = _merge(DEFAULTS, raw)
    if cfg["problem"] not in ("relaxation", "limit"):
        raise ConfigError(f"problem must be 'relaxation' or 'limit', got {cfg['problem']!r}")
    d = cfg["domain"]
    dim = int(d["dim"])
    if dim not in (1, 2):
        raise ConfigError("domain.dim must be 1 or 2")
    d["lengths"] = list(np.broadcast_to(np.atleast_1d(d["lengths"]).astype(float), (dim,)).tolist())
    d["n"] = [int(k) for k in np.broadcast_to(np.atleast_1d(d["n"]), (dim,))]
    for name in ("phi", "theta"):
        g = cfg["initial"].get(name)
        if name == "theta" and (g is None or g == "lift"):
            continue
        if not isinstance(g, dict) or g.get("kind") not in GENERATORS:
            raise ConfigError(f"initial.{name} needs a 'kind' among {GENERATORS} (theta may also be 'lift')")
    if int(cfg["output"]["stride"]) < 1:
        raise ConfigError("output.stride must be a positive integer")
    # build everything once so errors surface before any run
    try:
        domain(cfg)
        potential(cfg)
        params(cfg)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from e
    return cfg


def load(path) -> dict:
    """Read and resolve a JSON config; ``None`` gives the defaults."""
    if path is None:
        return resolve({})
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    return resolve(raw)


def dump(cfg: dict, path):
    Path(path).write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")


def domain(cfg) -> Domain:
    d = cfg["domain"]
    return Domain(tuple(d["lengths"]), tuple(d["n"]))


def kernel_shape(cfg) -> dict:
    return dict(cfg["kernel"])


def potential(cfg) -> PotentialSpec:
    return PotentialSpec(**cfg["potential"])


def params(cfg, **changes) -> Params:
    p = dict(cfg["params"])
    if cfg["problem"] == "limit":
        p["alpha"] = p["epsilon"] = 0.0
    p.update(changes)
    return Params(**p)


def make_field(dom: Domain, gen: dict) -> np.ndarray:
    """Evaluate one named initial-data generator on the grid."""
    kind = gen["kind"]
    if kind == "homogeneous":
        return dom.constant(gen.get("value", 0.0))
    mean = float(gen.get("mean", 0.0))
    if kind == "cosine-modes":
        out = dom.constant(mean)
        for entry in gen.get("modes", []):
            *k, amp = entry
            if len(k) != dom.dim:
                raise ConfigError(f"cosine mode {entry} needs {dom.dim} indices plus an amplitude")
            out = out + float(amp) * dom.cosine_mode(k)
        return out
    if kind == "seeded-random":
        rng = np.random.default_rng(int(gen.get("seed", 0)))
        cutoff = int(gen.get("cutoff", 4))
        coef = np.zeros(dom.shape)
        sl = tuple(slice(0, min(cutoff + 1, k)) for k in dom.n)
        coef[sl] = rng.standard_normal(coef[sl].shape)
        coef[(0,) * dom.dim] = 0.0
        u = dom.idct(coef)
        peak = float(np.max(np.abs(u)))
        if peak > 0:
            u = u * (float(gen.get("amplitude", 0.5)) / peak)
        return u + mean
    raise ConfigError(f"unknown initial-data generator {kind!r}")


def sweep_pairs(cfg) -> list:
    sw = cfg["sweep"]
    if sw.get("pairs"):
        pairs = [(float(a), float(e)) for a, e in sw["pairs"]]
    else:
        g = sw["grid"]
        vals = np.geomspace(float(g["start"]), float(g["stop"]), int(g["num"]))
        pairs = [(float(v), float(v)) for v in vals]
    if sw.get("include_identity_pair") and (0.0, 0.0) not in pairs:
        pairs.append((0.0, 0.0))
    return pairs
