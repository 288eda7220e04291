"""The four experiment campaigns behind the CLI subcommands.

Each ``cmd_*`` takes a resolved config dict and an output directory, writes
its files there and returns the report it wrote.  Failures that map to exit
codes are raised (ConfigError, HypothesisViolation, BlowUpError,
ThresholdFailure); the CLI translates them.
"""

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .. import diagnostics as dg
from ..dynamics import initial_state, lift, run, run_difference, limit_trajectory
from ..errors import BlowUpError, ConfigError, HypothesisViolation
from ..kernel import build_kernel, check_h6
from ..potential import verify_hypotheses
from . import config as cf
from . import io


class ThresholdFailure(RuntimeError):
    """An acceptance threshold (rate slope, decay rate, ordering) was missed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


# ---------------------------------------------------------------- setup


def build(cfg):
    """Domain, kernel, potential and params for a resolved config."""
    dom = cf.domain(cfg)
    K = build_kernel(dom, cf.kernel_shape(cfg))
    P = cf.potential(cfg)
    return dom, K, P, cf.params(cfg)


def audit(cfg) -> dict:
    """All hypothesis checks as one JSON-ready dict with an ``all_pass`` flag."""
    dom = cf.domain(cfg)
    P = cf.potential(cfg)
    try:
        K = build_kernel(dom, cf.kernel_shape(cfg))
    except HypothesisViolation as e:
        return {
            "H1": {"pass": False, "message": str(e), "witness": _jsonable(e.witness)},
            "all_pass": False,
            "failed": ["H1"],
        }
    report = {
        "H1": {
            "pass": True,
            "a_min": K.a_min,
            "a_0": K.a_0,
            "a_star": K.a_star,
            "c_J": K.c_J,
            "d_J": K.d_J,
            "kernel": {"family": K.family, **K.params},
        }
    }
    report.update(verify_hypotheses(P, K))
    report["H6"] = check_h6(K, P)
    failed = [k for k, v in report.items() if isinstance(v, dict) and not v.get("pass", True)]
    report["failed"] = failed
    report["all_pass"] = not failed
    return report


def _jsonable(w):
    if w is None:
        return None
    if isinstance(w, tuple):
        return [int(x) for x in w]
    return float(w)


def cmd_hypotheses(cfg, out) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report = audit(cfg)
    io.write_json(out / "report.json", report)
    cf.dump(cfg, out / "config.resolved.json")
    if not report["all_pass"]:
        first = report["failed"][0]
        raise HypothesisViolation(first, f"failed: {', '.join(report['failed'])}", report[first].get("witness"))
    return report


def _require_hypotheses(cfg, out, override):
    report = audit(cfg)
    if not report["all_pass"]:
        if override:
            _warn(f"hypotheses {report['failed']} fail; continuing because of --override-hypotheses")
        else:
            Path(out).mkdir(parents=True, exist_ok=True)
            io.write_json(Path(out) / "hypotheses.json", report)
            first = report["failed"][0]
            raise HypothesisViolation(first, f"failed: {', '.join(report['failed'])}", report[first].get("witness"))
    return report


def initial_fields(cfg, dom, K, P, params, amplitude_scale=None):
    """``(phi0, theta0)``; ``theta0`` is ``None`` for the limit problem.

    ``amplitude_scale`` replaces the amplitude of a seeded-random ``phi``
    generator or rescales cosine-mode amplitudes (used by the dissipation runs).
    """
    gen = dict(cfg["initial"]["phi"])
    if amplitude_scale is not None:
        if gen["kind"] == "seeded-random":
            gen["amplitude"] = amplitude_scale
        elif gen["kind"] == "cosine-modes":
            gen["modes"] = [[*m[:-1], m[-1] * amplitude_scale] for m in gen.get("modes", [])]
    phi0 = cf.make_field(dom, gen)
    if params.is_limit:
        return phi0, None
    tg = cfg["initial"].get("theta")
    if tg is None or tg == "lift":
        theta0 = lift(initial_state(phi0), K, P, params).theta
    else:
        theta0 = cf.make_field(dom, tg)
    return phi0, theta0


# ---------------------------------------------------------------- simulate


def diagnostics_row(state, K, P, params, LP, M0, N0, E0, integral) -> dict:
    dom = K.domain
    E = dg.energy_epsilon(state, K, P, params)
    th = state.theta
    return {
        "t": state.t,
        "mean_phi": dom.mean(state.phi),
        "mean_theta": 0.0 if th is None else dom.mean(th),
        "norm_phi": dom.l2_norm(state.phi),
        "vprime_phi": dom.vprime_norm(state.phi),
        "norm_theta": 0.0 if th is None else dom.l2_norm(th),
        "energy": E,
        "energy_residual": abs(E + integral - E0),
        "lyapunov": dg.lyapunov_E(state, K, P, params, LP, M0=M0, N0=N0),
        "max_abs_phi": float(np.max(np.abs(state.phi))),
    }


def row_from_snapshot(phi_path, cfg):
    """Recompute a diagnostics row from a stored snapshot and its sidecar."""
    _, K, P, params = build(cfg)
    phi, meta = io.read_field(phi_path)
    theta = None
    if meta.get("has_theta"):
        theta, _ = io.read_field(Path(phi_path).with_name(f"theta_{meta['step']}.f64"))
    s = initial_state(phi, theta)
    s.t = meta["t"]
    LP = dg.LyapunovParams(xi=cfg["lyapunov"]["xi"], tau=cfg["lyapunov"]["tau"], C_F_shift=meta["C_F_shift"])
    return diagnostics_row(s, K, P, params, LP, meta["M0"], meta["N0"], meta["E0"], meta["dissipation_integral"])


def cmd_simulate(cfg, out, override=False) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    hyp = _require_hypotheses(cfg, out, override)
    cf.dump(cfg, out / "config.resolved.json")
    snaps = out / "snapshots"
    snaps.mkdir(exist_ok=True)

    dom, K, P, params = build(cfg)
    phi0, theta0 = initial_fields(cfg, dom, K, P, params)
    params.check_means(dom, phi0, theta0)
    s0 = initial_state(phi0, theta0)
    M0 = dom.mean(phi0)
    N0 = 0.0 if theta0 is None else dom.mean(theta0)
    shift = dg.lyapunov_shift_bound(K, P, M0)
    LP = dg.LyapunovParams(xi=cfg["lyapunov"]["xi"], tau=cfg["lyapunov"]["tau"], C_F_shift=shift)
    stride = int(cfg["output"]["stride"])
    ledger = dg.EnergyLedger(s0, K, P, params)
    rows = []
    range_flag = None

    def record(state):
        nonlocal range_flag
        rows.append(diagnostics_row(state, K, P, params, LP, M0, N0, ledger.E0, ledger.integral))
        extra = {
            "E0": ledger.E0,
            "dissipation_integral": ledger.integral,
            "C_F_shift": shift,
            "M0": M0,
            "N0": N0,
            "has_theta": state.theta is not None,
        }
        io.write_field(snaps, "phi", state.step, state.phi, dom, state.t, extra)
        if state.theta is not None:
            io.write_field(snaps, "theta", state.step, state.theta, dom, state.t, extra)
        m = rows[-1]["max_abs_phi"]
        if m > P.s_max and range_flag is None:
            range_flag = {"t": state.t, "max_abs_phi": m, "s_max": P.s_max}
            _warn(f"max|phi| = {m:.4g} left the hypothesis sample range [-{P.s_max}, {P.s_max}] at t = {state.t:.4g}")

    def on_step(prev, new):
        ledger.update(new)
        if new.step % stride == 0 or new.step == params.n_steps:
            record(new)

    record(s0)
    status = "ok"
    err = None
    try:
        run(s0, K, P, params, stride=params.n_steps + 1, on_step=on_step)
    except BlowUpError as e:
        status = "blow-up"
        err = e
        good = e.state
        if not rows or rows[-1]["t"] != good.t:
            record(good)

    io.write_csv(out / "diagnostics.csv", rows)
    report = {
        "status": status,
        "problem": cfg["problem"],
        "n_steps": params.n_steps,
        "stride": stride,
        "stabilizer_S": params.stabilizer(P),
        "C_F_shift": shift,
        "mass_drift": max(abs(r["mean_phi"] - M0) for r in rows),
        "heat_drift": max(abs(r["mean_theta"] - N0) for r in rows),
        "max_energy_increase": max(
            [b["energy"] - a["energy"] for a, b in zip(rows, rows[1:])], default=0.0
        ),
        "final_energy_residual": rows[-1]["energy_residual"],
        "range_violation": range_flag,
        "hypotheses_pass": hyp["all_pass"],
    }
    if err is not None:
        report["blow_up"] = {"t": err.t, "max_abs_phi": err.max_abs_phi}
    io.write_json(out / "report.json", report)
    if err is not None:
        raise err
    return report


# ---------------------------------------------------------------- converge


@dataclass
class RateFit:
    points: list  # [(alpha + epsilon, sup_t D)] sorted by the first entry
    slope: float
    intercept: float
    r2: float


def fit_rate(points) -> RateFit:
    """Least-squares fit of ``log D`` against ``log(alpha + eps)``.

    Points with a nonpositive coordinate are dropped; at least 3 must remain.
    Sorting first makes the result independent of input order.
    """
    pts = sorted((float(x), float(y)) for x, y in points if x > 0 and y > 0)
    if len(pts) < 3:
        raise ConfigError(f"rate fit needs at least 3 points with alpha+eps > 0 and D > 0, got {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, icpt = np.polyfit(x, y, 1)
    pred = slope * x + icpt
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss if ss > 0 else 1.0
    return RateFit(pts, float(slope), float(icpt), r2)


def _state_bound(states, domain):
    # sup_t of the (alpha = eps = 1) phase-space norm, an upper bound for every pair
    vals = []
    for s in states:
        v = domain.vprime_norm2(s.phi) + domain.inner(s.phi, s.phi)
        if s.theta is not None:
            v += domain.inner(s.theta, s.theta)
        vals.append(v)
    return float(np.sqrt(max(vals)))


def cmd_converge(cfg, out, threads=1, slope_threshold=None, override=False) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _require_hypotheses(cfg, out, override)
    cf.dump(cfg, out / "config.resolved.json")
    sw = cfg["sweep"]
    threshold = float(sw["slope_threshold"] if slope_threshold is None else slope_threshold)
    pairs = cf.sweep_pairs(cfg)
    fit_pairs = [p for p in pairs if p[0] + p[1] > 0]
    if len(fit_pairs) < 3:
        raise ConfigError(f"sweep needs at least 3 pairs with alpha + eps > 0, got {len(fit_pairs)}")

    dom, K, P, params = build(cfg)
    params = replace(params, T=float(sw["T"]))
    phi0 = cf.make_field(dom, cfg["initial"]["phi"])
    params.check_means(dom, phi0)
    lifted = limit_trajectory(phi0, K, P, params)
    series = run_difference(phi0, None, K, P, params, pairs, threads=threads, lifted=lifted)

    per_pair = []
    for (a, e), ser in series.items():
        sub = out / "pairs" / f"alpha={a:.6g}_eps={e:.6g}"
        sub.mkdir(parents=True, exist_ok=True)
        _write_series(sub / "difference.csv", ser)
        per_pair.append(
            {
                "alpha": a,
                "epsilon": e,
                "sum": a + e,
                "sup_D": ser.sup_D,
                "D0": float(ser.D[0]),
                "int_phi_t": float(ser.int_phi_t[-1]),
                "int_theta_V": float(ser.int_theta_V[-1]),
                "sup_total": float(np.max(ser.total)),
                "directory": str(sub.relative_to(out)),
            }
        )
    per_pair.sort(key=lambda r: (r["sum"], r["alpha"]))
    fit = fit_rate([(r["sum"], r["sup_D"]) for r in per_pair])

    warnings = []
    sups = [r["sup_D"] for r in per_pair if r["sum"] > 0]
    if any(b < a for a, b in zip(sups, sups[1:])):
        warnings.append("sup_t D is not monotone in alpha + eps")
    for w in warnings:
        _warn(w)
    passed = fit.slope >= threshold and fit.r2 >= float(sw["r2_threshold"])
    report = {
        "pairs": per_pair,
        "rate_fit": asdict(fit),
        "norm_rate": 0.5 * fit.slope,
        "slope_threshold": threshold,
        "r2_threshold": float(sw["r2_threshold"]),
        "pass": passed,
        "warnings": warnings,
        "R_measured": _state_bound(lifted, dom),
        "T": params.T,
        "dt": params.dt,
    }
    io.write_json(out / "report.json", report)
    if not passed:
        raise ThresholdFailure(
            f"rate slope {fit.slope:.4f} (r2 {fit.r2:.4f}) below threshold {threshold}", report
        )
    return report


def _write_series(path, ser):
    cols = np.column_stack([ser.t, ser.D, ser.int_phi_t, ser.int_theta_V])
    with open(path, "w") as fh:
        fh.write("t,D,int_phi_t,int_theta_V\n")
        for row in cols:
            fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")


# ---------------------------------------------------------------- dissipate


def _long_run(cfg, amplitude, T, stride):
    dom, K, P, params = build(cfg)
    params = replace(params, T=T)
    phi0, theta0 = initial_fields(cfg, dom, K, P, params, amplitude_scale=amplitude)
    s0 = initial_state(phi0, theta0)
    M0 = dom.mean(phi0)
    N0 = 0.0 if theta0 is None else dom.mean(theta0)
    LP = dg.LyapunovParams(
        xi=cfg["lyapunov"]["xi"], tau=cfg["lyapunov"]["tau"], C_F_shift=dg.lyapunov_shift_bound(K, P, M0)
    )
    states = run(s0, K, P, params, stride=stride)
    t = np.array([s.t for s in states])
    E = np.array([dg.lyapunov_E(s, K, P, params, LP, M0=M0, N0=N0) for s in states])
    h = np.array([dg.h_norm(s, params, dom) for s in states])
    return {"amplitude": amplitude, "t": t, "E": E, "h": h}


def cmd_dissipate(cfg, out, threads=1, override=False) -> dict:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    _require_hypotheses(cfg, out, override)
    cf.dump(cfg, out / "config.resolved.json")
    ds = cfg["dissipate"]
    amps = [float(a) for a in ds["amplitudes"]]
    T = float(ds["T"])
    stride = int(ds["stride"])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            runs = list(ex.map(lambda a: _long_run(cfg, a, T, stride), amps))
    else:
        runs = [_long_run(cfg, a, T, stride) for a in amps]

    # long-time bound: sup of the phase-space norm over the second half of every run
    bound = max(float(np.max(r["h"][r["t"] >= 0.5 * T])) for r in runs)
    radius = float(ds["radius"]) if ds.get("radius") is not None else 1.1 * bound

    entries = []
    for r in runs:
        fit = dg.fit_decay_rate(r["t"], r["E"])
        entry = dg.absorbing_entry(r["t"], r["h"], radius)
        sub = out / f"amplitude={r['amplitude']:.6g}"
        sub.mkdir(exist_ok=True)
        with open(sub / "series.csv", "w") as fh:
            fh.write("t,lyapunov,h_norm\n")
            for row in zip(r["t"], r["E"], r["h"]):
                fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")
        entries.append(
            {
                "amplitude": r["amplitude"],
                "E0": float(r["E"][0]),
                "E_final": float(r["E"][-1]),
                "h0": float(r["h"][0]),
                "decay": fit,
                "entry_time": entry,
            }
        )

    order = sorted(entries, key=lambda e: e["amplitude"])
    times = [np.inf if e["entry_time"] is None else e["entry_time"] for e in order]
    monotone = all(b >= a for a, b in zip(times, times[1:]))
    moving = [e for e in order if e["E0"] - e["E_final"] > 0]
    decay_ok = bool(moving) and all(e["decay"]["nu"] > 0 for e in moving)
    report = {
        "T": T,
        "dt": cf.params(cfg).dt,
        "long_time_bound": bound,
        "R_measured": bound,
        "radius": radius,
        "runs": order,
        "entry_times_monotone": monotone,
        "decay_rate_positive": decay_ok,
        "pass": bool(monotone and decay_ok),
    }
    io.write_json(out / "report.json", report)
    if not report["pass"]:
        raise ThresholdFailure("dissipation checks failed (decay rate or entry-time ordering)", report)
    return report
