"""Stabilised double-well potential and sampled checks of (H2)-(H5).

``F(s) = (1/4)(1 - s^2)^2 + (kappa/2) s^2``.  The growth hypotheses are
checked on the sample range ``[-s_max, s_max]``; trajectories are expected
to stay inside it (the harness re-checks ``max|phi|`` after each run).
"""

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation


@dataclass(frozen=True)
class PotentialSpec:
    kappa: float = 2.5
    s_max: float = 2.0
    n_samples: int = 4001
    p: float = 4.0 / 3.0  # (H4) exponent
    q: float = 1.0  # (H5) exponent
    c3: float = 8.0
    c4_max: float = 10.0
    family: str = "double_well"

    def __post_init__(self):
        if self.family != "double_well":
            raise ValueError(f"unsupported potential family {self.family!r}")
        if self.kappa < 0 or self.s_max <= 0 or self.n_samples < 3:
            raise ValueError("need kappa >= 0, s_max > 0 and at least 3 samples")

    def F(self, s):
        s = np.asarray(s, dtype=float)
        return 0.25 * (1.0 - s * s) ** 2 + 0.5 * self.kappa * s * s

    def dF(self, s):
        s = np.asarray(s, dtype=float)
        return s**3 - s + self.kappa * s

    def ddF(self, s):
        s = np.asarray(s, dtype=float)
        return 3.0 * s * s - 1.0 + self.kappa

    def samples(self):
        s = np.linspace(-self.s_max, self.s_max, self.n_samples)
        return np.union1d(s, [0.0])

    def max_ddF(self) -> float:
        return float(self.ddF(self.samples()).max())

    def default_stabilizer(self) -> float:
        return self.max_ddF() + 1.0


def eval_F(P: PotentialSpec, s):
    return P.F(s)


def eval_dF(P: PotentialSpec, s):
    return P.dF(s)


def eval_ddF(P: PotentialSpec, s):
    return P.ddF(s)


def h2_constant(P: PotentialSpec, a_min: float) -> float:
    """Largest ``c_0`` with ``F''(s) + inf a >= c_0`` on the samples."""
    return float(P.ddF(P.samples()).min()) + a_min


def check_h3(P, c1, c2, c_J, s=None) -> dict:
    s = P.samples() if s is None else s
    gap = P.F(s) - (c1 * s * s - c2)
    i = int(np.argmin(gap))
    ok_ineq = bool(gap[i] >= 0)
    return {
        "pass": bool(ok_ineq and c1 > 0.5 * c_J),
        "c_1": float(c1),
        "c_2": float(c2),
        "min_gap": float(gap[i]),
        "witness": None if ok_ineq else float(s[i]),
        # quartic leading term dominates any c_1 s^2 outside the range
        "global_tail": True,
    }


def check_h4(P, p, c3, c4, s=None) -> dict:
    s = P.samples() if s is None else s
    excess = np.abs(P.dF(s)) ** p - (c3 * np.abs(P.F(s)) + c4)
    bad = excess > 0
    witness = None
    if bad.any():
        witness = float(s[int(np.argmax(excess))])
    return {
        "pass": bool(not bad.any()),
        "p": float(p),
        "c_3": float(c3),
        "c_4": float(c4),
        "witness": witness,
        # |F'|^p ~ |s|^{3p} against |F| ~ s^4 / 4
        "global_tail": bool(3 * p < 4 or (3 * p == 4 and c3 > 4)),
    }


def check_h5(P, a_min, q, c5, c6, s=None) -> dict:
    s = P.samples() if s is None else s
    gap = P.ddF(s) + a_min - (c5 * np.abs(s) ** (2 * q) - c6)
    i = int(np.argmin(gap))
    ok = bool(gap[i] >= 0 and c5 > 0 and c6 > 0)
    return {
        "pass": ok,
        "q": float(q),
        "c_5": float(c5),
        "c_6": float(c6),
        "witness": None if gap[i] >= 0 else float(s[i]),
        "global_tail": bool(q < 1 or (q == 1 and c5 <= 3.0)),
    }


def _h4_admissible_range(P, p, c3, c4):
    # largest s_r such that (H4) holds with (c3, c4) on [-s_r, s_r]
    s = np.linspace(0.0, P.s_max, P.n_samples // 2 + 1)
    excess = np.abs(P.dF(s)) ** p - (c3 * np.abs(P.F(s)) + c4)
    bad = np.nonzero(excess > 0)[0]
    return float(P.s_max) if bad.size == 0 else float(s[bad[0] - 1]) if bad[0] > 0 else 0.0


def verify_hypotheses(P: PotentialSpec, K) -> dict:
    """Scan the sample range and report constants and pass/fail for (H2)-(H5).

    The returned dict is JSON-ready.  Use :func:`raise_on_failure` to turn a
    failed entry into a :class:`HypothesisViolation`.
    """
    s = P.samples()
    a_min = K.a_min
    report = {}

    ddF = P.ddF(s)
    i0 = int(np.argmin(ddF))
    c0 = float(ddF[i0]) + a_min
    report["H2"] = {"pass": bool(c0 > 0), "c_0": c0, "witness": None if c0 > 0 else float(s[i0])}

    # least-squares fit of F by c1 s^2 - c2, then c2 raised until the bound holds
    A = np.column_stack([s * s, -np.ones_like(s)])
    c1 = float(np.linalg.lstsq(A, P.F(s), rcond=None)[0][0])
    if c1 <= 0.5 * K.c_J:
        c1 = 0.5 * K.c_J + 0.01
    c2 = float(np.max(c1 * s * s - P.F(s)))
    report["H3"] = check_h3(P, c1, c2, K.c_J, s)

    p = P.p
    c4 = max(0.0, float(np.max(np.abs(P.dF(s)) ** p - P.c3 * np.abs(P.F(s)))))
    h4 = check_h4(P, p, P.c3, min(c4, P.c4_max), s)
    h4["c_4_needed"] = c4
    h4["p_in_range"] = bool(6.0 / 5.0 < p <= 2.0)
    h4["pass"] = bool(h4["pass"] and h4["p_in_range"])
    h4["admissible_s_range"] = _h4_admissible_range(P, p, P.c3, P.c4_max)
    report["H4"] = h4

    q = P.q
    far = np.abs(s) >= 1.0
    if far.any():
        c5 = float(np.min((ddF[far] + a_min) / np.abs(s[far]) ** (2 * q)))
    else:
        c5 = float(np.min(ddF + a_min))
    if q == 1:
        c5 = min(c5, 3.0)  # leading coefficient of F''
    c6 = max(1e-12, float(np.max(c5 * np.abs(s) ** (2 * q) - ddF - a_min)))
    h5 = check_h5(P, a_min, q, c5, c6, s)
    h5["q_in_range"] = bool(q >= 0.5)
    h5["pass"] = bool(h5["pass"] and h5["q_in_range"])
    report["H5"] = h5

    G2 = ddF + K.a_star
    report["convex_split"] = {
        "pass": bool(np.all(G2 >= c0 - 1e-12) and c0 > 0),
        "min_G2": float(G2.min()),
        "a_star": K.a_star,
    }
    return report


def raise_on_failure(report: dict):
    for name, entry in report.items():
        if isinstance(entry, dict) and not entry.get("pass", True):
            raise HypothesisViolation(name, "hypothesis check failed", witness=entry.get("witness"))
