"""Energies, energy-balance residuals, phase-space norms and dissipation probes."""

from dataclasses import dataclass

import numpy as np

from .kernel import nonlocal_energy


@dataclass(frozen=True)
class LyapunovParams:
    xi: float = 0.1
    tau: float = 0.05
    C_F_shift: float = 0.0
    nu3: float = 1.0

    def __post_init__(self):
        if not 0 < self.tau < self.xi < 1:
            raise ValueError(f"need 0 < tau < xi < 1, got tau={self.tau}, xi={self.xi}")
        if self.nu3 <= 0 or self.C_F_shift < 0:
            raise ValueError("nu3 must be positive and C_F_shift nonnegative")


def energy_epsilon(state, K, P, params) -> float:
    """Nonlocal free energy plus ``(eps/2) ||theta||^2``."""
    dom = K.domain
    e = nonlocal_energy(K, state.phi) + dom.integral(P.F(state.phi))
    if state.theta is not None and params.epsilon != 0:
        e += 0.5 * params.epsilon * dom.inner(state.theta, state.theta)
    return float(e)


def dissipation(state, K, params) -> float:
    """Integrand of the energy equality at a stepped state.

    ``||grad mu||^2 + alpha ||phi_t||^2 + ||grad theta||^2`` for the relaxation
    problem; ``||grad mu||^2 / (1 + delta^2)`` for the limit problem, whose time
    variable carries the ``1 + delta^2`` factor.
    """
    dom = K.domain
    if state.mu is None:
        return 0.0
    if state.theta is None or params.is_limit:
        return dom.grad_norm2(state.mu) / (1.0 + params.delta**2)
    out = dom.grad_norm2(state.mu) + dom.grad_norm2(state.theta)
    if params.alpha:
        out += params.alpha * dom.inner(state.phi_t, state.phi_t)
    return out


class EnergyLedger:
    """Running energy-balance residual, fed one step at a time."""

    def __init__(self, initial_state, K, P, params):
        self.K, self.P, self.params = K, P, params
        self.E0 = energy_epsilon(initial_state, K, P, params)
        self.integral = 0.0
        self.residual = 0.0

    def update(self, new_state) -> float:
        # dissipation quantities are per-step (they live on [t^n, t^{n+1}])
        self.integral += self.params.dt * dissipation(new_state, self.K, self.params)
        E = energy_epsilon(new_state, self.K, self.P, self.params)
        self.residual = abs(E + self.integral - self.E0)
        return self.residual


def energy_balance_residual(trajectory, K, P, params) -> np.ndarray:
    """``|E(t) + int_0^t dissipation - E(0)|`` along a trajectory stored every step."""
    ledger = EnergyLedger(trajectory[0], K, P, params)
    res = [0.0]
    for s in trajectory[1:]:
        res.append(ledger.update(s))
    return np.array(res)


def h_norm2(state, params, domain) -> float:
    d = domain
    out = d.vprime_norm2(state.phi) + params.alpha * d.inner(state.phi, state.phi)
    if state.theta is not None and params.epsilon:
        out += params.epsilon * d.inner(state.theta, state.theta)
    return float(out)


def h_norm(state, params, domain) -> float:
    return float(np.sqrt(h_norm2(state, params, domain)))


def x_metric(z1, z2, P, params, domain) -> float:
    """Phase-space distance plus ``|int F(phi1) - int F(phi2)|^{1/2}``."""
    from .dynamics import State

    th = None
    if z1.theta is not None and z2.theta is not None:
        th = z1.theta - z2.theta
    diff = State(0.0, z1.phi - z2.phi, th)
    dF = abs(domain.integral(P.F(z1.phi)) - domain.integral(P.F(z2.phi)))
    return h_norm(diff, params, domain) + float(np.sqrt(dF))


def lyapunov_E(state, K, P, params, LP: LyapunovParams, M0=None, N0=None) -> float:
    """Dissipative functional used for the absorbing-set estimates.

    ``xi ||phi_hat||_H^2 + (a phi, phi) + eps ||theta_hat||^2 + 2 int F(phi)
    - (J*phi, phi_hat) + C_F_shift`` with hats removing the means ``M0``/``N0``
    (these default to the current means, which are conserved).
    """
    d = K.domain
    phi = state.phi
    M0 = d.mean(phi) if M0 is None else M0
    ph = phi - M0
    out = LP.xi * d.vprime_norm2(ph) + LP.xi * params.alpha * d.inner(ph, ph)
    out += d.inner(K.a_field * phi, phi)
    if state.theta is not None and params.epsilon:
        N0 = d.mean(state.theta) if N0 is None else N0
        th = state.theta - N0
        out += params.epsilon * d.inner(th, th)
    out += 2.0 * d.integral(P.F(phi)) - d.inner(K.convolve(phi), ph)
    return float(out + LP.C_F_shift)


def calibrate_cf_shift(states, K, P, params, xi=0.1, tau=0.05) -> float:
    """``max(0, -min E_unshifted) + 1`` over the given states."""
    LP = LyapunovParams(xi=xi, tau=tau, C_F_shift=0.0)
    vals = [lyapunov_E(s, K, P, params, LP) for s in states]
    return max(0.0, -min(vals)) + 1.0


def absorbing_entry(times, norms, radius):
    """First time after which ``norms`` stays ``<= radius``; ``None`` if never."""
    norms = np.asarray(norms)
    outside = np.nonzero(norms > radius)[0]
    if outside.size == 0:
        return float(times[0])
    last = outside[-1]
    if last == len(norms) - 1:
        return None
    return float(times[last + 1])


def fit_decay_rate(times, values, lo=0.9, hi=0.01):
    """Fit ``values ~ v_inf + C exp(-nu t)`` on the transient, returning ``nu``.

    ``v_inf`` is the last value; the fit uses samples whose excess lies
    between ``hi`` and ``lo`` times the initial excess.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    excess = v - v[-1]
    e0 = excess[0]
    if e0 <= 0:
        return {"nu": 0.0, "points": 0, "r2": float("nan")}
    sel = (excess <= lo * e0) & (excess >= hi * e0)
    if sel.sum() < 3:
        sel = excess > 0
        sel[-1] = False
    if sel.sum() < 2:
        return {"nu": 0.0, "points": int(sel.sum()), "r2": float("nan")}
    y = np.log(excess[sel])
    slope, icpt = np.polyfit(t[sel], y, 1)
    pred = slope * t[sel] + icpt
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss if ss > 0 else 1.0
    return {"nu": float(-slope), "points": int(sel.sum()), "r2": r2}


def mu_mean_constant(states, params, domain) -> float:
    """Smallest ``C_F`` with ``|<mu>| <= C_F |<phi>| + delta0 |<theta>|`` on the states."""
    worst = 0.0
    for s in states:
        if s.mu is None:
            continue
        mphi = abs(domain.mean(s.phi))
        rest = abs(domain.mean(s.mu))
        if s.theta is not None:
            rest -= params.delta0 * abs(domain.mean(s.theta))
        if rest > 0:
            worst = max(worst, rest / mphi if mphi > 0 else np.inf)
    return float(worst)


def lyapunov_shift_bound(K, P, M0, s_max=None) -> float:
    """A shift making :func:`lyapunov_E` positive for every state with mean ``M0``.

    The unshifted functional is at least ``int (2 F(phi) - |M0| a* |phi|)``
    (the nonlocal part is a nonnegative double integral), so
    ``|Omega| * max(0, -min_s (2F(s) - |M0| a* |s|)) + 1`` suffices.
    """
    reach = 10.0 * max(1.0, P.s_max if s_max is None else s_max)
    s = np.linspace(-reach, reach, 20001)
    g = 2.0 * P.F(s) - abs(M0) * K.a_star * np.abs(s)
    return K.domain.volume * max(0.0, -float(g.min())) + 1.0
