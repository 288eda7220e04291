"""Time stepping for the relaxation and limit problems and the difference runner.

Both steppers are first-order IMEX schemes: the nonlocal and nonlinear parts
of the chemical potential are explicit, while viscosity, the stabiliser ``S``
and the phase/heat coupling are implicit.  Every implicit solve is diagonal in
the cosine basis (a 2x2 system per mode for the relaxation problem), so mass
and enthalpy conservation follow from the zero mode being left untouched.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .domain import Domain
from .errors import BlowUpError, ConfigError
from .kernel import KernelData, convolve
from .potential import PotentialSpec


@dataclass(frozen=True)
class Params:
    alpha: float = 0.1
    epsilon: float = 0.1
    delta: float = 0.5
    delta0: float = 1.0
    m: float = 1.0
    dt: float = 1e-3
    T: float = 1.0
    S: Optional[float] = None  # None -> max F'' on the sample range + 1

    def __post_init__(self):
        if self.dt <= 0 or self.T < 0:
            raise ValueError("need dt > 0 and T >= 0")
        if not 0 <= self.alpha <= 1 or not 0 <= self.epsilon <= 1:
            raise ValueError("alpha and epsilon must lie in [0, 1]")
        if not 0 <= self.delta <= self.delta0:
            raise ValueError(f"delta={self.delta} must lie in [0, delta0={self.delta0}]")

    @property
    def is_limit(self) -> bool:
        return self.alpha == 0 and self.epsilon == 0

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def stabilizer(self, P: PotentialSpec) -> float:
        return P.default_stabilizer() if self.S is None else float(self.S)

    def check_means(self, domain, phi, theta=None):
        bad = abs(domain.mean(phi)) > self.m
        if theta is not None:
            bad = bad or abs(domain.mean(theta)) > self.m
        if bad:
            raise ConfigError(f"initial means exceed the phase-space bound m={self.m}")


@dataclass
class State:
    t: float
    phi: np.ndarray
    theta: Optional[np.ndarray] = None  # None for the limit problem
    mu: Optional[np.ndarray] = None
    phi_t: Optional[np.ndarray] = None
    step: int = 0

    def copy(self):
        cp = lambda a: None if a is None else a.copy()
        return State(self.t, self.phi.copy(), cp(self.theta), cp(self.mu), cp(self.phi_t), self.step)


def _diff_from_first(u):
    # u - u.flat[0]: exactly zero for constant fields, so homogeneous states stay bitwise fixed
    return u - u.flat[0]


def nonlocal_part(K: KernelData, phi):
    """``a phi - J*phi``, computed on ``phi - phi_ref`` (exact identity since ``J*1 = a``)."""
    d = _diff_from_first(phi)
    return K.a_field * d - convolve(K, d)


def chemical_potential_explicit(phi, theta, K, P, params):
    """``a phi - J*phi + F'(phi) - delta theta``; pass ``theta=None`` to drop the coupling."""
    mu = nonlocal_part(K, phi) + P.dF(phi)
    if theta is not None and params.delta != 0:
        mu = mu - params.delta * theta
    return mu


def _check_finite(state, phi_new, *others):
    for arr in (phi_new,) + others:
        if arr is not None and not np.all(np.isfinite(arr)):
            raise BlowUpError(state.t, float(np.max(np.abs(state.phi))), state)


def step_relaxation(s: State, K: KernelData, P: PotentialSpec, params: Params) -> State:
    """One step of the viscous non-isothermal problem.

    Per cosine mode ``k`` with eigenvalue ``lam`` the increment ``d = phi^{n+1} - phi^n``
    and the new temperature solve

        (1 + alpha lam + dt S lam) d - dt lam delta theta^{n+1} = -dt lam r(phi^n)
        (eps + dt lam) theta^{n+1} + delta d = eps theta^n
    """
    if params.epsilon <= 0:
        raise ValueError("step_relaxation needs epsilon > 0; use step_limit and lift for epsilon = 0")
    if s.theta is None:
        raise ValueError("relaxation state needs a temperature field")
    dom = K.domain
    dt, alpha, eps, delta = params.dt, params.alpha, params.epsilon, params.delta
    S = params.stabilizer(P)
    lam = dom.eigenvalues

    r = chemical_potential_explicit(s.phi, None, K, P, params)
    r_k = dom.dct(_diff_from_first(r))
    th_k = dom.dct(_diff_from_first(s.theta))

    D = 1.0 + alpha * lam + dt * S * lam
    E = eps + dt * lam
    d_k = dt * lam * (delta * eps * th_k - r_k * E) / (D * E + dt * lam * delta**2)
    dth_k = -(delta * d_k + dt * lam * th_k) / E

    d = dom.idct(d_k)
    phi = s.phi + d
    theta = s.theta + dom.idct(dth_k)
    _check_finite(s, phi, theta)
    phi_t = d / dt
    mu = r - delta * theta + alpha * phi_t + S * d
    return State(s.t + dt, phi, theta, mu, phi_t, s.step + 1)


def step_limit(s: State, K: KernelData, P: PotentialSpec, params: Params) -> State:
    """One step of ``(1 + delta^2) phi_t = Laplace mu``: ``((1+delta^2) + dt S A_N) d = -dt A_N r``."""
    dom = K.domain
    dt, delta = params.dt, params.delta
    S = params.stabilizer(P)
    lam = dom.eigenvalues

    r = chemical_potential_explicit(s.phi, None, K, P, params)
    r_k = dom.dct(_diff_from_first(r))
    d_k = -dt * lam * r_k / ((1.0 + delta**2) + dt * S * lam)
    d = dom.idct(d_k)
    phi = s.phi + d
    _check_finite(s, phi)
    return State(s.t + dt, phi, None, r + S * d, d / dt, s.step + 1)


def lift(s: State, K: KernelData, P: PotentialSpec, params: Params) -> State:
    """Canonical extension: ``(phi0, theta0 = delta mu0)`` with ``mu0 = a phi - J*phi + F'(phi)``."""
    mu0 = chemical_potential_explicit(s.phi, None, K, P, params)
    return State(s.t, s.phi, params.delta * mu0, s.mu, s.phi_t, s.step)


def initial_state(phi0, theta0=None) -> State:
    phi0 = np.array(phi0, dtype=float)
    theta0 = None if theta0 is None else np.array(theta0, dtype=float)
    return State(0.0, phi0, theta0)


def run(state: State, K, P, params: Params, n_steps=None, stride=1, on_step=None):
    """Advance ``state`` and return the stored states (initial, every ``stride``-th, final).

    ``on_step(prev, new)`` is called after every step.  The limit scheme is
    used when ``params.is_limit`` or the state carries no temperature.
    """
    n_steps = params.n_steps if n_steps is None else n_steps
    limit = params.is_limit or state.theta is None
    stepper = step_limit if limit else step_relaxation
    out = [state]
    cur = state
    for i in range(1, n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):  # non-finite output raises BlowUpError
            new = stepper(cur, K, P, params)
        if on_step is not None:
            on_step(cur, new)
        cur = new
        if i % stride == 0 or i == n_steps:
            out.append(cur)
    return out


@dataclass
class DifferenceSeries:
    alpha: float
    epsilon: float
    t: np.ndarray
    D: np.ndarray  # ||phi~||_{V'}^2 + alpha ||phi~||^2 + eps ||theta~||^2
    int_phi_t: np.ndarray  # running int of ||phi~_t||_{V'}^2 + alpha ||phi~_t||^2
    int_theta_V: np.ndarray  # running int of eps ||theta~||_V^2
    extra: dict = field(default_factory=dict)

    @property
    def sup_D(self) -> float:
        return float(np.max(self.D))

    @property
    def total(self) -> np.ndarray:
        return self.D + self.int_phi_t + self.int_theta_V


def limit_trajectory(phi0, K, P, params: Params):
    """Every step of the limit problem together with the lifted temperature."""
    lim_params = replace(params, alpha=0.0, epsilon=0.0)
    states = run(initial_state(phi0), K, P, lim_params, stride=1)
    return [lift(s, K, P, lim_params) for s in states]


def _difference(dom, lifted, alpha, eps, rel_states, dt):
    n = len(lifted)
    D = np.empty(n)
    rate = np.zeros(n)
    thv = np.empty(n)
    prev = None
    for i, (a, b) in enumerate(zip(rel_states, lifted)):
        pd = a.phi - b.phi
        td = a.theta - b.theta
        D[i] = dom.vprime_norm2(pd) + alpha * dom.inner(pd, pd) + eps * dom.inner(td, td)
        thv[i] = eps * dom.v_norm2(td)
        if prev is not None:
            g = (pd - prev) / dt
            rate[i] = dom.vprime_norm2(g) + alpha * dom.inner(g, g)
        prev = pd
    int_rate = np.cumsum(rate) * dt
    int_th = np.concatenate([[0.0], np.cumsum(0.5 * (thv[1:] + thv[:-1])) * dt])
    return D, int_rate, int_th


def run_difference(phi0, theta0, K, P, params: Params, schedule, threads=1, lifted=None):
    """Integrate both problems from the same data and measure their distance.

    ``schedule`` is an iterable of ``(alpha, epsilon)`` pairs; the result maps
    each pair to a :class:`DifferenceSeries`.  ``theta0=None`` means the lift
    of ``phi0``.  The pair ``(0, 0)`` runs the lifted limit problem against
    itself.
    """
    dom = K.domain
    if lifted is None:
        lifted = limit_trajectory(phi0, K, P, params)
    if theta0 is None:
        theta0 = lifted[0].theta
    t = np.array([s.t for s in lifted])

    def one(pair):
        alpha, eps = (float(x) for x in pair)
        if alpha == 0 and eps == 0:
            rel = lifted
        else:
            p = replace(params, alpha=alpha, epsilon=eps)
            rel = run(initial_state(phi0, theta0), K, P, p, n_steps=len(lifted) - 1, stride=1)
        D, int_rate, int_th = _difference(dom, lifted, alpha, eps, rel, params.dt)
        return DifferenceSeries(alpha, eps, t, D, int_rate, int_th)

    pairs = [tuple(float(x) for x in pr) for pr in schedule]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, pairs))
    else:
        results = [one(pr) for pr in pairs]
    return dict(zip(pairs, results))


def second_difference_bound(phis, dt, domain: Domain, t_start=None) -> float:
    """Trapezoid value of ``int ||phi_tt||_{V'}^2`` from snapshots at uniform ``dt``.

    ``phi_tt`` is the centred second difference, so by default the integral
    runs over ``[dt, T - dt]``.  ``t_start`` moves the lower limit past an
    initial layer (``phis[0]`` is taken to be at ``t = 0``).
    """
    phis = np.asarray(phis)
    if t_start is not None:
        i0 = max(int(round(t_start / dt)) - 1, 0)
        phis = phis[i0:]
    if phis.shape[0] < 3:
        raise ValueError("need at least 3 snapshots to form second differences")
    tt = (phis[2:] - 2.0 * phis[1:-1] + phis[:-2]) / dt**2
    vals = np.array([domain.vprime_norm2(u) for u in tt])
    if vals.size == 1:
        return 0.0
    return float(np.sum(0.5 * (vals[1:] + vals[:-1])) * dt)
