import numpy as np
import pytest

from nlch import Params, State, run
from nlch.diagnostics import (
    LyapunovParams,
    absorbing_entry,
    dissipation,
    energy_balance_residual,
    energy_epsilon,
    fit_decay_rate,
    h_norm,
    h_norm2,
    lyapunov_E,
    lyapunov_shift_bound,
    mu_mean_constant,
    x_metric,
)
from nlch.harness.config import make_field
from nlch.kernel import nonlocal_energy


def smooth(d, seed, amplitude=0.5, mean=0.1):
    return make_field(d, {"kind": "seeded-random", "seed": seed, "amplitude": amplitude, "cutoff": 4, "mean": mean})


def test_lyapunov_params_validation():
    with pytest.raises(ValueError):
        LyapunovParams(xi=0.1, tau=0.2)
    with pytest.raises(ValueError):
        LyapunovParams(C_F_shift=-1.0)


def test_energy_homogeneous(setup16):
    d, K, P = setup16
    s = State(0.0, d.constant(0.3), d.constant(0.2))
    p = Params()
    assert energy_epsilon(s, K, P, p) == pytest.approx(P.F(0.3) * d.volume + 0.5 * p.epsilon * 0.04 * d.volume)


def test_energy_residual_shrinks_with_dt(setup16):
    d, K, P = setup16
    phi0, th0 = smooth(d, 1), smooth(d, 2, 0.2)
    res = []
    for dt in (4e-3, 2e-3, 1e-3):
        p = Params(dt=dt, T=0.2)
        res.append(energy_balance_residual(run(State(0.0, phi0, th0), K, P, p), K, P, p)[-1])
    assert res[0] > res[1] > res[2] > 0


def test_limit_dissipation_scaling(setup16):
    d, K, P = setup16
    p = Params(alpha=0, epsilon=0, dt=1e-3)
    s = run(State(0.0, smooth(d, 3)), K, P, p, n_steps=1)[-1]
    assert dissipation(s, K, p) == pytest.approx(d.grad_norm2(s.mu) / 1.25)
    res = energy_balance_residual(run(State(0.0, smooth(d, 3)), K, P, p, n_steps=200), K, P, p)
    assert res[-1] < 5e-2 * energy_epsilon(State(0.0, smooth(d, 3)), K, P, p)


def test_h_norm_and_metric(setup16):
    d, K, P = setup16
    p = Params(alpha=0.2, epsilon=0.3)
    phi, th = smooth(d, 4), smooth(d, 5)
    s = State(0.0, phi, th)
    expected = d.vprime_norm2(phi) + 0.2 * d.inner(phi, phi) + 0.3 * d.inner(th, th)
    assert h_norm2(s, p, d) == pytest.approx(expected)
    assert h_norm(s, p, d) ** 2 == pytest.approx(expected)
    assert x_metric(s, s, P, p, d) == 0.0
    z = State(0.0, d.zeros(), d.zeros())
    assert x_metric(s, z, P, p, d) >= h_norm(s, p, d)


def test_lyapunov_relation_to_energy(setup16):
    # E = xi ||phi_hat||_H^2 + 2 E_eps + M0 (a, phi) - eps N0^2 |Omega|
    d, K, P = setup16
    p = Params()
    phi, th = smooth(d, 6), smooth(d, 7, mean=0.05)
    s = State(0.0, phi, th)
    LP = LyapunovParams()
    M0, N0 = d.mean(phi), d.mean(th)
    ph = phi - M0
    lhs = lyapunov_E(s, K, P, p, LP)
    rhs = (
        LP.xi * (d.vprime_norm2(ph) + p.alpha * d.inner(ph, ph))
        + 2 * energy_epsilon(s, K, P, p)
        + M0 * d.inner(K.a_field, phi)
        - p.epsilon * N0**2 * d.volume
    )
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert 2 * nonlocal_energy(K, phi) >= 0


def test_shift_bound_makes_lyapunov_positive(setup16):
    d, K, P = setup16
    p = Params()
    for seed in range(10):
        phi = smooth(d, seed, amplitude=3.0, mean=0.6)
        M0 = d.mean(phi)
        LP = LyapunovParams(C_F_shift=lyapunov_shift_bound(K, P, M0))
        assert lyapunov_E(State(0.0, phi, d.zeros()), K, P, p, LP) > 0


def test_absorbing_entry():
    t = np.arange(6.0)
    assert absorbing_entry(t, [5, 4, 3, 2, 1, 1], 2.5) == 3.0
    assert absorbing_entry(t, [1, 1, 1, 1, 1, 1], 2.5) == 0.0
    assert absorbing_entry(t, [1, 3, 1, 1, 1, 3], 2.5) is None
    assert absorbing_entry(t, [3, 1, 3, 1, 1, 1], 2.5) == 3.0


def test_fit_decay_rate_synthetic():
    t = np.linspace(0, 5, 501)
    fit = fit_decay_rate(t, 2.0 + 3.0 * np.exp(-1.7 * t))
    assert fit["nu"] == pytest.approx(1.7, rel=1e-2)
    assert fit["r2"] > 0.999
    assert fit_decay_rate(t, np.ones_like(t))["nu"] == 0.0


def test_mu_mean_constant(setup16):
    d, K, P = setup16
    p = Params()
    states = run(State(0.0, smooth(d, 8), smooth(d, 9, 0.2)), K, P, Params(T=0.05))
    c = mu_mean_constant(states, p, d)
    for s in states[1:]:
        assert abs(d.mean(s.mu)) <= c * abs(d.mean(s.phi)) + p.delta0 * abs(d.mean(s.theta)) + 1e-12
