import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings, strategies as st

from nlch import Domain, Params, State, lift, run, run_difference, step_limit, step_relaxation
from nlch.diagnostics import energy_epsilon
from nlch.dynamics import (
    chemical_potential_explicit,
    initial_state,
    second_difference_bound,
)
from nlch.errors import BlowUpError, ConfigError
from nlch.harness.config import make_field
from oracles import chemical_potential_dense, linearized_limit_phi_tt_integral, rk4_relaxation


def smooth(d, seed, amplitude=0.5, mean=0.1):
    return make_field(d, {"kind": "seeded-random", "seed": seed, "amplitude": amplitude, "cutoff": 4, "mean": mean})


def test_params_validation():
    with pytest.raises(ValueError):
        Params(dt=0.0)
    with pytest.raises(ValueError):
        Params(alpha=2.0)
    with pytest.raises(ValueError):
        Params(delta=2.0, delta0=1.0)
    assert Params(alpha=0, epsilon=0).is_limit
    assert Params(dt=1e-3, T=1.0).n_steps == 1000
    d = Domain.make(8)
    with pytest.raises(ConfigError):
        Params(m=0.5).check_means(d, d.constant(0.6))


def test_chemical_potential_homogeneous(setup16):
    d, K, P = setup16
    p = Params()
    mu = chemical_potential_explicit(d.constant(0.3), d.constant(-0.2), K, P, p)
    assert np.all(mu == mu.flat[0])
    assert mu.flat[0] == pytest.approx(P.dF(0.3) + 0.5 * 0.2)


def test_chemical_potential_matches_dense(setup16):
    d, K, P = setup16
    rng = np.random.default_rng(5)
    phi, theta = rng.standard_normal(d.shape), rng.standard_normal(d.shape)
    mu = chemical_potential_explicit(phi, theta, K, P, Params())
    np.testing.assert_allclose(mu, chemical_potential_dense(K, P, phi, theta, 0.5), atol=1e-11)


@pytest.mark.parametrize("M,N", [(0.0, 0.0), (0.3, -0.7), (-0.9, 0.25)])
def test_homogeneous_fixed_points_bitwise(setup16, M, N):
    d, K, P = setup16
    s = State(0.0, d.constant(M), d.constant(N))
    for _ in range(5):
        new = step_relaxation(s, K, P, Params())
        assert np.array_equal(new.phi, s.phi) and np.array_equal(new.theta, s.theta)
        s = new
    s = State(0.0, d.constant(M))
    new = step_limit(s, K, P, Params(alpha=0, epsilon=0))
    assert np.array_equal(new.phi, s.phi)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_conservation_per_step(seed, M, N):
    d = Domain.make(16)
    from conftest import DEFAULT_KERNEL
    from nlch import PotentialSpec, build_kernel

    K, P = build_kernel(d, DEFAULT_KERNEL), PotentialSpec()
    s = State(0.0, smooth(d, seed, mean=M), smooth(d, seed + 1, amplitude=0.2, mean=N))
    new = step_relaxation(s, K, P, Params())
    assert abs(d.mean(new.phi) - d.mean(s.phi)) < 1e-13
    assert abs(d.mean(new.theta) - d.mean(s.theta)) < 1e-13
    lim = step_limit(State(0.0, s.phi), K, P, Params(alpha=0, epsilon=0))
    assert abs(d.mean(lim.phi) - d.mean(s.phi)) < 1e-13


def test_delta_zero_relaxation_matches_limit(setup16):
    d, K, P = setup16
    phi, theta = smooth(d, 1), smooth(d, 2, amplitude=0.3)
    rel = step_relaxation(State(0.0, phi, theta), K, P, Params(alpha=0.0, epsilon=1e-6, delta=0.0))
    lim = step_limit(State(0.0, phi), K, P, Params(alpha=0.0, epsilon=0.0, delta=0.0))
    assert np.abs(rel.phi - lim.phi).max() < 1e-12


def test_relaxation_needs_positive_epsilon(setup16):
    d, K, P = setup16
    with pytest.raises(ValueError):
        step_relaxation(State(0.0, d.zeros(), d.zeros()), K, P, Params(alpha=0.1, epsilon=0.0))
    with pytest.raises(ValueError):
        step_relaxation(State(0.0, d.zeros()), K, P, Params())


def test_blow_up_reports_time(setup16):
    d, K, P = setup16
    p = Params(alpha=0, epsilon=0, dt=0.05, T=50.0, S=0.0)
    with pytest.raises(BlowUpError) as e:
        run(State(0.0, smooth(d, 3)), K, P, p)
    assert e.value.t > 0 and e.value.state is not None
    assert np.all(np.isfinite(e.value.state.phi))


def test_heat_equation_limit_of_scheme(setup16):
    # with delta = 0 the temperature solves the implicit-Euler heat equation on its own
    d, K, P = setup16
    theta = smooth(d, 4)
    p = Params(delta=0.0, dt=1e-3)
    new = step_relaxation(State(0.0, smooth(d, 5), theta), K, P, p)
    ref = d.solve_helmholtz(p.epsilon / p.dt, 1.0, p.epsilon / p.dt * theta)
    np.testing.assert_allclose(new.theta, ref, atol=1e-13)


def test_rk4_consistency_first_order(setup16):
    d, K, P = setup16
    phi0, th0 = smooth(d, 3), smooth(d, 4, amplitude=0.2, mean=0.05)
    horizon, dt0 = 0.02, 2e-3
    ref = rk4_relaxation(K, P, 0.1, 0.1, 0.5, phi0, th0, horizon, dt0 / 100)
    errs = []
    for dt in (dt0, dt0 / 2, dt0 / 4, dt0 / 8):
        s = run(initial_state(phi0, th0), K, P, Params(dt=dt, T=horizon))[-1]
        errs.append(max(np.abs(s.phi - ref[0]).max(), np.abs(s.theta - ref[1]).max()))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios >= 1.7) & (ratios <= 2.3)), ratios
    slope = np.polyfit(np.log([dt0 / 2**k for k in range(4)]), np.log(errs), 1)[0]
    assert abs(slope - 1.0) <= 0.2


def test_energy_nonincreasing(setup16):
    d, K, P = setup16
    p = Params(dt=1e-3, T=0.5)
    E = [energy_epsilon(s, K, P, p) for s in run(State(0.0, smooth(d, 6, amplitude=1.0), smooth(d, 7, 0.3)), K, P, p)]
    assert np.max(np.diff(E)) <= 1e-10


def test_lift_examples(setup16):
    d, K, P = setup16
    p = Params(alpha=0, epsilon=0)
    th = lift(State(0.0, d.constant(0.4)), K, P, p).theta
    np.testing.assert_allclose(th, 0.5 * P.dF(0.4), rtol=1e-14)
    phi = smooth(d, 8)
    assert np.all(lift(State(0.0, phi), K, P, replace(p, delta=0.0)).theta == 0.0)
    th = lift(State(0.0, phi), K, P, p).theta
    np.testing.assert_allclose(th / 0.5, chemical_potential_explicit(phi, None, K, P, p), atol=1e-12)


def test_run_difference_examples(setup16):
    d, K, P = setup16
    phi0 = smooth(d, 9)
    p = Params(dt=1e-3, T=0.05)
    out = run_difference(phi0, None, K, P, p, [(0.0, 0.0), (0.1, 0.1), (1e-3, 1e-3)])
    assert np.all(np.abs(out[(0.0, 0.0)].D) <= 1e-12)
    for ser in out.values():
        assert abs(ser.D[0]) <= 1e-12
        assert len(ser.t) == p.n_steps + 1
    assert out[(0.1, 0.1)].sup_D > out[(1e-3, 1e-3)].sup_D > 0


def test_run_difference_threads_deterministic(setup16):
    d, K, P = setup16
    phi0 = smooth(d, 10)
    p = Params(dt=1e-3, T=0.02)
    sched = [(0.1, 0.1), (0.01, 0.01), (1e-3, 1e-3)]
    a = run_difference(phi0, None, K, P, p, sched, threads=1)
    b = run_difference(phi0, None, K, P, p, sched[::-1], threads=3)
    for key in sched:
        assert np.array_equal(a[key].D, b[key].D)


def test_second_difference_homogeneous_and_errors(setup16):
    d, K, P = setup16
    p = Params(alpha=0, epsilon=0, dt=1e-3, T=0.01)
    tr = run(State(0.0, d.constant(0.2)), K, P, p)
    assert second_difference_bound([s.phi for s in tr], p.dt, d) == 0.0
    with pytest.raises(ValueError):
        second_difference_bound([d.zeros(), d.zeros()], p.dt, d)


def test_second_difference_linearisation_oracle():
    from conftest import DEFAULT_KERNEL
    from nlch import PotentialSpec, build_kernel

    d = Domain.make(32)
    K, P = build_kernel(d, DEFAULT_KERNEL), PotentialSpec()
    M, amp, T, t0 = 0.1, 1e-3, 0.5, 0.05
    phi0 = M + amp * d.cosine_mode(1)
    ref = linearized_limit_phi_tt_integral(K, P, 0.5, M, phi0 - M, t0, T)
    p = Params(alpha=0, epsilon=0, dt=2.5e-4, T=T)
    val = second_difference_bound([s.phi for s in run(State(0.0, phi0), K, P, p)], p.dt, d, t_start=t0)
    assert abs(val - ref) <= 0.05 * ref
