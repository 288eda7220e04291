"""Slow, independent reference implementations used only by the tests.

Nothing here goes through the DCT or FFT paths of the package: operators are
assembled as dense matrices and convolutions are direct double sums.
"""

import numpy as np
import scipy.linalg


def dense_laplacian_1d(n, h):
    """Second-order FD Neumann matrix for ``-d^2/dx^2`` on cell centres (ghost reflection)."""
    T = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    T[0, 0] = T[-1, -1] = 1.0
    return T / h**2


def dense_laplacian(domain):
    mats = [dense_laplacian_1d(k, hk) for k, hk in zip(domain.n, domain.h)]
    if domain.dim == 1:
        return mats[0]
    I0, I1 = np.eye(domain.n[0]), np.eye(domain.n[1])
    return np.kron(mats[0], I1) + np.kron(I0, mats[1])


def dense_vprime_norm2(domain, psi):
    A = dense_laplacian(domain)
    v = psi.ravel()
    m = v.mean()
    u = np.linalg.lstsq(A, v - m, rcond=None)[0]
    return float(np.dot(u, v - m)) * domain.quad_weight + m * m


def dense_helmholtz(domain, c0, c1, f):
    A = c0 * np.eye(domain.size) + c1 * dense_laplacian(domain)
    return np.linalg.solve(A, f.ravel()).reshape(domain.shape)


def kernel_value(K, z2):
    """``J`` at squared distance ``z2``, recomputed from the family formula."""
    p = K.params
    if K.family == "gaussian":
        return p["amplitude"] * np.exp(-z2 / (2.0 * p["width"] ** 2))
    if K.family == "tophat":
        return np.where(z2 <= p["radius"] ** 2, p["amplitude"], 0.0)
    raise ValueError(K.family)


def kernel_matrix(K):
    """Dense ``J(x_i - x_j) |cell|`` over all pairs of cell centres."""
    d = K.domain
    X = np.stack([c.ravel() for c in d.cell_centers], axis=1)
    z2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    return kernel_value(K, z2) * d.quad_weight


def convolve_direct(K, phi):
    out = np.zeros(K.domain.size)
    Jm = kernel_matrix(K)
    v = phi.ravel()
    for i in range(K.domain.size):
        out[i] = sum(Jm[i, j] * v[j] for j in range(K.domain.size))
    return out.reshape(K.domain.shape)


def nonlocal_energy_direct(K, phi):
    """``(1/4) sum_i sum_j J(x_i - x_j) (phi_i - phi_j)^2 |cell|^2``."""
    Jm = kernel_matrix(K)
    v = phi.ravel()
    diff2 = (v[:, None] - v[None, :]) ** 2
    return 0.25 * float(np.sum(Jm * diff2)) * K.domain.quad_weight


def chemical_potential_dense(K, P, phi, theta, delta):
    Jm = kernel_matrix(K)
    a = Jm.sum(axis=1)
    v = phi.ravel()
    mu = a * v - Jm @ v + P.dF(v)
    if theta is not None:
        mu = mu - delta * theta.ravel()
    return mu.reshape(phi.shape)


def relaxation_rhs(K, P, alpha, eps, delta, phi, theta):
    """Time derivatives of the semi-discrete relaxation system (dense matrices).

    ``(I + alpha A) phi_t = -A (r(phi) - delta theta)``,
    ``eps theta_t = -A theta - delta phi_t``.
    """
    d = K.domain
    A = dense_laplacian(d)
    mu0 = chemical_potential_dense(K, P, phi, theta, delta).ravel()
    phi_t = np.linalg.solve(np.eye(d.size) + alpha * A, -A @ mu0)
    theta_t = (-A @ theta.ravel() - delta * phi_t) / eps
    return phi_t.reshape(d.shape), theta_t.reshape(d.shape)


def rk4_relaxation(K, P, alpha, eps, delta, phi, theta, T, dt):
    phi, theta = phi.copy(), theta.copy()
    f = lambda p, q: relaxation_rhs(K, P, alpha, eps, delta, p, q)
    for _ in range(int(round(T / dt))):
        k1 = f(phi, theta)
        k2 = f(phi + 0.5 * dt * k1[0], theta + 0.5 * dt * k1[1])
        k3 = f(phi + 0.5 * dt * k2[0], theta + 0.5 * dt * k2[1])
        k4 = f(phi + dt * k3[0], theta + dt * k3[1])
        phi = phi + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        theta = theta + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return phi, theta


def linearized_limit_phi_tt_integral(K, P, delta, M, u0, t0, t1, n_quad=20001):
    """``int_{t0}^{t1} ||phi_tt||_{V'}^2`` for the limit problem linearised at ``phi = M``.

    The linear system ``(1 + delta^2) u_t = -A L u`` with
    ``L = diag(a + F''(M)) - J`` is solved exactly by eigendecomposition.
    """
    d = K.domain
    A = dense_laplacian(d)
    Jm = kernel_matrix(K)
    L = np.diag(Jm.sum(axis=1) + P.ddF(M)) - Jm
    B = -A @ L / (1.0 + delta**2)
    w, V = scipy.linalg.eig(B)
    c = np.linalg.solve(V, u0.ravel())
    tt = np.linspace(t0, t1, n_quad)
    vals = []
    for t in tt:
        u = (V @ (c * w**2 * np.exp(w * t))).real.reshape(d.shape)
        vals.append(dense_vprime_norm2(d, u))
    return float(np.trapezoid(vals, tt))
