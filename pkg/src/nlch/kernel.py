"""Even interaction kernels and the truncated convolution over the box."""

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .domain import Domain
from .errors import HypothesisViolation

FAMILIES = ("gaussian", "tophat")


def _profile(family, params, r2):
    beta = float(params["amplitude"])
    if family == "gaussian":
        sigma = float(params["width"])
        return beta * np.exp(-r2 / (2.0 * sigma**2))
    if family == "tophat":
        radius = float(params["radius"])
        return np.where(r2 <= radius**2, beta, 0.0)
    raise ValueError(f"unknown kernel family {family!r}; expected one of {FAMILIES}")


def _offset_grid(domain):
    """Offsets ``z = k h`` with ``|k_i| <= n_i - 1``, as squared radius and index arrays."""
    ks = [np.arange(-(k - 1), k) for k in domain.n]
    idx = np.meshgrid(*ks, indexing="ij")
    r2 = sum((ki * hk) ** 2 for ki, hk in zip(idx, domain.h))
    return idx, r2


@dataclass(frozen=True, eq=False)
class KernelData:
    domain: Domain
    family: str
    params: dict
    stencil: np.ndarray  # J(z) on the offset lattice, shape (2n-1, ...)
    a_field: np.ndarray
    c_J: float
    d_J: float
    a_star: float
    a_0: float

    @property
    def a_min(self) -> float:
        return float(self.a_field.min())

    def convolve(self, phi):
        return convolve(self, phi)


def _centered_l1(domain, idx, values):
    # quadrature over the box centred at the origin; offsets on its faces get half weight
    w = np.ones(values.shape)
    for ki, k in zip(idx, domain.n):
        w = w * np.where(np.abs(ki) * 2 < k, 1.0, np.where(np.abs(ki) * 2 == k, 0.5, 0.0))
    return float(np.sum(w * np.abs(values))) * domain.quad_weight


def build_kernel(domain: Domain, shape: dict) -> KernelData:
    """Sample a radial kernel family on the offset lattice and derive ``a = J * 1``.

    ``shape`` holds ``family`` plus ``amplitude`` and ``width`` (gaussian) or
    ``radius`` (tophat).  An optional ``target_cJ`` rescales the amplitude so
    that ``||J||_{L^1}`` over the centred box equals that value.
    """
    family = shape.get("family", "gaussian")
    params = {k: v for k, v in shape.items() if k != "family"}
    for key in ("amplitude", "width", "radius"):
        if key in params and float(params[key]) < 0:
            raise ValueError(f"kernel parameter {key} must be nonnegative")
    if family == "gaussian" and float(params.get("width", 1.0)) <= 0:
        raise ValueError("gaussian width must be positive")

    idx, r2 = _offset_grid(domain)
    stencil = _profile(family, params, r2)
    if params.get("target_cJ") is not None:
        mass = _centered_l1(domain, idx, stencil)
        if mass <= 0:
            raise HypothesisViolation("H1", "kernel has zero mass; cannot rescale", witness=None)
        stencil = stencil * (float(params["target_cJ"]) / mass)
        params["amplitude"] = float(params["amplitude"]) * float(params["target_cJ"]) / mass

    c_J = _centered_l1(domain, idx, stencil)
    grads = np.gradient(stencil, *domain.h) if domain.dim > 1 else [np.gradient(stencil, domain.h[0])]
    d_J = _centered_l1(domain, idx, np.sqrt(sum(g * g for g in grads)))

    a_field = _fft_convolve(domain, stencil, np.ones(domain.shape))
    a_min = float(a_field.min())
    if not a_min > 0:
        j = np.unravel_index(int(np.argmin(a_field)), domain.shape)
        raise HypothesisViolation(
            "H1", f"a(x) = (J*1)(x) must be positive, found {a_min:.3e} at cell {j}", witness=j
        )
    return KernelData(
        domain=domain,
        family=family,
        params=params,
        stencil=stencil,
        a_field=a_field,
        c_J=c_J,
        d_J=d_J,
        a_star=float(a_field.max()),
        a_0=0.999 * a_min,
    )


def _fft_convolve(domain, stencil, phi):
    # 'valid' on the (2n-1)-long stencil picks exactly offsets j - i for i, j in the box
    out = scipy.signal.fftconvolve(stencil, phi, mode="valid")
    return out * domain.quad_weight


def convolve(K: KernelData, phi) -> np.ndarray:
    """Truncated convolution ``(J*phi)(x) = int_Omega J(x-y) phi(y) dy``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != K.domain.shape:
        raise ValueError(f"field shape {phi.shape} does not match kernel domain {K.domain.shape}")
    return _fft_convolve(K.domain, K.stencil, phi)


def nonlocal_energy(K: KernelData, phi) -> float:
    """``(1/4) int int J(x-y) (phi(x)-phi(y))^2`` as ``(1/2)[(a phi, phi) - (J*phi, phi)]``."""
    d = K.domain
    return 0.5 * (d.inner(K.a_field * phi, phi) - d.inner(convolve(K, phi), phi))


def check_h6(K: KernelData, P) -> dict:
    """Compare ``c_0`` of (H2) with ``c_J`` and report the quasiconvexity margin.

    Never raises; the caller decides what a failure means.
    """
    from .potential import h2_constant

    c0 = h2_constant(P, K.a_min)
    d = K.domain
    # int_Omega J(y) dy for y in the box itself (not centred)
    r2 = sum(x * x for x in d.cell_centers)
    j_box = float(np.sum(_profile(K.family, K.params, r2))) * d.quad_weight
    margin = K.a_min - j_box + (c0 - K.a_star)
    return {
        "c_0": c0,
        "c_J": K.c_J,
        "pass": bool(c0 > K.c_J),
        "quasiconvexity_margin": margin,
    }
