"""Uniform cell-centred grids with a cosine-spectral Neumann Laplacian.

Fields are plain ``numpy`` arrays of shape ``Domain.shape``.  All spectral
work goes through the orthonormal DCT-II, whose basis vectors are exact
eigenvectors of the standard second-order finite-difference Neumann
Laplacian, so every operator here has a dense-matrix twin that agrees to
round-off.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft


class SingularSystemError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    """Box ``prod_i (0, L_i)`` split into ``n_i`` cells per axis."""

    lengths: tuple
    n: tuple

    def __post_init__(self):
        lengths = tuple(float(L) for L in np.atleast_1d(self.lengths))
        n = tuple(int(k) for k in np.atleast_1d(self.n))
        if len(lengths) != len(n) or len(n) not in (1, 2):
            raise ValueError("dim must be 1 or 2 with one length and one n per axis")
        if min(n) < 2 or min(lengths) <= 0:
            raise ValueError("need n_i >= 2 and L_i > 0")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "n", n)

    @classmethod
    def make(cls, n, lengths=1.0, dim=None):
        n = np.atleast_1d(n)
        if dim is not None and n.size == 1:
            n = np.repeat(n, dim)
        lengths = np.broadcast_to(np.atleast_1d(lengths), n.shape)
        return cls(tuple(lengths), tuple(n))

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def h(self) -> tuple:
        return tuple(L / k for L, k in zip(self.lengths, self.n))

    @property
    def quad_weight(self) -> float:
        return float(np.prod(self.h))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @cached_property
    def axes(self):
        """Cell-centre coordinates ``(j + 1/2) h`` per axis."""
        return tuple((np.arange(k) + 0.5) * hk for k, hk in zip(self.n, self.h))

    @cached_property
    def cell_centers(self):
        return np.meshgrid(*self.axes, indexing="ij")

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the FD Neumann Laplacian, indexed like DCT coefficients."""
        lam = np.zeros(self.shape)
        for ax, (k, hk) in enumerate(zip(self.n, self.h)):
            lam1 = (2.0 / hk**2) * (1.0 - np.cos(np.pi * np.arange(k) / k))
            lam1[0] = 0.0
            shp = [1] * self.dim
            shp[ax] = k
            lam = lam + lam1.reshape(shp)
        return lam

    @cached_property
    def lambda_min(self) -> float:
        return float(self.eigenvalues.flat[1:].min())

    @property
    def poincare_const(self) -> float:
        return 1.0 / self.lambda_min

    @property
    def embedding_const(self) -> float:
        # C_Omega with ||psi||_{V'} <= C_Omega ||psi||
        return max(1.0, float(np.sqrt(self.poincare_const)))

    def cosine_mode(self, k) -> np.ndarray:
        """Unnormalised discrete eigenvector ``prod_i cos(pi k_i (j_i + 1/2) / n_i)``."""
        k = np.atleast_1d(k)
        out = np.ones(self.shape)
        for ax in range(self.dim):
            v = np.cos(np.pi * k[ax] * (np.arange(self.n[ax]) + 0.5) / self.n[ax])
            shp = [1] * self.dim
            shp[ax] = self.n[ax]
            out = out * v.reshape(shp)
        return out

    def zeros(self):
        return np.zeros(self.shape)

    def constant(self, c):
        return np.full(self.shape, float(c))

    # spectral transforms ------------------------------------------------

    def dct(self, psi):
        return scipy.fft.dctn(psi, type=2, norm="ortho")

    def idct(self, coef):
        return scipy.fft.idctn(coef, type=2, norm="ortho")

    # basic functionals --------------------------------------------------

    def mean(self, psi) -> float:
        return float(np.mean(psi))

    def hat(self, psi):
        return psi - np.mean(psi)

    def inner(self, u, v) -> float:
        return float(np.vdot(u, v)) * self.quad_weight

    def l2_norm(self, psi) -> float:
        return np.sqrt(self.inner(psi, psi))

    def integral(self, psi) -> float:
        return float(np.sum(psi)) * self.quad_weight

    # operators ------------------------------------------------------------

    def apply_laplacian(self, psi):
        """``A_N psi`` (that is ``-Laplace psi`` with Neumann BC)."""
        return self.idct(self.eigenvalues * self.dct(psi))

    def solve_helmholtz(self, c0, c1, f, tol=1e-10):
        """Solve ``(c0 I + c1 A_N) u = f`` mode by mode.

        With ``c0 == 0`` the zero mode is fixed to 0 and ``f`` must be mean free.
        """
        coef = self.dct(f)
        denom = c0 + c1 * self.eigenvalues
        zero = (0,) * self.dim
        if c0 == 0:
            scale = max(1.0, float(np.max(np.abs(f))))
            if abs(self.mean(f)) > tol * scale:
                raise SingularSystemError(
                    f"c0 = 0 requires a mean-free right-hand side, got mean {self.mean(f):.3e}"
                )
            denom = denom.copy()
            denom[zero] = 1.0
            coef[zero] = 0.0
        return self.idct(coef / denom)

    def inverse_laplacian(self, f):
        """``A_N^{-1}`` applied to the mean-free part of ``f``."""
        return self.solve_helmholtz(0.0, 1.0, self.hat(f))

    # norms --------------------------------------------------------------------

    def grad_norm2(self, psi) -> float:
        """``||grad psi||^2`` as the quadratic form of ``A_N``."""
        c = self.dct(psi)
        return float(np.sum(self.eigenvalues * c * c)) * self.quad_weight

    def vprime_norm2(self, psi) -> float:
        c = self.dct(psi)
        lam = self.eigenvalues
        nz = lam > 0
        return float(np.sum(c[nz] ** 2 / lam[nz])) * self.quad_weight + self.mean(psi) ** 2

    def vprime_norm(self, psi) -> float:
        return float(np.sqrt(self.vprime_norm2(psi)))

    def v_norm2(self, psi) -> float:
        return self.grad_norm2(psi) + self.mean(psi) ** 2

    def v_norm(self, psi) -> float:
        return float(np.sqrt(self.v_norm2(psi)))

    def same_grid(self, other) -> bool:
        return self.n == other.n and self.lengths == other.lengths

