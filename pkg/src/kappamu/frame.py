"""Multilinear algebra on a global frame with constant structure functions.

A :class:`FrameManifold` is a homogeneous space presented by a Lie algebra
``g = m + h`` where ``m`` (the first ``dim`` generators) is identified with
the tangent space and ``h`` (the trailing ``isotropy`` generators) acts on
``m`` by its brackets.  With ``isotropy == 0`` this is just a Lie group with
a left-invariant frame.  Tensors have constant frame components, so every
operation below is finite linear algebra.

Brackets of tangent vectors mean the ``m``-projection of the algebra
bracket; for invariant tensors this projection gives the correct tensorial
answer for every operation in the engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels
from .backend import ScalarBackend, SingularMatrixError


class DegeneratePlaneError(ValueError):
    """The plane spanned by two vectors is degenerate for the metric."""


@dataclass(frozen=True)
class FrameManifold:
    brackets: np.ndarray
    dim: int
    backend: ScalarBackend = field(default_factory=ScalarBackend)
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        C = self.backend.array(self.brackets)
        object.__setattr__(self, "brackets", C)
        D = C.shape[0]
        if C.ndim != 3 or C.shape != (D, D, D):
            raise ValueError(f"brackets must be a cubic 3-index table, got shape {C.shape}")
        if self.dim % 2 != 1 or not 1 <= self.dim <= D:
            raise ValueError(f"tangent dimension must be odd and at most {D}, got {self.dim}")
        anti = self.backend.max_abs(C + C.transpose(1, 0, 2))
        if not self.backend.ok(anti):
            raise ValueError(f"brackets are not antisymmetric (residual {anti})")
        if not self.labels:
            object.__setattr__(self, "labels", default_labels(self.n, self.isotropy))
        elif len(self.labels) != D:
            raise ValueError("one label per generator is required")

    @property
    def n(self) -> int:
        return (self.dim - 1) // 2

    @property
    def isotropy(self) -> int:
        return self.brackets.shape[0] - self.dim

    @property
    def tangent_brackets(self) -> np.ndarray:
        """``[e_i, e_j]`` projected to the tangent frame."""
        d = self.dim
        return self.brackets[:d, :d, :d]

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", u, v, self.tangent_brackets)

    def isotropy_action(self) -> np.ndarray:
        """Matrices of ``ad(E_p)`` restricted to the tangent frame, shape ``(isotropy, dim, dim)``.

        ``A[p][:, j]`` is the tangent component of ``[E_p, e_j]``.
        """
        d = self.dim
        return np.einsum("pjk->pkj", self.brackets[d:, :d, :d])

    def jacobi_residual(self):
        C = self.brackets
        # J[i,j,k,:] = [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]
        t = np.einsum("ijm,mkl->ijkl", C, C)
        J = t + np.einsum("jkil->ijkl", t) + np.einsum("kijl->ijkl", t)
        return self.backend.max_abs(J)

    def cast(self, backend: ScalarBackend) -> "FrameManifold":
        if backend == self.backend:
            return self
        return FrameManifold(backend.cast(self.brackets), self.dim, backend, self.labels)


def default_labels(n: int, isotropy: int = 0) -> tuple[str, ...]:
    labels = ["xi"] + [f"X{i}" for i in range(1, n + 1)] + [f"Y{i}" for i in range(1, n + 1)]
    return tuple(labels + [f"E{p}" for p in range(1, isotropy + 1)])


@dataclass(frozen=True)
class ConnectionCoefficients:
    """``gamma[i, j, k]`` is component ``k`` of ``nabla_{e_i} e_j``."""

    gamma: np.ndarray
    backend: ScalarBackend

    def derivative_matrix(self, i: int) -> np.ndarray:
        """Matrix of ``nabla_{e_i}`` acting on frame components (column j = nabla_i e_j)."""
        return self.gamma[i].T

    def torsion_residual(self, m: FrameManifold):
        T = self.gamma - self.gamma.transpose(1, 0, 2) - m.tangent_brackets
        return self.backend.max_abs(T)

    def metricity_residual(self, g: np.ndarray):
        low = np.einsum("ijl,lk->ijk", self.gamma, g)
        return self.backend.max_abs(low + low.transpose(0, 2, 1))

    def covariant(self, i: int, vec: np.ndarray) -> np.ndarray:
        return vec @ self.gamma[i]


@dataclass(frozen=True)
class CurvatureTensor:
    """``R[i, j, k, l]`` is component ``l`` of ``R(e_i, e_j) e_k``."""

    R: np.ndarray
    lowered: np.ndarray
    ricci: np.ndarray
    scalar: object
    backend: ScalarBackend

    def apply(self, X, Y, Z) -> np.ndarray:
        return np.einsum("i,j,k,ijkl->l", X, Y, Z, self.R)

    def antisymmetry_residual(self):
        return self.backend.max_abs(self.R + self.R.transpose(1, 0, 2, 3))

    def bianchi_residual(self):
        R = self.R
        B = R + np.einsum("jkil->ijkl", R) + np.einsum("kijl->ijkl", R)
        return self.backend.max_abs(B)

    def pair_symmetry_residual(self):
        L = self.lowered
        return self.backend.max_abs(L - L.transpose(2, 3, 0, 1))

    def ricci_symmetry_residual(self):
        return self.backend.max_abs(self.ricci - self.ricci.T)


def _check_metric(m: FrameManifold, g: np.ndarray) -> np.ndarray:
    g = m.backend.cast(np.asarray(g))
    if g.shape != (m.dim, m.dim):
        raise ValueError(f"metric must be {m.dim}x{m.dim}, got {g.shape}")
    return g


def koszul_connection(m: FrameManifold, g: np.ndarray) -> ConnectionCoefficients:
    """Levi-Civita connection from the Koszul formula on constant frames."""
    g = _check_metric(m, g)
    try:
        ginv = m.backend.inv(g)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"metric is singular: {exc}") from None
    gamma = kernels.koszul_gamma(m.brackets, g, ginv, m.dim)
    return ConnectionCoefficients(gamma, m.backend)


def connection_from_gamma(m: FrameManifold, gamma: np.ndarray) -> ConnectionCoefficients:
    return ConnectionCoefficients(m.backend.cast(np.asarray(gamma)), m.backend)


def curvature(m: FrameManifold, conn: ConnectionCoefficients, g: np.ndarray) -> CurvatureTensor:
    """Curvature with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]; Ric(Y,Z) = tr(X -> R(X,Y)Z)."""
    g = _check_metric(m, g)
    R = kernels.riemann(conn.gamma, m.brackets, m.dim)
    return curvature_from_tensor(m, R, g)


def curvature_from_tensor(m: FrameManifold, R: np.ndarray, g: np.ndarray) -> CurvatureTensor:
    bk = m.backend
    R = bk.cast(np.asarray(R))
    lowered = np.einsum("ijkl,lw->ijkw", R, g)
    ricci = np.einsum("ijki->jk", R)
    ginv = bk.inv(g)
    scalar = np.einsum("jk,jk->", ginv, ricci)
    return CurvatureTensor(R, lowered, ricci, scalar, bk)


def sectional_curvature(curv: CurvatureTensor, g: np.ndarray, X: np.ndarray, Y: np.ndarray):
    gxx, gyy, gxy = X @ g @ X, Y @ g @ Y, X @ g @ Y
    denom = gxx * gyy - gxy * gxy
    if curv.backend.is_zero(denom):
        raise DegeneratePlaneError(f"degenerate plane: g(X,X)g(Y,Y) - g(X,Y)^2 = {denom}")
    num = np.einsum("i,j,k,l,ijkl->", X, Y, Y, X, curv.lowered)
    return num / denom


def lie_derivative_endo(m: FrameManifold, V: np.ndarray, A: np.ndarray) -> np.ndarray:
    """(L_V A) e_j = [V, A e_j] - A [V, e_j]."""
    adV = np.einsum("i,ijk->kj", V, m.tangent_brackets)  # column j = [V, e_j]
    return adV @ A - A @ adV


def lie_derivative_vector(m: FrameManifold, V: np.ndarray, W: np.ndarray) -> np.ndarray:
    return m.bracket(V, W)


def covariant_derivative_endo(conn: ConnectionCoefficients, A: np.ndarray) -> np.ndarray:
    """``out[i]`` is the matrix of ``nabla_{e_i} A`` (column j = (nabla_i A) e_j)."""
    G = np.einsum("ijk->ikj", conn.gamma)
    return np.einsum("ikl,lj->ikj", G, A) - np.einsum("kl,ilj->ikj", A, G)


def covariant_derivative_vector(conn: ConnectionCoefficients, V: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> nabla_X V`` (column i = nabla_{e_i} V)."""
    return np.einsum("j,ijk->ki", V, conn.gamma)


def exterior_derivative_oneform(m: FrameManifold, eta: np.ndarray) -> np.ndarray:
    """d eta(e_i, e_j) = -1/2 eta([e_i, e_j]) for constant eta."""
    return -np.einsum("ijk,k->ij", m.tangent_brackets, eta) * m.backend.half()


def bracket_closure_residual(m: FrameManifold, basis: np.ndarray, complement: np.ndarray):
    """Largest component of ``[u, v]`` outside ``span(basis)`` for basis pairs.

    ``complement`` holds vectors spanning a complement; together with
    ``basis`` they form an invertible change of frame.
    """
    bk = m.backend
    P = np.hstack([basis, complement])
    Pinv = bk.inv(P)
    k = basis.shape[1]
    worst = bk.tol * 0
    for a, b in combinations(range(k), 2):
        w = m.bracket(basis[:, a], basis[:, b])
        coords = Pinv @ w
        worst = max(worst, bk.max_abs(coords[k:]))
    return worst
