"""Reference numpy kernels for the Levi-Civita connection and curvature.

Works for both float64 and object (Fraction) arrays, so the exact backend
always runs through here.  Index conventions:

* ``C[i, j, k]``: component ``k`` of ``[e_i, e_j]`` over the full algebra
  (tangent frame ``0..dm-1`` followed by isotropy generators).
* ``gamma[i, j, k]``: component ``k`` of ``nabla_{e_i} e_j``.
* ``R[i, j, k, l]``: component ``l`` of ``R(e_i, e_j) e_k``.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def _half(a: np.ndarray):
    return Fraction(1, 2) if a.dtype == object else 0.5


def koszul_gamma(C: np.ndarray, g: np.ndarray, ginv: np.ndarray, dm: int) -> np.ndarray:
    Cm = C[:dm, :dm, :dm]
    # cg[i, j, k] = g([e_i, e_j], e_k)
    cg = np.einsum("ijl,lk->ijk", Cm, g)
    # 2 g(nabla_i e_j, e_k) = -g([e_j,e_k],e_i) + g([e_k,e_i],e_j) + g([e_i,e_j],e_k)
    low = (np.einsum("jki->ijk", -cg) + np.einsum("kij->ijk", cg) + cg) * _half(cg)
    return np.einsum("ijl,lk->ijk", low, ginv)


def riemann(gamma: np.ndarray, C: np.ndarray, dm: int) -> np.ndarray:
    """Curvature of an invariant connection on a reductive frame model.

    R(e_i,e_j)e_k = nabla_i nabla_j e_k - nabla_j nabla_i e_k - nabla_{[e_i,e_j]_m} e_k
                    - rho([e_i,e_j]_h) e_k
    """
    first = np.einsum("jkm,iml->ijkl", gamma, gamma)
    out = first - np.einsum("jikl->ijkl", first)
    out = out - np.einsum("ijm,mkl->ijkl", C[:dm, :dm, :dm], gamma)
    if C.shape[0] > dm:
        out = out - np.einsum("ijp,pkl->ijkl", C[:dm, :dm, dm:], C[dm:, :dm, :dm])
    return out
