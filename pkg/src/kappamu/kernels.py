"""Kernel dispatch: compiled float64 kernels when available, numpy otherwise.

The compiled module is picked once at import.  Setting ``KMU_PURE_PYTHON=1``
forces the numpy path.  Object (exact) arrays always use numpy.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("KMU_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python kernels requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

KERNEL_BACKEND = "cython" if _ckernels is not None else "python"


def _use_compiled(*arrays: np.ndarray) -> bool:
    return _ckernels is not None and all(a.dtype == np.float64 for a in arrays)


def koszul_gamma(C: np.ndarray, g: np.ndarray, ginv: np.ndarray, dm: int) -> np.ndarray:
    if _use_compiled(C, g, ginv):
        return _ckernels.koszul_gamma(
            np.ascontiguousarray(C), np.ascontiguousarray(g), np.ascontiguousarray(ginv), dm
        )
    return _pykernels.koszul_gamma(C, g, ginv, dm)


def riemann(gamma: np.ndarray, C: np.ndarray, dm: int) -> np.ndarray:
    if _use_compiled(gamma, C):
        return _ckernels.riemann(np.ascontiguousarray(gamma), np.ascontiguousarray(C), dm)
    return _pykernels.riemann(gamma, C, dm)
