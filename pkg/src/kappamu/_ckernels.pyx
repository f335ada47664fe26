"""Compiled float64 kernels; same contract as ``kappamu._pykernels``."""
import numpy as np


def koszul_gamma(double[:, :, ::1] C, double[:, ::1] g, double[:, ::1] ginv, Py_ssize_t dm):
    cdef Py_ssize_t i, j, k, l
    cdef double s
    cg_arr = np.zeros((dm, dm, dm))
    low_arr = np.zeros((dm, dm, dm))
    out_arr = np.zeros((dm, dm, dm))
    cdef double[:, :, ::1] cg = cg_arr
    cdef double[:, :, ::1] low = low_arr
    cdef double[:, :, ::1] out = out_arr
    for i in range(dm):
        for j in range(dm):
            for k in range(dm):
                s = 0.0
                for l in range(dm):
                    s += C[i, j, l] * g[l, k]
                cg[i, j, k] = s
    for i in range(dm):
        for j in range(dm):
            for k in range(dm):
                low[i, j, k] = 0.5 * (cg[i, j, k] - cg[j, k, i] + cg[k, i, j])
    for i in range(dm):
        for j in range(dm):
            for k in range(dm):
                s = 0.0
                for l in range(dm):
                    s += low[i, j, l] * ginv[l, k]
                out[i, j, k] = s
    return out_arr


def riemann(double[:, :, ::1] gamma, double[:, :, ::1] C, Py_ssize_t dm):
    cdef Py_ssize_t D = C.shape[0]
    cdef Py_ssize_t i, j, k, l, m
    cdef double s
    out_arr = np.zeros((dm, dm, dm, dm))
    cdef double[:, :, :, ::1] out = out_arr
    for i in range(dm):
        for j in range(dm):
            for k in range(dm):
                for l in range(dm):
                    s = 0.0
                    for m in range(dm):
                        s += gamma[j, k, m] * gamma[i, m, l]
                        s -= gamma[i, k, m] * gamma[j, m, l]
                        s -= C[i, j, m] * gamma[m, k, l]
                    for m in range(dm, D):
                        s -= C[i, j, m] * C[m, k, l]
                    out[i, j, k, l] = s
    return out_arr
