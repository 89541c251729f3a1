# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the separation-of-variables MVN-CDF sweep.

Same contract as ``farnoma._genz_py`` (the pure-numpy fallback): a
shifted, periodized square-root lattice driving the conditioned
one-dimensional sweep.  The per-point walk exits early once the partial
product has collapsed below 1e-320, which the vectorized fallback
cannot do.
"""

import numpy as np

from libc.math cimport fabs, fmod

from scipy.special.cython_special cimport ndtr, ndtri

from ._genz_py import first_primes

DEF P_LO = 1e-300
DEF P_HI = 0.9999999999999999  # 1 - 1e-16
DEF F_CUTOFF = 1e-320


def genz_qmc(chol, bounds, shifts, n_points):
    """Per-randomization lattice estimates of the MVN orthant CDF."""
    chol_arr = np.ascontiguousarray(chol, dtype=np.float64)
    bounds_arr = np.ascontiguousarray(bounds, dtype=np.float64)
    shifts_arr = np.ascontiguousarray(np.atleast_2d(shifts), dtype=np.float64)

    cdef double[:, ::1] L = chol_arr
    cdef double[::1] b = bounds_arr
    cdef double[:, ::1] sh = shifts_arr
    cdef Py_ssize_t n = bounds_arr.shape[0]
    cdef Py_ssize_t n_rand = shifts_arr.shape[0]
    cdef Py_ssize_t m = n_points

    out = np.empty(n_rand, dtype=np.float64)
    cdef double[::1] est = out
    cdef double e0 = ndtr(b[0] / L[0, 0])

    if n == 1:
        out[:] = e0
        return out

    q_arr = np.sqrt(first_primes(n - 1))
    cdef double[::1] q = q_arr
    y_arr = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] y = y_arr

    cdef Py_ssize_t r, k, i, j
    cdef double total, f, e_prev, u, z, s, e_i

    with nogil:
        for r in range(n_rand):
            total = 0.0
            for k in range(1, m + 1):
                f = e0
                e_prev = e0
                for i in range(1, n):
                    u = fabs(2.0 * fmod(k * q[i - 1] + sh[r, i - 1], 1.0) - 1.0)
                    z = u * e_prev
                    if z < P_LO:
                        z = P_LO
                    elif z > P_HI:
                        z = P_HI
                    y[i - 1] = ndtri(z)
                    s = 0.0
                    for j in range(i):
                        s += L[i, j] * y[j]
                    e_i = ndtr((b[i] - s) / L[i, i])
                    f *= e_i
                    e_prev = e_i
                    if f < F_CUTOFF:
                        f = 0.0
                        break
                total += f
            est[r] = total / m
    return out


def genz_qmc_constant(chol, t, shifts, n_points):
    """genz_qmc with every bound equal to ``t``."""
    n = np.asarray(chol).shape[0]
    return genz_qmc(chol, np.full(n, float(t)), shifts, n_points)
