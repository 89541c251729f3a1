"""Pure-numpy kernel for the separation-of-variables MVN-CDF sweep.

This is the fallback implementation of the hot loop; the compiled
extension ``farnoma._genz`` provides the same two entry points.  Both
transform P(Y <= b), Y ~ N(0, L L^T), to the unit cube and average the
conditioned one-dimensional probabilities over a shifted, periodized
rank-1 lattice (square-root-of-primes generators).
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri

_P_LO = 1e-300
_P_HI = 1.0 - 1e-16


def first_primes(k: int) -> np.ndarray:
    """The first ``k`` primes, as float64."""
    if k <= 0:
        return np.zeros(0)
    limit = 32
    while True:
        sieve = np.ones(limit, dtype=bool)
        sieve[:2] = False
        for i in range(2, int(limit**0.5) + 1):
            if sieve[i]:
                sieve[i * i :: i] = False
        primes = np.flatnonzero(sieve)
        if primes.size >= k:
            return primes[:k].astype(float)
        limit *= 2


def genz_qmc(chol, bounds, shifts, n_points):
    """Per-randomization lattice estimates of the MVN orthant CDF.

    Parameters
    ----------
    chol : (N, N) lower-triangular Cholesky factor of the correlation.
    bounds : (N,) finite upper integration limits.
    shifts : (R, N-1) uniform shifts, one row per randomization.
    n_points : lattice points per randomization.

    Returns
    -------
    (R,) array of independent estimates of P(Y <= bounds).
    """
    chol = np.ascontiguousarray(chol, dtype=float)
    bounds = np.ascontiguousarray(bounds, dtype=float)
    shifts = np.atleast_2d(np.asarray(shifts, dtype=float))
    n = bounds.shape[0]
    n_rand = shifts.shape[0]

    e0 = ndtr(bounds[0] / chol[0, 0])
    if n == 1:
        return np.full(n_rand, e0)

    q = np.sqrt(first_primes(n - 1))
    k = np.arange(1, n_points + 1, dtype=float)
    estimates = np.empty(n_rand)
    y = np.empty((n - 1, n_points))
    for r in range(n_rand):
        # periodized shifted lattice: |2*frac(k*q + shift) - 1|
        u = np.abs(2.0 * np.mod(k[None, :] * q[:, None] + shifts[r][:, None], 1.0) - 1.0)
        f = np.full(n_points, e0)
        e_prev = np.full(n_points, e0)
        for i in range(1, n):
            z = np.clip(u[i - 1] * e_prev, _P_LO, _P_HI)
            y[i - 1] = ndtri(z)
            s = chol[i, :i] @ y[:i]
            e_i = ndtr((bounds[i] - s) / chol[i, i])
            f = f * e_i
            e_prev = e_i
        estimates[r] = f.mean()
    return estimates


def genz_qmc_constant(chol, t, shifts, n_points):
    """genz_qmc with every bound equal to ``t`` (the production path)."""
    n = chol.shape[0]
    return genz_qmc(chol, np.full(n, float(t)), shifts, n_points)
