"""Fluid-antenna port grid and spatial correlation model.

The relay carries a 2D fluid antenna with ``n1 x n2`` ports spread over
an aperture of ``l1 x l2`` wavelengths.  Port channel gains are
correlated through the spherical Bessel kernel ``j0(2*pi*d)`` of their
separation ``d`` in wavelengths.  The resulting matrix is repaired to be
positive semidefinite (eigenvalue flooring) and factored once; the
factor is shared by the copula evaluation and the correlated sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EIGEN_FLOOR = 1e-10
_J0_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class FasGeometry:
    """Port counts and aperture lengths (in wavelengths) per dimension."""

    n1: int
    n2: int
    l1: float = 1.0
    l2: float = 1.0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError(f"port counts must be >= 1, got {self.n1}x{self.n2}")
        if self.l1 < 0.0 or self.l2 < 0.0:
            raise ValueError("aperture lengths must be >= 0")

    @property
    def n_ports(self) -> int:
        return self.n1 * self.n2


def port_index(n1_idx: int, n2_idx: int, n2_total: int) -> int:
    """Flatten the (n1, n2) port pair to the 1-based linear index.

    ``l = (n1 - 1) * N2 + n2``, a bijection onto {1, ..., N1*N2}.
    """
    if n2_total < 1:
        raise ValueError(f"n2_total must be >= 1, got {n2_total}")
    if n1_idx < 1:
        raise ValueError(f"n1_idx must be >= 1, got {n1_idx}")
    if not 1 <= n2_idx <= n2_total:
        raise ValueError(f"n2_idx must be in [1, {n2_total}], got {n2_idx}")
    return (n1_idx - 1) * n2_total + n2_idx


def spherical_bessel_j0(x):
    """sin(x)/x with the removable singularity handled explicitly.

    Below ``|x| < 1e-4`` the Taylor series ``1 - x^2/6 + x^4/120`` is
    used so the value stays exact to double precision near zero.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _J0_SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    if out.ndim == 0:
        return float(out)
    return out


def correlation_matrix(geom: FasGeometry) -> np.ndarray:
    """N x N spatial correlation matrix over the flattened port order.

    Entry (l, l~) is ``j0(2*pi*sqrt(((|dn1|/(N1-1))*L1)^2 +
    ((|dn2|/(N2-1))*L2)^2))``.  A single-port dimension contributes zero
    separation (vanishing-aperture limit of the formula).
    """
    idx = np.arange(geom.n_ports)
    n1 = idx // geom.n2
    n2 = idx % geom.n2
    if geom.n1 > 1:
        sep1 = np.abs(n1[:, None] - n1[None, :]) / (geom.n1 - 1) * geom.l1
    else:
        sep1 = np.zeros((geom.n_ports, geom.n_ports))
    if geom.n2 > 1:
        sep2 = np.abs(n2[:, None] - n2[None, :]) / (geom.n2 - 1) * geom.l2
    else:
        sep2 = np.zeros((geom.n_ports, geom.n_ports))
    arg = 2.0 * math.pi * np.hypot(sep1, sep2)
    j = spherical_bessel_j0(arg)
    j = np.asarray(j, dtype=float)
    np.fill_diagonal(j, 1.0)
    return 0.5 * (j + j.T)


@dataclass(frozen=True)
class CorrelationModel:
    """PSD-repaired correlation matrix with its factorization.

    ``factor @ factor.T`` reproduces the repaired matrix; ``cholesky``
    is the lower-triangular factor used by the MVN-CDF engine.
    """

    j_matrix: np.ndarray
    factor: np.ndarray
    cholesky: np.ndarray
    eigen_floor_applied: bool
    min_eigenvalue: float

    @property
    def n_ports(self) -> int:
        return self.j_matrix.shape[0]

    def fingerprint(self) -> bytes:
        """Stable content hash of the repaired factorization."""
        import hashlib

        h = hashlib.sha256()
        h.update(self.j_matrix.tobytes())
        h.update(self.factor.tobytes())
        return h.digest()


def psd_factorization(j_matrix: np.ndarray) -> CorrelationModel:
    """Eigen-decompose, floor eigenvalues at 1e-10, rebuild the factor.

    Raises
    ------
    ValueError
        If the input is not symmetric with unit diagonal.
    """
    j = np.asarray(j_matrix, dtype=float)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise ValueError(f"correlation matrix must be square, got shape {j.shape}")
    if not np.allclose(j, j.T, atol=1e-12, rtol=0.0):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(j), 1.0, atol=1e-12, rtol=0.0):
        raise ValueError("correlation matrix must have unit diagonal")

    eigvals, eigvecs = np.linalg.eigh(j)
    min_eig = float(eigvals.min())
    floored = np.maximum(eigvals, EIGEN_FLOOR)
    applied = bool(min_eig < EIGEN_FLOOR)
    factor = eigvecs * np.sqrt(floored)
    repaired = factor @ factor.T
    repaired = 0.5 * (repaired + repaired.T)

    chol = None
    jitter = 0.0
    for attempt in range(8):
        try:
            chol = np.linalg.cholesky(repaired + jitter * np.eye(j.shape[0]))
            break
        except np.linalg.LinAlgError:
            jitter = EIGEN_FLOOR if jitter == 0.0 else jitter * 10.0
    if chol is None:
        raise np.linalg.LinAlgError("PSD repair failed to produce a Cholesky factor")

    return CorrelationModel(
        j_matrix=j,
        factor=factor,
        cholesky=chol,
        eigen_floor_applied=applied,
        min_eigenvalue=min_eig,
    )


def correlation_model(geom: FasGeometry) -> CorrelationModel:
    """correlation_matrix + psd_factorization in one step."""
    return psd_factorization(correlation_matrix(geom))
