"""Standard-normal quantile and N-dimensional normal CDF.

The CDF uses the separation-of-variables transform to the unit cube and
randomized quasi-Monte Carlo (shifted square-root lattice), which keeps
the N = 16 evaluations inside the copula fast and gives an honest
standard-error estimate across randomizations.  Results are
deterministic: the lattice shifts are derived from the spec seed and
the bound vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

from ._backend import kernel
from .fas import CorrelationModel


@dataclass(frozen=True)
class MvnSpec:
    """Accuracy/effort knobs for the randomized-QMC CDF estimate."""

    target_abs_error: float = 1e-4
    sample_budget: int = 2**13
    randomizations: int = 12
    seed: int = 1234

    def __post_init__(self):
        if not self.target_abs_error > 0.0:
            raise ValueError("target_abs_error must be > 0")
        if self.sample_budget < 128:
            raise ValueError("sample_budget must be >= 128")
        if self.randomizations < 2:
            raise ValueError("randomizations must be >= 2")


class MvnResult(NamedTuple):
    value: float
    err_estimate: float
    target_exceeded: bool


def std_normal_quantile(p: float) -> float:
    """Inverse standard-normal CDF with explicit +/-inf at p = 1, 0.

    Raises
    ------
    ValueError
        If ``p`` lies outside [0, 1].
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p!r}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    return float(ndtri(p))


def _derive_shifts(spec: MvnSpec, bounds: np.ndarray, n_dims: int) -> np.ndarray:
    """Deterministic lattice shifts from (seed, bound bits)."""
    words = np.frombuffer(np.ascontiguousarray(bounds, dtype=float).tobytes(), dtype=np.uint64)
    ss = np.random.SeedSequence([np.uint64(spec.seed), *words])
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.random((spec.randomizations, max(n_dims - 1, 1)))


def mvn_cdf(model: CorrelationModel, upper, spec: MvnSpec) -> MvnResult:
    """P(Y <= upper) for Y ~ N(0, J) with the model's repaired J.

    Bounds may contain +/-inf sentinels: any -inf short-circuits to 0,
    +inf coordinates are marginalized out.  Finite coordinates are
    sorted ascending (a no-op for the all-equal production case) before
    the Cholesky sweep.
    """
    upper = np.asarray(upper, dtype=float)
    if upper.ndim != 1 or upper.shape[0] != model.n_ports:
        raise ValueError(
            f"bound vector must have length {model.n_ports}, got shape {upper.shape}"
        )
    if np.isnan(upper).any():
        raise ValueError("bound vector contains NaN")
    if np.any(upper == -math.inf):
        return MvnResult(0.0, 0.0, False)

    finite = np.isfinite(upper)
    if not finite.any():
        return MvnResult(1.0, 0.0, False)

    if finite.all() and np.all(upper == upper[0]):
        # production path: all-equal bounds, cached Cholesky, no permutation
        chol = model.cholesky
        bounds = upper
    else:
        keep = np.flatnonzero(finite)
        sub = upper[keep]
        order = np.argsort(sub, kind="stable")
        keep = keep[order]
        bounds = upper[keep]
        repaired = model.factor @ model.factor.T
        chol = np.linalg.cholesky(0.5 * (repaired[np.ix_(keep, keep)] + repaired[np.ix_(keep, keep)].T))

    if bounds.shape[0] == 1:
        from scipy.special import ndtr

        return MvnResult(float(ndtr(bounds[0] / chol[0, 0])), 0.0, False)

    shifts = _derive_shifts(spec, upper, bounds.shape[0])
    estimates = np.asarray(
        kernel.genz_qmc(chol, bounds, shifts, spec.sample_budget), dtype=float
    )
    value = float(min(max(estimates.mean(), 0.0), 1.0))
    err = float(estimates.std(ddof=1) / math.sqrt(len(estimates)))
    return MvnResult(value, err, err > spec.target_abs_error)


def mvn_cdf_constant(model: CorrelationModel, t: float, spec: MvnSpec) -> MvnResult:
    """mvn_cdf at the all-equal bound vector (t, ..., t)."""
    if t == -math.inf:
        return MvnResult(0.0, 0.0, False)
    if t == math.inf:
        return MvnResult(1.0, 0.0, False)
    return mvn_cdf(model, np.full(model.n_ports, float(t)), spec)
