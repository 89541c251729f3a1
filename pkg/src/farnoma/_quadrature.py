"""Batched adaptive Gauss-Kronrod quadrature.

Two entry points: :func:`adaptive_quadrature` for one interval and
:func:`adaptive_quadrature_batched` for many intervals ("owners")
refined simultaneously, which is how inner integrals are evaluated for
all outer nodes in one vectorized pass.  Integrands return a value
array and an array of per-point error bounds (inner-quadrature errors
propagate through the positive Kronrod weights).

The error estimate per panel is the conservative |K - G| difference of
the nested rule; panels are bisected until the per-owner error sum
meets ``max(abs_tol, rel_tol * |integral|)`` or the depth cap is hit,
in which case :class:`QuadratureNonConvergence` carries the partial
result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

_GK15_XK_HALF = np.array(
    [
        0.9914553711208126,
        0.9491079123427585,
        0.8648644233597691,
        0.7415311855993944,
        0.5860872354676911,
        0.4058451513773972,
        0.2077849550078985,
        0.0,
    ]
)
_GK15_WK_HALF = np.array(
    [
        0.02293532201052922,
        0.06309209262997855,
        0.1047900103222502,
        0.1406532597155259,
        0.1690047266392679,
        0.1903505780647854,
        0.2044329400752989,
        0.2094821410847278,
    ]
)
_GK15_WG_HALF = np.array(
    [
        0.1294849661688697,
        0.2797053914892767,
        0.3818300505051189,
        0.4179591836734694,
    ]
)

_GK21_XK_HALF = np.array(
    [
        0.9956571630258081,
        0.9739065285171717,
        0.9301574913557082,
        0.8650633666889845,
        0.7808177265864169,
        0.6794095682990244,
        0.5627571346686047,
        0.4333953941292472,
        0.2943928627014602,
        0.1488743389816312,
        0.0,
    ]
)
_GK21_WK_HALF = np.array(
    [
        0.01169463886737187,
        0.03255816230796473,
        0.05475589657435200,
        0.07503967481091995,
        0.09312545458369761,
        0.1093871588022976,
        0.1234919762620659,
        0.1347092173114733,
        0.1427759385770601,
        0.1477391049013385,
        0.1494455540029169,
    ]
)
_GK21_WG_HALF = np.array(
    [
        0.06667134430868814,
        0.1494513491505806,
        0.2190863625159820,
        0.2692667193099963,
        0.2955242247147529,
    ]
)

_MAX_PANELS_PER_OWNER = 4096


def _expand_rule(xk_half, wk_half, wg_half, gauss_positions):
    """Full ascending node list with Kronrod and (padded) Gauss weights."""
    n_half = len(xk_half)
    nodes = np.concatenate([-xk_half[:-1], xk_half[::-1]])
    wk = np.concatenate([wk_half[:-1], wk_half[::-1]])
    wg = np.zeros_like(wk)
    center = n_half - 1
    for pos_half, w in zip(gauss_positions, wg_half):
        wg[center - pos_half] = w
        wg[center + pos_half] = w
    return nodes, wk, wg


_RULES = {
    15: _expand_rule(_GK15_XK_HALF, _GK15_WK_HALF, _GK15_WG_HALF, (6, 4, 2, 0)),
    21: _expand_rule(_GK21_XK_HALF, _GK21_WK_HALF, _GK21_WG_HALF, (9, 7, 5, 3, 1)),
}


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for the adaptive rule."""

    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_panel_depth: int = 18
    panel_nodes: int = 15
    tail_mass: float = 1e-14

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be > 0")
        if self.panel_nodes < 3:
            raise ValueError("panel_nodes must be >= 3")
        if self.panel_nodes not in _RULES:
            raise ValueError(
                f"unsupported nested rule {self.panel_nodes}; available: {sorted(_RULES)}"
            )
        if self.max_panel_depth < 1:
            raise ValueError("max_panel_depth must be >= 1")
        if not 0.0 <= self.tail_mass < 1.0:
            raise ValueError("tail_mass must be in [0, 1)")


class QuadResult(NamedTuple):
    value: float
    err: float
    n_eval: int


class QuadratureNonConvergence(RuntimeError):
    """Depth/panel cap hit before meeting the tolerance.

    Carries the partial integral and the achieved error estimate.
    """

    def __init__(self, message, value, err_estimate):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate


def _panel_sums(f, owner, lo, hi, nodes, wk, wg):
    """Evaluate one batch of panels; returns (I_kronrod, err, n_eval)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    vals, errs = f(np.repeat(owner, nodes.size), x.reshape(-1))
    vals = np.asarray(vals, dtype=float).reshape(x.shape)
    i_k = half * (vals @ wk)
    i_g = half * (vals @ wg)
    err = np.abs(i_k - i_g)
    if errs is not None:
        errs = np.asarray(errs, dtype=float).reshape(x.shape)
        err = err + half * (errs @ wk)
    return i_k, err, x.size


def adaptive_quadrature_batched(f, a, b, spec: QuadratureSpec):
    """Integrate f over [a_k, b_k] for every owner k simultaneously.

    ``f(owner_idx, x)`` receives flat arrays and returns ``(values,
    errs)`` with ``errs`` an array of per-point error bounds or None.

    Returns
    -------
    (values, errs, n_eval) arrays over owners plus the total number of
    integrand evaluations.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n_owner = a.shape[0]
    nodes, wk, wg = _RULES[spec.panel_nodes]

    width = b - a
    live = width > 0.0
    values = np.zeros(n_owner)
    errors = np.zeros(n_owner)
    if not live.any():
        return values, errors, 0

    owner = np.flatnonzero(live)
    lo = a[owner].copy()
    hi = b[owner].copy()
    owner_width = width.copy()
    min_width = np.maximum(owner_width, 0.0) / float(2**spec.max_panel_depth)

    i_k, err, n_eval = _panel_sums(f, owner, lo, hi, nodes, wk, wg)

    while True:
        tot_i = np.bincount(owner, weights=i_k, minlength=n_owner)
        tot_e = np.bincount(owner, weights=err, minlength=n_owner)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(tot_i))
        bad = tot_e > tol
        if not bad.any():
            break
        share = tol[owner] * (hi - lo) / owner_width[owner]
        splittable = bad[owner] & (err > share) & ((hi - lo) > 2.0 * min_width[owner])
        if not splittable.any():
            worst = int(np.argmax(np.where(bad, tot_e, -np.inf)))
            raise QuadratureNonConvergence(
                f"owner {worst}: error {tot_e[worst]:.3e} > tol {tol[worst]:.3e} "
                f"at depth cap {spec.max_panel_depth}",
                value=tot_i[worst],
                err_estimate=tot_e[worst],
            )
        counts = np.bincount(owner[splittable], minlength=n_owner)
        if np.any(np.bincount(owner, minlength=n_owner) + counts > _MAX_PANELS_PER_OWNER):
            worst = int(np.argmax(tot_e))
            raise QuadratureNonConvergence(
                f"owner {worst}: panel budget exhausted with error {tot_e[worst]:.3e}",
                value=tot_i[worst],
                err_estimate=tot_e[worst],
            )
        s_owner = owner[splittable]
        s_lo = lo[splittable]
        s_hi = hi[splittable]
        s_mid = 0.5 * (s_lo + s_hi)
        new_owner = np.concatenate([s_owner, s_owner])
        new_lo = np.concatenate([s_lo, s_mid])
        new_hi = np.concatenate([s_mid, s_hi])
        new_i, new_e, ne = _panel_sums(f, new_owner, new_lo, new_hi, nodes, wk, wg)
        n_eval += ne
        keep = ~splittable
        owner = np.concatenate([owner[keep], new_owner])
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        i_k = np.concatenate([i_k[keep], new_i])
        err = np.concatenate([err[keep], new_e])

    values = np.bincount(owner, weights=i_k, minlength=n_owner)
    errors = np.bincount(owner, weights=err, minlength=n_owner)
    return values, errors, n_eval


def adaptive_quadrature(f, a: float, b: float, spec: QuadratureSpec) -> QuadResult:
    """Integrate f over one interval [a, b].

    ``f(x)`` receives a flat array and returns ``(values, errs)`` with
    ``errs`` per-point error bounds or None.
    """

    def wrapped(_owner, x):
        return f(x)

    values, errors, n_eval = adaptive_quadrature_batched(
        wrapped, np.array([a]), np.array([b]), spec
    )
    return QuadResult(float(values[0]), float(errors[0]), n_eval)
