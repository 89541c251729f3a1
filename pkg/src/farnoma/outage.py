"""Analytic outage probability of the weak user under AF and DF relaying.

The piecewise closed forms reduce to one or two nested integrals of
``(1 - F_Z(threshold))`` against exponential weights, where ``F_Z`` is
the copula best-port CDF.  All weighted integrals are evaluated in the
probability domain (substituting ``v = exp(-rate * w)``), which maps
semi-infinite ranges to (0, 1] exactly and keeps the integrands smooth
and bounded for the nested Gauss-Kronrod rule.

Sign conventions: a non-positive gain threshold means the event
``Z >= threshold`` is certain (Z is a non-negative gain), so the
survival factor is 1 there and the copula CDF of a non-positive
argument is 0.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._quadrature import (
    QuadResult,
    QuadratureNonConvergence,
    QuadratureSpec,
    adaptive_quadrature,
    adaptive_quadrature_batched,
)
from .copula import CopulaChannel, get_best_port_table
from .fas import CorrelationModel
from .mvn import MvnSpec
from .scenario import Scenario

AF_BRANCHES = ("feasible_xi_pos", "feasible_xi_mid", "always_outage")
DF_BRANCHES = ("df_low_beta", "df_mid_beta", "df_always_outage")


@dataclass(frozen=True)
class ThresholdConstants:
    """Scalar thresholds shared by the AF/DF piecewise expressions."""

    xi_b: float
    xi_f: float
    i1: float
    c_w2: float
    c_0: float
    d_w1: float


def scalar_constants(sc: Scenario) -> ThresholdConstants:
    """Exact arithmetic for the branch constants, with +inf sentinels."""
    g1, g2 = sc.gamma_u1, sc.gamma_u2
    bb, bf = sc.beta_b, sc.beta_f
    rho_b = sc.rho_b
    xi_b = 1.0 - bb - bb * g2
    xi_f = 1.0 - bf - bf * g2
    i1 = rho_b * (bf * (1.0 - bb) + xi_f * bb)
    c_w2 = g2 / (xi_b * rho_b) if xi_b > 0.0 else math.inf
    if bb == 0.0:
        c_0 = math.inf
        d_w1 = math.inf
    else:
        den = rho_b * bb * (xi_b + 1.0 - bb)
        c_0 = -xi_b / den if den != 0.0 else math.inf
        d_w1 = g1 / (rho_b * bb)
    return ThresholdConstants(xi_b=xi_b, xi_f=xi_f, i1=i1, c_w2=c_w2, c_0=c_0, d_w1=d_w1)


def _ratio(num, den):
    """num/den with +/-inf at a zero denominator (sign of the numerator)."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            den != 0.0,
            num / np.where(den != 0.0, den, 1.0),
            np.where(num > 0.0, math.inf, np.where(num < 0.0, -math.inf, math.nan)),
        )
    if out.ndim == 0:
        return float(out)
    return out


def c_x(w2, sc: Scenario):
    """Lower BS-relay gain threshold of the AF no-outage region."""
    tc = scalar_constants(sc)
    w2 = np.asarray(w2, dtype=float)
    num = sc.gamma_u2 - tc.xi_b * w2 * sc.rho_b
    den = sc.rho_b * (tc.xi_b + w2 * sc.beta_b * sc.rho_b * (1.0 + tc.xi_b - sc.beta_b))
    return _ratio(num, den)


def c_z(w2, x, sc: Scenario):
    """AF best-port gain threshold; sign cases handled by callers."""
    tc = scalar_constants(sc)
    w2 = np.asarray(w2, dtype=float)
    x = np.asarray(x, dtype=float)
    num = (sc.gamma_u2 - w2 * sc.rho_b * tc.xi_b) * (1.0 + x * sc.rho_b)
    den = sc.rho_f * (
        x * sc.rho_b * (w2 * sc.rho_b * sc.beta_b * (tc.xi_b + 1.0 - sc.beta_b) + tc.xi_b)
        + w2 * sc.rho_b * tc.xi_b
        - sc.gamma_u2
    )
    return _ratio(num, den)


def d_z(w2, sc: Scenario):
    """DF best-port threshold when the relay forwards only the weak symbol."""
    tc = scalar_constants(sc)
    w2 = np.asarray(w2, dtype=float)
    num = sc.gamma_u2 - w2 * tc.xi_b * sc.rho_b
    den = sc.rho_f * (w2 * sc.rho_b * sc.beta_b + 1.0)
    return _ratio(num, den)


def d_zprime(w2, sc: Scenario):
    """DF best-port threshold when the relay re-superposes both symbols."""
    tc = scalar_constants(sc)
    w2 = np.asarray(w2, dtype=float)
    num = sc.gamma_u2 - w2 * tc.xi_b * sc.rho_b
    den = sc.rho_f * (w2 * tc.i1 + tc.xi_f)
    return _ratio(num, den)


@dataclass(frozen=True)
class OutageReport:
    """Outage probability with the branch taken and a numerical error bound."""

    q: float
    branch: str
    err_estimate: float


class _SurvivalCounter:
    """P(Z >= threshold) through the channel, counting copula calls."""

    def __init__(self, channel: CopulaChannel):
        self.channel = channel
        self.calls = 0
        self.bound = 0.0

    def __call__(self, thresholds: np.ndarray) -> np.ndarray:
        thresholds = np.asarray(thresholds, dtype=float)
        vals, bound = self.channel.best_port_cdf_batch(np.maximum(thresholds, 0.0))
        self.calls += thresholds.size
        self.bound = max(self.bound, bound)
        return np.where(thresholds <= 0.0, 1.0, 1.0 - vals)


def _clamped_report(total: float, branch: str, err: float) -> OutageReport:
    return OutageReport(q=float(min(max(total, 0.0), 1.0)), branch=branch, err_estimate=float(err))


def op_af(sc: Scenario, ch: CopulaChannel, quad: QuadratureSpec) -> OutageReport:
    """Weak-user outage probability under amplify-and-forward relaying."""
    g2 = sc.gamma_u2
    if sc.beta_b * (2.0 + g2) >= 2.0:
        return OutageReport(q=1.0, branch="always_outage", err_estimate=0.0)

    tc = scalar_constants(sc)
    lam_w = sc.rate_bu2
    lam_x = sc.rate_bf
    survive = _SurvivalCounter(ch)
    tail = quad.tail_mass

    def inner_over_x(w2_vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # P(X >= C_x, Z >= C_z | w2) via u = exp(-lam_x (x - C_x)) on (0, 1]
        x_lo = np.maximum(np.asarray(c_x(w2_vals, sc), dtype=float), 0.0)

        def f(owner, u):
            x = x_lo[owner] - np.log(u) / lam_x
            return survive(np.asarray(c_z(w2_vals[owner], x, sc), dtype=float)), None

        lo = np.full(w2_vals.shape, tail)
        hi = np.ones(w2_vals.shape)
        vals, errs, _ = adaptive_quadrature_batched(f, lo, hi, quad)
        weight = np.exp(-lam_x * x_lo)
        return weight * vals, weight * (errs + tail)

    if sc.beta_b * (1.0 + g2) < 1.0:
        # xi_b > 0: no outage possible once W2 >= C_w2
        c_w2 = tc.c_w2
        if c_w2 == 0.0:
            return OutageReport(q=0.0, branch="feasible_xi_pos", err_estimate=0.0)
        v_lo = math.exp(-lam_w * c_w2)

        def outer(v):
            w2 = -np.log(v) / lam_w
            return inner_over_x(w2)

        res = adaptive_quadrature(outer, v_lo, 1.0, quad)
        err = res.err + survive.calls * survive.bound
        return _clamped_report(1.0 - v_lo - res.value, "feasible_xi_pos", err)

    # xi_b <= 0 but xi_b + 1 - beta_b > 0: outer range [C_0, inf)
    c0 = max(tc.c_0, 0.0)
    base = math.exp(-lam_w * c0)

    def outer(v):
        w2 = c0 - np.log(v) / lam_w
        return inner_over_x(w2)

    res = adaptive_quadrature(outer, tail, 1.0, quad)
    err = base * (res.err + tail) + survive.calls * survive.bound
    return _clamped_report(1.0 - base * res.value, "feasible_xi_mid", err)


def op_df(sc: Scenario, ch: CopulaChannel, quad: QuadratureSpec) -> OutageReport:
    """Weak-user outage probability under decode-and-forward relaying.

    Conditional on the relay decoding the weak symbol (the analysis'
    standing assumption); the Monte Carlo oracle conditions identically.
    """
    g1, g2 = sc.gamma_u1, sc.gamma_u2
    if sc.beta_b * (1.0 + g2) >= 1.0:
        return OutageReport(q=1.0, branch="df_always_outage", err_estimate=0.0)

    tc = scalar_constants(sc)
    lam_w = sc.rate_bu2
    lam_x = sc.rate_bf
    survive = _SurvivalCounter(ch)
    c_w2 = tc.c_w2
    a_term = math.exp(-lam_w * c_w2)

    def weighted_cdf_integral(threshold_fn, w_lo: float, w_hi: float) -> QuadResult:
        # int_{w_lo}^{w_hi} P(Z >= thr(w2)) f_W2(w2) dw2 in the v domain
        if not w_hi > w_lo:
            return QuadResult(0.0, 0.0, 0)
        v_lo = math.exp(-lam_w * w_hi)
        v_hi = math.exp(-lam_w * w_lo)

        def f(v):
            w2 = -np.log(v) / lam_w
            return survive(np.asarray(threshold_fn(w2), dtype=float)), None

        return adaptive_quadrature(f, v_lo, v_hi, quad)

    if tc.i1 > 0.0:
        w_lo_b2 = max(0.0, -tc.xi_f / tc.i1)
    else:
        w_lo_b2 = 0.0 if tc.xi_f >= 0.0 else c_w2

    b2 = weighted_cdf_integral(lambda w2: d_zprime(w2, sc), w_lo_b2, c_w2)

    low_beta = sc.beta_b * (g1 + g2 + g1 * g2) < g1
    if low_beta:
        b1 = weighted_cdf_integral(lambda w2: d_z(w2, sc), 0.0, c_w2)
        e_dec = math.exp(lam_x * (c_w2 - tc.d_w1)) if tc.d_w1 != math.inf else 0.0
        total = 1.0 - a_term - (1.0 - e_dec) * b1.value - e_dec * b2.value
        err = (1.0 - e_dec) * b1.err + e_dec * b2.err + survive.calls * survive.bound
        return _clamped_report(total, "df_low_beta", err)

    total = 1.0 - a_term - b2.value
    err = b2.err + survive.calls * survive.bound
    return _clamped_report(total, "df_mid_beta", err)


def select_relaying(q_af: float, q_df: float) -> int:
    """1 selects DF (it is at least as good), 0 selects AF."""
    for name, q in (("q_af", q_af), ("q_df", q_df)):
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {q}")
    return 1 if q_af - q_df >= 0.0 else 0


@dataclass(frozen=True)
class MuCell:
    """One relay position of a scheme-selection sweep."""

    far_pos: tuple[float, float, float]
    q_af: float
    q_df: float
    mu: int | None
    err_af: float
    err_df: float
    error: str | None = None


def _evaluate_cell(args) -> MuCell:
    base, model, table, mvn_spec, quad, pos = args
    try:
        sc = replace(base, far_pos=tuple(float(c) for c in pos))
        ch = CopulaChannel(model=model, rate=sc.rate_fu2, mvn_spec=mvn_spec, table=table)
        rep_af = op_af(sc, ch, quad)
        rep_df = op_df(sc, ch, quad)
        return MuCell(
            far_pos=sc.far_pos,
            q_af=rep_af.q,
            q_df=rep_df.q,
            mu=select_relaying(rep_af.q, rep_df.q),
            err_af=rep_af.err_estimate,
            err_df=rep_df.err_estimate,
        )
    except (ValueError, QuadratureNonConvergence, RuntimeError) as exc:
        return MuCell(
            far_pos=tuple(float(c) for c in pos),
            q_af=math.nan,
            q_df=math.nan,
            mu=None,
            err_af=math.nan,
            err_df=math.nan,
            error=f"{type(exc).__name__}: {exc}",
        )


def mu_map(
    base_scenario: Scenario,
    model: CorrelationModel,
    far_positions,
    quad: QuadratureSpec,
    mvn_spec: MvnSpec,
    *,
    use_table: bool = True,
    threads: int = 1,
) -> list[MuCell]:
    """Evaluate (q_af, q_df, mu) at every relay position.

    Cells are independent and deterministic, so the result does not
    depend on ``threads``; per-cell failures are recorded in the cell
    and the sweep continues.
    """
    table = get_best_port_table(model, mvn_spec) if use_table else None
    tasks = [
        (base_scenario, model, table, mvn_spec, quad, pos) for pos in far_positions
    ]
    if threads <= 1 or len(tasks) <= 1:
        return [_evaluate_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_evaluate_cell, tasks, chunksize=max(1, len(tasks) // (8 * threads))))
