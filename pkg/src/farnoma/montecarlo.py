"""Monte Carlo oracle: exact SINR chains over sampled fading draws.

Draws are generated in fixed-size blocks, each from its own
counter-based Philox stream (key = seed, counter = block index shifted
past the per-block consumption), so any partition of blocks across
workers recombines to the identical integer counts.  The SINR formulas
below are the raw two-phase chains; none of the analytic threshold
algebra is reused, which is what makes this an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fas import CorrelationModel
from .scenario import Scenario

BLOCK_SIZE = 1 << 16
_KEY_MASK = (1 << 128) - 1


class NoAcceptanceError(RuntimeError):
    """DF conditioning accepted zero trials (relay never decoded)."""


@dataclass(frozen=True)
class TrialDraw:
    """One fading realization: direct links, relay link, port gains."""

    w1: float
    w2: float
    x: float
    port_gains: np.ndarray
    z: float


@dataclass(frozen=True)
class McEstimate:
    """Empirical outage probability with trial accounting."""

    p_hat: float
    trials: int
    accepted: int
    std_err: float
    seed: int


# SINR chains (arrays or scalars) ------------------------------------------


def first_phase_sinr_u2(w2, sc: Scenario):
    """Weak user decoding its own symbol in the broadcast phase."""
    return w2 * (1.0 - sc.beta_b) * sc.rho_b / (w2 * sc.beta_b * sc.rho_b + 1.0)


def af_relay_sinr_u2(x, z, sc: Scenario):
    """Weak user decoding its symbol from the amplified forward."""
    num = x * z * (1.0 - sc.beta_b) * sc.rho_b * sc.rho_f
    den = x * z * sc.beta_b * sc.rho_b * sc.rho_f + x * sc.rho_b + z * sc.rho_f + 1.0
    return num / den


def relay_decode_sinr_weak(x, sc: Scenario):
    """Relay decoding the weak symbol from the broadcast."""
    return x * (1.0 - sc.beta_b) * sc.rho_b / (x * sc.beta_b * sc.rho_b + 1.0)


def relay_decode_snr_strong(x, sc: Scenario):
    """Relay decoding the strong symbol after canceling the weak one."""
    return x * sc.beta_b * sc.rho_b


def df_forward_sinr_superposed(z, sc: Scenario):
    """Weak user when the relay re-superposes both symbols."""
    return z * (1.0 - sc.beta_f) * sc.rho_f / (z * sc.beta_f * sc.rho_f + 1.0)


def df_forward_snr_weak_only(z, sc: Scenario):
    """Weak user when the relay forwards only the weak symbol."""
    return z * sc.rho_f


# Sampling ------------------------------------------------------------------


def sample_draw(model: CorrelationModel, sc: Scenario, rng: np.random.Generator) -> TrialDraw:
    """One draw of all fading variables per the channel model."""
    e = rng.standard_exponential(3)
    w1 = e[0] / sc.rate_bu1
    w2 = e[1] / sc.rate_bu2
    x = e[2] / sc.rate_bf
    n = model.n_ports
    g = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    g_corr = model.factor @ g
    port_gains = np.abs(g_corr) ** 2 / sc.rate_fu2
    return TrialDraw(w1=w1, w2=w2, x=x, port_gains=port_gains, z=float(port_gains.max()))


def trial_af(draw: TrialDraw, sc: Scenario) -> bool:
    """True iff the combined AF SINR falls below the weak user's threshold."""
    combined = first_phase_sinr_u2(draw.w2, sc) + af_relay_sinr_u2(draw.x, draw.z, sc)
    return bool(combined < sc.gamma_u2)


def trial_df(draw: TrialDraw, sc: Scenario) -> tuple[bool, bool]:
    """(conditioning_ok, outage) for decode-and-forward.

    The draw is accepted only when the relay decodes the weak symbol;
    the forwarded-signal branch depends on whether it also decoded the
    strong one.
    """
    ok = bool(relay_decode_sinr_weak(draw.x, sc) >= sc.gamma_u2)
    if not ok:
        return False, False
    if relay_decode_snr_strong(draw.x, sc) >= sc.gamma_u1:
        second = df_forward_sinr_superposed(draw.z, sc)
    else:
        second = df_forward_snr_weak_only(draw.z, sc)
    combined = first_phase_sinr_u2(draw.w2, sc) + second
    return True, bool(combined < sc.gamma_u2)


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=seed & _KEY_MASK, counter=block_index << 128)
    return np.random.Generator(bitgen)


def _block_draws(model, sc, seed, block_index, m):
    rng = _block_rng(seed, block_index)
    e = rng.standard_exponential((3, m))
    w2 = e[1] / sc.rate_bu2
    x = e[2] / sc.rate_bf
    n = model.n_ports
    g = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2.0)
    gains = np.abs(g @ model.factor.T) ** 2 / sc.rate_fu2
    z = gains.max(axis=1)
    return w2, x, z


def block_counts(
    scheme: str, sc: Scenario, model: CorrelationModel, seed: int, block_index: int, m: int
) -> tuple[int, int]:
    """(outages, accepted) over one block; the partition-safe unit."""
    w2, x, z = _block_draws(model, sc, seed, block_index, m)
    if scheme == "AF":
        combined = first_phase_sinr_u2(w2, sc) + af_relay_sinr_u2(x, z, sc)
        return int(np.count_nonzero(combined < sc.gamma_u2)), m
    if scheme == "DF":
        ok = relay_decode_sinr_weak(x, sc) >= sc.gamma_u2
        decoded_strong = relay_decode_snr_strong(x, sc) >= sc.gamma_u1
        second = np.where(
            decoded_strong,
            df_forward_sinr_superposed(z, sc),
            df_forward_snr_weak_only(z, sc),
        )
        combined = first_phase_sinr_u2(w2, sc) + second
        outage = ok & (combined < sc.gamma_u2)
        return int(np.count_nonzero(outage)), int(np.count_nonzero(ok))
    raise ValueError(f"scheme must be 'AF' or 'DF', got {scheme!r}")


def estimate_op(
    scheme: str, sc: Scenario, model: CorrelationModel, trials: int, seed: int
) -> McEstimate:
    """Stream blocks and form the (conditional, for DF) outage estimate.

    Raises
    ------
    NoAcceptanceError
        If DF conditioning accepts zero trials.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    outages = 0
    accepted = 0
    done = 0
    block = 0
    while done < trials:
        m = min(BLOCK_SIZE, trials - done)
        o, a = block_counts(scheme, sc, model, seed, block, m)
        outages += o
        accepted += a
        done += m
        block += 1
    if accepted == 0:
        raise NoAcceptanceError(
            f"DF conditioning accepted 0 of {trials} trials "
            f"(relay never decoded the weak symbol)"
        )
    p_hat = outages / accepted
    std_err = math.sqrt(p_hat * (1.0 - p_hat) / accepted)
    return McEstimate(p_hat=p_hat, trials=trials, accepted=accepted, std_err=std_err, seed=seed)


def sample_best_port_gains(
    model: CorrelationModel, rate: float, trials: int, seed: int
) -> np.ndarray:
    """Best-port gains only, for empirical-CDF validation of the copula."""
    out = np.empty(trials)
    done = 0
    block = 0
    n = model.n_ports
    while done < trials:
        m = min(BLOCK_SIZE, trials - done)
        rng = _block_rng(seed, block)
        g = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2.0)
        out[done : done + m] = (np.abs(g @ model.factor.T) ** 2).max(axis=1) / rate
        done += m
        block += 1
    return out


def empirical_port_correlation(model: CorrelationModel, trials: int, seed: int) -> np.ndarray:
    """Sample correlation of the real parts of the correlated port vector."""
    n = model.n_ports
    s1 = np.zeros(n)
    s2 = np.zeros((n, n))
    done = 0
    block = 0
    while done < trials:
        m = min(BLOCK_SIZE, trials - done)
        rng = _block_rng(seed, block)
        re = rng.standard_normal((m, n)) / math.sqrt(2.0)
        re = re @ model.factor.T
        s1 += re.sum(axis=0)
        s2 += re.T @ re
        done += m
        block += 1
    mean = s1 / trials
    cov = s2 / trials - np.outer(mean, mean)
    d = np.sqrt(np.diag(cov))
    return cov / np.outer(d, d)
