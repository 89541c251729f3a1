"""Physical configuration of the relay-assisted NOMA downlink.

A :class:`Scenario` pins down the geometry (base station, two ground
users, the aerial relay), the path-loss exponent, transmit/noise powers
in dBm and the NOMA power splits and outage thresholds.  Everything the
outage and Monte Carlo machinery needs (distances, exponential fading
rates, linear SNR factors) is derived once here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

Vec3 = tuple[float, float, float]

_NODE_FIELDS = ("bs_pos", "u1_pos", "u2_pos", "far_pos")


def distance(a, b) -> float:
    """Euclidean distance between two 3-vectors (meters)."""
    ax, ay, az = a
    bx, by, bz = b
    return math.sqrt((ax - bx) ** 2 + (ay - by) ** 2 + (az - bz) ** 2)


def path_gain(d: float, alpha: float) -> float:
    """Power-law path gain d**(-alpha).

    Raises
    ------
    ValueError
        If ``d <= 0``; co-located nodes are not supported.
    """
    if d <= 0.0:
        raise ValueError(f"path_gain requires d > 0, got d={d!r}")
    return d ** (-alpha)


def dbm_to_linear_ratio(power_dbm: float, noise_dbm: float) -> float:
    """Transmit-power to noise-power ratio, 10**((P - sigma^2)/10)."""
    return 10.0 ** ((power_dbm - noise_dbm) / 10.0)


@dataclass(frozen=True)
class Scenario:
    """Immutable physical configuration.

    Parameters
    ----------
    bs_pos, u1_pos, u2_pos, far_pos : 3-tuples, meters
        Node positions: base station, near user, weak user, relay.
    alpha : float
        Path-loss exponent (> 0).
    p_b_dbm, p_f_dbm : float
        Transmit power at the base station / relay, dBm.
    noise_dbm : float
        AWGN power at every terminal, dBm.
    beta_b, beta_f : float
        NOMA power-allocation ratios, each in [0, 0.5).
    gamma_u1, gamma_u2 : float
        Linear SINR outage thresholds of the two users, >= 0.
    """

    bs_pos: Vec3
    u1_pos: Vec3
    u2_pos: Vec3
    far_pos: Vec3
    alpha: float = 2.0
    p_b_dbm: float = -110.0
    p_f_dbm: float = -110.0
    noise_dbm: float = -130.0
    beta_b: float = 0.1
    beta_f: float = 0.1
    gamma_u1: float = 3.0
    gamma_u2: float = 3.0

    def __post_init__(self):
        for name in _NODE_FIELDS:
            pos = getattr(self, name)
            if len(pos) != 3:
                raise ValueError(f"{name} must be a 3-vector, got {pos!r}")
            object.__setattr__(self, name, tuple(float(c) for c in pos))
        nodes = [getattr(self, name) for name in _NODE_FIELDS]
        for i, name_i in enumerate(_NODE_FIELDS):
            for j in range(i + 1, len(_NODE_FIELDS)):
                if distance(nodes[i], nodes[j]) <= 0.0:
                    raise ValueError(
                        f"nodes {name_i} and {_NODE_FIELDS[j]} are co-located"
                    )
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        for name in ("beta_b", "beta_f"):
            b = getattr(self, name)
            if not 0.0 <= b < 0.5:
                raise ValueError(f"{name} must be in [0, 0.5), got {b}")
        for name in ("gamma_u1", "gamma_u2"):
            g = getattr(self, name)
            if not g >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {g}")

    # Distances -----------------------------------------------------------

    @cached_property
    def d_bu1(self) -> float:
        return distance(self.bs_pos, self.u1_pos)

    @cached_property
    def d_bu2(self) -> float:
        return distance(self.bs_pos, self.u2_pos)

    @cached_property
    def d_bf(self) -> float:
        return distance(self.bs_pos, self.far_pos)

    @cached_property
    def d_fu1(self) -> float:
        return distance(self.far_pos, self.u1_pos)

    @cached_property
    def d_fu2(self) -> float:
        return distance(self.far_pos, self.u2_pos)

    # Exponential fading rates d**alpha (mean gain is the path gain) -------

    @cached_property
    def rate_bu1(self) -> float:
        return self.d_bu1**self.alpha

    @cached_property
    def rate_bu2(self) -> float:
        return self.d_bu2**self.alpha

    @cached_property
    def rate_bf(self) -> float:
        return self.d_bf**self.alpha

    @cached_property
    def rate_fu1(self) -> float:
        return self.d_fu1**self.alpha

    @cached_property
    def rate_fu2(self) -> float:
        return self.d_fu2**self.alpha

    # Linear SNR factors ----------------------------------------------------

    @cached_property
    def rho_b(self) -> float:
        return dbm_to_linear_ratio(self.p_b_dbm, self.noise_dbm)

    @cached_property
    def rho_f(self) -> float:
        return dbm_to_linear_ratio(self.p_f_dbm, self.noise_dbm)


def linear_snr_factors(scenario: Scenario) -> tuple[float, float]:
    """(rho_b, rho_f): transmit-SNR factors of base station and relay."""
    return scenario.rho_b, scenario.rho_f
