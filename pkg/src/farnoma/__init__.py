"""Outage-probability analysis of a fluid-antenna relay assisted NOMA downlink.

Analytic amplify-and-forward / decode-and-forward outage probabilities
of the weak user with a Gaussian-copula model of the best-port relay
channel, an independent Monte Carlo oracle, and CLI sweeps.
"""

from ._backend import kernel_backend
from .scenario import Scenario, distance, linear_snr_factors, path_gain
from .fas import (
    CorrelationModel,
    FasGeometry,
    correlation_matrix,
    correlation_model,
    port_index,
    psd_factorization,
    spherical_bessel_j0,
)
from .mvn import MvnResult, MvnSpec, mvn_cdf, mvn_cdf_constant, std_normal_quantile

__version__ = "0.1.0"

__all__ = [
    "Scenario",
    "distance",
    "path_gain",
    "linear_snr_factors",
    "FasGeometry",
    "CorrelationModel",
    "correlation_matrix",
    "correlation_model",
    "port_index",
    "psd_factorization",
    "spherical_bessel_j0",
    "MvnSpec",
    "MvnResult",
    "mvn_cdf",
    "mvn_cdf_constant",
    "std_normal_quantile",
    "kernel_backend",
    "__version__",
]
