"""Ornstein-Uhlenbeck machinery and the perturbative flux kernel."""

from .closed_forms import closed_form_reference
from .flux import (
    CONSISTENT,
    DEFAULT_FORMULA,
    FORMULAS,
    PRINTED,
    TABULATED,
    FluxKernel,
    FluxTerms,
    d_coeff,
    flux_kernel,
    flux_lowT,
    flux_terms,
    ft_lowT,
    omega_ft_full,
    w1_lowT,
    w2_lowT,
    w3_lowT,
)
from .ou import (
    SitePropagatorParams,
    StationaryCovariance,
    gaussian_moment,
    site_propagator,
    stationary_covariance,
)

__all__ = [
    "CONSISTENT",
    "DEFAULT_FORMULA",
    "FORMULAS",
    "PRINTED",
    "TABULATED",
    "FluxKernel",
    "FluxTerms",
    "SitePropagatorParams",
    "StationaryCovariance",
    "closed_form_reference",
    "d_coeff",
    "flux_kernel",
    "flux_lowT",
    "flux_terms",
    "ft_lowT",
    "gaussian_moment",
    "omega_ft_full",
    "site_propagator",
    "stationary_covariance",
    "w1_lowT",
    "w2_lowT",
    "w3_lowT",
]
