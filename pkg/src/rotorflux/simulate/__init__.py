"""Direct Langevin simulation of the chain, used as an independent oracle."""

from .core import (
    SCHEMES,
    Estimate,
    IntegratorAbort,
    SimConfig,
    SimObservables,
    StabilityWarning,
    bath_residual,
    heat_current_site,
    integrate,
    run_metadata,
)
from .iterate import SCConfig, SCNotConverged, SCResult, sc_iterate

__all__ = [
    "SCHEMES",
    "Estimate",
    "IntegratorAbort",
    "SCConfig",
    "SCNotConverged",
    "SCResult",
    "SimConfig",
    "SimObservables",
    "StabilityWarning",
    "bath_residual",
    "heat_current_site",
    "integrate",
    "run_metadata",
    "sc_iterate",
]
