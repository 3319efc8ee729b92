"""Heat currents, self-consistent profiles and rectification in stochastic rotor chains."""

from .model import (
    ChainSpec,
    CouplingMatrix,
    DimensionlessScaling,
    TemperatureProfile,
    build_nn_chain,
    build_nnn_chain,
    graded_masses,
    nondimensionalize,
    redimensionalize,
)
from .selfconsistent import (
    DecoupledChainError,
    OutsideValidityWarning,
    RectificationReport,
    SCSolution,
    SingularSystemError,
    SweepRow,
    boundary_coefficients,
    rectification,
    solve_profile,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "CouplingMatrix",
    "DecoupledChainError",
    "DimensionlessScaling",
    "OutsideValidityWarning",
    "RectificationReport",
    "SCSolution",
    "SingularSystemError",
    "SweepRow",
    "TemperatureProfile",
    "boundary_coefficients",
    "build_nn_chain",
    "build_nnn_chain",
    "graded_masses",
    "nondimensionalize",
    "rectification",
    "redimensionalize",
    "solve_profile",
    "sweep",
]
