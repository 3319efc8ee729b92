"""Self-consistent inner-bath temperatures and thermal rectification.

The inner reservoirs exchange no net energy with their sites in the steady
state, which makes the right-going current equal at every site.  With the
linear flux kernel ``F = K T`` and the two end temperatures fixed this is a
square linear system for the ``N - 2`` inner temperatures.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .analytic.flux import DEFAULT_FORMULA, FluxKernel, flux_kernel
from .model import ChainSpec, TemperatureProfile

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14


class DecoupledChainError(ValueError):
    """The chain has no pair couplings, so no current can be carried."""


class SingularSystemError(np.linalg.LinAlgError):
    """The reduced self-consistency system is rank deficient."""

    def __init__(self, message: str, rank_defect: int):
        super().__init__(message)
        self.rank_defect = rank_defect


class OutsideValidityWarning(UserWarning):
    """A self-consistent temperature came out non-positive."""


@dataclass(frozen=True)
class SCSolution:
    profile: TemperatureProfile
    flux: float
    site_fluxes: np.ndarray
    residuals: np.ndarray
    condition: float
    tolerance: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    @property
    def converged(self) -> bool:
        return self.max_residual <= self.tolerance


@dataclass(frozen=True)
class RectificationReport:
    flux_left: float
    flux_right: float
    forward: SCSolution
    backward: SCSolution

    @property
    def sum(self) -> float:
        return self.flux_left + self.flux_right

    @property
    def asymmetry(self) -> float:
        scale = max(abs(self.flux_left), abs(self.flux_right))
        return abs(self.sum) / scale if scale > 0 else 0.0

    @property
    def max_residual(self) -> float:
        return max(self.forward.max_residual, self.backward.max_residual)


def _reduced_system(kernel: np.ndarray):
    # Row alpha: F_alpha - F_{alpha+1} = 0, split into inner and end columns.
    diff = kernel[:-1] - kernel[1:]
    return diff[:, 1:-1], diff[:, [0, -1]]


def solve_profile(
    spec: ChainSpec,
    t_left: float,
    t_right: float,
    *,
    formula: str = DEFAULT_FORMULA,
    rtol: float = DEFAULT_RTOL,
    kernel: FluxKernel | None = None,
) -> SCSolution:
    """Self-consistent profile with ``T_1 = t_left`` and ``T_N = t_right``."""
    if not (t_left > 0 and t_right > 0):
        raise ValueError("boundary temperatures must be positive")
    if spec.coupling.is_zero():
        raise DecoupledChainError("decoupled chain: all pair couplings vanish, no self-consistent profile exists")
    K = (kernel or flux_kernel(spec, formula)).matrix
    n = spec.n_sites
    ends = np.array([t_left, t_right], dtype=float)

    if n == 2:
        temps = ends.copy()
        cond = 1.0
    else:
        A, B = _reduced_system(K)
        rhs = -B @ ends
        with warnings.catch_warnings():
            # singularity is diagnosed below with a rank defect
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
        u = np.abs(np.diag(lu))
        scale = np.abs(A).max()
        small = u <= max(A.shape) * np.finfo(float).eps * scale
        if scale == 0 or np.any(small):
            defect = int(np.sum(small)) if scale > 0 else A.shape[0]
            raise SingularSystemError(
                f"self-consistency system is singular (rank defect {defect}) although the chain is coupled",
                rank_defect=defect,
            )
        inner = scipy.linalg.lu_solve((lu, piv), rhs)
        temps = np.concatenate([[t_left], inner, [t_right]])
        cond = float(np.linalg.cond(A))

    fluxes = K @ temps
    flux = float(fluxes.mean())
    residuals = np.abs(np.diff(fluxes))
    tol = rtol * abs(flux) + DEFAULT_ATOL
    if residuals.size and residuals.max() > tol:
        log.warning("self-consistency residual %.3g exceeds tolerance %.3g (condition %.3g)", residuals.max(), tol, cond)
    if np.any(temps <= 0):
        bad = int(np.argmin(temps))
        warnings.warn(
            f"outside model validity: self-consistent temperature at site {bad} is {temps[bad]:.6g}",
            OutsideValidityWarning,
            stacklevel=2,
        )
    return SCSolution(
        profile=TemperatureProfile(temps),
        flux=flux,
        site_fluxes=fluxes,
        residuals=residuals,
        condition=cond,
        tolerance=tol,
    )


def boundary_coefficients(spec: ChainSpec, *, formula: str = DEFAULT_FORMULA, kernel: FluxKernel | None = None):
    """``(a, b)`` with steady current ``a T_1 + b T_N`` (the solve is linear in the ends)."""
    kernel = kernel or flux_kernel(spec, formula)
    a = solve_profile(spec, 1.0, 1.0, kernel=kernel).flux
    # F(1, 1) = a + b and F(2, 1) = 2a + b; avoids a zero boundary temperature.
    a2 = solve_profile(spec, 2.0, 1.0, kernel=kernel).flux
    return a2 - a, 2 * a - a2


def rectification(
    spec: ChainSpec,
    t_hot: float,
    t_cold: float,
    *,
    formula: str = DEFAULT_FORMULA,
    rtol: float = DEFAULT_RTOL,
    kernel: FluxKernel | None = None,
) -> RectificationReport:
    """Currents with the hot bath on the left and then on the right."""
    if not (t_hot > t_cold > 0):
        raise ValueError(f"need t_hot > t_cold > 0, got t_hot={t_hot}, t_cold={t_cold}")
    kernel = kernel or flux_kernel(spec, formula)
    fwd = solve_profile(spec, t_hot, t_cold, rtol=rtol, kernel=kernel)
    bwd = solve_profile(spec, t_cold, t_hot, rtol=rtol, kernel=kernel)
    return RectificationReport(flux_left=fwd.flux, flux_right=bwd.flux, forward=fwd, backward=bwd)


@dataclass(frozen=True)
class SweepRow:
    t_hot: float
    t_cold: float
    report: RectificationReport | None = None
    error: str | None = None


def sweep(
    spec: ChainSpec,
    pairs: Iterable[Sequence[float]],
    *,
    formula: str = DEFAULT_FORMULA,
    rtol: float = DEFAULT_RTOL,
    max_workers: int | None = None,
) -> list[SweepRow]:
    """One rectification report per ``(t_hot, t_cold)`` pair, in input order.

    A failing row records its error and the sweep continues.
    """
    pairs = [(float(h), float(c)) for h, c in pairs]
    if not pairs:
        return []
    kernel = flux_kernel(spec, formula)

    def run(pair):
        h, c = pair
        try:
            return SweepRow(h, c, report=rectification(spec, h, c, rtol=rtol, kernel=kernel))
        except (ValueError, np.linalg.LinAlgError) as exc:
            return SweepRow(h, c, error=str(exc))

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(run, pairs))
    return [run(p) for p in pairs]
