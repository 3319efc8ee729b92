"""Ornstein-Uhlenbeck reference process of the uncoupled chain.

With all pair couplings switched off every site is an independent damped
oscillator driven by white noise.  Phase-space vectors are ordered as
``(q_0 .. q_{N-1}, p_0 .. p_{N-1})``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import ChainSpec, as_temperatures

# Relative size of rho^2 below which the critically damped limit is used.
_CRITICAL_RTOL = 1e-12


@dataclass(frozen=True)
class SitePropagatorParams:
    """Single-site data entering ``exp(-t A_j)``.

    ``rho_squared = (zeta/2)^2 - M/m``; its sign selects the hyperbolic
    (overdamped), trigonometric (underdamped) or critical branch.
    """

    zeta: float
    mass: float
    pinning: float
    rho_squared: float

    @classmethod
    def of(cls, spec: ChainSpec, j: int) -> "SitePropagatorParams":
        z, m, M = float(spec.bath_coupling[j]), float(spec.masses[j]), float(spec.pinning[j])
        return cls(zeta=z, mass=m, pinning=M, rho_squared=(z / 2) ** 2 - M / m)

    @property
    def branch(self) -> str:
        scale = max(self.zeta**2 / 4, self.pinning / self.mass)
        if abs(self.rho_squared) < _CRITICAL_RTOL * scale:
            return "critical"
        return "hyperbolic" if self.rho_squared > 0 else "trigonometric"

    @property
    def rho(self) -> complex:
        return complex(np.sqrt(complex(self.rho_squared)))

    @property
    def drift(self) -> np.ndarray:
        """The 2x2 drift block ``A_j`` of ``d phi = -A phi dt + sigma dB``."""
        return np.array([[0.0, -1.0 / self.mass], [self.pinning, self.zeta]])

    @property
    def b_matrix(self) -> np.ndarray:
        z = self.zeta / 2
        return np.array([[z, 1.0 / self.mass], [-self.pinning, -z]])


def _ch_sh(params: SitePropagatorParams, t: float) -> tuple[float, float]:
    """``cosh(rho t)`` and ``sinh(rho t) / rho`` times ``exp(-zeta t / 2)``."""
    branch = params.branch
    decay = params.zeta * t / 2
    if branch == "critical":
        e = np.exp(-decay)
        return float(e), float(t * e)
    r = np.sqrt(abs(params.rho_squared))
    if branch == "hyperbolic":
        # r < zeta/2 always, so both exponents are non-positive and nothing overflows.
        up, down = np.exp(r * t - decay), np.exp(-r * t - decay)
        return float((up + down) / 2), float((up - down) / (2 * r))
    e = np.exp(-decay)
    return float(np.cos(r * t) * e), float(np.sin(r * t) / r * e)


def site_propagator(spec: ChainSpec, j: int, t: float) -> np.ndarray:
    """``exp(-t A_j)`` for site ``j`` as a real 2x2 matrix."""
    if not 0 <= j < spec.n_sites:
        raise IndexError(f"site {j} out of range for {spec.n_sites} sites")
    if t < 0:
        raise ValueError("propagator time must be non-negative")
    params = SitePropagatorParams.of(spec, j)
    ch, sh = _ch_sh(params, t)
    return ch * np.eye(2) + sh * params.b_matrix


@dataclass(frozen=True)
class StationaryCovariance:
    """Stationary covariance of the uncoupled chain: diagonal, no q-p cross block."""

    position: np.ndarray
    momentum: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.position.size

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.concatenate([self.position, self.momentum]))


def stationary_covariance(spec: ChainSpec, temperatures) -> StationaryCovariance:
    t = as_temperatures(temperatures, spec.n_sites)
    if np.any(t <= 0):
        raise ValueError("stationary covariance needs strictly positive temperatures")
    return StationaryCovariance(position=t / spec.pinning, momentum=spec.masses * t)


def gaussian_moment(cov, h, a: int | None = None, kappa: float = 1.0) -> complex:
    """``E[phi_a exp(i kappa (h, phi))]`` for a centred Gaussian ``phi``.

    Obtained by differentiating the characteristic function
    ``G(h) = exp(-kappa^2 (h, cov h) / 2)``.  Without ``a`` the characteristic
    function itself is returned.
    """
    cov = np.asarray(cov.matrix if isinstance(cov, StationaryCovariance) else cov, dtype=float)
    h = np.asarray(h, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    if h.shape != (cov.shape[0],):
        raise ValueError(f"phase vector has shape {h.shape}, covariance is {cov.shape}")
    ch = cov @ h
    g = np.exp(-0.5 * kappa**2 * float(h @ ch))
    if a is None:
        return complex(g)
    if not 0 <= a < h.size:
        raise IndexError(f"linear index {a} out of range")
    return complex(1j * kappa * ch[a] * g)
