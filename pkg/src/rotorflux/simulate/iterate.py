"""Fixed-point search for inner-bath temperatures by direct simulation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..model import ChainSpec, TemperatureProfile
from .core import SimConfig, SimObservables, integrate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SCConfig:
    """``damping = 1`` is plain substitution, which tends to oscillate."""

    max_iters: int = 20
    damping: float = 0.5
    tol: float = 0.05

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


class SCNotConverged(RuntimeError):
    def __init__(self, history: list[float], profile: TemperatureProfile):
        super().__init__(
            f"self-consistent iteration did not converge in {len(history)} iterations; "
            f"relative bath residuals: {', '.join(f'{h:.3g}' for h in history)}"
        )
        self.history = history
        self.profile = profile


@dataclass(frozen=True)
class SCResult:
    profile: TemperatureProfile
    observables: SimObservables
    residual_history: list[float] = field(default_factory=list)
    degenerate: bool = False

    @property
    def iterations(self) -> int:
        return len(self.residual_history)


def sc_iterate(
    spec: ChainSpec,
    t_left: float,
    t_right: float,
    sim_config: SimConfig,
    sc_config: SCConfig | None = None,
    *,
    initial=None,
) -> SCResult:
    """Relax the inner bath temperatures towards the measured kinetic ones.

    Converged when every inner site has ``|<R_j>| < tol * zeta_j * T_j``.
    Each iteration draws fresh noise streams keyed by the iteration number.
    """
    sc_config = sc_config or SCConfig()
    if not (t_left > 0 and t_right > 0):
        raise ValueError("boundary temperatures must be positive")
    n = spec.n_sites
    if initial is None:
        temps = np.linspace(t_left, t_right, n)
    else:
        temps = np.array(initial, dtype=float)
        temps[0], temps[-1] = t_left, t_right
    degenerate = spec.coupling.is_zero()
    if degenerate:
        log.warning("decoupled chain: inner temperatures are not constrained by the dynamics")
    inner = slice(1, n - 1)
    zeta = spec.bath_coupling
    history: list[float] = []
    for it in range(sc_config.max_iters):
        obs = integrate(spec, temps, sim_config, stream_prefix=(it,))
        kin = obs.kinetic_temps.mean
        resid = zeta[inner] * (temps[inner] - kin[inner])
        rel = float(np.max(np.abs(resid) / (zeta[inner] * temps[inner]))) if n > 2 else 0.0
        history.append(rel)
        log.info("sc iteration %d: max relative bath residual %.3g", it, rel)
        if rel < sc_config.tol:
            return SCResult(TemperatureProfile(temps.copy()), obs, history, degenerate)
        d = sc_config.damping
        temps[inner] = (1 - d) * temps[inner] + d * kin[inner]
    raise SCNotConverged(history, TemperatureProfile(temps.copy()))
