"""Langevin integration of the rotor chain and steady-state estimators.

Each site carries its own bath ``-zeta_j p_j dt + sqrt(2 m_j zeta_j T_j) dB_j``.
Noise comes from one counter-based Philox stream per (trajectory, site),
so adding trajectories never shifts the streams of existing ones.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..model import ChainSpec, TemperatureProfile, as_temperatures
from . import _kernel

log = logging.getLogger(__name__)

SCHEMES = {"euler-maruyama": _kernel.EULER_MARUYAMA, "stochastic-heun": _kernel.STOCHASTIC_HEUN}
STABILITY_WARN = 0.05
STABILITY_LIMIT = 0.1


class IntegratorAbort(FloatingPointError):
    """The trajectory left the finite floating-point range."""

    def __init__(self, trajectory: int, step: int, site: int, what: str = "state"):
        super().__init__(f"non-finite {what} in trajectory {trajectory} at step {step}, site {site}")
        self.trajectory = trajectory
        self.step = step
        self.site = site


class StabilityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    ``burn_in`` defaults to ``n_steps // 4``, i.e. 20% of all integrated steps.
    """

    dt: float = 0.01
    n_steps: int = 100_000
    burn_in: int | None = None
    n_trajectories: int = 8
    seed: int = 0
    scheme: str = "stochastic-heun"
    chunk_size: int = 65_536
    max_workers: int | None = None

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.n_steps // 4)
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")

    @property
    def total_steps(self) -> int:
        return self.n_steps + self.burn_in

    def stability_number(self, spec: ChainSpec) -> float:
        rate = np.maximum(spec.bath_coupling, np.sqrt(spec.pinning / spec.masses))
        return float(self.dt * rate.max())

    def check_stability(self, spec: ChainSpec) -> float:
        x = self.stability_number(spec)
        if x > STABILITY_LIMIT:
            raise ValueError(f"dt*max(zeta, sqrt(M/m)) = {x:.3g} exceeds the stability limit {STABILITY_LIMIT}")
        if x > STABILITY_WARN:
            warnings.warn(
                f"dt*max(zeta, sqrt(M/m)) = {x:.3g} is above {STABILITY_WARN}; results may carry step-size bias",
                StabilityWarning,
                stacklevel=3,
            )
        return x


@dataclass(frozen=True)
class Estimate:
    """Mean over trajectories and its standard error (NaN for one trajectory)."""

    mean: np.ndarray
    stderr: np.ndarray

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "Estimate":
        samples = np.asarray(samples, dtype=float)
        mean = samples.mean(axis=0)
        n = samples.shape[0]
        if n < 2:
            se = np.full_like(mean, np.nan)
        else:
            se = samples.std(axis=0, ddof=1) / math.sqrt(n)
        return cls(mean=mean, stderr=se)

    def zscore(self, reference) -> np.ndarray:
        return (self.mean - np.asarray(reference, dtype=float)) / self.stderr


@dataclass(frozen=True)
class SimObservables:
    """Time averages after burn-in, aggregated over trajectories.

    ``flux_site[a]`` is the current leaving site ``a`` to the right, for
    ``a = 0 .. N-2``; ``flux_cut[a]`` sums every bond across the cut between
    sites ``a`` and ``a + 1``.
    """

    temperatures: np.ndarray
    bath_coupling: np.ndarray
    flux_site: Estimate
    flux_cut: Estimate
    q2: Estimate
    p2: Estimate
    kinetic_temps: Estimate
    n_trajectories: int
    per_trajectory: dict = field(repr=False, default_factory=dict)

    @property
    def bath_residuals(self) -> Estimate:
        z = self.bath_coupling
        samples = z * (self.temperatures - self.per_trajectory["kinetic_temps"])
        return Estimate.from_samples(samples)

    @property
    def mean_site_flux(self) -> Estimate:
        """Site currents averaged along the chain, one number per trajectory first."""
        return Estimate.from_samples(self.per_trajectory["flux_site"].mean(axis=1))


def heat_current_site(q, p, spec: ChainSpec, alpha: int) -> float:
    """Instantaneous energy current from site ``alpha`` to the sites on its right."""
    if not 0 <= alpha < spec.n_sites - 1:
        raise IndexError(f"alpha must lie in 0..{spec.n_sites - 2}, got {alpha}")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    lam = spec.lam[alpha, alpha + 1 :]
    v = p / spec.masses
    k = spec.kappa
    terms = lam * k * np.sin(k * (q[alpha] - q[alpha + 1 :])) * (v[alpha] + v[alpha + 1 :])
    return float(0.5 * terms.sum())


def bath_residual(stats: SimObservables, spec: ChainSpec, j: int, *, temperature=None, zeta=None) -> float:
    """``zeta_j (T_j - <p_j^2/m_j>)``, the mean power drawn from bath ``j``."""
    z = float(spec.bath_coupling[j]) if zeta is None else float(zeta)
    t = float(stats.temperatures[j]) if temperature is None else float(temperature)
    return z * (t - float(stats.kinetic_temps.mean[j]))


def _streams(seed: int, traj: int, n: int, prefix: tuple[int, ...]):
    return [
        np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(*prefix, traj, site))))
        for site in range(n)
    ]


def _bond_arrays(spec: ChainSpec):
    bonds = spec.coupling.bonds()
    bi = np.array([b[0] for b in bonds], dtype=np.int64)
    bj = np.array([b[1] for b in bonds], dtype=np.int64)
    bl = np.array([b[2] for b in bonds], dtype=float)
    return bi, bj, bl


def _run_trajectory(traj, spec, temps, config, prefix, bonds):
    n = spec.n_sites
    gens = _streams(config.seed, traj, n, prefix)
    inv_m = 1.0 / spec.masses
    pinning = np.ascontiguousarray(spec.pinning)
    zeta = np.ascontiguousarray(spec.bath_coupling)
    with np.errstate(over="ignore"):
        # an infinite noise amplitude surfaces as IntegratorAbort on step 0
        sigma = np.sqrt(2.0 * spec.masses * zeta * temps)
    scheme = SCHEMES[config.scheme]
    q = np.zeros(n)
    p = np.zeros(n)
    acc = {
        "flux_site": np.zeros(n),
        "flux_cut": np.zeros(max(n - 1, 0)),
        "q2": np.zeros(n),
        "p2": np.zeros(n),
        "kinetic_temps": np.zeros(n),
    }
    noise = np.empty((n, config.chunk_size))
    done = 0
    total = config.total_steps
    while done < total:
        m = min(config.chunk_size, total - done)
        buf = noise[:, :m] if m == config.chunk_size else np.empty((n, m))
        for k, g in enumerate(gens):
            g.standard_normal(out=buf[k])
        skip = max(0, min(m, config.burn_in - done))
        status = _kernel.advance(
            q, p, buf, config.dt, scheme, inv_m, pinning, zeta, sigma, spec.kappa,
            *bonds, skip,
            acc["flux_site"], acc["flux_cut"], acc["q2"], acc["p2"], acc["kinetic_temps"],
        )
        if status >= 0:
            raise IntegratorAbort(traj, done + status // n, status % n)
        done += m
    for key in ("q2", "p2"):
        bad = np.flatnonzero(~np.isfinite(acc[key]))
        if bad.size:
            raise IntegratorAbort(traj, total - 1, int(bad[0]), what=f"{key} average")
    out = {key: val / config.n_steps for key, val in acc.items()}
    out["flux_site"] = out["flux_site"][: n - 1]
    return out


def integrate(spec: ChainSpec, profile, config: SimConfig, *, stream_prefix: tuple[int, ...] = ()) -> SimObservables:
    """Integrate ``config.n_trajectories`` independent replicas and average."""
    temps = np.ascontiguousarray(as_temperatures(profile, spec.n_sites), dtype=float)
    if np.any(temps < 0) or not np.all(np.isfinite(temps)):
        raise ValueError("bath temperatures must be finite and non-negative")
    config.check_stability(spec)
    bonds = _bond_arrays(spec)

    def run(traj):
        return _run_trajectory(traj, spec, temps, config, stream_prefix, bonds)

    t0 = time.perf_counter()
    trajs = range(config.n_trajectories)
    if config.max_workers and config.max_workers > 1 and config.n_trajectories > 1:
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            results = list(pool.map(run, trajs))
    else:
        results = [run(t) for t in trajs]
    log.debug("integrated %d trajectories in %.2fs", config.n_trajectories, time.perf_counter() - t0)

    # Stacking in trajectory order keeps the reduction independent of scheduling.
    per = {key: np.stack([r[key] for r in results]) for key in results[0]}
    return SimObservables(
        temperatures=temps,
        bath_coupling=np.asarray(spec.bath_coupling, dtype=float),
        flux_site=Estimate.from_samples(per["flux_site"]),
        flux_cut=Estimate.from_samples(per["flux_cut"]),
        q2=Estimate.from_samples(per["q2"]),
        p2=Estimate.from_samples(per["p2"]),
        kinetic_temps=Estimate.from_samples(per["kinetic_temps"]),
        n_trajectories=config.n_trajectories,
        per_trajectory=per,
    )


def run_metadata(spec: ChainSpec, profile, config: SimConfig, wall_time: float, **extra) -> dict:
    """Plain-data record of a run, suitable for JSON."""
    meta = {
        "config": asdict(config),
        "spec": {
            "n_sites": spec.n_sites,
            "masses": spec.masses.tolist(),
            "pinning": spec.pinning.tolist(),
            "bath_coupling": spec.bath_coupling.tolist(),
            "kappa": spec.kappa,
            "bonds": [list(b) for b in spec.coupling.bonds()],
        },
        "temperatures": as_temperatures(profile, spec.n_sites).tolist(),
        "wall_time_s": wall_time,
        "numba": _kernel.HAVE_NUMBA,
    }
    meta.update(extra)
    return meta


