"""Chain specifications, coupling presets, graded masses and unit scaling.

Site indices are zero-based throughout the Python API: a chain of ``N``
sites has sites ``0 .. N-1`` and right-going site currents ``0 .. N-2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _per_site(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or have length {n}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"{name} must be finite and strictly positive")
    return _frozen(arr)


class CouplingMatrix:
    """Symmetric pair couplings ``lambda_{j,l}`` with zero diagonal."""

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.all(np.isfinite(m)):
            raise ValueError("coupling matrix must be finite")
        if not np.array_equal(m, m.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(m) != 0.0):
            raise ValueError("self-coupling lambda_{j,j} must be zero")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def from_offsets(cls, n: int, offsets: Mapping[int, float]) -> "CouplingMatrix":
        """Translation-invariant couplings, ``offsets[d]`` for ``|j - l| = d``."""
        m = np.zeros((n, n))
        for d, value in offsets.items():
            if d < 1:
                raise ValueError(f"coupling offset must be >= 1, got {d}")
            if d >= n:
                if value != 0.0:
                    raise ValueError(f"offset {d} does not fit in a chain of {n} sites")
                continue
            idx = np.arange(n - d)
            m[idx, idx + d] = value
            m[idx + d, idx] = value
        return cls(m)

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def n_sites(self) -> int:
        return self._m.shape[0]

    def __call__(self, j: int, l: int) -> float:
        return float(self._m[j, l])

    def bonds(self) -> list[tuple[int, int, float]]:
        """Nonzero pairs ``(j, l, lambda)`` with ``j < l``."""
        j, l = np.nonzero(np.triu(self._m, 1))
        return [(int(a), int(b), float(self._m[a, b])) for a, b in zip(j, l)]

    @property
    def max_range(self) -> int:
        b = self.bonds()
        return max((l - j for j, l, _ in b), default=0)

    def is_zero(self) -> bool:
        return not np.any(self._m)

    def scaled(self, factor: float) -> "CouplingMatrix":
        return CouplingMatrix(self._m * factor)

    def __eq__(self, other) -> bool:
        return isinstance(other, CouplingMatrix) and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self) -> str:
        return f"CouplingMatrix(n_sites={self.n_sites}, bonds={len(self.bonds())})"


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """Physical description of an oscillator chain.

    ``masses``, ``pinning`` (on-site stiffness ``M_j``) and ``bath_coupling``
    (``zeta_j``) are per-site arrays; ``kappa`` is the wave number of the
    cosine interaction.
    """

    n_sites: int
    masses: np.ndarray
    pinning: np.ndarray
    bath_coupling: np.ndarray
    kappa: float
    coupling: CouplingMatrix

    def __post_init__(self):
        n = int(self.n_sites)
        if n < 2:
            raise ValueError(f"a chain needs at least 2 sites, got {n}")
        object.__setattr__(self, "n_sites", n)
        object.__setattr__(self, "masses", _per_site(self.masses, n, "masses"))
        object.__setattr__(self, "pinning", _per_site(self.pinning, n, "pinning"))
        object.__setattr__(self, "bath_coupling", _per_site(self.bath_coupling, n, "bath_coupling"))
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError("kappa must be finite and strictly positive")
        object.__setattr__(self, "kappa", float(self.kappa))
        if not isinstance(self.coupling, CouplingMatrix):
            object.__setattr__(self, "coupling", CouplingMatrix(self.coupling))
        if self.coupling.n_sites != n:
            raise ValueError("coupling matrix size does not match n_sites")

    @property
    def lam(self) -> np.ndarray:
        """Dense coupling matrix (read-only view)."""
        return self.coupling.matrix

    def replace(self, **changes) -> "ChainSpec":
        fields = dict(
            n_sites=self.n_sites,
            masses=self.masses,
            pinning=self.pinning,
            bath_coupling=self.bath_coupling,
            kappa=self.kappa,
            coupling=self.coupling,
        )
        fields.update(changes)
        return ChainSpec(**fields)

    def reversed(self) -> "ChainSpec":
        """The same chain read from right to left."""
        return ChainSpec(
            n_sites=self.n_sites,
            masses=self.masses[::-1],
            pinning=self.pinning[::-1],
            bath_coupling=self.bath_coupling[::-1],
            kappa=self.kappa,
            coupling=CouplingMatrix(self.lam[::-1, ::-1]),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainSpec):
            return NotImplemented
        return (
            self.n_sites == other.n_sites
            and np.array_equal(self.masses, other.masses)
            and np.array_equal(self.pinning, other.pinning)
            and np.array_equal(self.bath_coupling, other.bath_coupling)
            and self.kappa == other.kappa
            and self.coupling == other.coupling
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TemperatureProfile:
    """Bath temperatures, one per site; the two ends are the driven baths.

    Positivity is not enforced here because a self-consistent profile of
    the linear low-temperature model can leave the physical range; use
    :meth:`require_positive` where a temperature feeds a noise amplitude.
    """

    temperatures: np.ndarray
    pinned: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.array(self.temperatures, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("temperatures must be a non-empty 1-D array")
        if not np.all(np.isfinite(t)):
            raise ValueError("temperatures must be finite")
        object.__setattr__(self, "temperatures", _frozen(t))
        if self.pinned is None:
            pinned = np.zeros(t.size, dtype=bool)
            pinned[[0, -1]] = True
        else:
            pinned = np.array(self.pinned, dtype=bool)
            if pinned.shape != t.shape:
                raise ValueError("pinned flags must match temperatures")
        pinned.setflags(write=False)
        object.__setattr__(self, "pinned", pinned)

    @classmethod
    def linear(cls, n: int, t_left: float, t_right: float) -> "TemperatureProfile":
        return cls(np.linspace(t_left, t_right, n))

    def __len__(self) -> int:
        return self.temperatures.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.temperatures, dtype=dtype)

    @property
    def t_left(self) -> float:
        return float(self.temperatures[0])

    @property
    def t_right(self) -> float:
        return float(self.temperatures[-1])

    def is_positive(self) -> bool:
        return bool(np.all(self.temperatures > 0))

    def require_positive(self) -> "TemperatureProfile":
        if not self.is_positive():
            bad = int(np.argmin(self.temperatures))
            raise ValueError(f"temperature at site {bad} is not positive ({self.temperatures[bad]:g})")
        return self


def _chain(n, mass, pinning, zeta, kappa, offsets) -> ChainSpec:
    return ChainSpec(
        n_sites=n,
        masses=_per_site(mass, n, "mass"),
        pinning=_per_site(pinning, n, "pinning"),
        bath_coupling=_per_site(zeta, n, "zeta"),
        kappa=kappa,
        coupling=CouplingMatrix.from_offsets(n, offsets),
    )


def build_nn_chain(n, mass, pinning, zeta, lam, kappa) -> ChainSpec:
    """Chain with uniform nearest-neighbour coupling ``lam``.

    ``mass``, ``pinning`` and ``zeta`` may be scalars or per-site arrays.
    """
    if n < 2:
        raise ValueError(f"a nearest-neighbour chain needs N >= 2, got {n}")
    if not lam > 0:
        raise ValueError("nearest-neighbour coupling must be positive")
    return _chain(n, mass, pinning, zeta, kappa, {1: float(lam)})


def build_nnn_chain(n, mass, pinning, zeta, lam, nu, kappa) -> ChainSpec:
    """Nearest (``lam > 0``) plus next-nearest (``nu``, any sign) couplings."""
    if not lam > 0:
        raise ValueError("nearest-neighbour coupling must be positive")
    if nu != 0 and n < 3:
        raise ValueError(f"next-nearest coupling needs N >= 3, got {n}")
    if n < 2:
        raise ValueError(f"a chain needs N >= 2, got {n}")
    return _chain(n, mass, pinning, zeta, kappa, {1: float(lam), 2: float(nu)})


def graded_masses(n: int, m1: float, mN: float) -> np.ndarray:
    """Linear mass ramp from ``m1`` at the left end to ``mN`` at the right."""
    if n < 2:
        raise ValueError(f"graded masses need N >= 2, got {n}")
    if not (m1 > 0 and mN > 0):
        raise ValueError("end masses must be positive")
    j = np.arange(1, n + 1, dtype=float)
    return ((n - j) * m1 + (j - 1) * mN) / (n - 1)


@dataclass(frozen=True)
class DimensionlessScaling:
    """Energy, mass and frequency units of the reduced description.

    ``energy`` is the nearest-neighbour coupling, ``mass`` the first mass and
    ``frequency`` ``sqrt(M / m_1)``; all other conversion factors follow.
    """

    energy: float
    mass: float
    frequency: float

    @property
    def stiffness(self) -> float:
        return self.mass * self.frequency**2

    @property
    def length(self) -> float:
        return float(np.sqrt(self.energy / self.stiffness))

    @property
    def momentum(self) -> float:
        return float(np.sqrt(self.mass * self.energy))

    @property
    def time(self) -> float:
        return 1.0 / self.frequency

    def position(self, q):
        return np.asarray(q) / self.length

    def momentum_hat(self, p):
        return np.asarray(p) / self.momentum

    def factors(self) -> dict[str, float]:
        """Physical value = reduced value x factor, per quantity."""
        return {
            "energy": self.energy,
            "temperature": self.energy,
            "coupling": self.energy,
            "mass": self.mass,
            "pinning": self.stiffness,
            "bath_coupling": self.frequency,
            "kappa": 1.0 / self.length,
            "position": self.length,
            "momentum": self.momentum,
            "time": self.time,
        }


def _nn_energy(spec: ChainSpec) -> float:
    lam = spec.lam
    nn = np.diagonal(lam, 1)
    if nn.size == 0 or not np.all(nn == nn[0]) or not nn[0] > 0:
        raise ValueError("energy scale needs a uniform positive nearest-neighbour coupling")
    return float(nn[0])


def nondimensionalize(spec: ChainSpec, temperatures, energy_scale: float | None = None):
    """Reduce a chain with uniform pinning to units with ``lambda = M = m_1 = 1``.

    Returns ``(reduced_spec, reduced_profile, scaling)``.
    """
    if not np.all(spec.pinning == spec.pinning[0]):
        raise ValueError("nondimensionalization requires uniform pinning")
    lam = _nn_energy(spec) if energy_scale is None else float(energy_scale)
    if not lam > 0:
        raise ValueError("energy scale must be positive")
    m1 = float(spec.masses[0])
    omega = float(np.sqrt(spec.pinning[0] / m1))
    sc = DimensionlessScaling(energy=lam, mass=m1, frequency=omega)
    f = sc.factors()
    profile = temperatures if isinstance(temperatures, TemperatureProfile) else TemperatureProfile(temperatures)
    if len(profile) != spec.n_sites:
        raise ValueError("temperature profile length does not match the chain")
    reduced = ChainSpec(
        n_sites=spec.n_sites,
        masses=spec.masses / f["mass"],
        pinning=spec.pinning / f["pinning"],
        bath_coupling=spec.bath_coupling / f["bath_coupling"],
        kappa=spec.kappa / f["kappa"],
        coupling=spec.coupling.scaled(1.0 / f["coupling"]),
    )
    t_hat = TemperatureProfile(profile.temperatures / f["temperature"], profile.pinned)
    return reduced, t_hat, sc


def redimensionalize(spec: ChainSpec, temperatures, scaling: DimensionlessScaling):
    """Inverse of :func:`nondimensionalize`."""
    f = scaling.factors()
    profile = temperatures if isinstance(temperatures, TemperatureProfile) else TemperatureProfile(temperatures)
    physical = ChainSpec(
        n_sites=spec.n_sites,
        masses=spec.masses * f["mass"],
        pinning=spec.pinning * f["pinning"],
        bath_coupling=spec.bath_coupling * f["bath_coupling"],
        kappa=spec.kappa * f["kappa"],
        coupling=spec.coupling.scaled(f["coupling"]),
    )
    return physical, TemperatureProfile(profile.temperatures * f["temperature"], profile.pinned)


def as_temperatures(temperatures: "TemperatureProfile | Iterable[float]", n: int | None = None) -> np.ndarray:
    t = np.asarray(temperatures.temperatures if isinstance(temperatures, TemperatureProfile) else temperatures, dtype=float)
    if n is not None and t.shape[0] != n:
        raise ValueError(f"expected {n} temperatures, got {t.shape[0]}")
    return t
