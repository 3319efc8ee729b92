"""Flat key-value run configuration.

A config file is a YAML mapping whose keys are all listed in ``SCHEMA``;
nested sections are not used.  Command-line flags override file values.
Chain defaults describe the graded next-nearest-neighbour benchmark chain
(16 sites, masses 1 -> 0.5, ``nu = -0.11``, ``T_H = 0.2``, ``T_C = 0.1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from .analytic.flux import DEFAULT_FORMULA, FORMULAS
from .model import ChainSpec, CouplingMatrix, graded_masses
from .simulate import SimConfig
from .simulate.core import SCHEMES
from .simulate.iterate import SCConfig


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def _num(x, key):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise ConfigError(f"{key}: must be finite")
    return x


def _int(x, key):
    if isinstance(x, bool):
        raise ConfigError(f"{key}: expected an integer, got {x!r}")
    if isinstance(x, float) and x.is_integer():
        x = int(x)
    if not isinstance(x, int):
        raise ConfigError(f"{key}: expected an integer, got {x!r}")
    return x


def _num_or_list(x, key):
    if isinstance(x, (list, tuple)):
        return [_num(v, f"{key}[{i + 1}]") for i, v in enumerate(x)]
    return _num(x, key)


def _temperatures(x, key):
    if isinstance(x, str):
        if x != "linear":
            raise ConfigError(f"{key}: expected a list of numbers or 'linear', got {x!r}")
        return x
    if not isinstance(x, (list, tuple)):
        raise ConfigError(f"{key}: expected a list of numbers or 'linear'")
    out = []
    for i, v in enumerate(x):
        if v is None:
            raise ConfigError(f"{key}: missing temperature for site {i + 1}")
        out.append(_num(v, f"{key}[site {i + 1}]"))
    return out


def _pairs(x, key):
    if not isinstance(x, (list, tuple)):
        raise ConfigError(f"{key}: expected a list of [t_hot, t_cold] pairs")
    out = []
    for i, pair in enumerate(x):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"{key}[{i + 1}]: expected [t_hot, t_cold]")
        out.append((_num(pair[0], f"{key}[{i + 1}]"), _num(pair[1], f"{key}[{i + 1}]")))
    return out


def _choice(options):
    def check(x, key):
        if x not in options:
            raise ConfigError(f"{key}: {x!r} is not one of {', '.join(options)}")
        return x

    return check


def _bool(x, key):
    if not isinstance(x, bool):
        raise ConfigError(f"{key}: expected true or false")
    return x


def _opt_int(x, key):
    return None if x is None else _int(x, key)


# key -> (parser, default)
SCHEMA: dict[str, tuple[Callable[[Any, str], Any], Any]] = {
    "n_sites": (_int, 16),
    "mass": (_num_or_list, None),
    "m1": (_num, 1.0),
    "mN": (_num, 0.5),
    "pinning": (_num_or_list, 1.0),
    "zeta": (_num_or_list, 1.0),
    "lambda": (_num, 1.0),
    "nu": (_num, -0.11),
    "kappa": (_num, 1.0),
    "t_hot": (_num, 0.2),
    "t_cold": (_num, 0.1),
    "temperatures": (_temperatures, None),
    "pairs": (_pairs, None),
    "formula": (_choice(FORMULAS), DEFAULT_FORMULA),
    "tol": (_num, 1e-10),
    "workers": (_opt_int, None),
    "dt": (_num, 0.01),
    "n_steps": (_int, 100_000),
    "burn_in": (_opt_int, None),
    "n_trajectories": (_int, 8),
    "seed": (_int, 0),
    "scheme": (_choice(tuple(SCHEMES)), "stochastic-heun"),
    "sc": (_bool, False),
    "sc_max_iters": (_int, 20),
    "sc_damping": (_num, 0.5),
    "sc_tol": (_num, 0.05),
}


@dataclass(frozen=True)
class RunConfig:
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @classmethod
    def from_sources(cls, path: str | Path | None = None, overrides: dict | None = None) -> "RunConfig":
        raw: dict = {}
        if path is not None:
            raw.update(load_file(path))
        for key, val in (overrides or {}).items():
            if val is not None:
                raw[key] = val
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        unknown = sorted(set(raw) - set(SCHEMA))
        if unknown:
            raise ConfigError(f"unknown config key {unknown[0]!r}")
        values = {}
        for key, (parse, default) in SCHEMA.items():
            values[key] = parse(raw[key], key) if key in raw and raw[key] is not None else default
        cfg = cls(values)
        cfg._check()
        return cfg

    def _check(self):
        v = self.values
        if v["n_sites"] < 2:
            raise ConfigError(f"n_sites: need at least 2 sites, got {v['n_sites']}")
        for key in ("m1", "mN", "kappa", "t_hot", "t_cold", "tol", "dt"):
            if not v[key] > 0:
                raise ConfigError(f"{key}: must be positive")
        # lambda = 0 is a decoupled chain: meaningful for simulate, rejected by the solvers
        if not v["lambda"] >= 0:
            raise ConfigError("lambda: must be non-negative")
        if v["nu"] != 0 and v["n_sites"] < 3:
            raise ConfigError("nu: next-nearest coupling needs n_sites >= 3")

    # builders ---------------------------------------------------------

    def per_site(self, key) -> np.ndarray:
        n = self.values["n_sites"]
        val = self.values[key]
        arr = np.full(n, val) if np.isscalar(val) else np.asarray(val, dtype=float)
        if arr.shape != (n,):
            raise ConfigError(f"{key}: expected {n} entries, got {arr.size}")
        if np.any(arr <= 0):
            bad = int(np.argmin(arr))
            raise ConfigError(f"{key}: entry for site {bad + 1} must be positive")
        return arr

    def masses(self) -> np.ndarray:
        if self.values["mass"] is not None:
            return self.per_site("mass")
        return graded_masses(self.values["n_sites"], self.values["m1"], self.values["mN"])

    def chain(self) -> ChainSpec:
        v = self.values
        n = v["n_sites"]
        coupling = CouplingMatrix.from_offsets(n, {1: v["lambda"], 2: v["nu"]})
        return ChainSpec(
            n_sites=n,
            masses=self.masses(),
            pinning=self.per_site("pinning"),
            bath_coupling=self.per_site("zeta"),
            kappa=v["kappa"],
            coupling=coupling,
        )

    def temperature_profile(self, *, required: bool = False) -> np.ndarray:
        """Explicit per-site list, or the linear ramp from ``t_hot`` to ``t_cold``."""
        v = self.values
        n = v["n_sites"]
        t = v["temperatures"]
        if t is None and required:
            raise ConfigError("temperatures: no profile given (list one value per site or 'linear')")
        if t is None or t == "linear":
            return np.linspace(v["t_hot"], v["t_cold"], n)
        if len(t) < n:
            raise ConfigError(f"temperatures: missing temperature for site {len(t) + 1}")
        if len(t) > n:
            raise ConfigError(f"temperatures: {len(t)} entries for {n} sites")
        arr = np.asarray(t, dtype=float)
        if np.any(arr <= 0):
            bad = int(np.argmin(arr))
            raise ConfigError(f"temperatures: site {bad + 1} has non-positive temperature {arr[bad]:g}")
        return arr

    def rect_pair(self) -> tuple[float, float]:
        h, c = self.values["t_hot"], self.values["t_cold"]
        if not h > c:
            raise ConfigError(f"t_hot must exceed t_cold (got {h:g} and {c:g})")
        return h, c

    def sim_config(self) -> SimConfig:
        v = self.values
        try:
            return SimConfig(
                dt=v["dt"],
                n_steps=v["n_steps"],
                burn_in=v["burn_in"],
                n_trajectories=v["n_trajectories"],
                seed=v["seed"],
                scheme=v["scheme"],
                max_workers=v["workers"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sc_config(self) -> SCConfig:
        v = self.values
        try:
            return SCConfig(max_iters=v["sc_max_iters"], damping=v["sc_damping"], tol=v["sc_tol"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def load_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping of keys to values")
    for key, val in data.items():
        if isinstance(val, dict):
            raise ConfigError(f"config key {key!r}: nested sections are not supported")
    return data
