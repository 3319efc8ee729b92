"""Closed-form currents for homogeneous and nearly homogeneous chains.

Used as references for the general kernel and by the CLI's ``--explain``
output; nothing else in the package depends on them.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


def conductivity(lam, zeta, m, M):
    """Temperature-independent conductivity of the homogeneous NN chain."""
    return lam**2 / (2 * zeta * m * M)


def homogeneous_flux(lam, zeta, m, M, t_left, t_right):
    return conductivity(lam, zeta, m, M) * (t_left - t_right)


def homogeneous_aggregate(lam, zeta, m, M, n_sites, t_first, t_last):
    """Uniform current of an ``n_sites`` homogeneous NN chain (telescoped)."""
    return conductivity(lam, zeta, m, M) * (t_first - t_last) / (n_sites - 1)


def quasi_homogeneous_flux(lam, m, M, zeta_left, zeta_right, t_left, t_right):
    return lam**2 / (m * M) * (t_left - t_right) / (zeta_left + zeta_right)


def quasi_homogeneous_aggregate(lam, m, M, zetas: Sequence[float], t_first, t_last):
    z = np.asarray(zetas, dtype=float)
    return lam**2 / (m * M) * (t_first - t_last) / float(np.sum(z[:-1] + z[1:]))


def nnn_flux(lam, nu, m, M, zetas: Sequence[float], temps: Sequence[float]):
    """Site current with NN and NNN bonds; ``zetas``/``temps`` for sites alpha..alpha+2."""
    z0, z1, z2 = zetas
    t0, t1, t2 = temps
    return lam**2 / (m * M) * (t0 - t1) / (z0 + z1) + nu**2 / (m * M) * (t0 - t2) / (z0 + z2)


def nnn_aggregate(lam, nu, m, M, zeta, n_sites, t_first, t_last):
    """Approximate uniform current of the homogeneous NNN chain, end corrections dropped."""
    return (lam**2 + 2 * nu**2) / (2 * m * M * zeta) * (t_first - t_last) / (n_sites - 1)


CASES: dict[str, Callable[..., float]] = {
    "conductivity": conductivity,
    "homogeneous_flux": homogeneous_flux,
    "homogeneous_aggregate": homogeneous_aggregate,
    "quasi_homogeneous_flux": quasi_homogeneous_flux,
    "quasi_homogeneous_aggregate": quasi_homogeneous_aggregate,
    "nnn_flux": nnn_flux,
    "nnn_aggregate": nnn_aggregate,
}


def closed_form_reference(case: str, **params) -> float:
    try:
        fn = CASES[case]
    except KeyError:
        raise ValueError(f"unknown closed-form case {case!r}; known: {', '.join(sorted(CASES))}") from None
    return float(fn(**params))
