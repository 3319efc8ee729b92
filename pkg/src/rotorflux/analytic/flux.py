"""Perturbative steady-state heat current of the rotor chain.

The current leaving site ``alpha`` towards the right is, to leading order in
the couplings and at low temperature, the sum of four truncated
correlations against the reference Ornstein-Uhlenbeck measure::

    F_{alpha->} = ft + w1 + w2 + w3

Each term is linear in the bath temperatures, so every function here
accepts either a temperature vector of shape ``(N,)`` or a stack of
vectors of shape ``(N, k)`` (one column per profile) and returns a float
or an array of length ``k`` accordingly.

Three readings of the closed forms are available through ``formula``:

``"printed"``
    The expressions exactly as typeset, including the second factor of
    ``D`` in the fourth group of ``w1``.
``"consistent"``
    As printed, with the fourth group of ``w1`` divided by ``D`` once like
    every other group (the printed double factor is not dimensionally
    consistent).
``"tabulated"``
    ``"consistent"`` plus a ``1/m_alpha^2`` (instead of
    ``1/(m_alpha m_beta)``) prefactor on the ``T_beta`` part of ``w2``.
    This is the reading that reproduces the published graded-mass flux
    table; it differs from the other two only when neighbouring masses
    differ.

All three agree whenever masses are uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import ChainSpec, TemperatureProfile
from .ou import stationary_covariance

PRINTED = "printed"
CONSISTENT = "consistent"
TABULATED = "tabulated"
FORMULAS = (PRINTED, CONSISTENT, TABULATED)
DEFAULT_FORMULA = TABULATED

TERM_NAMES = ("ft", "w1", "w2", "w3")


def _check_formula(formula: str) -> str:
    if formula not in FORMULAS:
        raise ValueError(f"unknown flux formula {formula!r}; choose one of {', '.join(FORMULAS)}")
    return formula


def _temps(spec: ChainSpec, temperatures) -> np.ndarray:
    if isinstance(temperatures, TemperatureProfile):
        temperatures = temperatures.temperatures
    t = np.asarray(temperatures, dtype=float)
    if t.ndim not in (1, 2) or t.shape[0] != spec.n_sites:
        raise ValueError(f"temperatures must have leading dimension {spec.n_sites}, got shape {t.shape}")
    return t


def _check_alpha(spec: ChainSpec, alpha: int) -> int:
    if not 0 <= alpha < spec.n_sites - 1:
        raise IndexError(f"current index {alpha} out of range 0..{spec.n_sites - 2}")
    return int(alpha)


def _partners(spec: ChainSpec, alpha: int) -> np.ndarray:
    """Sites ``beta > alpha`` coupled to ``alpha``."""
    row = spec.lam[alpha, alpha + 1:]
    return np.nonzero(row)[0] + alpha + 1


def _out(value, t: np.ndarray):
    if t.ndim == 1:
        return float(value)
    return np.broadcast_to(np.asarray(value, dtype=float), t.shape[1:]).copy()


def d_coeff(spec: ChainSpec, alpha: int, beta: int) -> float:
    """Denominator ``D_{alpha,beta}`` shared by the ``w`` terms."""
    if alpha == beta:
        raise ValueError("d_coeff needs two distinct sites")
    z = spec.bath_coupling
    r = spec.pinning / spec.masses
    za, zb, ra, rb = z[alpha], z[beta], r[alpha], r[beta]
    return float((za + zb) * (zb * ra + za * rb) + (ra - rb) ** 2)


def ft_lowT(spec: ChainSpec, temperatures, alpha: int):
    """Low-temperature limit of ``-<Omega; F_t>``, the boundary-term correlation."""
    t = _temps(spec, temperatures)
    a = _check_alpha(spec, alpha)
    lam, m, M, z, k = spec.lam, spec.masses, spec.pinning, spec.bath_coupling, spec.kappa
    row_sum = lam.sum(axis=1)
    ca = 1.0 / (z[a] * m[a])
    total = 0.0
    for b in _partners(spec, a):
        lab = lam[a, b]
        cb = 1.0 / (z[b] * m[b])
        total = total + lab**2 / (4 * k) * (t[a] / M[a] + t[b] / M[b]) * (cb - ca)
        # Sum over third sites l != alpha, beta; the diagonal of lam is zero.
        sb = row_sum[b] - lam[b, a]
        sa = row_sum[a] - lam[a, b]
        total = total + lab / (4 * k) * (sb * cb * t[b] / M[b] - sa * ca * t[a] / M[a])
    return _out(total, t)


def w1_lowT(spec: ChainSpec, temperatures, alpha: int, formula: str = DEFAULT_FORMULA):
    """Low-temperature ``-<Omega; W_1>`` (pinning-force correlation), six groups."""
    formula = _check_formula(formula)
    t = _temps(spec, temperatures)
    a = _check_alpha(spec, alpha)
    lam, m, M, z, k = spec.lam, spec.masses, spec.pinning, spec.bath_coupling, spec.kappa
    row_sum = lam.sum(axis=1)
    ma, Ma, za, Ta = m[a], M[a], z[a], t[a]
    total = 0.0
    for b in _partners(spec, a):
        lab, lba = lam[a, b], lam[b, a]
        mb, Mb, zb, Tb = m[b], M[b], z[b], t[b]
        D = d_coeff(spec, a, b)
        zs = za + zb
        dr = Ma / ma - Mb / mb
        sa = row_sum[a] - lam[a, b]
        sb = row_sum[b] - lam[b, a]

        g1 = lab**2 / (4 * ma * Ma * k) * Ta / za - lab * lba / (4 * mb * Mb * k) * Tb / zb
        g2 = lab * sa / (4 * ma * Ma * k) * Ta / za - lab * sb / (4 * mb * Mb * k) * Tb / zb
        g3 = lab / (4 * ma * mb * k) * zs / D * (lba * Ta - lab * Tb)
        extra = D if formula == PRINTED else 1.0
        g4 = lab / (4 * ma * mb * k * D) * dr * (lba * Ta / zb + lab * Tb / (za * extra))
        g5 = (
            lab**2 * Ma / (4 * ma**2 * Mb * k) * zb * zs / (za * D) * Tb
            - lab * lba * Mb / (4 * mb**2 * Ma * k) * za * zs / (zb * D) * Ta
        )
        g6 = (
            lab**2 * Ma / (4 * ma**2 * Mb * k) * dr * Tb / (za * D)
            + lab * lba * Mb / (4 * mb**2 * Ma * k) * dr * Ta / (zb * D)
        )
        total = total + g1 + g2 + g3 + g4 + g5 + g6
    return _out(total, t)


def w2_lowT(spec: ChainSpec, temperatures, alpha: int, formula: str = DEFAULT_FORMULA):
    """Low-temperature ``-<Omega; W_2>`` (bath-friction correlation)."""
    formula = _check_formula(formula)
    t = _temps(spec, temperatures)
    a = _check_alpha(spec, alpha)
    lam, m, z, k = spec.lam, spec.masses, spec.bath_coupling, spec.kappa
    total = 0.0
    for b in _partners(spec, a):
        lab, lba = lam[a, b], lam[b, a]
        mass_b = m[a] * m[a] if formula == TABULATED else m[a] * m[b]
        pref = lab * (z[a] + z[b]) / (2 * k * d_coeff(spec, a, b))
        total = total + pref * (lba * t[a] / (m[a] * m[b]) - lab * t[b] / mass_b)
    return _out(total, t)


def w3_lowT(spec: ChainSpec, temperatures, alpha: int, formula: str = DEFAULT_FORMULA):
    """Low-temperature ``-<Omega; W_3>``; vanishes when ``M/m`` is uniform."""
    _check_formula(formula)
    t = _temps(spec, temperatures)
    a = _check_alpha(spec, alpha)
    lam, m, M, z, k = spec.lam, spec.masses, spec.pinning, spec.bath_coupling, spec.kappa
    total = 0.0
    for b in _partners(spec, a):
        lab, lba = lam[a, b], lam[b, a]
        dr = M[a] / m[a] - M[b] / m[b]
        pref = -lab / (2 * m[a] * m[b] * k) * dr / d_coeff(spec, a, b)
        total = total + pref * (lba * t[a] / z[b] + lab * t[b] / z[a])
    return _out(total, t)


@dataclass(frozen=True)
class FluxTerms:
    ft: float
    w1: float
    w2: float
    w3: float

    @property
    def total(self) -> float:
        return self.ft + self.w1 + self.w2 + self.w3

    def as_dict(self) -> dict:
        return {"flux": self.total, "ft": self.ft, "w1": self.w1, "w2": self.w2, "w3": self.w3}


def flux_terms(spec: ChainSpec, temperatures, alpha: int, formula: str = DEFAULT_FORMULA) -> FluxTerms:
    return FluxTerms(
        ft=ft_lowT(spec, temperatures, alpha),
        w1=w1_lowT(spec, temperatures, alpha, formula),
        w2=w2_lowT(spec, temperatures, alpha, formula),
        w3=w3_lowT(spec, temperatures, alpha, formula),
    )


def flux_lowT(spec: ChainSpec, temperatures, alpha: int, formula: str = DEFAULT_FORMULA):
    """Right-going heat current out of site ``alpha`` (zero-based)."""
    terms = flux_terms(spec, temperatures, alpha, formula)
    return terms.ft + terms.w1 + terms.w2 + terms.w3


@dataclass(frozen=True)
class FluxKernel:
    """Linear map from bath temperatures to site currents.

    ``matrix[alpha, j]`` is the coefficient of ``T_j`` in ``F_{alpha->}``;
    ``terms`` holds the same decomposition per correlation term.
    """

    matrix: np.ndarray
    terms: dict = field(repr=False)
    formula: str = DEFAULT_FORMULA

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[1]

    def flux(self, temperatures) -> np.ndarray:
        if isinstance(temperatures, TemperatureProfile):
            temperatures = temperatures.temperatures
        return self.matrix @ np.asarray(temperatures, dtype=float)

    def term_flux(self, temperatures) -> dict[str, np.ndarray]:
        t = np.asarray(getattr(temperatures, "temperatures", temperatures), dtype=float)
        return {name: mat @ t for name, mat in self.terms.items()}


def flux_kernel(spec: ChainSpec, formula: str = DEFAULT_FORMULA) -> FluxKernel:
    """Evaluate every term on the unit temperature vectors at once."""
    _check_formula(formula)
    n = spec.n_sites
    eye = np.eye(n)
    funcs = {
        "ft": lambda a: ft_lowT(spec, eye, a),
        "w1": lambda a: w1_lowT(spec, eye, a, formula),
        "w2": lambda a: w2_lowT(spec, eye, a, formula),
        "w3": lambda a: w3_lowT(spec, eye, a, formula),
    }
    terms = {name: np.array([f(a) for a in range(n - 1)]).reshape(n - 1, n) for name, f in funcs.items()}
    for mat in terms.values():
        mat.setflags(write=False)
    matrix = terms["ft"] + terms["w1"] + terms["w2"] + terms["w3"]
    matrix.setflags(write=False)
    return FluxKernel(matrix=matrix, terms=terms, formula=formula)


def omega_ft_full(spec: ChainSpec, temperatures, alpha: int) -> float:
    """``-<Omega; F_t>`` under the stationary reference measure, any temperature.

    Exact Gaussian evaluation of the boundary-term correlation: sines are
    split into phase factors and averaged with the characteristic function
    of the diagonal stationary covariance, so every exponent carries
    ``kappa^2`` times a position variance and the prefactor is
    ``kappa^2 lambda lambda' / (8 zeta m)``.  At ``kappa = 1`` its
    small-temperature limit is :func:`ft_lowT`; for other ``kappa`` the two
    differ by ``kappa^5`` because the closed forms keep a ``1/kappa``
    prefactor.
    """
    a = _check_alpha(spec, alpha)
    cq = stationary_covariance(spec, temperatures).position
    lam, m, z = spec.lam, spec.masses, spec.bath_coupling
    k2 = spec.kappa**2
    n = spec.n_sites
    total = 0.0
    for b in _partners(spec, a):
        lab = lam[a, b]
        for l in range(n):
            if l != a and lam[a, l] != 0.0:
                cbl = cq[b] if l == b else 0.0
                total += (
                    lab * lam[a, l] * k2 / (8 * z[a] * m[a])
                    * np.exp(-k2 * (cq[b] + cq[l]) / 2)
                    * (np.exp(-k2 * (cbl + 2 * cq[a])) - np.exp(k2 * cbl))
                )
            if l != b and lam[b, l] != 0.0:
                cal = cq[a] if l == a else 0.0
                total += (
                    lab * lam[b, l] * k2 / (8 * z[b] * m[b])
                    * np.exp(-k2 * (cq[a] + cq[l]) / 2)
                    * (np.exp(k2 * cal) - np.exp(-k2 * (cal + 2 * cq[b])))
                )
    return float(total)
