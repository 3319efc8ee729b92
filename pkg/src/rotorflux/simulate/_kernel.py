"""Compiled inner loops for the Langevin integrator.

The chain is advanced one noise chunk at a time; observables are accumulated
in place so the caller only ever sees running sums.
"""

from __future__ import annotations

import math

import numpy as np

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

if HAVE_NUMBA:
    njit = nb.njit(cache=True, nogil=True)
else:  # pragma: no cover

    def njit(f):
        return f


EULER_MARUYAMA = 0
STOCHASTIC_HEUN = 1


@njit
def _forces(q, p, inv_m, pinning, zeta, kappa, bond_i, bond_j, bond_lam, f_q, f_p, s_bond):
    n = q.shape[0]
    for k in range(n):
        f_q[k] = p[k] * inv_m[k]
        f_p[k] = -pinning[k] * q[k] - zeta[k] * p[k]
    for b in range(bond_i.shape[0]):
        i = bond_i[b]
        j = bond_j[b]
        s = bond_lam[b] * kappa * math.sin(kappa * (q[i] - q[j]))
        s_bond[b] = s
        f_p[i] -= s
        f_p[j] += s


@njit
def advance(
    q, p, noise, dt, scheme, inv_m, pinning, zeta, sigma, kappa,
    bond_i, bond_j, bond_lam, n_skip,
    acc_site, acc_cut, acc_q2, acc_p2, acc_kin,
):
    """Advance ``noise.shape[1]`` steps; accumulate after the first ``n_skip``.

    Returns ``-1`` on success, otherwise ``step * n + site`` of the first
    non-finite coordinate.
    """
    n = q.shape[0]
    nb_ = bond_i.shape[0]
    sqdt = math.sqrt(dt)
    f_q = np.empty(n)
    f_p = np.empty(n)
    g_q = np.empty(n)
    g_p = np.empty(n)
    q_t = np.empty(n)
    p_t = np.empty(n)
    s_bond = np.empty(nb_)
    dw = np.empty(n)
    for step in range(noise.shape[1]):
        for k in range(n):
            dw[k] = sigma[k] * sqdt * noise[k, step]
        _forces(q, p, inv_m, pinning, zeta, kappa, bond_i, bond_j, bond_lam, f_q, f_p, s_bond)
        if scheme == EULER_MARUYAMA:
            for k in range(n):
                q[k] += f_q[k] * dt
                p[k] += f_p[k] * dt + dw[k]
        else:
            # Additive noise: the same increment enters predictor and corrector.
            for k in range(n):
                q_t[k] = q[k] + f_q[k] * dt
                p_t[k] = p[k] + f_p[k] * dt + dw[k]
            _forces(q_t, p_t, inv_m, pinning, zeta, kappa, bond_i, bond_j, bond_lam, g_q, g_p, s_bond)
            for k in range(n):
                q[k] += 0.5 * (f_q[k] + g_q[k]) * dt
                p[k] += 0.5 * (f_p[k] + g_p[k]) * dt + dw[k]
        for k in range(n):
            if not (math.isfinite(q[k]) and math.isfinite(p[k])):
                return step * n + k
        if step < n_skip:
            continue
        for b in range(nb_):
            i = bond_i[b]
            j = bond_j[b]
            c = 0.5 * bond_lam[b] * kappa * math.sin(kappa * (q[i] - q[j])) * (p[i] * inv_m[i] + p[j] * inv_m[j])
            acc_site[i] += c
            for cut in range(i, j):
                acc_cut[cut] += c
        for k in range(n):
            acc_q2[k] += q[k] * q[k]
            acc_p2[k] += p[k] * p[k]
            acc_kin[k] += p[k] * p[k] * inv_m[k]
    return -1
