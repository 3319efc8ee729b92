import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotorflux import ChainSpec, CouplingMatrix, build_nn_chain, build_nnn_chain, graded_masses
from rotorflux.analytic import (
    FORMULAS,
    PRINTED,
    d_coeff,
    flux_kernel,
    flux_lowT,
    flux_terms,
    ft_lowT,
    omega_ft_full,
    w1_lowT,
    w2_lowT,
    w3_lowT,
)
from rotorflux.analytic.closed_forms import homogeneous_flux, nnn_flux, quasi_homogeneous_flux

from oracles import harmonic_flux, mc_omega_ft, w1_printed_two_site


def decoupled(n=4):
    return ChainSpec(n, 1, 1, 1, 1, CouplingMatrix(np.zeros((n, n))))


def random_spec(rng, n=7, nu=0.3):
    return build_nnn_chain(
        n, rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n), rng.uniform(0.5, 1.5), nu,
        rng.uniform(0.5, 2),
    )


def test_d_coeff_examples():
    s = build_nn_chain(2, 1, 1, 1, 1, 1)
    assert d_coeff(s, 0, 1) == 4.0
    s = build_nn_chain(2, 1, 1, [1, 2], 1, 1)
    assert d_coeff(s, 0, 1) == 9.0
    s = random_spec(np.random.default_rng(1))
    assert d_coeff(s, 2, 4) == d_coeff(s, 4, 2) > 0
    with pytest.raises(ValueError):
        d_coeff(s, 1, 1)


def test_w2_two_site_example():
    s = build_nn_chain(2, 1, 1, [1, 2], 1, 1)
    assert w2_lowT(s, [0.2, 0.1], 0) == pytest.approx(0.5 * 3 / 9 * 0.1, rel=1e-14)


def test_w3_vanishes_for_uniform_ratio():
    s = build_nnn_chain(6, 1, 1, [1, 2, 3, 1, 2, 3], 1, 0.4, 1)
    t = np.linspace(0.3, 0.1, 6)
    for a in range(5):
        assert w3_lowT(s, t, a) == 0.0


def test_w2_vanishes_for_uniform_temperature():
    s = random_spec(np.random.default_rng(3))
    for a in range(6):
        # with uniform masses w2 is antisymmetric in the temperatures
        if np.all(s.masses == s.masses[0]):
            assert w2_lowT(s, np.full(7, 0.2), a) == 0.0
    s = build_nnn_chain(6, 1, 1, [1, 2, 3, 1, 2, 3], 1, 0.4, 1)
    for a in range(5):
        assert abs(w2_lowT(s, np.full(6, 0.2), a)) < 1e-16


@pytest.mark.parametrize("fn", [ft_lowT, w1_lowT, w2_lowT, w3_lowT, flux_lowT])
def test_decoupled_terms_vanish(fn):
    assert fn(decoupled(), [0.3, 0.2, 0.2, 0.1], 1) == 0.0


def test_kernel_of_decoupled_chain_is_zero():
    assert not np.any(flux_kernel(decoupled()).matrix)


def test_homogeneous_nn_flux_example():
    s = build_nn_chain(5, 1, 1, 1, 1, 1)
    t = [0.3, 0.2, 0.1, 0.15, 0.05]
    assert flux_lowT(s, t, 0) == pytest.approx(0.05, rel=1e-13)
    assert flux_lowT(s, t, 2) == pytest.approx(-0.025, rel=1e-13)


def test_quasi_homogeneous_example():
    s = build_nn_chain(4, 1, 1, [2, 1, 3, 1], 1, 1)
    assert flux_lowT(s, [0.3, 0.2, 0.1, 0.1], 1) == pytest.approx(0.025, rel=1e-13)


def test_homogeneous_kernel_rows():
    lam, z, m, M = 0.7, 1.3, 0.9, 1.1
    s = build_nn_chain(6, m, M, z, lam, 1)
    K = flux_kernel(s).matrix
    c = lam**2 / (2 * z * m * M)
    expected = np.zeros((5, 6))
    for a in range(5):
        expected[a, a], expected[a, a + 1] = c, -c
    np.testing.assert_allclose(K, expected, atol=1e-15)
    np.testing.assert_allclose(K.sum(axis=1), 0, atol=1e-13)


def test_ft_intermediate_nnn_expansion():
    rng = np.random.default_rng(5)
    n, lam, nu = 9, 1.0, -0.11
    z = rng.uniform(0.5, 2, n)
    t = rng.uniform(0.1, 0.3, n)
    s = build_nnn_chain(n, 1, 1, z, lam, nu, 1)
    for a in range(2, n - 4):
        ref = (
            lam**2 / 4 * ((1 / z[a + 1] - 2 / z[a]) * t[a] + (2 / z[a + 1] - 1 / z[a]) * t[a + 1])
            + lam * nu / 2 * (-2 / z[a] * t[a] + t[a + 1] / z[a + 1] + t[a + 2] / z[a + 2])
            + nu**2 / 4 * ((1 / z[a + 2] - 2 / z[a]) * t[a] + (2 / z[a + 2] - 1 / z[a]) * t[a + 2])
        )
        assert ft_lowT(s, t, a) == pytest.approx(ref, rel=1e-13)


def test_ft_homogeneous_values():
    # Interior sites: the boundary bracket cancels, the third-site sum leaves
    # lam^2 (T_{a+1} - T_a) / (4 zeta m M).  At the left end only T_2 survives.
    s = build_nn_chain(5, 1, 1, 1, 1, 1)
    t = np.array([0.3, 0.25, 0.2, 0.15, 0.1])
    assert ft_lowT(s, t, 2) == pytest.approx((t[3] - t[2]) / 4, rel=1e-14)
    assert ft_lowT(s, t, 0) == pytest.approx(t[1] / 4, rel=1e-14)
    assert flux_lowT(s, t, 2) == pytest.approx(homogeneous_flux(1, 1, 1, 1, t[2], t[3]), rel=1e-13)


def test_w1_uniform_temperature_interior():
    s = build_nn_chain(6, 1, 1, 1, 1, 1)
    for a in range(1, 4):
        assert abs(w1_lowT(s, np.full(6, 0.2), a)) < 1e-15


def test_w1_printed_double_entry():
    s = build_nn_chain(2, [1.0, 0.5], 1, 1, 1, 1)
    got = w1_lowT(s, [0.1, 0.1], 0, formula=PRINTED)
    assert got == pytest.approx(w1_printed_two_site(1, 1, 1, 1.0, 0.5, 1, 1, 1, 0.1, 0.1), rel=1e-12, abs=1e-15)
    rng = np.random.default_rng(8)
    for _ in range(5):
        m, M, z, t = rng.uniform(0.3, 2, (4, 2))
        lam, k = rng.uniform(0.3, 2, 2)
        s = build_nn_chain(2, m, M, z, lam, k)
        got = w1_lowT(s, t, 0, formula=PRINTED)
        ref = w1_printed_two_site(lam, M[0], M[1], m[0], m[1], z[0], z[1], k, t[0], t[1])
        assert got == pytest.approx(ref, rel=1e-12)


def test_formulas_agree_for_uniform_masses():
    rng = np.random.default_rng(2)
    s = build_nnn_chain(8, 1.3, 0.8, rng.uniform(0.5, 2, 8), 1, -0.3, 1.2)
    ks = [flux_kernel(s, f).matrix for f in FORMULAS]
    np.testing.assert_allclose(ks[0], ks[1], atol=1e-15)
    np.testing.assert_allclose(ks[0], ks[2], atol=1e-15)


def test_formulas_differ_when_ratio_varies():
    s = build_nnn_chain(8, 1.0, np.linspace(1, 2, 8), 1.0, 1, -0.3, 1.0)
    ks = [flux_kernel(s, f).matrix for f in FORMULAS]
    assert np.max(np.abs(ks[0] - ks[1])) > 1e-4


def test_unknown_formula():
    with pytest.raises(ValueError, match="unknown flux formula"):
        flux_kernel(build_nn_chain(3, 1, 1, 1, 1, 1), "typeset")


@pytest.mark.parametrize("n", [3, 8, 16])
def test_nnn_closed_form(n):
    rng = np.random.default_rng(n)
    lam, nu = 1.0, -0.11
    z = rng.uniform(0.5, 2, n)
    t = rng.uniform(0.1, 0.3, n)
    s = build_nnn_chain(n, 1, 1, z, lam, nu, 1)
    for a in range(n - 1):
        if a + 2 < n:
            ref = nnn_flux(lam, nu, 1, 1, z[a : a + 3], t[a : a + 3])
        else:
            ref = quasi_homogeneous_flux(lam, 1, 1, z[a], z[a + 1], t[a], t[a + 1])
        assert flux_lowT(s, t, a) == pytest.approx(ref, rel=1e-13, abs=1e-16)


def test_alpha_range():
    s = build_nn_chain(3, 1, 1, 1, 1, 1)
    with pytest.raises(IndexError):
        flux_lowT(s, [0.1] * 3, 2)
    with pytest.raises(ValueError):
        flux_lowT(s, [0.1] * 2, 0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    s = random_spec(rng)
    t1, t2 = rng.uniform(0.05, 0.5, (2, 7))
    K = flux_kernel(s)
    for alpha in range(6):
        lhs = flux_lowT(s, a * t1 + b * t2, alpha)
        rhs = a * flux_lowT(s, t1, alpha) + b * flux_lowT(s, t2, alpha)
        scale = abs(a * flux_lowT(s, np.abs(t1), alpha)) + abs(b * flux_lowT(s, np.abs(t2), alpha)) + 1e-300
        assert abs(lhs - rhs) <= 1e-13 * max(scale, 1.0)
        assert abs(K.flux(t1)[alpha] - flux_lowT(s, t1, alpha)) <= 1e-13


def test_term_breakdown_sums():
    s = random_spec(np.random.default_rng(4))
    t = np.linspace(0.3, 0.1, 7)
    K = flux_kernel(s)
    parts = K.term_flux(t)
    np.testing.assert_allclose(sum(parts.values()), K.flux(t), atol=1e-15)
    ft = flux_terms(s, t, 2)
    assert ft.total == pytest.approx(parts["ft"][2] + parts["w1"][2] + parts["w2"][2] + parts["w3"][2])


def test_nu_sign_invariance_homogeneous():
    rng = np.random.default_rng(6)
    z = rng.uniform(0.5, 2, 10)
    t = rng.uniform(0.1, 0.3, 10)
    a = flux_kernel(build_nnn_chain(10, 1, 1, z, 1, 0.11, 1)).flux(t)
    b = flux_kernel(build_nnn_chain(10, 1, 1, z, 1, -0.11, 1)).flux(t)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-16)


@pytest.mark.parametrize("formula", FORMULAS)
def test_nu_sign_invariance_graded_measured(formula):
    # lam*nu cross terms cancel between ft and w1 for any masses.
    m = graded_masses(16, 1, 0.5)
    t = np.linspace(0.2, 0.1, 16)
    a = flux_kernel(build_nnn_chain(16, m, 1, 1, 1, 0.11, 1), formula).flux(t)
    b = flux_kernel(build_nnn_chain(16, m, 1, 1, 1, -0.11, 1), formula).flux(t)
    assert np.max(np.abs(a - b)) < 1e-15


def test_equilibrium_zero_homogeneous():
    rng = np.random.default_rng(9)
    for n in (2, 3, 9):
        s = build_nnn_chain(max(n, 3), 0.8, 1.2, 0.7, 1, -0.2, 1.1)
        K = flux_kernel(s)
        assert np.max(np.abs(K.flux(np.full(s.n_sites, rng.uniform(0.1, 1))))) <= 1e-14


def test_equilibrium_residual_graded_is_reported():
    s = build_nnn_chain(16, graded_masses(16, 1, 0.5), 1, 1, 1, -0.11, 1)
    res = {f: np.max(np.abs(flux_kernel(s, f).flux(np.full(16, 0.15)))) for f in FORMULAS}
    # Only the dimensionally consistent reading is in equilibrium at uniform T.
    assert res["consistent"] < 1e-15
    assert res["tabulated"] > 1e-4
    assert res["printed"] > 1e-4


def test_low_temperature_harmonic_limit():
    # Independent route: exact currents of the linearised chain.  The kernel
    # is their weak-coupling limit; the residual shrinks linearly in lam.
    t = np.linspace(0.2, 0.1, 6) * 1e-3
    devs = []
    for lam in (0.04, 0.02, 0.01):
        s = build_nnn_chain(6, 1, 1, 1, lam, 0.5 * lam, 1)
        exact, _ = harmonic_flux(s.lam, 1, 1, 1, t)
        devs.append(np.max(np.abs(exact / flux_kernel(s).flux(t) - 1)))
    assert devs[2] < 0.03
    assert devs[0] / devs[2] == pytest.approx(4, rel=0.15)


def test_omega_decoupled_zero():
    assert omega_ft_full(decoupled(), [0.2, 0.1, 0.2, 0.3], 1) == 0.0


def test_omega_low_temperature_limit():
    s = build_nn_chain(4, 1, 1, [1, 2, 0.5, 1.5], 1, 1)
    base = np.array([1.0, 0.8, 0.6, 0.4])
    devs = []
    for scale in (1e-1, 1e-2, 1e-3):
        t = base * scale
        devs.append(abs(omega_ft_full(s, t, 1) / ft_lowT(s, t, 1) - 1))
    assert devs[0] / devs[1] == pytest.approx(10, rel=0.15)
    assert devs[1] / devs[2] == pytest.approx(10, rel=0.05)
    assert devs[2] < 5e-3


def test_omega_kappa_placement():
    # omega carries kappa^4 at low T, the closed form 1/kappa.
    s1 = build_nn_chain(3, 1, 1, [1, 2, 0.5], 1, 1.0)
    s2 = build_nn_chain(3, 1, 1, [1, 2, 0.5], 1, 1.5)
    t = np.array([0.3, 0.2, 0.1]) * 1e-6
    r = (omega_ft_full(s2, t, 0) / ft_lowT(s2, t, 0)) / (omega_ft_full(s1, t, 0) / ft_lowT(s1, t, 0))
    assert r == pytest.approx(1.5**5, rel=1e-5)


@pytest.mark.parametrize(
    "masses,zeta,kappa,temps,nu",
    [
        (1.0, 1.0, 1.0, [0.3, 0.3], 0.0),
        (1.0, [1.0, 2.0], 1.0, [0.3, 0.2], 0.0),
        ([1.0, 0.8, 0.7, 0.6], [1.0, 1.5, 0.7, 1.2], 1.3, [0.3, 0.2, 0.25, 0.1], -0.4),
    ],
)
def test_omega_monte_carlo(masses, zeta, kappa, temps, nu):
    n = len(temps)
    s = build_nnn_chain(n, masses, 1, zeta, 1, nu, kappa)
    for a in range(n - 1):
        est, se = mc_omega_ft(s.lam, s.masses, 1, s.bath_coupling, temps, a, kappa=kappa, seed=a)
        assert abs(omega_ft_full(s, temps, a) - est) < 3 * se
