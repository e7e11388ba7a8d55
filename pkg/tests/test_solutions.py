import pytest
from hypothesis import assume, given, strategies as st
from numpy.testing import assert_allclose

from qmc import catalog
from qmc import system as sysm
from qmc.errors import ArgumentError, DegenerateError
from qmc.qseries import KernelSpec, qpow
from qmc.solutions import (AlternateSeed, SeedSolution, closed_form_qhg, convergence_certificate,
                           convolve_solution, seed_tuple, truncated_identity_residual)

Q, MU, LAM, A, B = 0.4, 0.7, 0.3, 1.0, 1.5


def test_seed_validation():
    with pytest.raises(ArgumentError):
        SeedSolution(0.5, (1.0,), (), 0.4)
    with pytest.raises(DegenerateError):
        seed_tuple(SeedSolution(0.5, (1.0, 1.0), (2.0, 3.0), 0.4))


def test_alternate_seed_solves_same_equation():
    t = seed_tuple(SeedSolution(MU, (A,), (B,), Q))
    alt = AlternateSeed(MU, A, B, Q)
    for n in range(6):
        assert sysm.residual(t, alt, (0.8 + 0.3j) * Q**n) < 1e-13


def test_divided_resolves_removable_point():
    s = SeedSolution(MU, (A,), (B,), Q)
    near = s.divided(1 / A * (1 + 1e-7), 1 / A)
    assert_allclose(s.divided(1 / A, 1 / A), near, rtol=1e-5)


def test_transform_solves_convolved_system_two_poles():
    seed = SeedSolution(0.8, (1.0, 0.6), (1.4, 0.9), 0.5)
    t = seed_tuple(seed)
    lam = 0.35
    assert convergence_certificate(t, lam)["passes"]
    tc = sysm.q_convolution(t, lam)
    Y = lambda x: convolve_solution(t, seed, KernelSpec("K1", lam), x, xi=1.0)
    for n in range(6):
        assert sysm.residual(tc, Y, (0.31 + 0.17j) * 0.5**n) < 1e-9


@pytest.mark.parametrize("variant", ["K1", "K2"])
def test_truncated_identity_both_kernels(variant):
    seed = SeedSolution(-0.6, (A,), (B,), Q)
    t = seed_tuple(seed)
    k = KernelSpec(variant, LAM)
    for K, L in ((-4, 9), (0, 2)):
        assert truncated_identity_residual(t, seed, k, 0.37 + 0.21j, K, L, xi=1 / A) < 1e-9
        assert truncated_identity_residual(t, seed, k, 0.37 + 0.21j, K, L, A=0.7) < 1e-9


def test_anchor_arguments_are_exclusive():
    seed = SeedSolution(MU, (A,), (B,), Q)
    t = seed_tuple(seed)
    with pytest.raises(ArgumentError):
        convolve_solution(t, seed, KernelSpec("K1", LAM), 0.3, xi=1.0, A=0.5)


def test_certificate_reads_eigenvalues():
    t = seed_tuple(SeedSolution(MU, (A,), (B,), Q))
    cert = convergence_certificate(t, LAM)
    assert_allclose(cert["eig_I_minus_B0"], [qpow(Q, MU)])
    assert cert["passes"]
    assert not convergence_certificate(seed_tuple(SeedSolution(-0.2, (A,), (B,), Q)),
                                       LAM)["passes"]


def test_integral_matches_closed_form():
    seed = SeedSolution(MU, (A,), (B,), Q)
    t = seed_tuple(seed)
    for x in (0.3 + 0.2j, 2.0):
        val = convolve_solution(t, seed, KernelSpec("K1", LAM), x, xi=1 / A)[0]
        assert_allclose(val, closed_form_qhg("y0al", Q, MU, LAM, A, B, x, 1), rtol=1e-12)


@given(st.sampled_from(["y0al", "y0la", "y0be_first", "y0be_second"]),
       st.floats(0.25, 0.6), st.floats(0.5, 0.9), st.floats(0.1, 0.4))
def test_closed_forms_solve_the_scalar_equation(variant, q, mu, lam):
    beta = 2.3 + 0.4j  # off the lattice q^Z alpha for every real q
    if variant.startswith("y0be"):
        # validity condition of the forms anchored at 1/beta
        assume(abs(q ** (lam - mu) * A / beta) < 0.95)
    p = dict(q=q, mu=mu, lam=lam, alpha=A, beta=beta)
    eq = catalog.EQUATIONS["ytil"]
    f = lambda x: closed_form_qhg(variant, q, mu, lam, A, beta, x, 1)
    for k in range(3):
        x = (0.2 + 0.05j) * q**k
        assert catalog.scalar_residual(eq, f, x, p) < 1e-8


def test_series_forms_agree_where_both_converge():
    for variant, x in (("y0al", 2 + 0.5j), ("y0la", 0.3 + 0.1j), ("y0be_first", 0.2 + 0.05j),
                       ("y0be_second", 2 + 0.5j)):
        v1 = closed_form_qhg(variant, Q, MU, LAM, A, B, x, 1)
        v2 = closed_form_qhg(variant, Q, MU, LAM, A, B, x, 2)
        assert_allclose(v1, v2, rtol=1e-12)
