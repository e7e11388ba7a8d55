import numpy as np
import pytest
from hypothesis import given
from numpy.testing import assert_allclose

from qmc import composition as comp
from qmc import system as sysm
from qmc.errors import StarViolation
from qmc.qseries import qpow
from qmc.solutions import SeedSolution, seed_tuple
from qmc.system import SystemTuple

from conftest import exponents, random_tuple, tuples


def qhg_seed():
    return seed_tuple(SeedSolution(0.7, (1.0,), (1.5,), 0.4))


def violating_tuple():
    # e_1 is an eigenvector of B_0 and lies in the kernel of B_1, B_2
    B0 = np.array([[0.5, 0.2], [0.0, 0.3]], dtype=complex)
    B1 = np.array([[0.0, 1.0], [0.0, 0.4]], dtype=complex)
    B2 = np.array([[0.0, -0.6], [0.0, 0.9]], dtype=complex)
    return SystemTuple(0.5, [0, 1.3, -0.7], [B0, B1, B2])


def test_star_conditions_on_seed_and_random(rng):
    assert comp.star_report(qhg_seed())
    assert comp.star_report(random_tuple(rng, 3, 2))


def test_star_violation_witness():
    t = violating_tuple()
    holds, (i, v) = comp.check_star(t)
    assert not holds and i == 0
    assert_allclose(abs(v[0]), 1, atol=1e-12)
    assert comp.check_doublestar(t)[0]
    with pytest.raises(StarViolation):
        comp.additivity_check(t, 0.3, 0.4)


def test_doublestar_violation_via_transpose():
    t = violating_tuple()
    tt = t.replace(matrices=[B.T for B in t.matrices])
    assert comp.check_star(tt)[0]
    assert not comp.check_doublestar(tt)[0]


@given(tuples(), exponents)
def test_dr_correspondence_single(t, lam):
    assert comp.dr_scaling_residual(t, lam) < 1e-12


@given(tuples(max_m=2, max_N=2), exponents, exponents)
def test_dr_correspondence_double(t, l1, l2):
    assert comp.dr_double_scaling_residual(t, l1, l2) < 1e-12


def test_intertwiner_recovers_conjugation(rng):
    t = random_tuple(rng, 3, 2)
    S = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    u = t.replace(matrices=[S @ B @ np.linalg.inv(S) for B in t.matrices])
    X, res, nullity = comp.find_intertwiner(t, u)
    assert nullity == 1 and res < 1e-10
    assert_allclose(X @ t.matrices[1], u.matrices[1] @ X, atol=1e-9 * np.linalg.norm(X))


def test_no_intertwiner_between_different_tuples(rng):
    _, _, nullity = comp.find_intertwiner(random_tuple(rng, 2, 1, q=0.5),
                                          random_tuple(rng, 2, 1, q=0.5))
    assert nullity == 0


@pytest.mark.parametrize("l1,l2", [(0.3, 0.4), (0.55 + 0.1j, 0.2), (0.3, -0.3)])
def test_additivity_on_seed(l1, l2):
    rep = comp.additivity_check(qhg_seed(), l1, l2)
    assert rep.passed and rep.max_residual < 1e-8
    assert rep.dims["composite"] == rep.dims["direct"]


def test_additivity_on_generic_two_pole_tuple(rng):
    t = random_tuple(rng, 2, 2, q=0.45)
    rep = comp.additivity_check(t, 0.25, 0.5)
    assert rep.passed and rep.max_residual < 1e-8


def test_inverse_parameter_recovers_seed_dimension():
    t = qhg_seed()
    rep = comp.additivity_check(t, 0.4, -0.4)
    assert rep.dims["composite"] == t.m


def test_sy_composite_parameter_law():
    t = qhg_seed()
    for lam, mu in ((0.3, 0.5), (0.2 + 0.1j, 0.6)):
        rep = comp.sy_additivity_check(t, lam, mu)
        assert rep["pass"]
        assert rep["nu_error"] < 1e-10
        nu = comp.sy_composite_parameter(t.q, lam, mu)
        assert_allclose(qpow(t.q, nu), qpow(t.q, lam) + qpow(t.q, mu) - 1, rtol=1e-13)


def test_invariant_subspace_search():
    B0 = np.array([[0.5, 0.2, 0.1], [0.0, 0.3, 0.4], [0.0, 0.7, 0.2]], dtype=complex)
    B1 = np.array([[0.1, 1.0, 0.2], [0.0, 0.4, 0.3], [0.0, 0.1, 0.8]], dtype=complex)
    reducible = SystemTuple(0.5, [0, 1.3], [B0, B1])
    found = comp.invariant_subspace_search(reducible)
    assert found["found"] and found["dim"] == 1
    rng = np.random.default_rng(5)
    assert not comp.invariant_subspace_search(random_tuple(rng, 3, 1))["found"]


def test_composition_of_convolutions_size(rng):
    t = random_tuple(rng, 2, 1)
    assert comp.compose_convolutions(t, 0.2, 0.3).m == 8
    assert_allclose(comp.compose_convolutions(t, 0.2, 0.3).matrices[0],
                    sysm.q_convolution(sysm.q_convolution(t, 0.2), 0.3).matrices[0])
