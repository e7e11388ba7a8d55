import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from qmc.errors import ArgumentError, DivergenceError, PoleError
from qmc.qseries import (KernelSpec, appendix_kernel, basic_hypergeometric, check_base, cpow,
                         jackson_integral, kernel_eval, phi21, phi32, qpoch_fin, qpoch_inf,
                         qpoch_ratio, qpow)

from conftest import bases, exponents

moduli = st.complex_numbers(min_magnitude=0.2, max_magnitude=2.0, allow_nan=False,
                            allow_infinity=False)


def test_check_base_rejects_outside_unit_disc():
    for q in (0, 1, 1.5, -1):
        with pytest.raises(ArgumentError):
            check_base(q)


def test_principal_branch_powers():
    assert_allclose(cpow(-1, 0.5), 1j, atol=1e-15)
    assert cpow(0, 0.3) == 0
    with pytest.raises(PoleError):
        cpow(0, -0.3)
    assert qpow(0.5, 3) == 0.125


def test_finite_pochhammer_matches_direct_product():
    a, q = 0.7 + 0.2j, 0.45
    assert_allclose(qpoch_fin(a, q, 6), np.prod([1 - a * q**k for k in range(6)]), rtol=1e-14)


def test_euler_product_oracle():
    # sum z^n / (q;q)_n = 1/(z;q)_inf
    q, z = 0.6, 0.3 - 0.2j
    series = sum(z**n / qpoch_fin(q, q, n) for n in range(200))
    assert_allclose(series, 1 / qpoch_inf(z, q), rtol=1e-13)


def test_q_gauss_sum():
    a, b, c, q = 1.2 + 0.3j, -1.4, 0.9 - 0.4j, 0.55
    z = c / (a * b)
    exact = qpoch_ratio([c / a, c / b], [c, z], q)
    assert_allclose(phi21(a, b, c, q, z).value, exact, rtol=1e-12)


def test_terminating_series_stops_early():
    q = 0.5
    r = phi21(q**-3, 0.7, 0.2, q, 0.9)
    assert r.terms_used <= 5
    assert r.est_truncation_error == 0.0


def test_series_pole_and_divergence():
    q = 0.5
    with pytest.raises(PoleError):
        phi21(0.3, 0.7, q**-2, q, 0.4)
    with pytest.raises(DivergenceError):
        phi21(0.3, 0.7, 0.2, q, 5.0)
    with pytest.raises(ArgumentError):
        basic_hypergeometric([0.1], [0.2], q, 0.1)


def test_phi32_reduces_to_phi21_when_parameters_cancel():
    q, z = 0.4, 0.3 + 0.1j
    assert_allclose(phi32(0.2, 0.5, 0.9, 0.7, 0.9, q, z).value, phi21(0.2, 0.5, 0.7, q, z).value,
                    rtol=1e-13)


@given(bases, exponents, moduli, moduli)
def test_kernel_functional_equation(q, lam, x, s):
    for variant in ("K1", "K2"):
        spec = KernelSpec(variant, lam)
        try:
            k = kernel_eval(spec, q, x, s)
        except PoleError:
            continue
        if not np.isfinite(k) or abs(k) < 1e-200 or abs(x - s) < 1e-6:
            continue
        ql = qpow(q, lam)
        ref = (x - ql * s) / (x - s) * k
        assert_allclose(ql * kernel_eval(spec, q, q * x, s), ref, rtol=1e-8)
        assert_allclose(kernel_eval(spec, q, x, s / q), ref, rtol=1e-8)


def test_appendix_kernel_is_k1_without_power():
    q, lam, x, s = 0.5, 0.3, 1.2 + 0.1j, 0.4
    assert_allclose(appendix_kernel(lam, q, x, s) * cpow(x, -lam),
                    kernel_eval(KernelSpec("K1", lam), q, x, s), rtol=1e-14)


def test_jackson_integral_of_monomial():
    q = 0.3
    for k in range(4):
        val = jackson_integral(lambda s, k=k: s**k if abs(s) <= 1 else 0.0, 1.0, q).value
        assert_allclose(val, (1 - q) / (1 - q ** (k + 1)), rtol=1e-14)


def test_bilateral_jackson_sum_against_ramanujan():
    # sum_n (a;q)_n/(b;q)_n z^n written as a Jackson integral over q^Z
    q, a, b, c = 0.5, 2.3, 0.3, 0.5
    z = q**c
    f = lambda s: cpow(s, c - 1) * qpoch_ratio([b * s], [a * s], q)
    val = jackson_integral(f, 1.0, q).value
    rhs = qpoch_ratio([q, b / a, a * z, q / (a * z)], [b, q / a, z, b / (a * z)], q)
    assert_allclose(val, (1 - q) * qpoch_ratio([b], [a], q) * rhs, rtol=1e-12)


def test_jackson_truncation_and_vector_values():
    q = 0.5
    f = lambda s: np.array([s, 2 * s]) if abs(s) <= 1 else np.zeros(2)
    r = jackson_integral(f, 1.0, q, trunc=(0, 60))
    assert_allclose(r.value, [(1 - q) / (1 - q**2), 2 * (1 - q) / (1 - q**2)], rtol=1e-14)
    assert r.terms_used == 61


def test_jackson_divergent_tail():
    with pytest.raises(DivergenceError):
        jackson_integral(lambda s: 1.0, 1.0, 0.5, guard=50)


@given(bases, st.floats(0.05, 0.95), st.floats(-3, 3))
def test_q_binomial_property(q, r, theta):
    z = r * 0.7 * cmath.exp(1j * theta)
    a, b = 0.8 - 0.3j, 1.3 + 0.2j
    assert_allclose(phi21(a, b, b, q, z).value, qpoch_ratio([a * z], [z], q), rtol=1e-11)
