import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from numpy.testing import assert_allclose

from qmc import catalog, spectral
from qmc.system import SystemTuple

from conftest import random_tuple

parts = st.lists(st.integers(1, 12), min_size=1, max_size=5)


@given(parts, parts, parts)
def test_render_parse_round_trip(a, b, c):
    text = spectral.render(a, b, c)
    wide = any(k >= 10 for k in a + b + c)
    assume(not wide or "," in text or "0" in text)
    assert spectral.parse(text) == tuple(tuple(sorted(p, reverse=True)) for p in (a, b, c))


def test_render_uses_commas_only_for_wide_parts():
    assert spectral.render([1, 2], [1, 1], [2, 1, 1]) == "21;11;211"
    assert spectral.render([10, 1], [11], [1]) == "10,1;11;1"
    assert spectral.parse("10,1;11;1") == ((10, 1), (11,), (1,))
    assert spectral.parse("10;2;1") == ((10,), (2,), (1,))
    with pytest.raises(ValueError):
        spectral.parse("11;11")


def test_matrix_polynomial_clears_denominators(rng):
    t = random_tuple(rng, 2, 2)
    coeffs = spectral.matrix_polynomial(t)
    x = 0.37 - 0.8j
    B = t.B_zero() + sum(Bi * (-x / (x - b)) for b, Bi in zip(t.poles[1:], t.matrices[1:]))
    C = spectral._eval_poly(coeffs, x)
    assert_allclose(C, B * np.prod([x - b for b in t.poles[1:]]), atol=1e-12)


def test_det_degree_and_roots_scalar():
    coeffs = [np.array([[c]], dtype=complex) for c in (6, -5, 1)]  # (x - 2)(x - 3)
    deg, lead = spectral.det_degree(coeffs)
    assert (deg, lead) == (2, pytest.approx(1))
    assert_allclose(sorted(spectral.det_roots(coeffs).real), [2, 3], atol=1e-12)


def test_degree_drop_is_detected():
    # leading coefficient singular: det has degree 1 although N m = 2
    coeffs = [np.eye(2, dtype=complex), np.diag([1.0, 0.0]).astype(complex)]
    deg, _ = spectral.det_degree(coeffs)
    assert deg == 1
    assert len(spectral.det_roots(coeffs)) == 1


def test_hand_built_type():
    # B_0 with eigenvalues {0.3, 0.3}, one pole, sum with distinct eigenvalues
    B0 = np.diag([0.7, 0.7]).astype(complex)
    B1 = np.array([[0.1, 0.4], [0.0, -0.2]], dtype=complex)
    t = SystemTuple(0.5, [0, 1.5], [B0, B1])
    st_ = spectral.spectral_type(t)
    assert st_.s0 == (2,)
    assert st_.s_inf == (1, 1)
    assert sum(st_.s_div) == st_.details["det_degree"]
    assert st_.details["det_consistency"] < 1e-10


def test_generic_two_pole_family(rng):
    for _ in range(5):
        assert str(spectral.spectral_type(spectral.generic_two_pole_tuple(rng))) == "11;11;1111"


@pytest.mark.parametrize("label,name,expected", spectral.TABLE1)
def test_table_rows_default_parameters(label, name, expected):
    assert spectral.spectral_type(catalog.build(name).final).rendered == expected


def test_table1_report_is_deterministic():
    a = spectral.table1(draws=1)
    b = spectral.table1(draws=1)
    assert [r["got"] for r in a] == [r["got"] for r in b]
    assert len(a) == len(spectral.TABLE1) + 1
