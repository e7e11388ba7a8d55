import numpy as np
import pytest
from hypothesis import given
from numpy.testing import assert_allclose

from qmc import linalg
from qmc import system as sysm
from qmc.errors import ArgumentError, DimensionError, PoleCollisionError, PoleError
from qmc.qseries import qpoch_ratio, qpow, cpow
from qmc.solutions import SeedSolution, seed_tuple
from qmc.system import SystemTuple

from conftest import exponents, random_tuple, tuples


def _seed():
    s = SeedSolution(0.7, (1.0, 0.5), (1.5, 0.8), 0.4)
    return s, seed_tuple(s)


def test_tuple_validation():
    with pytest.raises(ArgumentError):
        SystemTuple(0.5, [1, 2], [np.eye(1), np.eye(1)])
    with pytest.raises(DimensionError):
        SystemTuple(0.5, [0, 2], [np.eye(1), np.eye(2)])
    with pytest.raises(ArgumentError):
        SystemTuple(0.5, [0, 2, 2], [np.eye(1)] * 3)


def test_seed_tuple_solves_its_seed():
    s, t = _seed()
    for n in range(8):
        assert sysm.residual(t, s, (0.3 + 0.2j) * 0.4**n) < 1e-13


def test_propagate_forward_then_backward(rng):
    t = random_tuple(rng, 2, 2, q=0.5)
    x0 = 3.0 + 1.0j
    g = sysm.propagate(t, x0, [1, 2], 6)
    back = sysm.propagate(t, g.point(6), g[6], 6, direction=-1)
    assert_allclose(back[-6], [1, 2], rtol=1e-9)
    assert all(sysm.residual(t, g, g.point(n)) < 1e-12 for n in range(6))


def test_eval_b_at_pole_raises():
    _, t = _seed()
    with pytest.raises(PoleError):
        sysm.eval_B(t, 1.0)


@given(tuples(max_m=2, max_N=2), exponents)
def test_add_mu_multiplies_solutions_by_power(t, mu):
    x0 = 1.7 + 0.9j
    g = sysm.propagate(t, x0, np.ones(t.m), 4)
    shifted = sysm.add_mu(t, mu)
    for n in range(4):
        x = g.point(n)
        Y = lambda z: cpow(z, mu) * g(z)
        assert sysm.residual(shifted, Y, x) < 1e-8 * (1 + np.linalg.norm(g[n + 1]))


def test_add_zero_is_identity(rng):
    t = random_tuple(rng)
    assert all(np.array_equal(a, b) for a, b in zip(sysm.add_mu(t, 0).matrices, t.matrices))


def test_pole_move_gauge():
    s, t = _seed()
    b_new = 1.9 - 0.4j
    moved = sysm.pole_move(t, 1, b_new)
    b = t.poles[1]
    Y = lambda x: qpoch_ratio([x / b_new], [x / b], t.q) * s(x)
    for n in range(6):
        assert sysm.residual(moved, Y, (0.37 + 0.21j) * 0.4**n) < 1e-12
    assert moved.poles[1] == b_new


def test_pole_move_collision_and_index():
    _, t = _seed()
    with pytest.raises(PoleCollisionError):
        sysm.pole_move(t, 1, t.poles[2])
    with pytest.raises(ArgumentError):
        sysm.pole_move(t, 0, 1.0)


@given(tuples(), exponents)
def test_q_convolution_block_structure(t, lam):
    c = sysm.q_convolution(t, lam)
    m, n1 = t.m, t.N + 1
    assert c.m == n1 * m
    ql = qpow(t.q, -lam)
    for i, G in enumerate(c.matrices):
        others = np.delete(G.reshape(n1, m, n1 * m), i, axis=0)
        assert not np.any(others)
        row = G[i * m:(i + 1) * m]
        for j in range(n1):
            blk = row[:, j * m:(j + 1) * m]
            expect = ql * t.matrices[j] + (j == i) * (1 - ql) * np.eye(m)
            assert_allclose(blk, expect, atol=1e-14)


@given(tuples(max_m=2, max_N=3), exponents)
def test_kernel_spaces_are_invariant(t, lam):
    conv = sysm.q_convolution(t, lam)
    K, L = sysm.kl_spaces(conv, t)
    for W in (K, L):
        for G in conv.matrices:
            if W.dim:
                R = G @ W.basis
                assert np.linalg.norm(R - W.basis @ (W.basis.conj().T @ R)) < 1e-8 * (
                    1 + np.linalg.norm(G))


@given(tuples(max_m=2, max_N=3), exponents)
def test_middle_convolution_projection_intertwines(t, lam):
    res = sysm.middle_convolution(t, lam)
    for G, Gbar in zip(res.conv.matrices, res.reduced.matrices):
        assert_allclose(res.proj @ G, Gbar @ res.proj, atol=1e-8 * (1 + np.linalg.norm(G)))
    d = res.dims()
    assert d["quotient"] == res.conv.m - d["K+L"]


def test_middle_convolution_of_seed_drops_nothing_generically():
    _, t = _seed()
    res = sysm.middle_convolution(t, 0.3)
    assert res.dims() == {"K": 0, "L": 0, "K+L": 0, "quotient": 3}


def test_dr_convolution_structure(rng):
    t = random_tuple(rng, 2, 1)
    F = sysm.dr_convolution(t, 0.25)
    assert_allclose(F.matrices[1][2:, 2:], t.matrices[1] + 0.25 * np.eye(2))
    assert_allclose(F.matrices[1][2:, :2], t.matrices[0])
    assert not np.any(F.matrices[1][:2])


def test_sy_convolution_normal_form(rng):
    t = random_tuple(rng, 2, 2)
    F_inf, Fs = sysm.sy_blocks(t, 0.4)
    s = sysm.sy_convolution(t, 0.4)
    assert_allclose(s.B_infinity(), F_inf, atol=1e-13)
    for F, G in zip(Fs, s.matrices[1:]):
        assert_allclose(F, G)


def test_psi_shift_moves_b_zero(rng):
    t = random_tuple(rng)
    s = sysm.psi_shift(t, 0.5)
    assert_allclose(t.matrices[0] - s.matrices[0], (1 - qpow(t.q, 0.5)) * np.eye(t.m))


def test_rebase_checks_coordinates():
    _, t = _seed()
    res = sysm.middle_convolution(sysm.add_mu(t, 0.2), 0.3)
    with pytest.raises(DimensionError):
        sysm.rebase(res, np.eye(2))
    Q = np.random.default_rng(3).standard_normal((res.reduced.m, res.reduced.m)) @ res.proj
    rb = sysm.rebase(res, Q)
    for G, Gbar in zip(res.conv.matrices, rb.reduced.matrices):
        assert_allclose(rb.proj @ G, Gbar @ rb.proj, atol=1e-10)
    assert linalg.numerical_rank(rb.proj) == rb.reduced.m
