"""Seed solutions, the Jackson-integral transform and closed-form solutions.

The transform sends a solution ``Y`` of a system with poles ``b_i`` to the
stacked vector

    Ytilde_i(x) = int_0^{xi inf} K(x, s) / (s - b_i) Y(s) d_q s,

which solves the q-convolved system when the sums converge and the boundary
terms vanish.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArgumentError, DegenerateError, PoleError
from .qseries import (KernelSpec, check_base, cpow, jackson_integral,
                      kernel_eval, phi21, phi32, qpoch_ratio, qpow)
from .system import SystemTuple

__all__ = [
    "SeedSolution",
    "AlternateSeed",
    "seed_tuple",
    "transform_integrand",
    "convolve_solution",
    "truncated_transform",
    "truncated_identity_residual",
    "boundary_terms",
    "convergence_certificate",
    "closed_form_qhg",
    "QHG_VARIANTS",
    "closed_form_3phi2",
    "double_integral_g1",
]

# grid points closer than this to a pole are treated as hitting it
GRID_POLE_TOL = 1e-10


@dataclass(frozen=True)
class SeedSolution:
    """``y(x) = x^mu prod_j (alpha_j x; q)_inf / (beta_j x; q)_inf``."""

    mu: complex
    alphas: tuple
    betas: tuple
    q: complex

    def __post_init__(self):
        alphas = tuple(complex(a) for a in self.alphas)
        betas = tuple(complex(b) for b in self.betas)
        if len(alphas) != len(betas):
            raise ArgumentError("alphas and betas must have equal length")
        if any(a == 0 for a in alphas + betas):
            raise ArgumentError("alphas and betas must be nonzero")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "q", check_base(self.q))
        object.__setattr__(self, "mu", complex(self.mu))

    def __call__(self, x) -> np.ndarray:
        x = complex(x)
        r = qpoch_ratio([a * x for a in self.alphas], [b * x for b in self.betas], self.q)
        return np.array([cpow(x, self.mu) * r])

    def divided(self, x, b) -> np.ndarray:
        """``y(x) / (x - b)``, with the removable singularity at ``b = 1/alpha_k`` resolved."""
        x, b = complex(x), complex(b)
        for k, a in enumerate(self.alphas):
            if b == 1 / a and abs(x - b) <= GRID_POLE_TOL * max(1.0, abs(b)):
                # (a x; q)_inf / (x - 1/a) = -a (q a x; q)_inf
                numer = [self.q * a * x] + [aj * x for j, aj in enumerate(self.alphas) if j != k]
                r = qpoch_ratio(numer, [bj * x for bj in self.betas], self.q)
                return np.array([-a * cpow(x, self.mu) * r])
        if x == b:
            raise PoleError(f"seed divided by (x - {b}) at x = {x}")
        return self(x) / (x - b)


@dataclass(frozen=True)
class AlternateSeed:
    """``x^mu_alt (q/(beta x); q)_inf / (q/(alpha x); q)_inf`` for one pair.

    With ``q^mu_alt alpha / beta = q^mu`` it solves the same first-order
    equation as the seed ``x^mu (alpha x)_inf / (beta x)_inf``; ``mu_alt`` is
    taken as ``mu + log(beta/alpha) / log q`` on the principal branch.
    """

    mu: complex
    alpha: complex
    beta: complex
    q: complex

    @property
    def mu_alt(self) -> complex:
        q = complex(self.q)
        return complex(self.mu) + cmath.log(complex(self.beta) / complex(self.alpha)) / cmath.log(q)

    def __call__(self, x) -> np.ndarray:
        x = complex(x)
        q = complex(self.q)
        r = qpoch_ratio([q / (self.beta * x)], [q / (self.alpha * x)], q)
        return np.array([cpow(x, self.mu_alt) * r])


def seed_tuple(seed: SeedSolution) -> SystemTuple:
    """1x1 system solved by the seed: ``B_0 = 1 - q^mu`` and

    ``B_k = q^mu (a_k - b_k)/a_k prod_{j != k} (a_k - b_j)/(a_k - a_j)`` at pole ``1/a_k``.
    """
    q = seed.q
    qm = qpow(q, seed.mu)
    a, b = seed.alphas, seed.betas
    if len(set(a)) != len(a):
        raise DegenerateError("alphas must be pairwise distinct")
    mats = [np.array([[1 - qm]])]
    for k in range(len(a)):
        val = qm * (a[k] - b[k]) / a[k]
        for j in range(len(a)):
            if j != k:
                val *= (a[k] - b[j]) / (a[k] - a[j])
        mats.append(np.array([[val]]))
    return SystemTuple(q, [0] + [1 / ak for ak in a], mats)


def _divided(Y, s: complex, b: complex) -> np.ndarray:
    if abs(s - b) <= GRID_POLE_TOL * max(1.0, abs(b)):
        if hasattr(Y, "divided"):
            return np.asarray(Y.divided(s, b), dtype=complex)
        raise PoleError(f"grid point {s} hits the pole {b}")
    return np.asarray(Y(s), dtype=complex) / (s - b)


def transform_integrand(t: SystemTuple, Y: Callable, kernel: KernelSpec, x) -> Callable:
    """``s -> (K(x, s) Y(s) / (s - b_i))_i`` stacked over the poles."""
    x = complex(x)

    def f(s):
        k = kernel_eval(kernel, t.q, x, s)
        if k == 0:
            return np.zeros(t.m * (t.N + 1), dtype=complex)
        return k * np.concatenate([_divided(Y, s, b) for b in t.poles])

    return f


def _anchor(x, xi, A) -> complex:
    if (xi is None) == (A is None):
        raise ArgumentError("give exactly one of xi (fixed anchor) or A (xi = A x)")
    return complex(xi) if xi is not None else complex(A) * complex(x)


def convolve_solution(t: SystemTuple, Y: Callable, kernel: KernelSpec, x, xi=None, A=None,
                      trunc: tuple[int, int] | None = None, tol: float = 1e-16,
                      full: bool = False):
    """Stacked Jackson integrals ``Ytilde_i(x)``, one block per pole.

    The anchor is either a fixed ``xi`` or proportional to ``x`` (``A``).
    ``full=True`` returns the :class:`SeriesResult` instead of the vector.
    """
    anchor = _anchor(x, xi, A)
    res = jackson_integral(transform_integrand(t, Y, kernel, x), anchor, t.q, trunc=trunc, tol=tol)
    return res if full else np.asarray(res.value)


def truncated_transform(t: SystemTuple, Y: Callable, kernel: KernelSpec, x, K: int, L: int,
                        xi=None, A=None) -> np.ndarray:
    """``Ytilde^{[K, L]}(x) = (1 - q) sum_{n=K}^{L} K(x, s) s Y(s) / (s - b_i)`` at ``s = q^n xi``."""
    return convolve_solution(t, Y, kernel, x, xi=xi, A=A, trunc=(K, L))


def boundary_terms(t: SystemTuple, Y: Callable, kernel: KernelSpec, x, K: int, L: int,
                   xi) -> tuple[np.ndarray, np.ndarray]:
    """``(K(x, q^{K-1} xi) Y(q^K xi), K(x, q^L xi) Y(q^{L+1} xi))``."""
    q = t.q
    xi = complex(xi)
    lower = kernel_eval(kernel, q, x, q ** (K - 1) * xi) * np.asarray(Y(q**K * xi))
    upper = kernel_eval(kernel, q, x, q**L * xi) * np.asarray(Y(q ** (L + 1) * xi))
    return lower, upper


def truncated_identity_residual(t: SystemTuple, Y: Callable, kernel: KernelSpec, x,
                                K: int, L: int, xi=None, A=None) -> float:
    """Residual of the finite-sum relation behind the transform theorem.

    For finite ``K, L`` the truncated transform satisfies the convolved system
    up to explicit boundary terms; with ``xi = A x`` two further terms appear
    because the grid moves with ``x``.  Returns the normalized residual.
    """
    q = t.q
    x = complex(x)
    lam = complex(kernel.lam)
    ql = qpow(q, -lam)
    m = t.m
    Yt = truncated_transform(t, Y, kernel, x, K, L, xi=xi, A=A)
    Yq = truncated_transform(t, Y, kernel, q * x, K, L, xi=xi, A=A)
    anchor = _anchor(x, xi, A)
    lower, upper = boundary_terms(t, Y, kernel, x, K, L, anchor)
    mix = sum(ql * B @ Yt[j * m:(j + 1) * m] for j, B in enumerate(t.matrices))
    lhs = (Yq - Yt) / (-x)
    rhs = np.zeros_like(Yt)
    for i, b in enumerate(t.poles):
        blk = slice(i * m, (i + 1) * m)
        rhs[blk] = ((1 - ql) * Yt[blk] + mix - (1 - q) * ql * (lower - upper)) / (x - b)
        if A is not None:
            sK = complex(A) * q**K * x
            sL = complex(A) * q ** (L + 1) * x
            eK = kernel_eval(kernel, q, q * x, sK) * sK * _divided(Y, sK, b)
            eL = kernel_eval(kernel, q, q * x, sL) * sL * _divided(Y, sL, b)
            rhs[blk] += (1 - q) / x * (eK - eL)
    return float(np.linalg.norm(lhs - rhs) / (1 + np.linalg.norm(Yt)))


def convergence_certificate(t: SystemTuple, lam) -> dict:
    """Sufficient condition for the transform to converge and solve the convolved system.

    Passes when every eigenvalue of ``I - B_0`` has modulus below 1 and every
    eigenvalue of ``I - sum B_i`` has modulus above ``|q^lam|``.
    """
    e0 = np.linalg.eigvals(t.B_zero())
    einf = np.linalg.eigvals(t.B_infinity())
    bound = abs(qpow(t.q, lam))
    passes = bool(np.max(np.abs(e0)) < 1 and np.min(np.abs(einf)) > bound)
    return {"eig_I_minus_B0": [complex(v) for v in e0],
            "eig_I_minus_sum": [complex(v) for v in einf],
            "q_lambda_abs": bound,
            "passes": passes}


def _p(q, a):
    return qpow(q, a)


def _y0al(q, mu, lam, alpha, beta, x, form):
    qm, ql = _p(q, mu), _p(q, lam)
    if form == 1:
        pre = (1 - q) * qm * cpow(alpha, -mu) * cpow(x, -lam)
        pre *= qpoch_ratio([ql * q**2 / (alpha * x), q], [q**2 / (alpha * x), q * beta / alpha], q)
        return pre * phi21(q**2 / (alpha * x), q * beta / alpha, ql * q**2 / (alpha * x), q, qm).value
    pre = (1 - q) * qm * cpow(alpha, -mu) * cpow(x, -lam)
    pre *= qpoch_ratio([q, qm * q * beta / alpha], [q * beta / alpha, qm], q)
    return pre * phi21(ql, qm, qm * q * beta / alpha, q, q**2 / (alpha * x)).value


def _y0la(q, mu, lam, alpha, beta, x, form):
    qm, ql = _p(q, mu), _p(q, lam)
    pre = (1 - q) * _p(q, -lam * mu) * cpow(x, mu - lam)
    if form == 1:
        pre *= qpoch_ratio([alpha * x / ql, q], [beta * x / ql, q / ql], q)
        return pre * phi21(beta * x / ql, q / ql, alpha * x / ql, q, qm).value
    pre *= qpoch_ratio([q, qm * q / ql], [q / ql, qm], q)
    return pre * phi21(alpha / beta, qm, qm * q / ql, q, beta * x / ql).value


def _y0be_first(q, mu, lam, alpha, beta, x, form):
    qm, ql = _p(q, mu), _p(q, lam)
    mu_alt = AlternateSeed(mu, alpha, beta, q).mu_alt
    pre = (1 - q) * cpow(beta, lam - mu_alt)
    if form == 1:
        pre *= qpoch_ratio([beta * x, q], [beta * x / ql, q * beta / alpha], q)
        return pre * phi21(beta * x / ql, q * beta / alpha, beta * x, q, ql / qm * alpha / beta).value
    pre *= qpoch_ratio([q, ql / qm * q], [q * beta / alpha, ql / qm * alpha / beta], q)
    return pre * phi21(ql, ql / qm * alpha / beta, ql / qm * q, q, beta * x / ql).value


def _y0be_second(q, mu, lam, alpha, beta, x, form):
    qm, ql = _p(q, mu), _p(q, lam)
    mu_alt = AlternateSeed(mu, alpha, beta, q).mu_alt
    pre = (1 - q) * ql / qm * alpha / beta * cpow(x, mu_alt - lam)
    if form == 1:
        pre *= qpoch_ratio([q**2 / (beta * x), q], [q**2 / (alpha * x), q / ql], q)
        return pre * phi21(q / ql, q**2 / (alpha * x), q**2 / (beta * x), q,
                           ql / qm * alpha / beta).value
    pre *= qpoch_ratio([q, q / qm * alpha / beta], [q / ql, ql / qm * alpha / beta], q)
    return pre * phi21(alpha / beta, ql / qm * alpha / beta, q / qm * alpha / beta, q,
                       q**2 / (alpha * x)).value


QHG_VARIANTS = {
    "y0al": _y0al,
    "y0la": _y0la,
    "y0be_first": _y0be_first,
    "y0be_second": _y0be_second,
}


def closed_form_qhg(variant: str, q, mu, lam, alpha, beta, x, form: int = 2) -> complex:
    """Closed forms of the first component of the transformed q-hypergeometric solution.

    ``y0al``: anchor ``1/alpha`` with the first kernel (needs ``mu > 0``);
    ``y0la``: anchor ``q^-lam x`` with the first kernel (``mu > 0``);
    ``y0be_first``: anchor ``1/beta`` with the second kernel and the alternate
    seed; ``y0be_second``: anchor ``x`` with the same (both need
    ``|q^{lam - mu} alpha / beta| < 1``).  ``form`` selects which of the two
    equivalent series representations is summed.
    """
    if variant not in QHG_VARIANTS:
        raise ArgumentError(f"unknown variant {variant!r}")
    if form not in (1, 2):
        raise ArgumentError("form must be 1 or 2")
    q = check_base(q)
    return complex(QHG_VARIANTS[variant](q, complex(mu), complex(lam), complex(alpha),
                                         complex(beta), complex(x), form))


def closed_form_3phi2(q, lam, lam2, mu, mu2, alpha, beta, x) -> complex:
    """``3phi2`` solution of the generalized order-3 q-hypergeometric equation.

    ``lam2`` and ``mu2`` are the parameters of the second convolution and of
    the intermediate addition.
    """
    q = check_base(q)
    P = lambda a: _p(q, a)
    expo = -lam2 * mu - lam * mu - lam2 * mu2 + lam2 * lam
    pre = (1 - q) ** 2 * P(expo)
    pre *= qpoch_ratio([q, q, P(mu - lam + 1), P(mu2 + mu - lam - lam2 + 1)],
                       [P(1 - lam2), P(1 - lam), P(mu), P(mu2 + mu - lam)], q)
    pre *= cpow(x, mu2 + mu - lam2 - lam)
    s = phi32(alpha / beta, P(mu), P(mu2 + mu - lam), P(mu - lam + 1),
              P(mu2 + mu - lam - lam2 + 1), q, P(-lam2 - lam) * beta * x)
    return complex(pre * s.value)


def double_integral_g1(q, lam, lam2, mu, mu2, alpha, beta, x, xi, xi2,
                       tol: float = 1e-15) -> complex:
    """First component of the iterated transform, summed from its definition.

    Evaluates ``int_0^{xi2 inf} K1_{lam2}(x, s) s^{mu2 - 1}
    int_0^{xi inf} K1_{lam}(s, t) t^{-1} y(t) d_q t d_q s`` with the seed
    ``y(t) = t^mu (alpha t)_inf / (beta t)_inf``.
    """
    q = check_base(q)
    seed = SeedSolution(mu, (alpha,), (beta,), q)
    k_out = KernelSpec("K1", lam2)
    k_in = KernelSpec("K1", lam)

    def inner(s):
        def g(t):
            k = kernel_eval(k_in, q, s, t)
            return 0j if k == 0 else k * seed(t)[0] / t
        return jackson_integral(g, xi, q, tol=tol).value

    def outer(s):
        k = kernel_eval(k_out, q, x, s)
        if k == 0:
            return 0j
        return k * cpow(s, mu2 - 1) * inner(s)

    return complex(jackson_integral(outer, xi2, q, tol=tol).value)
