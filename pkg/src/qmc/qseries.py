"""q-Pochhammer symbols, basic hypergeometric series, kernels and Jackson integrals.

All non-integer powers use the principal branch of the logarithm.  Infinite
products are truncated once ``|q^k a|`` drops below ``1e-17``, which is below
double precision resolution for the factor ``1 - q^k a``.

Factors ``1 - q^k a`` whose modulus is within a few ulps of zero are treated
as exact zeros.  This matters for bilateral sums where ``a`` is a negative
power of ``q`` computed in floating point: the mathematically vanishing
factor would otherwise survive as rounding noise of size ``1e-16`` and
pollute the sum.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ArgumentError, DivergenceError, PoleError

__all__ = [
    "PRODUCT_CUTOFF",
    "SeriesResult",
    "KernelSpec",
    "check_base",
    "cpow",
    "qpow",
    "qpoch_inf",
    "qpoch_ratio",
    "qpoch_fin",
    "phi21",
    "phi32",
    "basic_hypergeometric",
    "kernel_eval",
    "appendix_kernel",
    "jackson_integral",
]

PRODUCT_CUTOFF = 1e-17
# a factor 1 - t with |1 - t| below this multiple of eps * max(1, |t|) is zero
_SNAP = 64 * np.finfo(float).eps
# denominator factors closer than this to zero count as a pole
POLE_TOL = 1e-12


@dataclass(frozen=True)
class SeriesResult:
    value: complex | np.ndarray
    terms_used: int
    est_truncation_error: float


def check_base(q) -> complex:
    q = complex(q)
    if not (0 < abs(q) < 1):
        raise ArgumentError(f"base q must satisfy 0 < |q| < 1, got {q!r}")
    return q


def cpow(x, a) -> complex:
    """Principal branch ``x**a`` (``0**a = 0`` for ``Re a > 0``)."""
    x = complex(x)
    a = complex(a)
    if x == 0:
        if a == 0:
            return 1.0 + 0j
        if a.real > 0:
            return 0j
        raise PoleError("0 raised to a power with non-positive real part")
    return cmath.exp(a * cmath.log(x))


def qpow(q, a) -> complex:
    """``q**a`` on the principal branch; integer ``a`` uses repeated products."""
    q = complex(q)
    if isinstance(a, (int, np.integer)):
        return q ** int(a)
    return cmath.exp(complex(a) * cmath.log(q))


def _n_factors(amax: float, q: complex, cutoff: float = PRODUCT_CUTOFF) -> int:
    if amax <= cutoff:
        return 0
    return int(math.ceil(math.log(cutoff / amax) / math.log(abs(q)))) + 1


def _factors(a: complex, q: complex, K: int) -> np.ndarray:
    qk = np.cumprod(np.concatenate([[1.0 + 0j], np.full(K - 1, q)])) if K else np.empty(0)
    t = a * qk
    f = 1.0 - t
    zero = np.abs(f) <= _SNAP * np.maximum(1.0, np.abs(t))
    f[zero] = 0.0
    return f


def qpoch_inf(a, q, tol: float = PRODUCT_CUTOFF) -> complex:
    """``(a; q)_inf = prod_{k >= 0} (1 - a q^k)``.

    >>> abs(qpoch_inf(0, 0.5) - 1) < 1e-15
    True
    """
    q = check_base(q)
    a = complex(a)
    K = _n_factors(abs(a), q, tol)
    if K == 0:
        return 1.0 + 0j
    return complex(np.prod(_factors(a, q, K)))


def qpoch_ratio(numer: Sequence, denom: Sequence, q, tol: float = PRODUCT_CUTOFF) -> complex:
    """``prod (a_i; q)_inf / prod (b_j; q)_inf`` evaluated factor by factor.

    Multiplying the ratios of matching factors keeps the result finite when the
    individual products would overflow (large arguments in bilateral sums).
    Raises ``PoleError`` if a denominator factor vanishes.
    """
    q = check_base(q)
    numer = [complex(a) for a in numer]
    denom = [complex(b) for b in denom]
    amax = max([abs(a) for a in numer + denom] + [0.0])
    K = _n_factors(amax, q, tol)
    if K == 0:
        return 1.0 + 0j
    num = np.ones(K, dtype=complex)
    for a in numer:
        num *= _factors(a, q, K)
    if not np.all(num):
        return 0j
    den = np.ones(K, dtype=complex)
    for b in denom:
        fb = _factors(b, q, K)
        if np.min(np.abs(fb)) < POLE_TOL:
            raise PoleError(f"(b; q)_inf vanishes for b = {b!r}")
        den *= fb
    # balanced ratios stay O(1) term by term; accumulate in log space otherwise
    r = num / den
    mags = np.abs(r)
    if np.all((mags > 1e-150) & (mags < 1e150)):
        logmag = np.sum(np.log(mags))
        if abs(logmag) < 650:
            return complex(np.prod(r))
    logval = np.sum(np.log(mags))
    phase = np.sum(np.angle(r))
    if logval > 709:
        raise DivergenceError("q-Pochhammer ratio overflows")
    return cmath.exp(complex(logval, phase))


def qpoch_fin(a, q, n: int) -> complex:
    """``(a; q)_n = prod_{k=0}^{n-1} (1 - a q^k)``."""
    if int(n) != n or n < 0:
        raise ArgumentError(f"n must be a non-negative integer, got {n!r}")
    q = check_base(q)
    a = complex(a)
    if n == 0:
        return 1.0 + 0j
    return complex(np.prod(_factors(a, q, int(n))))


def _is_zero_factor(t: complex) -> bool:
    return abs(1 - t) <= _SNAP * max(1.0, abs(t))


def basic_hypergeometric(numer: Sequence, denom: Sequence, q, z, tol: float = 1e-16,
                         guard: int = 500, max_terms: int = 100000) -> SeriesResult:
    """Balanced ``r+1 phi r`` series ``sum (a;q)_n / ((b;q)_n (q;q)_n) z^n``.

    Terms are generated by their ratio.  The sum stops when the estimated tail
    ``|t_n| rho / (1 - rho)`` falls below ``tol`` times the partial sum, where
    ``rho`` is the current term ratio, or when a numerator factor vanishes
    (terminating series).
    """
    q = check_base(q)
    z = complex(z)
    numer = [complex(a) for a in numer]
    denom = [complex(b) for b in denom]
    if len(numer) != len(denom) + 1:
        raise ArgumentError("need one more numerator than denominator parameter")
    if z == 0:
        return SeriesResult(1.0 + 0j, 1, 0.0)
    term = 1.0 + 0j
    total = 1.0 + 0j
    qn = 1.0 + 0j
    rising = 0
    prev = 1.0
    for n in range(max_terms):
        ratio = z / (1 - qn * q)
        terminated = False
        for a in numer:
            t = a * qn
            if _is_zero_factor(t):
                terminated = True
                break
            ratio *= 1 - t
        if terminated:
            return SeriesResult(total, n + 1, 0.0)
        for b in denom:
            t = b * qn
            if abs(1 - t) < POLE_TOL or _is_zero_factor(t):
                raise PoleError(f"denominator parameter {b!r} lies on the grid q^-n")
            ratio /= 1 - t
        term *= ratio
        total += term
        qn *= q
        mag = abs(term)
        if not math.isfinite(mag) or not np.isfinite(total):
            raise DivergenceError("series overflowed")
        rho = abs(ratio)
        if rho < 1:
            err = mag * rho / (1 - rho)
            if err <= tol * abs(total) or mag == 0:
                return SeriesResult(total, n + 2, err)
        rising = rising + 1 if mag >= prev else 0
        prev = mag
        if rising >= guard:
            raise DivergenceError(f"terms did not decrease for {guard} consecutive steps")
    raise DivergenceError(f"no convergence within {max_terms} terms")


def phi21(a, b, c, q, z, tol: float = 1e-16) -> SeriesResult:
    """``2phi1(a, b; c; q, z)``.

    >>> r = phi21(0.3, 0.5, 0.5, 0.5, 0.2)
    >>> abs(r.value - qpoch_inf(0.06, 0.5) / qpoch_inf(0.2, 0.5)) < 1e-14
    True
    """
    return basic_hypergeometric([a, b], [c], q, z, tol)


def phi32(a1, a2, a3, b1, b2, q, z, tol: float = 1e-16) -> SeriesResult:
    """``3phi2(a1, a2, a3; b1, b2; q, z)``."""
    return basic_hypergeometric([a1, a2, a3], [b1, b2], q, z, tol)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice for the integral transform: variant ``"K1"`` or ``"K2"``."""

    variant: str
    lam: complex

    def __post_init__(self):
        if self.variant not in ("K1", "K2"):
            raise ArgumentError(f"unknown kernel variant {self.variant!r}")


def appendix_kernel(lam, q, x, s) -> complex:
    """``(q^{lam+1} s/x; q)_inf / (q s/x; q)_inf``."""
    q = check_base(q)
    r = complex(s) / complex(x)
    return qpoch_ratio([qpow(q, lam) * q * r], [q * r], q)


def kernel_eval(spec: KernelSpec, q, x, s) -> complex:
    """Evaluate the transform kernel ``K(x, s)``.

    ``K1 = x^{-lam} (q^{lam+1} s/x; q)_inf / (q s/x; q)_inf`` and
    ``K2 = s^{-lam} (x/s; q)_inf / (q^{-lam} x/s; q)_inf``.  Both satisfy
    ``q^lam K(qx, s) = K(x, s/q) = (x - q^lam s)/(x - s) K(x, s)``.
    """
    q = check_base(q)
    x = complex(x)
    s = complex(s)
    if x == 0 or s == 0:
        raise PoleError("kernel is singular at x = 0 or s = 0")
    lam = complex(spec.lam)
    ql = qpow(q, lam)
    if spec.variant == "K1":
        r = s / x
        return cpow(x, -lam) * qpoch_ratio([ql * q * r], [q * r], q)
    r = x / s
    return cpow(s, -lam) * qpoch_ratio([r], [r / ql], q)


def _grid_point(q: complex, n: int, xi: complex) -> complex:
    try:
        return xi * q**n
    except OverflowError:
        raise DivergenceError(f"grid point q^{n} xi left double range") from None


def jackson_integral(f: Callable, xi, q, trunc: tuple[int, int] | None = None,
                     tol: float = 1e-16, guard: int = 500, window: int = 4,
                     max_terms: int = 20000, zero_window: int = 2000) -> SeriesResult:
    """Jackson integral ``(1 - q) sum_n q^n xi f(q^n xi)`` over ``(0, xi infinity)``.

    ``f`` maps a grid point to a scalar or vector.  With ``trunc = (K, L)``
    the sum runs over ``K <= n <= L``.  Otherwise both tails are extended
    until ``window`` consecutive terms fall below ``tol`` times the running
    sum; a tail whose terms fail to decrease ``guard`` times in a row raises
    ``DivergenceError``.  Integrands built from q-Pochhammer ratios often
    vanish on a run of grid points next to ``xi``, so exact zeros only count
    towards ``window`` once a nonzero term has been met; before that a run of
    ``zero_window`` zeros ends the tail.
    """
    q = check_base(q)
    xi = complex(xi)

    def term(n):
        s = _grid_point(q, n, xi)
        if not np.isfinite(s) or s == 0:
            raise DivergenceError(f"grid point q^{n} xi left double range")
        return s * np.asarray(f(s), dtype=complex)

    if trunc is not None:
        K, L = trunc
        total = None
        for n in range(K, L + 1):
            t = term(n)
            total = t if total is None else total + t
        if total is None:
            total = np.zeros_like(np.asarray(f(xi), dtype=complex))
        val = (1 - q) * total
        return SeriesResult(val if val.ndim else complex(val), L - K + 1, 0.0)

    first = term(0)
    total = first.copy()
    used = 1
    seen = bool(np.any(first != 0))
    errs = []
    for step in (1, -1):
        n = step
        small = 0
        rising = 0
        prev = float(np.linalg.norm(first))
        last_nonzero = []
        while True:
            t = term(n)
            used += 1
            if not np.all(np.isfinite(t)):
                raise DivergenceError("Jackson integrand is not finite on the grid")
            total = total + t
            mag = float(np.linalg.norm(t))
            scale = float(np.linalg.norm(total))
            if mag > 0:
                seen = True
                last_nonzero = (last_nonzero + [mag])[-2:]
            if mag == 0 and not seen:
                small += 1
                if small >= zero_window:
                    break
                n += step
                continue
            small = small + 1 if mag <= tol * scale else 0
            if small >= window:
                if len(last_nonzero) == 2 and last_nonzero[1] < last_nonzero[0]:
                    rho = last_nonzero[1] / last_nonzero[0]
                    errs.append(mag * rho / (1 - rho))
                else:
                    errs.append(mag)
                break
            rising = rising + 1 if (mag >= prev and mag > 0) else 0
            prev = mag
            if rising >= guard:
                raise DivergenceError(
                    f"Jackson sum tail in direction {step:+d} does not decay")
            if abs(n) > max_terms:
                raise DivergenceError(f"no convergence within {max_terms} terms")
            n += step
    val = (1 - q) * total
    err = abs(1 - q) * float(sum(errs))
    return SeriesResult(val if val.ndim else complex(val), used, err)
