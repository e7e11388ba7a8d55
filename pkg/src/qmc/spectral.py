"""Spectral types ``(S_0; S_inf; S_div)`` of q-difference systems.

``S_0`` and ``S_inf`` are the eigenvalue multiplicities of ``B(0) = I - B_0``
and ``B(inf) = I - sum B_i``.  ``S_div`` lists the multiplicities of the
distinct roots of ``det C(x)`` with ``C(x) = B(x) prod_{i>=1} (x - b_i)``.

The roots come from a block companion pencil of the matrix polynomial
``C``; the degree of ``det C`` is read independently from interpolation on a
circle, and the two must agree.  At every multiple root the rank deficiency
of ``C`` is compared with the multiplicity, which is what the elementary
divisors look like in all generic cases of interest.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg
from .errors import NonGenericSpectrum
from .linalg import DEFAULT_TOL, TolerancePolicy
from .system import SystemTuple

__all__ = [
    "SpectralType",
    "spectral_type",
    "render",
    "parse",
    "matrix_polynomial",
    "det_degree",
    "det_roots",
    "TABLE1",
    "table1",
    "generic_two_pole_tuple",
]


def render(s0, s_inf, s_div) -> str:
    """``"s0;s_inf;s_div"`` with digits run together, or comma separated parts
    when some part is 10 or more."""
    parts = [tuple(sorted(p, reverse=True)) for p in (s0, s_inf, s_div)]
    wide = any(k >= 10 for p in parts for k in p)
    sep = "," if wide else ""
    return ";".join(sep.join(str(k) for k in p) for p in parts)


def parse(text: str) -> tuple:
    """Inverse of :func:`render`.

    Commas anywhere (or a digit 0, which no multiplicity can be) switch every
    part to comma-separated reading.  A wide type whose parts all have one
    entry renders without commas, and such strings read back digit by digit.
    """
    wide = "," in text or "0" in text
    out = []
    for chunk in text.split(";"):
        if wide:
            out.append(tuple(int(c) for c in chunk.split(",")))
        else:
            out.append(tuple(int(c) for c in chunk))
    if len(out) != 3:
        raise ValueError(f"expected three ';'-separated parts, got {text!r}")
    return tuple(out)


@dataclass(frozen=True)
class SpectralType:
    s0: tuple
    s_inf: tuple
    s_div: tuple
    rendered: str
    details: dict = field(default_factory=dict, compare=False, repr=False)

    def __str__(self):
        return self.rendered


def matrix_polynomial(t: SystemTuple) -> list[np.ndarray]:
    """Coefficients ``[C_0, ..., C_N]`` of ``C(x) = B(x) prod_{i>=1} (x - b_i)``.

    With ``p(x) = prod (x - b_i)`` and ``p_i = p / (x - b_i)`` this is
    ``(I - B_0) p(x) - x sum_i B_i p_i(x)``.
    """
    P = np.polynomial.polynomial
    m, N = t.m, t.N
    poles = list(t.poles[1:])
    p = P.polyfromroots(poles) if poles else np.array([1.0 + 0j])
    coeffs = [np.zeros((m, m), dtype=complex) for _ in range(N + 1)]
    for k, c in enumerate(p):
        coeffs[k] = coeffs[k] + c * t.B_zero()
    for i in range(1, N + 1):
        pi = P.polyfromroots([b for j, b in enumerate(poles) if j != i - 1]) if N > 1 \
            else np.array([1.0 + 0j])
        for k, c in enumerate(pi):
            coeffs[k + 1] = coeffs[k + 1] - c * t.matrices[i]
    return coeffs


def _eval_poly(coeffs, x) -> np.ndarray:
    out = np.zeros_like(coeffs[0])
    for C in reversed(coeffs):
        out = out * x + C
    return out


def det_degree(coeffs, radius: float = 1.0, rel: float = 1e-9) -> tuple[int, complex]:
    """Exact degree and leading coefficient of ``det C(x)``.

    ``det C`` is sampled at ``mN + 1`` points on the circle ``|x| = radius``
    and the coefficients are recovered with a DFT.
    """
    m, N = coeffs[0].shape[0], len(coeffs) - 1
    n = m * N + 1
    w = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([np.linalg.det(_eval_poly(coeffs, x)) for x in w])
    c = np.fft.fft(vals) / n / radius ** np.arange(n)
    big = np.abs(c) > rel * max(float(np.max(np.abs(c))), 1e-300)
    if not np.any(big):
        return -1, 0j
    deg = int(np.nonzero(big)[0].max())
    return deg, complex(c[deg])


def det_roots(coeffs) -> np.ndarray:
    """Finite eigenvalues of the block companion pencil of ``sum C_k x^k``."""
    m, N = coeffs[0].shape[0], len(coeffs) - 1
    if N == 0:
        return np.zeros(0, dtype=complex)
    n = m * N
    A = np.zeros((n, n), dtype=complex)
    Bm = np.eye(n, dtype=complex)
    Bm[:m, :m] = coeffs[N]
    for k in range(N):
        A[:m, k * m:(k + 1) * m] = -coeffs[N - 1 - k]
    for k in range(1, N):
        A[k * m:(k + 1) * m, (k - 1) * m:k * m] = np.eye(m)
    ev = scipy.linalg.eigvals(A, Bm)
    scale = max(1.0, max(float(np.linalg.norm(C, 2)) for C in coeffs))
    finite = np.isfinite(ev) & (np.abs(ev) < 1e8 * scale)
    return ev[finite]


def _cluster(values, tol: float) -> list[tuple[complex, int]]:
    values = list(values)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol * max(1.0, abs(values[i])):
                parent[find(i)] = find(j)
    groups: dict[int, list] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(values[i])
    return sorted(((complex(np.mean(g)), len(g)) for g in groups.values()),
                  key=lambda c: (-c[1], c[0].real, c[0].imag))


def spectral_type(t: SystemTuple, tol: TolerancePolicy = DEFAULT_TOL) -> SpectralType:
    """Spectral type of ``t``; see the module docstring for the recipe."""
    s0 = tuple(sorted((c.multiplicity for c in linalg.eigen_clusters(t.B_zero(), tol)),
                      reverse=True))
    s_inf = tuple(sorted((c.multiplicity for c in linalg.eigen_clusters(t.B_infinity(), tol)),
                         reverse=True))

    coeffs = matrix_polynomial(t)
    deg, lead = det_degree(coeffs)
    roots = det_roots(coeffs)
    if len(roots) != max(deg, 0):
        warnings.warn(f"det C has degree {deg} but the pencil gives {len(roots)} finite roots",
                      NonGenericSpectrum, stacklevel=2)
    clusters = _cluster(roots, tol.eig_cluster_tol)
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            za, zb = clusters[a][0], clusters[b][0]
            if abs(za - zb) < 10 * tol.eig_cluster_tol * max(1.0, abs(za)):
                warnings.warn(f"roots {za:.3g} and {zb:.3g} of det C are barely separated",
                              NonGenericSpectrum, stacklevel=2)

    scale = max(1.0, max(float(np.linalg.norm(C, 2)) for C in coeffs))
    deficiency = []
    for z, k in clusters:
        d = t.m - linalg.numerical_rank(_eval_poly(coeffs, z), tol, scale=scale)
        deficiency.append(d)
        if k > 1 and d != k:
            warnings.warn(f"root {z:.3g} of det C has multiplicity {k} but rank drop {d}",
                          NonGenericSpectrum, stacklevel=2)

    # the determinant rebuilt from the pencil roots must match a direct evaluation
    rng = np.random.default_rng(0)
    check = 0.0
    for _ in range(3):
        x = complex(*rng.uniform(-2, 2, size=2))
        direct = np.linalg.det(_eval_poly(coeffs, x))
        rebuilt = lead * np.prod(x - roots) if deg >= 0 else 0.0
        check = max(check, abs(direct - rebuilt) / max(abs(direct), 1e-300))

    s_div = tuple(sorted((k for _, k in clusters), reverse=True))
    details = {"det_degree": deg, "roots": [z for z, _ in clusters],
               "rank_deficiency": deficiency, "det_consistency": float(check)}
    return SpectralType(s0, s_inf, s_div, render(s0, s_inf, s_div), details)


# Rows of the table of spectral types: (label, catalog name, expected).
TABLE1 = (
    ("qhg", "qhg", "11;11;11"),
    ("ghg3", "ghg3", "111;111;21"),
    ("ghg3_alt", "ghg3_alt", "21;111;111"),
    ("jp2", "jp2", "21;21;2211"),
    ("jp3", "jp3", "31;31;333111"),
    ("variant_deg2", "variant_deg2", "2;11;1111"),
    ("variant_deg3", "variant_deg3", "2;2;111111"),
    ("s46", "s46", "3;111;21111"),
    ("s47", "s47", "3;21;111111"),
    ("s48", "s48", "3;3;21111111"),
)


def generic_two_pole_tuple(rng, m: int = 2, q=None) -> SystemTuple:
    """Random ``m x m`` tuple with poles ``0, b_1, b_2``."""
    q = complex(rng.uniform(0.3, 0.7)) if q is None else q
    mats = [rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)) for _ in range(3)]
    b = [complex(np.exp(complex(rng.uniform(-0.5, 0.5), rng.uniform(-3, 3)))) for _ in range(2)]
    return SystemTuple(q, [0, b[0], b[1]], mats)


def table1(seed: int = 20240601, draws: int = 3, tol: TolerancePolicy = DEFAULT_TOL) -> list[dict]:
    """Spectral types of every table row at ``draws`` random parameter sets,
    plus the generic two-pole 2x2 family."""
    from . import catalog

    rng = np.random.default_rng(seed)
    rows = []
    for label, name, expected in TABLE1:
        got = []
        for _ in range(draws):
            params = catalog.random_params(name, rng)
            res = catalog.build(name, params, tol)
            got.append(spectral_type(res.final, tol).rendered)
        rows.append({"row": label, "expected": expected, "got": got,
                     "pass": all(g == expected for g in got)})
    got = [spectral_type(generic_two_pole_tuple(rng), tol).rendered for _ in range(draws)]
    rows.append({"row": "generic_2x2_two_poles", "expected": "11;11;1111", "got": got,
                 "pass": all(g == "11;11;1111" for g in got)})
    return rows
