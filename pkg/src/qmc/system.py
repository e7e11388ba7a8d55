"""First-order q-difference systems and the operators acting on them.

A system is stored as a :class:`SystemTuple` holding the poles
``b_0 = 0, b_1, ..., b_N`` and matrices ``B_0, ..., B_N`` of

    (Y(qx) - Y(x)) / (-x) = sum_i B_i / (x - b_i) Y(x),

equivalently ``Y(qx) = B(x) Y(x)`` with
``B(x) = I - B_0 + sum_{i>=1} B_i (-x) / (x - b_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (ArgumentError, DimensionError, PoleCollisionError, PoleError,
                     SingularStepError)
from .linalg import DEFAULT_TOL, Subspace, TolerancePolicy
from .qseries import check_base, qpow

__all__ = [
    "SystemTuple",
    "GridFunction",
    "MCResult",
    "eval_B",
    "propagate",
    "residual",
    "add_mu",
    "pole_move",
    "q_convolution",
    "dr_convolution",
    "sy_convolution",
    "sy_blocks",
    "kl_spaces",
    "sy_l_space",
    "middle_convolution",
    "sy_middle_convolution",
    "psi_shift",
    "rebase",
]


def _frozen(M) -> np.ndarray:
    A = np.array(M, dtype=complex)
    A.setflags(write=False)
    return A


@dataclass(frozen=True, eq=False)
class SystemTuple:
    """Poles and residue matrices of a Fuchsian-type q-difference system."""

    q: complex
    poles: tuple
    matrices: tuple

    def __post_init__(self):
        q = check_base(self.q)
        poles = tuple(complex(b) for b in self.poles)
        mats = tuple(_frozen(M) for M in self.matrices)
        if not poles or poles[0] != 0:
            raise ArgumentError("the first pole must be exactly 0")
        if len(poles) != len(mats):
            raise DimensionError(f"{len(poles)} poles but {len(mats)} matrices")
        m = mats[0].shape[0]
        for M in mats:
            if M.shape != (m, m):
                raise DimensionError(f"matrix of shape {M.shape}, expected {(m, m)}")
            if not np.all(np.isfinite(M)):
                raise ArgumentError("matrix has non-finite entries")
        for i in range(len(poles)):
            for j in range(i + 1, len(poles)):
                if poles[i] == poles[j]:
                    raise ArgumentError(f"poles {i} and {j} coincide")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "matrices", mats)

    @property
    def m(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def N(self) -> int:
        return len(self.poles) - 1

    def identity(self) -> np.ndarray:
        return np.eye(self.m, dtype=complex)

    def total(self) -> np.ndarray:
        """``B_0 + ... + B_N``."""
        return sum(self.matrices[1:], self.matrices[0].copy())

    def B_zero(self) -> np.ndarray:
        """``B(0) = I - B_0``."""
        return self.identity() - self.matrices[0]

    def B_infinity(self) -> np.ndarray:
        """``B(inf) = I - sum B_i``."""
        return self.identity() - self.total()

    def replace(self, matrices=None, poles=None, q=None) -> "SystemTuple":
        return SystemTuple(self.q if q is None else q,
                           self.poles if poles is None else poles,
                           self.matrices if matrices is None else matrices)

    def __repr__(self):
        return f"SystemTuple(q={self.q}, m={self.m}, poles={list(self.poles)})"


@dataclass
class GridFunction:
    """Vector values on the grid ``{q^n xi}``, indexed by ``n``."""

    xi: complex
    q: complex
    values: dict = field(default_factory=dict)

    def point(self, n: int) -> complex:
        return complex(self.xi) * complex(self.q) ** n

    def indices(self) -> list[int]:
        return sorted(self.values)

    def __getitem__(self, n: int) -> np.ndarray:
        return self.values[n]

    def index_of(self, x, rel: float = 1e-10) -> int:
        x = complex(x)
        best, dist = None, np.inf
        for n in self.values:
            d = abs(self.point(n) - x)
            if d < dist:
                best, dist = n, d
        if best is None or dist > rel * max(abs(x), 1e-300):
            raise ArgumentError(f"x = {x} is not a sampled grid point")
        return best

    def __call__(self, x) -> np.ndarray:
        return self.values[self.index_of(x)]

    def _ratio(self, idx: list[int]) -> float | None:
        if len(idx) < 3:
            return None
        mags = [np.linalg.norm(self.values[n]) for n in idx]
        if min(mags) == 0:
            return 0.0
        return float(np.exp(np.mean(np.diff(np.log(mags)))))

    @property
    def decay_pos(self) -> float | None:
        """Mean geometric ratio ``|Y(q^{n+1} xi)| / |Y(q^n xi)|`` over the top indices."""
        idx = [n for n in self.indices() if n >= 0]
        return self._ratio(idx[-min(len(idx), 10):])

    @property
    def decay_neg(self) -> float | None:
        """Mean ratio ``|Y(q^{n-1} xi)| / |Y(q^n xi)|`` over the lowest indices."""
        idx = [n for n in self.indices() if n <= 0][::-1]
        return self._ratio(idx[-min(len(idx), 10):])


def eval_B(t: SystemTuple, x) -> np.ndarray:
    """Coefficient matrix ``B(x)`` of ``Y(qx) = B(x) Y(x)``."""
    x = complex(x)
    B = t.identity() - t.matrices[0]
    for b, Bi in zip(t.poles[1:], t.matrices[1:]):
        if x == b:
            raise PoleError(f"x = {x} is a pole")
        B = B + Bi * (-x / (x - b))
    return B


def propagate(t: SystemTuple, x0, Y0, steps: int, direction: int = 1) -> GridFunction:
    """Iterate ``Y(qx) = B(x) Y(x)`` from ``x0`` for ``steps`` steps.

    ``direction=-1`` runs the recursion backwards with ``B(x/q)^{-1}``.
    """
    if direction not in (1, -1):
        raise ArgumentError("direction must be +1 or -1")
    x0 = complex(x0)
    Y = np.asarray(Y0, dtype=complex).reshape(t.m)
    g = GridFunction(x0, t.q, {0: Y.copy()})
    q = t.q
    for k in range(steps):
        if direction == 1:
            x = x0 * q**k
            Y = eval_B(t, x) @ Y
            g.values[k + 1] = Y
        else:
            x = x0 * q ** (-k - 1)
            B = eval_B(t, x)
            if np.linalg.cond(B) > 1e13:
                raise SingularStepError(f"B({x}) is numerically singular")
            Y = np.linalg.solve(B, Y)
            g.values[-k - 1] = Y
    return g


def residual(t: SystemTuple, Y, x) -> float:
    """Normalized residual of the system at ``x``.

    ``Y`` is a :class:`GridFunction` containing ``x`` and ``qx`` or a callable.
    """
    x = complex(x)
    if x == 0:
        raise ArgumentError("residual is evaluated at x != 0")
    if isinstance(Y, GridFunction):
        n = Y.index_of(x)
        if n + 1 not in Y.values:
            raise ArgumentError(f"no sample at q x for x = {x}")
        y0, y1 = Y.values[n], Y.values[n + 1]
    else:
        y0 = np.asarray(Y(x), dtype=complex)
        y1 = np.asarray(Y(t.q * x), dtype=complex)
    rhs = np.zeros(t.m, dtype=complex)
    for b, Bi in zip(t.poles, t.matrices):
        if x == b:
            raise PoleError(f"x = {x} is a pole")
        rhs = rhs + Bi @ y0 / (x - b)
    lhs = (y1 - y0) / (-x)
    return float(np.linalg.norm(lhs - rhs) / (1 + np.linalg.norm(y0)))


def add_mu(t: SystemTuple, mu) -> SystemTuple:
    """Tuple of ``x^mu Y``: ``B_0 -> (1 - q^mu) I + q^mu B_0``, ``B_i -> q^mu B_i``."""
    qm = qpow(t.q, mu)
    mats = [(1 - qm) * t.identity() + qm * t.matrices[0]]
    mats += [qm * B for B in t.matrices[1:]]
    return t.replace(matrices=mats)


def pole_move(t: SystemTuple, i: int, b_new) -> SystemTuple:
    """Move pole ``b_i`` to ``b_new`` via the gauge ``(x/b_new;q)_inf / (x/b_i;q)_inf``."""
    if not (1 <= i <= t.N):
        raise ArgumentError(f"pole index must be in 1..{t.N}, got {i}")
    b_new = complex(b_new)
    b = t.poles[i]
    if b_new == b:
        return t
    if b_new == 0 or any(b_new == p for k, p in enumerate(t.poles) if k != i):
        raise PoleCollisionError(f"new pole {b_new} collides with an existing pole")
    r = b_new / b
    I = t.identity()
    mats = list(t.matrices)
    Bi = (1 - r) * (I - t.matrices[0]) + r * t.matrices[i]
    for j in range(1, t.N + 1):
        if j == i:
            continue
        bj = t.poles[j]
        Bi = Bi - (1 - r) / (1 - bj / b_new) * t.matrices[j]
        mats[j] = (1 - bj / b) / (1 - bj / b_new) * t.matrices[j]
    mats[i] = Bi
    poles = list(t.poles)
    poles[i] = b_new
    return SystemTuple(t.q, poles, mats)


def _row_block_tuple(t: SystemTuple, rows: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Place ``rows[i]`` (shape ``m x (N+1)m``) as block row ``i`` of an otherwise zero matrix."""
    m, n1 = t.m, t.N + 1
    out = []
    for i, row in enumerate(rows):
        G = np.zeros((n1 * m, n1 * m), dtype=complex)
        G[i * m:(i + 1) * m, :] = row
        out.append(G)
    return out


def q_convolution(t: SystemTuple, lam) -> SystemTuple:
    """q-convolution: ``G_i`` has block row ``i`` equal to
    ``(q^-lam B_0, ..., q^-lam B_i + (1 - q^-lam) I, ..., q^-lam B_N)``."""
    c = qpow(t.q, -complex(lam))
    m = t.m
    base = np.hstack([c * B for B in t.matrices])
    rows = []
    for i in range(t.N + 1):
        row = base.copy()
        row[:, i * m:(i + 1) * m] += (1 - c) * np.eye(m)
        rows.append(row)
    return t.replace(matrices=_row_block_tuple(t, rows))


def dr_convolution(t: SystemTuple, lam_dr) -> SystemTuple:
    """Classical convolution: ``F_i`` has block row ``i`` equal to ``(B_0, ..., B_i + lam I, ..., B_N)``."""
    m = t.m
    base = np.hstack(t.matrices)
    rows = []
    for i in range(t.N + 1):
        row = base.copy()
        row[:, i * m:(i + 1) * m] += complex(lam_dr) * np.eye(m)
        rows.append(row)
    return t.replace(matrices=_row_block_tuple(t, rows))


def sy_blocks(t: SystemTuple, lam):
    """Blocks of the appendix convolution: ``(F_inf, [F_1, ..., F_N])``.

    ``F_i`` (``i >= 1``) has block row ``i`` equal to
    ``(B_0, ..., B_i - (1 - q^lam) I, ..., B_N)`` and ``F_inf = I - F_hat`` where
    every block row of ``F_hat`` is ``(B_0, ..., B_N)``.
    """
    ql = qpow(t.q, lam)
    m, n1 = t.m, t.N + 1
    base = np.hstack(t.matrices)
    F_hat = np.vstack([base] * n1)
    F_inf = np.eye(n1 * m, dtype=complex) - F_hat
    Fs = []
    for i in range(1, n1):
        F = np.zeros_like(F_hat)
        F[i * m:(i + 1) * m, :] = base
        F[i * m:(i + 1) * m, i * m:(i + 1) * m] -= (1 - ql) * np.eye(m)
        Fs.append(F)
    return F_inf, Fs


def sy_convolution(t: SystemTuple, lam) -> SystemTuple:
    """Appendix convolution stored in normal form, ``B_0 = I - F_inf - sum F_i``."""
    F_inf, Fs = sy_blocks(t, lam)
    B0 = np.eye(F_inf.shape[0], dtype=complex) - F_inf - sum(Fs, np.zeros_like(F_inf))
    return t.replace(matrices=[B0] + Fs)


def _scale(t: SystemTuple) -> float:
    """Largest matrix norm in the tuple (at least 1)."""
    return max([1.0] + [float(np.linalg.norm(B, 2)) for B in t.matrices])


def _block_kernels(t: SystemTuple, tol: TolerancePolicy) -> Subspace:
    """``ker B_0 + ... + ker B_N`` placed blockwise in ``C^{(N+1)m}``."""
    m, n1 = t.m, t.N + 1
    scale = _scale(t)
    cols = []
    for i, B in enumerate(t.matrices):
        k = linalg.kernel(B, tol, scale=scale)
        E = np.zeros((n1 * m, k.dim), dtype=complex)
        E[i * m:(i + 1) * m, :] = k.basis
        cols.append(E)
    return linalg.span(np.hstack(cols), tol, ambient_dim=n1 * m)


def kl_spaces(t_conv: SystemTuple, original: SystemTuple,
              tol: TolerancePolicy = DEFAULT_TOL) -> tuple[Subspace, Subspace]:
    """Blockwise kernels of the original matrices and the kernel of ``sum G_i``."""
    m, n1 = original.m, original.N + 1
    if t_conv.m != n1 * m or t_conv.N != original.N:
        raise DimensionError("convolved tuple does not match the original")
    K = _block_kernels(original, tol)
    L = linalg.kernel(t_conv.total(), tol, scale=_scale(t_conv))
    return K, L


def sy_l_space(t: SystemTuple, lam, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """``ker(F_hat - (1 - q^lam) I)`` for the appendix convolution."""
    F_inf, _ = sy_blocks(t, lam)
    n = F_inf.shape[0]
    F_hat = np.eye(n) - F_inf
    M = F_hat - (1 - qpow(t.q, lam)) * np.eye(n)
    return linalg.kernel(M, tol, scale=max(1.0, float(np.linalg.norm(F_hat, 2))))


@dataclass(frozen=True, eq=False)
class MCResult:
    reduced: SystemTuple
    K_space: Subspace
    L_space: Subspace
    proj: np.ndarray
    lift: np.ndarray
    conv: SystemTuple
    lam: complex

    @property
    def W(self) -> Subspace:
        return linalg.subspace_sum(self.K_space, self.L_space)

    def dims(self) -> dict:
        return {"K": self.K_space.dim, "L": self.L_space.dim,
                "K+L": self.W.dim, "quotient": self.reduced.m}


def _quotient(conv: SystemTuple, K: Subspace, L: Subspace, tol: TolerancePolicy):
    W = linalg.subspace_sum(K, L, tol)
    mats, proj, lift = linalg.quotient_actions(conv.matrices, W, tol)
    return conv.replace(matrices=mats), proj, lift


def middle_convolution(t: SystemTuple, lam, tol: TolerancePolicy = DEFAULT_TOL) -> MCResult:
    """q-middle convolution: the q-convolution acting on ``C^{(N+1)m} / (K + L)``."""
    conv = q_convolution(t, lam)
    K, L = kl_spaces(conv, t, tol)
    reduced, proj, lift = _quotient(conv, K, L, tol)
    return MCResult(reduced, K, L, proj, lift, conv, complex(lam))


def sy_middle_convolution(t: SystemTuple, lam, tol: TolerancePolicy = DEFAULT_TOL) -> MCResult:
    """Appendix middle convolution: the appendix convolution modulo ``K + L``."""
    conv = sy_convolution(t, lam)
    K = _block_kernels(t, tol)
    L = sy_l_space(t, lam, tol)
    reduced, proj, lift = _quotient(conv, K, L, tol)
    return MCResult(reduced, K, L, proj, lift, conv, complex(lam))


def psi_shift(t: SystemTuple, mu) -> SystemTuple:
    """``F_inf -> F_inf + (1 - q^mu) I`` with the finite blocks fixed.

    In normal form this is ``B_0 -> B_0 - (1 - q^mu) I``.
    """
    qm = qpow(t.q, mu)
    mats = list(t.matrices)
    mats[0] = mats[0] - (1 - qm) * t.identity()
    return t.replace(matrices=mats)


def rebase(res: MCResult, Q) -> MCResult:
    """Express a middle-convolution result in the quotient coordinates ``Q``.

    ``Q`` is a ``d x n`` matrix whose kernel is ``K + L``; the returned tuple is
    ``T G T^{-1}`` with ``T = Q @ lift``, and ``proj``/``lift`` are updated to match.
    """
    Q = np.asarray(Q, dtype=complex)
    d = res.reduced.m
    if Q.shape != (d, res.conv.m):
        raise DimensionError(f"quotient coordinates must have shape {(d, res.conv.m)}")
    W = res.W
    if W.dim and np.linalg.norm(Q @ W.basis) > 1e-8 * max(1.0, np.linalg.norm(Q)):
        raise ArgumentError("quotient coordinates do not vanish on K + L")
    T = Q @ res.lift
    Ti = np.linalg.inv(T)
    mats = [T @ G @ Ti for G in res.reduced.matrices]
    return MCResult(res.reduced.replace(matrices=mats), res.K_space, res.L_space,
                    T @ res.proj, res.lift @ Ti, res.conv, res.lam)
