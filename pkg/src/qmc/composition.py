"""Nondegeneracy conditions, composition of q-middle convolutions and additivity.

Conditions ``(*)`` and ``(**)`` quantify over every ``tau``; a violation of
``(*)`` at index ``i`` is an eigenvector of ``B_i`` inside
``W_i = cap_{i' != i} ker B_{i'}``.  Such a vector exists exactly when the
largest ``B_i``-invariant subspace contained in ``W_i`` is nonzero, which is
what :func:`check_star` computes.  ``(**)`` is the same test for the
conjugate transposes.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from . import system as sysm
from .errors import ArgumentError, IsomorphismFailure, StarViolation
from .linalg import DEFAULT_TOL, Subspace, TolerancePolicy
from .qseries import qpow
from .system import MCResult, SystemTuple

__all__ = [
    "StarReport",
    "check_star",
    "check_doublestar",
    "star_report",
    "compose_convolutions",
    "dr_scaling_residual",
    "dr_double_scaling_residual",
    "find_intertwiner",
    "phi_map",
    "AdditivityReport",
    "additivity_check",
    "sy_composite_parameter",
    "sy_psi",
    "sy_additivity_check",
    "invariant_subspace_search",
]


@dataclass
class StarReport:
    star: bool
    doublestar: bool
    witnesses: dict = field(default_factory=dict)

    def __bool__(self):
        return self.star and self.doublestar


def _largest_invariant_in(B: np.ndarray, W: Subspace, tol: TolerancePolicy,
                          scale: float) -> Subspace:
    """Largest subspace ``S`` of ``W`` with ``B S`` contained in ``S``."""
    S = W
    while S.dim:
        # keep the v in S whose image stays in S
        R = B @ S.basis
        R = R - S.basis @ (S.basis.conj().T @ R)
        k = linalg.kernel(R, tol, scale=scale)
        if k.dim == S.dim:
            return S
        S = linalg.span(S.basis @ k.basis, tol, ambient_dim=W.ambient_dim) if k.dim \
            else Subspace.zero(W.ambient_dim)
    return S


def _star_witness(mats, tol: TolerancePolicy):
    """``(index, vector)`` of a violation of ``(*)`` for ``mats``, or ``None``."""
    m = mats[0].shape[0]
    scale = max([1.0] + [float(np.linalg.norm(B, 2)) for B in mats])
    kernels = [linalg.kernel(B, tol, scale=scale) for B in mats]
    for i, Bi in enumerate(mats):
        W = Subspace.full(m)
        for j, k in enumerate(kernels):
            if j != i:
                W = linalg.intersection(W, k, tol)
        if W.dim == 0:
            continue
        S = _largest_invariant_in(Bi, W, tol, scale)
        if S.dim:
            # an eigenvector of B_i restricted to S
            A = S.basis.conj().T @ Bi @ S.basis
            _, V = np.linalg.eig(A)
            v = S.basis @ V[:, 0]
            return i, v / np.linalg.norm(v)
    return None


def check_star(t: SystemTuple, tol: TolerancePolicy = DEFAULT_TOL):
    """``(holds, witness)`` for condition ``(*)``; the witness is ``(i, v)`` or ``None``."""
    w = _star_witness(list(t.matrices), tol)
    return w is None, w


def check_doublestar(t: SystemTuple, tol: TolerancePolicy = DEFAULT_TOL):
    """``(holds, witness)`` for ``(**)``; the witness is a left eigenvector ``u``
    of ``B_i`` with ``u^H B_{i'} = 0`` for every ``i' != i``."""
    w = _star_witness([B.conj().T for B in t.matrices], tol)
    return w is None, w


def star_report(t: SystemTuple, tol: TolerancePolicy = DEFAULT_TOL) -> StarReport:
    s, ws = check_star(t, tol)
    d, wd = check_doublestar(t, tol)
    witnesses = {}
    if ws is not None:
        witnesses["star"] = ws
    if wd is not None:
        witnesses["doublestar"] = wd
    return StarReport(s, d, witnesses)


def compose_convolutions(t: SystemTuple, l1, l2) -> SystemTuple:
    """``c_{l2}(c_{l1}(t))``, a tuple of size ``(N+1)^2 m``."""
    return sysm.q_convolution(sysm.q_convolution(t, l1), l2)


def dr_scaling_residual(t: SystemTuple, lam) -> float:
    """``max |G^q_j(lam) - q^-lam G_j(q^lam - 1)|`` over all entries."""
    ql = qpow(t.q, lam)
    Gq = sysm.q_convolution(t, lam).matrices
    Gd = sysm.dr_convolution(t, ql - 1).matrices
    return max(float(np.max(np.abs(A - B / ql))) for A, B in zip(Gq, Gd))


def dr_double_scaling_residual(t: SystemTuple, l1, l2) -> float:
    """Entrywise gap between the double q-convolution and the scaled double
    classical convolution with parameters ``q^l1 - 1`` and ``q^{l1+l2} - q^l1``."""
    q1, q12 = qpow(t.q, l1), qpow(t.q, complex(l1) + complex(l2))
    Gq = compose_convolutions(t, l1, l2).matrices
    Gd = sysm.dr_convolution(sysm.dr_convolution(t, q1 - 1), q12 - q1).matrices
    return max(float(np.max(np.abs(A - B / q12))) for A, B in zip(Gq, Gd))


def find_intertwiner(A: SystemTuple, B: SystemTuple, tol: TolerancePolicy = DEFAULT_TOL,
                     seed: int = 0):
    """Solve ``X A_j = B_j X`` for all ``j``.

    Returns ``(X, residual, nullity)``.  ``X`` is a random combination of a
    basis of solutions (``None`` when the only solution is zero), the
    residual is relative to ``|X|`` and the tuple sizes.
    """
    if A.N != B.N:
        raise ArgumentError("tuples have different numbers of poles")
    m, n = A.m, B.m
    if m != n:
        return None, float("inf"), 0
    I = np.eye(m)
    # vec(X A - B X) = (A^T kron I - I kron B) vec(X), column-major vec
    rows = [np.kron(Aj.T, I) - np.kron(I, Bj) for Aj, Bj in zip(A.matrices, B.matrices)]
    M = np.vstack(rows)
    scale = max(sysm._scale(A), sysm._scale(B))
    k = linalg.kernel(M, tol, scale=scale)
    if k.dim == 0:
        return None, float("inf"), 0
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(k.dim) + 1j * rng.standard_normal(k.dim)
    X = (k.basis @ c).reshape((m, m), order="F")
    X = X / np.linalg.norm(X, 2)
    res = max(float(np.linalg.norm(X @ Aj - Bj @ X, 2)) for Aj, Bj in zip(A.matrices, B.matrices))
    return X, res / scale, k.dim


def phi_map(t: SystemTuple, l1, first: MCResult, second: MCResult,
            target: MCResult) -> tuple[np.ndarray, float]:
    """Matrix of the induced map from ``mc_{l2}(mc_{l1}(V))`` to ``mc_{l1+l2}(V)``.

    A class in the double quotient is lifted to ``M^{N+1}`` with ``M`` the
    first quotient, each block is lifted to ``V^{N+1}``, and
    ``phi(v) = sum_j G^q_j(l1) v_j`` is projected onto the target quotient.
    Returns the matrix and the size of ``phi`` on ``K_M + L_M`` (which must
    vanish for the map to be well defined).
    """
    G1 = sysm.q_convolution(t, l1).matrices
    d1 = first.reduced.m
    blocks = [target.proj @ G @ first.lift for G in G1]
    Phi = np.hstack(blocks)
    if Phi.shape[1] != (t.N + 1) * d1:
        raise ArgumentError("first quotient does not match the second convolution")
    W = second.W
    leak = float(np.linalg.norm(Phi @ W.basis, 2)) if W.dim else 0.0
    return Phi @ second.lift, leak


@dataclass
class AdditivityReport:
    l1: complex
    l2: complex
    stars: StarReport
    dims: dict
    route: str
    max_residual: float
    invertible: bool
    condition: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.stars) and self.invertible and self.dims["composite"] == self.dims["direct"]


def _intertwining_residuals(Phi, A: SystemTuple, B: SystemTuple) -> list[float]:
    nP = max(float(np.linalg.norm(Phi, 2)), 1e-300)
    scale = max(sysm._scale(A), sysm._scale(B))
    return [float(np.linalg.norm(Phi @ Aj - Bj @ Phi, 2)) / (nP * scale)
            for Aj, Bj in zip(A.matrices, B.matrices)]


def additivity_check(t: SystemTuple, l1, l2, tol: TolerancePolicy = DEFAULT_TOL) -> AdditivityReport:
    """Compare ``mc_{l2}(mc_{l1}(t))`` with ``mc_{l1+l2}(t)``.

    With ``l1 != 0 != l2`` the explicit map ``phi`` is checked for
    invertibility and intertwining.  Otherwise the isomorphism is established
    from matching dimensions and spectral types together with a solved
    intertwiner.  When ``l1 + l2 = 0`` the composite is also compared with
    ``t`` itself.
    """
    from . import spectral

    l1, l2 = complex(l1), complex(l2)
    stars = star_report(t, tol)
    if not stars:
        raise StarViolation(f"tuple violates {'(*)' if not stars.star else '(**)'}", stars)
    first = sysm.middle_convolution(t, l1, tol)
    second = sysm.middle_convolution(first.reduced, l2, tol)
    direct = sysm.middle_convolution(t, l1 + l2, tol)
    A, B = second.reduced, direct.reduced
    dims = {"first": first.reduced.m, "composite": A.m, "direct": B.m, "original": t.m}
    details: dict = {"first": first.dims(), "second": second.dims(), "direct": direct.dims()}
    if A.m != B.m:
        raise IsomorphismFailure(f"composite has dimension {A.m}, direct has {B.m}")

    if l1 != 0 and l2 != 0:
        route = "phi"
        Phi, leak = phi_map(t, l1, first, second, direct)
        details["phi_leak"] = leak
        if leak > tol.residual_tol * max(1.0, float(np.linalg.norm(Phi, 2))):
            raise IsomorphismFailure(f"phi does not vanish on K + L (size {leak:.3e})")
    else:
        route = "solved"
        sa, sb = spectral.spectral_type(A, tol), spectral.spectral_type(B, tol)
        details["spectral_types"] = (sa.rendered, sb.rendered)
        if sa.rendered != sb.rendered:
            raise IsomorphismFailure(f"spectral types differ: {sa.rendered} vs {sb.rendered}")
        Phi, res, nullity = find_intertwiner(A, B, tol)
        details["nullity"] = nullity
        if Phi is None:
            raise IsomorphismFailure("no nonzero intertwiner exists")

    resid = _intertwining_residuals(Phi, A, B) if A.m else [0.0]
    if A.m:
        s = np.linalg.svd(Phi, compute_uv=False)
        cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    else:
        cond = 1.0
    invertible = cond < 1.0 / tol.rank_rel_tol
    for j, r in enumerate(resid):
        if r > tol.residual_tol:
            raise IsomorphismFailure(f"intertwining fails at index {j}: residual {r:.3e}",
                                     index=j, residual=r)
    if not invertible:
        raise IsomorphismFailure(f"induced map is singular (condition {cond:.3e})")

    if l1 + l2 == 0:
        X, res, _ = find_intertwiner(A, t, tol)
        details["inverse_residual"] = res
        if X is None or res > tol.residual_tol:
            raise IsomorphismFailure("composite of opposite parameters is not isomorphic "
                                     "to the original tuple")
        details["inverse_condition"] = float(np.linalg.cond(X))
    return AdditivityReport(l1, l2, stars, dims, route, float(max(resid)), invertible, cond,
                            details)


# ---------------------------------------------------------------------------
# appendix convolution


def sy_composite_parameter(q, lam, mu) -> complex:
    """``log(q^lam + q^mu - 1) / log q`` on the principal branch."""
    q = complex(q)
    return cmath.log(qpow(q, lam) + qpow(q, mu) - 1) / cmath.log(q)


def sy_psi(t: SystemTuple, lam, tol: TolerancePolicy = DEFAULT_TOL) -> SystemTuple:
    """``psi_lam`` after the appendix middle convolution."""
    return sysm.psi_shift(sysm.sy_middle_convolution(t, lam, tol).reduced, lam)


def _f_inf_trace(t: SystemTuple) -> complex:
    return complex(np.trace(t.identity() - t.total()))


def sy_additivity_check(t: SystemTuple, lam, mu, tol: TolerancePolicy = DEFAULT_TOL) -> dict:
    """Check ``Psi_mu(Psi_lam(t)) ~ Psi_nu(t)`` with ``q^nu = q^lam + q^mu - 1``.

    The composite parameter is recovered from the composite tuple alone: the
    trace of the infinity matrix of ``Psi_nu(t)`` is affine in ``q^nu`` (two
    evaluations fix the line), and solving it against the composite's trace
    gives ``q^nu``.  Isomorphism is then checked with a solved intertwiner.
    """
    stars = star_report(t, tol)
    if not stars:
        raise StarViolation("tuple violates (*) or (**)", stars)
    q = t.q
    comp = sy_psi(sy_psi(t, lam, tol), mu, tol)
    nu = sy_composite_parameter(q, lam, mu)
    direct = sy_psi(t, nu, tol)
    if comp.m != direct.m:
        raise IsomorphismFailure(f"composite has dimension {comp.m}, direct has {direct.m}")

    # trace of F_inf(Psi_z) as an affine function of z = q^nu
    z1, z2 = qpow(q, 0.31), qpow(q, 0.77)
    f1 = _f_inf_trace(sy_psi(t, 0.31, tol))
    f2 = _f_inf_trace(sy_psi(t, 0.77, tol))
    slope = (f2 - f1) / (z2 - z1)
    z_star = z1 + (_f_inf_trace(comp) - f1) / slope
    nu_star = cmath.log(z_star) / cmath.log(q)
    z_formula = qpow(q, lam) + qpow(q, mu) - 1
    X, res, nullity = find_intertwiner(comp, direct, tol)
    cond = float(np.linalg.cond(X)) if X is not None else float("inf")
    return {"lam": complex(lam), "mu": complex(mu), "nu_formula": nu, "nu_recovered": nu_star,
            "parameter_error": abs(z_star - z_formula) / abs(z_formula),
            "nu_error": abs(nu_star - nu),
            "dims": {"composite": comp.m, "direct": direct.m},
            "intertwining_residual": res, "condition": cond, "nullity": nullity,
            "pass": X is not None and res <= tol.residual_tol and cond < 1 / tol.rank_rel_tol}


# ---------------------------------------------------------------------------
# irreducibility heuristic


def invariant_subspace_search(t: SystemTuple, tol: TolerancePolicy = DEFAULT_TOL,
                              trials: int = 3, seed: int = 0) -> dict:
    """Look for a common invariant subspace of the matrices of ``t``.

    A proper invariant subspace contains an eigenvector of every generic
    combination ``sum c_j B_j``, so the closure of each such eigenvector under
    the tuple is computed; a closure of dimension below ``m`` is reported.
    The same is done for the conjugate transposes (invariant complements).
    The search is heuristic: coinciding eigenvalues of the combination can
    hide a subspace.
    """
    m = t.m
    rng = np.random.default_rng(seed)
    mats = list(t.matrices)

    def closure(v, ms):
        S = linalg.span(v, tol, ambient_dim=m)
        while True:
            grown = linalg.span(np.hstack([S.basis] + [B @ S.basis for B in ms]), tol,
                                ambient_dim=m)
            if grown.dim == S.dim:
                return S
            S = grown

    for side, ms in (("right", mats), ("left", [B.conj().T for B in mats])):
        for _ in range(trials):
            c = rng.standard_normal(len(ms)) + 1j * rng.standard_normal(len(ms))
            C = sum(ck * B for ck, B in zip(c, ms))
            _, V = np.linalg.eig(C)
            for k in range(m):
                S = closure(V[:, k], ms)
                if 0 < S.dim < m:
                    return {"found": True, "side": side, "dim": S.dim, "basis": S.basis,
                            "message": f"invariant subspace of dimension {S.dim} found"}
    return {"found": False, "side": None, "dim": None, "basis": None,
            "message": f"no invariant subspace found up to dimension {m - 1}"}
