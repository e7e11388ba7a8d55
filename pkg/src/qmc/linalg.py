"""Dense complex linear algebra with an explicit tolerance policy.

Every rank decision in the package goes through this module, so that the
thresholds used for kernels, eigenvalue clusters and quotient spaces are
visible in one place.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, NonGenericSpectrum, NotInvariantError

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "Subspace",
    "EigenCluster",
    "as_matrix",
    "numerical_rank",
    "kernel",
    "image",
    "span",
    "subspace_sum",
    "intersection",
    "complement",
    "eigen_clusters",
    "quotient_action",
    "quotient_actions",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Thresholds used by rank, clustering and residual tests."""

    rank_rel_tol: float = 1e-9
    eig_cluster_tol: float = 1e-7
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel_tol", "eig_cluster_tol", "residual_tol"):
            value = getattr(self, name)
            if not (0 < value < 1):
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")

    @classmethod
    def from_env(cls, base: "TolerancePolicy | None" = None) -> "TolerancePolicy":
        """``base`` (default policy if omitted) with ``residual_tol`` taken from ``QMC_TOL`` when set."""
        base = cls() if base is None else base
        raw = os.environ.get("QMC_TOL")
        if raw is None or not raw.strip():
            return base
        return replace(base, residual_tol=float(raw))


DEFAULT_TOL = TolerancePolicy()


def as_matrix(M, square: bool = False) -> np.ndarray:
    """Return ``M`` as a finite 2-d complex array."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^n given by an orthonormal basis (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim != 2:
            raise DimensionError("basis must be a 2-d array")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n, dtype=complex))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def contains(self, v, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
        v = np.asarray(v, dtype=complex)
        r = v - self.projector() @ v
        return np.linalg.norm(r) <= tol.rank_rel_tol * max(np.linalg.norm(v), 1e-300) * 10

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _svd_threshold(s: np.ndarray, tol: TolerancePolicy, scale: float = 0.0) -> float:
    return tol.rank_rel_tol * max(s[0] if s.size else 0.0, scale)


def numerical_rank(M, tol: TolerancePolicy = DEFAULT_TOL, scale: float = 0.0) -> int:
    """Number of singular values above ``rank_rel_tol * max(sigma_max, scale)``."""
    A = as_matrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > _svd_threshold(s, tol, scale)))


def kernel(M, tol: TolerancePolicy = DEFAULT_TOL, scale: float = 0.0) -> Subspace:
    """Orthonormal basis of the numerical kernel of ``M``.

    The rank is the number of singular values above ``rank_rel_tol`` times
    the larger of the top singular value and ``scale``, so the zero matrix
    has the whole space as kernel.  Pass the size of the surrounding tuple as
    ``scale`` so that a member which is zero up to rounding counts as zero.
    """
    A = as_matrix(M)
    n = A.shape[1]
    if A.shape[0] == 0 or n == 0:
        return Subspace(np.eye(n, dtype=complex))
    _, s, Vh = np.linalg.svd(A)
    if s[0] == 0:
        return Subspace.full(n)
    r = int(np.sum(s > _svd_threshold(s, tol, scale)))
    return Subspace(Vh[r:].conj().T)


def span(vectors, tol: TolerancePolicy = DEFAULT_TOL, ambient_dim: int | None = None) -> Subspace:
    """Orthonormal basis for the column span of ``vectors``."""
    A = np.asarray(vectors, dtype=complex)
    if A.ndim == 1:
        A = A[:, None]
    n = A.shape[0] if ambient_dim is None else ambient_dim
    if A.size == 0:
        return Subspace.zero(n)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0:
        return Subspace.zero(n)
    r = int(np.sum(s > _svd_threshold(s, tol)))
    return Subspace(U[:, :r])


def image(M, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    return span(as_matrix(M), tol)


def subspace_sum(A: Subspace, B: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    if A.ambient_dim != B.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}")
    return span(np.hstack([A.basis, B.basis]), tol, ambient_dim=A.ambient_dim)


def intersection(A: Subspace, B: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces, from the kernel of ``[A, -B]``."""
    if A.ambient_dim != B.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}")
    n = A.ambient_dim
    if A.dim == 0 or B.dim == 0:
        return Subspace.zero(n)
    K = kernel(np.hstack([A.basis, -B.basis]), tol)
    if K.dim == 0:
        return Subspace.zero(n)
    return span(A.basis @ K.basis[: A.dim], tol, ambient_dim=n)


def complement(W: Subspace) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``W``."""
    n, d = W.ambient_dim, W.dim
    if d == 0:
        return np.eye(n, dtype=complex)
    U, _, _ = np.linalg.svd(W.basis, full_matrices=True)
    return U[:, d:]


class EigenCluster(NamedTuple):
    eigenvalue: complex
    multiplicity: int
    partition: list


def _rank_abs(A: np.ndarray, threshold: float) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > threshold))


def eigen_clusters(M, tol: TolerancePolicy = DEFAULT_TOL) -> list[EigenCluster]:
    """Cluster the eigenvalues of ``M`` and read Jordan partitions off rank chains.

    Eigenvalues closer than ``eig_cluster_tol`` (scaled by ``max(1, |M|)``)
    are merged by single linkage; the cluster value is the member mean.
    For each cluster the ranks of ``(M - lam I)^k`` give the number of
    Jordan blocks of size at least ``k``.  Clusters whose separation falls
    under ten times the tolerance trigger a ``NonGenericSpectrum`` warning.
    """
    A = as_matrix(M, square=True)
    n = A.shape[0]
    if n == 0:
        return []
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    ctol = tol.eig_cluster_tol * scale
    ev = np.linalg.eigvals(A)

    # single-linkage clustering via union-find over pairwise distances
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(ev[i] - ev[j]) <= ctol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    centers = [(complex(np.mean(ev[idx])), len(idx)) for idx in groups.values()]
    centers.sort(key=lambda c: (-c[1], c[0].real, c[0].imag))

    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            if abs(centers[a][0] - centers[b][0]) < 10 * ctol:
                warnings.warn(
                    f"eigenvalue clusters {centers[a][0]:.3g} and {centers[b][0]:.3g} "
                    "are barely separated", NonGenericSpectrum, stacklevel=2)

    out = []
    eye = np.eye(n, dtype=complex)
    for lam, mult in centers:
        S = A - lam * eye
        ranks = [n]
        P = eye
        for k in range(1, mult + 1):
            P = P @ S
            ranks.append(_rank_abs(P, tol.rank_rel_tol * scale**k))
            if ranks[-1] == n - mult:
                break
        at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
        partition = []
        for k in range(len(at_least)):
            nxt = at_least[k + 1] if k + 1 < len(at_least) else 0
            partition += [k + 1] * max(at_least[k] - nxt, 0)
        partition.sort(reverse=True)
        if sum(partition) != mult:
            # rank chain inconsistent with the cluster size: fall back to a
            # semisimple reading and flag it
            warnings.warn(f"rank chain at {lam:.3g} does not match multiplicity",
                          NonGenericSpectrum, stacklevel=2)
            partition = [1] * mult
        out.append(EigenCluster(lam, mult, partition))
    return out


def _check_invariant(M: np.ndarray, W: Subspace, tol: TolerancePolicy, label=""):
    if W.dim == 0:
        return
    norm = np.linalg.norm(M, 2)
    if norm == 0:
        return
    R = M @ W.basis
    R = R - W.basis @ (W.basis.conj().T @ R)
    err = np.linalg.norm(R, 2)
    if err > tol.residual_tol * norm:
        raise NotInvariantError(
            f"subspace of dim {W.dim} is not invariant{label}: "
            f"residual {err:.3e} vs scale {norm:.3e}")


def quotient_action(M, W: Subspace, tol: TolerancePolicy = DEFAULT_TOL):
    """Induced action of ``M`` on ``C^n / W``.

    Returns ``(Mbar, proj, lift)`` with ``proj = C^H`` and ``lift = C`` for an
    orthonormal basis ``C`` of the orthogonal complement of ``W``, so that
    ``proj @ M == Mbar @ proj``.
    """
    Mbars, proj, lift = quotient_actions([M], W, tol)
    return Mbars[0], proj, lift


def quotient_actions(Ms: Sequence, W: Subspace, tol: TolerancePolicy = DEFAULT_TOL):
    """Simultaneous version of :func:`quotient_action` for a list of matrices."""
    mats = [as_matrix(M, square=True) for M in Ms]
    for k, M in enumerate(mats):
        if M.shape[0] != W.ambient_dim:
            raise DimensionError(
                f"matrix size {M.shape[0]} does not match subspace ambient {W.ambient_dim}")
        _check_invariant(M, W, tol, label=f" under matrix {k}")
    C = complement(W)
    proj = C.conj().T
    return [proj @ M @ C for M in mats], proj, C
