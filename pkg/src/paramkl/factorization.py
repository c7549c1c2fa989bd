"""Factorizations ``C = B^T B`` of a correlation and the representations they induce.

Any two factors of the same correlation differ by an isometry on the relevant
range, and each factor carries the eigenvector system of ``C`` over to an
eigenvector system of ``B B^T`` with the same nonzero spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from ._linalg import PSD_TOL, RANK_CUTOFF, check_psd, numerical_rank, sym_eigh, symmetrize
from .core import CorrelationMatrix, SnapshotSet
from .spectral import SpectralData


class FactorKind(str, Enum):
    canonical_R = "canonical_R"
    cholesky = "cholesky"
    square_root = "square_root"
    user = "user"


@dataclass(frozen=True)
class Factor:
    """``matrix`` is H_dim x N with ``matrix.T @ matrix == C``."""

    matrix: np.ndarray
    kind: FactorKind = FactorKind.user

    def __post_init__(self):
        b = np.asarray(self.matrix, dtype=float)
        if b.ndim != 2:
            raise ValueError("factor must be a matrix")
        b.setflags(write=False)
        object.__setattr__(self, "matrix", b)
        object.__setattr__(self, "kind", FactorKind(self.kind))

    @property
    def codomain_dim(self):
        return self.matrix.shape[0]

    @property
    def correlation(self):
        return symmetrize(self.matrix.T @ self.matrix)

    def check(self, c: CorrelationMatrix, rtol=1e-10):
        """Raise unless ``B^T B`` reproduces ``c`` and the ranks agree."""
        c = np.asarray(getattr(c, "entries", c))
        err = np.linalg.norm(self.correlation - c) / max(np.linalg.norm(c), np.finfo(float).tiny)
        if err > rtol:
            raise ValueError(f"factor does not reproduce the correlation (rel. error {err:.3e})")
        rc = numerical_rank(np.linalg.eigvalsh(c))
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        rb = numerical_rank(sv ** 2)
        if rb != rc:
            raise ValueError(f"factor rank {rb} differs from correlation rank {rc}")


@dataclass(frozen=True)
class UnitaryMap:
    """``matrix`` maps the codomain of one factor to that of another."""

    matrix: np.ndarray
    domain_rank: int
    range_projector: np.ndarray

    def isometry_defect(self):
        """``||(X^T X - I) P||`` with ``P`` the projector onto range(B1)."""
        x, p = self.matrix, self.range_projector
        return float(np.linalg.norm((x.T @ x - np.eye(x.shape[1])) @ p, 2))


def canonical_factor(s: SnapshotSet) -> Factor:
    """The associated map itself in matrix form, ``B = W^1/2 U^T`` (M x N)."""
    return Factor(np.sqrt(s.weights)[:, None] * s.values.T, FactorKind.canonical_R)


def _entries(c):
    if isinstance(c, CorrelationMatrix):
        return c.entries
    return CorrelationMatrix(c).entries


def pivoted_cholesky(a, rank=None, tol=RANK_CUTOFF):
    """Diagonally pivoted outer-product Cholesky of a PSD matrix.

    Returns ``(L, piv)`` with ``a[piv][:, piv] ~= L @ L.T`` and ``L`` of shape
    ``n x k``. Stops after ``rank`` steps, or once the largest remaining
    diagonal drops to ``tol`` times the largest initial diagonal.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    piv = np.arange(n)
    limit = n if rank is None else rank
    diag0 = np.max(np.diag(a), initial=0.0)
    L = np.zeros((n, n))
    for k in range(limit):
        d = np.diag(a)[k:]
        j = k + int(np.argmax(d))
        if d.max() <= tol * diag0 or d.max() <= 0:
            return L[:, :k], piv
        if j != k:
            a[[k, j], :] = a[[j, k], :]
            a[:, [k, j]] = a[:, [j, k]]
            L[[k, j], :] = L[[j, k], :]
            piv[[k, j]] = piv[[j, k]]
        L[k, k] = np.sqrt(a[k, k])
        L[k + 1:, k] = a[k + 1:, k] / L[k, k]
        a[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], L[k + 1:, k])
    return L[:, :limit], piv


def cholesky_factor(c) -> Factor:
    """Upper-triangular ``B = L^T`` with ``B^T B = C``.

    A rank-deficient ``C`` is factored by pivoted Cholesky into an r x N
    factor (upper trapezoidal up to the column permutation).
    """
    c = _entries(c)
    lam = np.linalg.eigvalsh(c)
    check_psd(lam, PSD_TOL, "correlation")
    r = numerical_rank(lam)
    n = c.shape[0]
    if r == n:
        try:
            return Factor(scipy.linalg.cholesky(c, lower=False), FactorKind.cholesky)
        except np.linalg.LinAlgError:
            pass
    L, piv = pivoted_cholesky(c, rank=r)
    b = np.zeros((L.shape[1], n))
    b[:, piv] = L.T
    return Factor(b, FactorKind.cholesky)


def square_root_factor(c) -> Factor:
    """The unique symmetric PSD square root ``C^1/2 = V sqrt(Lambda) V^T``."""
    c = _entries(c)
    lam, v = sym_eigh(c)
    check_psd(lam, PSD_TOL, "correlation")
    # eigenvalues below the rank cutoff are roundoff; their square roots would
    # not be (sqrt(1e-16) ~ 1e-8), so they are dropped rather than clipped
    lam = np.where(np.arange(lam.size) < numerical_rank(lam), lam, 0.0)
    return Factor(symmetrize((v * np.sqrt(lam)) @ v.T), FactorKind.square_root)


def _thin_svd(b, cutoff=RANK_CUTOFF):
    u, sig, vt = np.linalg.svd(b, full_matrices=False)
    r = numerical_rank(sig ** 2, cutoff)
    return u[:, :r], sig[:r], vt[:r]


def unitary_equivalence(b1: Factor, b2: Factor, rtol: float = 1e-8) -> UnitaryMap:
    """Isometry ``X`` with ``B2 = X B1`` on the range of ``B1``.

    With ``B1 = U1 S V^T`` the right singular vectors are shared by ``B2``, so
    ``X = (B2 V S^-1) U1^T``.
    """
    m1, m2 = b1.matrix, b2.matrix
    if m1.shape[1] != m2.shape[1]:
        raise ValueError(f"factors act on spaces of different dimension: {m1.shape[1]} != {m2.shape[1]}")
    c1, c2 = b1.correlation, b2.correlation
    diff = np.linalg.norm(c1 - c2)
    scale = max(np.linalg.norm(c1), np.finfo(float).tiny)
    if diff > rtol * scale:
        raise ValueError(
            f"factors belong to different correlations: Frobenius discrepancy {diff:.3e} "
            f"(relative {diff / scale:.3e})"
        )
    u1, sig, vt = _thin_svd(m1)
    u2 = (m2 @ vt.T) / sig
    x = u2 @ u1.T
    return UnitaryMap(x, sig.size, u1 @ u1.T)


def _check_pair(b: Factor, sd: SpectralData, rtol=1e-8):
    if b.matrix.shape[1] != sd.spatial_modes.shape[0]:
        raise ValueError("factor and spectral data act on spaces of different dimension")
    c_sd = (sd.spatial_modes * sd.eigenvalues) @ sd.spatial_modes.T
    c_b = b.correlation
    diff = np.linalg.norm(c_b - c_sd)
    scale = max(np.linalg.norm(c_b), np.linalg.norm(c_sd), np.finfo(float).tiny)
    if diff > rtol * scale:
        raise ValueError(f"factor does not match the spectrum (relative discrepancy {diff / scale:.3e})")


def cons_transport(b: Factor, sd: SpectralData) -> np.ndarray:
    """Carry the eigenvectors of ``C`` into the factor's codomain.

    ``h_m = B C^{+1/2} v_m = B v_m / sqrt(lambda_m)``; the columns are
    orthonormal eigenvectors of ``B B^T`` for the eigenvalues ``lambda_m``.
    """
    _check_pair(b, sd)
    return (b.matrix @ sd.spatial_modes) / sd.singular_values


@dataclass(frozen=True)
class FactorRepresentation:
    """KL table ``r(a) = sum_m sigma_m h_m(a) v_m`` indexed by the codomain of a factor."""

    singular_values: np.ndarray
    h_modes: np.ndarray
    spatial_modes: np.ndarray
    kind: FactorKind

    def realizations(self):
        """N x H_dim matrix whose column ``a`` is ``r(a)``."""
        return (self.spatial_modes * self.singular_values) @ self.h_modes.T

    def subspace_angles(self, s: SnapshotSet):
        """Principal angles between span(realizations) and span(snapshots)."""
        return scipy.linalg.subspace_angles(_range_basis(self.realizations()),
                                            _range_basis(s.values))


def _range_basis(a):
    u, _, _ = _thin_svd(a)
    return u


def represent_from_factor(b: Factor, sd: SpectralData) -> FactorRepresentation:
    h = cons_transport(b, sd)
    return FactorRepresentation(sd.singular_values.copy(), h, sd.spatial_modes.copy(), b.kind)

