"""Karhunen-Loeve / POD analysis of a snapshot set.

The SVD triplet ``(lambda_m, v_m, s_m)`` of the associated map gives

    r(p_j) = sum_m sqrt(lambda_m) * s_m(p_j) * v_m

with ``{v_m}`` orthonormal in ``U`` and ``{s_m}`` orthonormal in the weighted
grid inner product. Truncating the series after ``n`` terms is the best rank-n
approximation in the weighted energy norm, with squared error equal to the sum
of the discarded eigenvalues.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._linalg import RANK_CUTOFF, fix_signs, numerical_rank, orthonormality_defect, sym_eigh
from .core import ParameterGrid, SnapshotSet, apply_adjoint, correlation, kernel_gram


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues (descending), spatial modes ``V`` (N x r) and parameter
    modes ``S`` (M x r, sampled on ``grid``)."""

    eigenvalues: np.ndarray
    spatial_modes: np.ndarray
    parameter_modes: np.ndarray
    grid: ParameterGrid

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        v = np.asarray(self.spatial_modes, dtype=float)
        s = np.asarray(self.parameter_modes, dtype=float)
        if v.ndim != 2 or s.ndim != 2 or v.shape[1] != lam.size or s.shape[1] != lam.size:
            raise ValueError("mode matrices must have one column per eigenvalue")
        if s.shape[0] != len(self.grid):
            raise ValueError("parameter modes must be sampled on the grid")
        for name, a in (("eigenvalues", lam), ("spatial_modes", v), ("parameter_modes", s)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def rank(self):
        return self.eigenvalues.size

    @property
    def singular_values(self):
        return np.sqrt(self.eigenvalues)

    def projector(self, modes):
        """Orthogonal projector onto the span of the selected spatial modes."""
        v = self.spatial_modes[:, modes]
        v = v.reshape(v.shape[0], -1)
        return v @ v.T

    def tie_groups(self, rtol=1e-8):
        """Index groups of (numerically) equal eigenvalues."""
        groups, current = [], []
        for m, lam in enumerate(self.eigenvalues):
            if current and abs(self.eigenvalues[current[0]] - lam) > rtol * self.eigenvalues[0]:
                groups.append(current)
                current = []
            current.append(m)
        if current:
            groups.append(current)
        return groups

    def invariant_defects(self, s: Optional[SnapshotSet] = None):
        """Measured violations of the structural invariants.

        Keys: ``spatial_orthonormality``, ``parameter_orthonormality``,
        ``ordering`` and, when the source snapshots are given, ``svd_consistency``
        (already divided by ``sqrt(lambda_1)``).
        """
        lam = self.eigenvalues
        out = {
            "spatial_orthonormality": orthonormality_defect(self.spatial_modes),
            "parameter_orthonormality": orthonormality_defect(
                self.parameter_modes, self.grid.weights),
            "ordering": float(np.max(np.diff(lam), initial=0.0) / lam[0]) if lam.size else 0.0,
            "positivity": float(-min(lam.min(), 0.0)) if lam.size else 0.0,
        }
        if s is not None:
            worst = 0.0
            for m in range(lam.size):
                back = apply_adjoint(s, self.parameter_modes[:, m])
                worst = max(worst, np.linalg.norm(back - np.sqrt(lam[m]) * self.spatial_modes[:, m]))
            out["svd_consistency"] = worst / np.sqrt(lam[0]) if lam.size else 0.0
        return out


def decompose(s: SnapshotSet, method: str = "snapshots", cutoff: float = RANK_CUTOFF) -> SpectralData:
    """Spectral decomposition of the correlation of ``s``.

    ``method="snapshots"`` solves the M x M problem ``W^1/2 K W^1/2 q = lambda q``
    and maps back with the adjoint; ``"correlation"`` diagonalizes the N x N
    correlation directly and maps forward with ``R``. Eigenvalues at or below
    ``cutoff * lambda_max`` are dropped, so an all-zero set has rank 0.
    """
    u = s.values
    w = s.weights
    if method == "snapshots":
        sw = np.sqrt(w)
        gram = kernel_gram(s).entries
        lam, q = sym_eigh(sw[:, None] * gram * sw[None, :])
        r = numerical_rank(lam, cutoff)
        lam, q = lam[:r], q[:, :r]
        smodes = q / sw[:, None]
        vmodes = (u @ (w[:, None] * smodes)) / np.sqrt(lam)
        # one Gram-Schmidt pass removes the amplification of roundoff by 1/sqrt(lam)
        vmodes, _ = _orthonormal_like(vmodes)
    elif method == "correlation":
        lam, vmodes = sym_eigh(correlation(s).entries)
        r = numerical_rank(lam, cutoff)
        lam, vmodes = lam[:r], vmodes[:, :r]
        smodes = (u.T @ vmodes) / np.sqrt(lam)
        smodes = _weighted_orthonormal_like(smodes, w)
    else:
        raise ValueError(f"unknown method {method!r}")
    vmodes, smodes = fix_signs(vmodes, smodes)
    return SpectralData(lam, vmodes, smodes, s.grid)


def _orthonormal_like(a):
    """Orthonormalize columns of ``a`` keeping each column's direction."""
    if a.shape[1] == 0:
        return a, None
    q, rr = np.linalg.qr(a)
    d = np.sign(np.diag(rr))
    d[d == 0] = 1.0
    return q * d, rr


def _weighted_orthonormal_like(a, w):
    if a.shape[1] == 0:
        return a
    sw = np.sqrt(w)[:, None]
    q, _ = _orthonormal_like(sw * a)
    return q / sw


@dataclass(frozen=True)
class ReducedModel:
    """Leading ``n`` terms of a KL expansion plus the discarded energy."""

    spectral: SpectralData
    truncation_rank: int
    tail_energy: float
    source_name: str = ""
    source_hash: str = ""
    clamped: bool = False

    def __post_init__(self):
        if self.truncation_rank != self.spectral.rank:
            raise ValueError("truncation rank must equal the number of retained modes")
        if self.tail_energy < 0:
            raise ValueError("tail energy must be non-negative")

    @property
    def total_energy(self):
        return float(np.sum(self.spectral.eigenvalues) + self.tail_energy)

    @property
    def error(self):
        """Weighted energy-norm error of the truncation, ``sqrt(tail)``."""
        return float(np.sqrt(self.tail_energy))

    @classmethod
    def full(cls, sd: SpectralData, s: Optional[SnapshotSet] = None):
        return cls(sd, sd.rank, 0.0,
                   s.name if s is not None else "",
                   s.content_hash() if s is not None else "")


def truncate(sd, rank: Optional[int] = None, tol: Optional[float] = None) -> ReducedModel:
    """Keep the leading KL terms of ``sd`` (a SpectralData or ReducedModel).

    Exactly one of ``rank`` and ``tol`` is given. ``tol`` is a relative
    energy-norm target: the smallest ``n`` with
    ``sum_{m>n} lambda_m <= tol**2 * sum_m lambda_m`` is chosen. A rank larger
    than the available one is clamped and flagged.
    """
    if (rank is None) == (tol is None):
        raise ValueError("give exactly one of rank and tol")
    if isinstance(sd, ReducedModel):
        base_tail, name, digest, spec = sd.tail_energy, sd.source_name, sd.source_hash, sd.spectral
    else:
        base_tail, name, digest, spec = 0.0, "", "", sd
    lam = spec.eigenvalues
    r = lam.size
    # tails[n] = energy discarded when keeping n terms
    tails = np.append(np.cumsum(lam[::-1])[::-1], 0.0) + base_tail
    clamped = False
    if rank is not None:
        n = int(rank)
        if n < 0:
            raise ValueError("rank must be non-negative")
        if n > r:
            warnings.warn(f"requested rank {n} exceeds available rank {r}; clamped")
            n, clamped = r, True
    else:
        if tol < 0:
            raise ValueError("tol must be non-negative")
        total = tails[0]
        ok = np.nonzero(tails <= tol ** 2 * total)[0]
        n = int(ok[0]) if ok.size else r
    reduced = SpectralData(lam[:n], spec.spatial_modes[:, :n], spec.parameter_modes[:, :n], spec.grid)
    return ReducedModel(reduced, n, float(tails[n]), name, digest, clamped)


def evaluate(rm: ReducedModel, j: int) -> np.ndarray:
    """Reduced-model value at grid index ``j``."""
    sd = rm.spectral
    m = sd.parameter_modes.shape[0]
    if not 0 <= j < m:
        raise IndexError(f"grid index {j} out of range [0, {m})")
    return sd.spatial_modes @ (sd.singular_values * sd.parameter_modes[j])


def reconstruct_all(rm: ReducedModel) -> np.ndarray:
    """All grid evaluations at once, N x M."""
    sd = rm.spectral
    return (sd.spatial_modes * sd.singular_values) @ sd.parameter_modes.T


def weighted_error(s: SnapshotSet, approx) -> float:
    """``sqrt(sum_j w_j ||r(p_j) - approx_j||^2)`` for an N x M approximation."""
    diff = s.values - np.asarray(approx, dtype=float)
    return float(np.sqrt(np.sum(s.weights * np.sum(diff ** 2, axis=0))))


def projection_error(s: SnapshotSet, basis) -> float:
    """Weighted error of projecting every snapshot onto span(basis).

    ``basis`` must have orthonormal columns.
    """
    b = np.asarray(basis, dtype=float)
    return weighted_error(s, b @ (b.T @ s.values))


def reconstruction_error(rm: ReducedModel, s: SnapshotSet) -> float:
    """Weighted energy-norm error of ``rm`` against the snapshots it came from."""
    sd = rm.spectral
    if sd.spatial_modes.shape[0] != s.values.shape[0] or sd.parameter_modes.shape[0] != s.values.shape[1]:
        raise ValueError(
            f"model dimensions {(sd.spatial_modes.shape[0], sd.parameter_modes.shape[0])} "
            f"do not match snapshot set {s.values.shape}"
        )
    if rm.source_hash and rm.source_hash != s.content_hash():
        warnings.warn("reduced model was built from a different snapshot set")
    return weighted_error(s, reconstruct_all(rm))
