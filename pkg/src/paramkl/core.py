"""Sampled parametric maps and their associated linear operators.

A parametric map ``r: P -> U`` is represented by its samples ``r(p_j)`` on a
weighted parameter grid. The weights realize the measure on ``P`` so that the
parameter-side inner product is ``<phi|psi>_Q = sum_j w_j phi_j psi_j``; the
state space ``U`` is always a plain ``R^N`` with the Euclidean inner product.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._linalg import PSD_TOL, RANK_CUTOFF, check_psd, symmetrize

POINT_TOL = 1e-14


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_distinct(points, tol=POINT_TOL, block=512):
    m = points.shape[0]
    for start in range(0, m, block):
        chunk = points[start:start + block]
        close = np.all(np.abs(chunk[:, None, :] - points[None, :, :]) <= tol, axis=2)
        rows, cols = np.nonzero(close)
        rows = rows + start
        dup = rows != cols
        if np.any(dup):
            i, j = rows[dup][0], cols[dup][0]
            raise ValueError(f"grid points {i} and {j} coincide")


@dataclass(frozen=True)
class ParameterGrid:
    """Parameter points ``p_j`` (M x d_p) with positive quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be an M x d_p array, got shape {pts.shape}")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError(
                f"weights and points differ in length: {w.shape[0]} != {pts.shape[0]}"
            )
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ValueError("grid contains non-finite entries")
        if np.any(w <= 0):
            raise ValueError("quadrature weights must be strictly positive")
        _check_distinct(pts)
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def uniform(cls, points):
        """Grid with Monte-Carlo weights ``1/M``."""
        pts = np.asarray(points, dtype=float)
        m = pts.shape[0]
        return cls(pts, np.full(m, 1.0 / m))

    @classmethod
    def midpoint(cls, m, lower=0.0, upper=1.0):
        """Composite midpoint rule with ``m`` nodes on ``[lower, upper]``."""
        h = (upper - lower) / m
        pts = lower + h * (np.arange(m) + 0.5)
        return cls(pts[:, None], np.full(m, h))

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def inner(self, phi, psi):
        """Weighted inner product on grid functions."""
        return float(np.sum(self.weights * np.asarray(phi) * np.asarray(psi)))

    def permuted(self, order):
        order = np.asarray(order)
        return ParameterGrid(self.points[order], self.weights[order])


@dataclass(frozen=True)
class SnapshotSet:
    """N x M matrix whose column ``j`` is the sample ``r(p_j)``."""

    values: np.ndarray
    grid: ParameterGrid
    labels: Optional[Sequence[str]] = None
    name: str = "snapshots"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"values must be an N x M matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("snapshot values contain non-finite entries")
        if v.shape[1] != len(self.grid):
            raise ValueError(
                f"snapshot count {v.shape[1]} does not match grid length {len(self.grid)}"
            )
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != v.shape[0]:
                raise ValueError("one label per row is required")
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def with_mass_matrix(cls, values, grid, mass, **kwargs):
        """Ingest snapshots living in ``U`` with inner product ``u^T mass v``.

        The columns are premultiplied by the transposed Cholesky factor of
        ``mass`` so that downstream Euclidean algebra reproduces that inner
        product.
        """
        chol = np.linalg.cholesky(np.asarray(mass, dtype=float))
        return cls(chol.T @ np.asarray(values, dtype=float), grid, **kwargs)

    @property
    def shape(self):
        return self.values.shape

    @property
    def weights(self):
        return self.grid.weights

    def content_hash(self):
        """SHA-256 over values, points and weights (hex)."""
        h = hashlib.sha256()
        for arr in (self.values, self.grid.points, self.grid.weights):
            a = np.ascontiguousarray(arr, dtype="<f8")
            h.update(str(a.shape).encode())
            h.update(a.tobytes())
        return h.hexdigest()

    def permuted(self, order):
        """Same snapshot set with grid points (and columns) reordered."""
        order = np.asarray(order)
        return SnapshotSet(self.values[:, order], self.grid.permuted(order),
                           self.labels, self.name)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric PSD N x N matrix ``C = R* R``."""

    entries: np.ndarray

    def __post_init__(self):
        c = _validate_psd(self.entries, "correlation")
        object.__setattr__(self, "entries", _frozen(c))

    @property
    def n(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class KernelGram:
    """Symmetric PSD M x M matrix ``K_ij = <r(p_i)|r(p_j)>``."""

    entries: np.ndarray

    def __post_init__(self):
        k = _validate_psd(self.entries, "kernel Gram matrix")
        object.__setattr__(self, "entries", _frozen(k))


def _validate_psd(a, what):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} has non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * max(scale, np.finfo(float).tiny):
        raise ValueError(f"{what} is not symmetric")
    a = symmetrize(a)
    check_psd(np.linalg.eigvalsh(a), PSD_TOL, what)
    return a


def _vector(x, n, what):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != n:
        raise ValueError(f"{what} has length {x.shape[0]}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} contains non-finite entries")
    return x


def apply_map(s: SnapshotSet, u) -> np.ndarray:
    """``(R u)(p_j) = <r(p_j), u>`` sampled on the grid (no weights)."""
    u = _vector(u, s.values.shape[0], "u")
    return s.values.T @ u


def apply_adjoint(s: SnapshotSet, phi) -> np.ndarray:
    """Adjoint of :func:`apply_map` w.r.t. the weighted grid inner product.

    Returns ``sum_j w_j phi_j r(p_j)``.
    """
    phi = _vector(phi, s.values.shape[1], "phi")
    return s.values @ (s.weights * phi)


def correlation(s: SnapshotSet) -> CorrelationMatrix:
    """``C = sum_j w_j r(p_j) r(p_j)^T``."""
    v = s.values
    return CorrelationMatrix(symmetrize((v * s.weights) @ v.T))


def kernel_gram(s: SnapshotSet) -> KernelGram:
    """``K = U^T U``; the weights enter the eigenproblem, not the kernel."""
    v = s.values
    return KernelGram(symmetrize(v.T @ v))


def _min_norm_preimage(s, phi, residual_tol):
    a, sig, bt = np.linalg.svd(s.values, full_matrices=False)
    keep = sig > RANK_CUTOFF * sig[0] if sig.size and sig[0] > 0 else np.zeros(sig.shape, bool)
    a, sig, bt = a[:, keep], sig[keep], bt[keep]
    u = a @ ((bt @ phi) / sig)
    res = np.linalg.norm(s.values.T @ u - phi)
    scale = np.linalg.norm(phi)
    if res > residual_tol * scale:
        raise ValueError(
            f"phi is not in the range of the associated map "
            f"(relative residual {res / scale:.3e})"
        )
    return u


def rkhs_reproduce(s: SnapshotSet, phi, i: int, residual_tol: float = 1e-8) -> float:
    """Evaluate ``<kappa(p_i, .), phi>`` in the reproducing-kernel inner product.

    Both arguments are pulled back to ``U`` through minimum-norm preimages, so
    the result equals ``phi[i]`` whenever ``phi`` lies in the range of the map.
    """
    m = s.values.shape[1]
    phi = _vector(phi, m, "phi")
    if not 0 <= i < m:
        raise IndexError(f"grid index {i} out of range [0, {m})")
    k_row = s.values.T @ s.values[:, i]
    u_k = _min_norm_preimage(s, k_row, residual_tol)
    u_phi = _min_norm_preimage(s, phi, residual_tol)
    return float(u_k @ u_phi)
