"""Kernel-side analysis: Nystrom eigenproblems, Mercer sums and feature maps.

The kernel operator ``(C_Q s)(p) = int kappa(p, q) s(q) dq`` is discretized
with the grid's own quadrature weights, which turns the Fredholm eigenproblem
into the symmetric matrix problem ``W^1/2 K W^1/2 q = lambda q``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._linalg import PSD_TOL, RANK_CUTOFF, fix_signs, numerical_rank, sym_eigh, symmetrize
from .core import ParameterGrid, SnapshotSet, apply_adjoint, kernel_gram

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelFunction:
    """A kernel ``kappa(p1, p2)``.

    ``evaluator`` must broadcast: given arrays of shape ``(..., d)`` it
    returns the pairwise values with shape ``(...)``.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "kernel"
    symmetric: bool = True

    def __call__(self, p1, p2):
        p1 = np.atleast_1d(np.asarray(p1, dtype=float))
        p2 = np.atleast_1d(np.asarray(p2, dtype=float))
        return float(self.evaluator(p1, p2))

    def matrix(self, a, b=None):
        a = _as_points(a)
        b = a if b is None else _as_points(b)
        return np.asarray(self.evaluator(a[:, None, :], b[None, :, :]), dtype=float)

    def check_symmetry(self, points, pairs=100, seed=0, tol=1e-12):
        """Spot-check ``kappa(a, b) == kappa(b, a)`` on random point pairs."""
        if not self.symmetric:
            raise ValueError(f"kernel {self.name!r} is not declared symmetric")
        pts = _as_points(points)
        rng = np.random.default_rng(seed)
        i = rng.integers(0, pts.shape[0], pairs)
        j = rng.integers(0, pts.shape[0], pairs)
        ab = np.asarray(self.evaluator(pts[i], pts[j]))
        ba = np.asarray(self.evaluator(pts[j], pts[i]))
        scale = max(np.max(np.abs(ab), initial=0.0), 1.0)
        bad = np.max(np.abs(ab - ba), initial=0.0)
        if bad > tol * scale:
            raise ValueError(f"kernel {self.name!r} is not symmetric (defect {bad:.3e})")


def _as_points(p):
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    return p


def brownian_kernel():
    """``min(s, t)``, multiplied over coordinates for d > 1."""
    return KernelFunction(lambda a, b: np.prod(np.minimum(a, b), axis=-1), "brownian")


def exponential_kernel(scale=1.0):
    """``exp(-scale * |p1 - p2|)``."""
    return KernelFunction(
        lambda a, b: np.exp(-scale * np.linalg.norm(a - b, axis=-1)), f"exp(scale={scale!r})")


def gaussian_kernel(scale=1.0):
    """``exp(-scale * |p1 - p2|^2)``."""
    return KernelFunction(
        lambda a, b: np.exp(-scale * np.sum((a - b) ** 2, axis=-1)), f"gauss(scale={scale!r})")


def snapshot_kernel(s: SnapshotSet, tol=1e-14):
    """``<r(p1) | r(p2)>`` for grid points of ``s``; off-grid points raise."""
    pts = s.grid.points
    vals = s.values

    def lookup(p):
        flat = p.reshape(-1, p.shape[-1])
        hit = np.all(np.abs(flat[:, None, :] - pts[None, :, :]) <= tol, axis=-1)
        found = hit.any(axis=1)
        if not np.all(found):
            raise ValueError("snapshot kernel evaluated off the sampling grid")
        return np.argmax(hit, axis=1).reshape(p.shape[:-1])

    def evaluator(a, b):
        a, b = np.broadcast_arrays(a, b)
        ia, ib = lookup(a), lookup(b)
        return np.einsum("n...,n...->...", vals[:, ia], vals[:, ib])

    return KernelFunction(evaluator, f"snapshots:{s.name}")


BUILTIN_KERNELS = {
    "brownian": lambda scale=1.0: brownian_kernel(),
    "exp": exponential_kernel,
    "gauss": gaussian_kernel,
}


def builtin_kernel(name, scale=1.0):
    try:
        factory = BUILTIN_KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(BUILTIN_KERNELS)}") from None
    return factory(scale)


@dataclass(frozen=True)
class NystromResult:
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # M x n, orthonormal in the weighted inner product
    grid: ParameterGrid
    kernel: Optional[KernelFunction] = None
    clamped: bool = False

    def extend(self, points):
        """Nystrom extension of the eigenfunctions to arbitrary points."""
        if self.kernel is None:
            raise ValueError("no kernel attached; extension needs kernel evaluations")
        kx = self.kernel.matrix(points, self.grid.points)
        return (kx * self.grid.weights) @ self.eigenfunctions / self.eigenvalues


def _weighted_eigh(k, w, count, cutoff=RANK_CUTOFF):
    sw = np.sqrt(w)
    lam, q = sym_eigh(sw[:, None] * k * sw[None, :])
    clamped = False
    if lam.size and lam.min() < 0:
        top = max(lam[0], 0.0)
        if lam.min() < -PSD_TOL * top or top == 0.0:
            raise ValueError(f"kernel is not positive semi-definite on this grid "
                             f"(eigenvalue {lam.min():.3e}, largest {top:.3e})")
        log.info("clamped %d slightly negative eigenvalues to zero", int(np.sum(lam < 0)))
        lam = np.clip(lam, 0.0, None)
        clamped = True
    r = min(numerical_rank(lam, cutoff), count)
    s = q[:, :r] / sw[:, None]
    (s,) = fix_signs(s)
    return lam[:r], s, clamped


def nystrom_eigensolve(k: KernelFunction, grid: ParameterGrid, count: int) -> NystromResult:
    """Leading ``count`` eigenpairs of the kernel operator on ``grid``.

    Eigenvalues at or below the rank cutoff are not returned, so fewer than
    ``count`` pairs come back for low-rank kernels (none for a zero kernel).
    """
    m = len(grid)
    if count > m:
        raise ValueError(f"cannot compute {count} eigenpairs on a grid of {m} points")
    k.check_symmetry(grid.points)
    kmat = k.matrix(grid.points)
    scale = np.max(np.abs(kmat), initial=0.0)
    if np.max(np.abs(kmat - kmat.T), initial=0.0) > 1e-12 * max(scale, 1.0):
        raise ValueError(f"kernel {k.name!r} is not symmetric on the grid")
    lam, s, clamped = _weighted_eigh(symmetrize(kmat), grid.weights, count)
    return NystromResult(lam, s, grid, k, clamped)


def nystrom_from_gram(gram, grid: ParameterGrid, count: Optional[int] = None) -> NystromResult:
    """Same as :func:`nystrom_eigensolve` for an already assembled kernel matrix."""
    gram = np.asarray(gram, dtype=float)
    count = len(grid) if count is None else count
    lam, s, clamped = _weighted_eigh(symmetrize(gram), grid.weights, count)
    return NystromResult(lam, s, grid, None, clamped)


def mercer_reconstruct(eigenvalues, eigenfunctions, n: int) -> np.ndarray:
    """Partial Mercer sum ``sum_{m<n} lambda_m s_m s_m^T`` on the grid."""
    lam = np.asarray(eigenvalues, dtype=float).reshape(-1)
    s = np.asarray(eigenfunctions, dtype=float)
    if s.ndim != 2 or s.shape[1] != lam.size:
        raise ValueError(f"need one eigenfunction column per eigenvalue, got {s.shape} for {lam.size}")
    if not 0 <= n <= lam.size:
        raise ValueError(f"n={n} outside [0, {lam.size}]")
    return (s[:, :n] * lam[:n]) @ s[:, :n].T


def weighted_frobenius(a, weights) -> float:
    """``||W^1/2 A W^1/2||_F``, the Hilbert-Schmidt norm of a grid kernel."""
    sw = np.sqrt(np.asarray(weights, dtype=float))
    return float(np.linalg.norm(sw[:, None] * np.asarray(a) * sw[None, :]))


@dataclass(frozen=True)
class FeatureMapSamples:
    """Samples ``g(p_i, x_l)`` (M x L) and quadrature weights on the feature space."""

    g_matrix: np.ndarray
    x_weights: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g_matrix, dtype=float)
        if g.ndim == 1:
            g = g[:, None]
        nu = np.asarray(self.x_weights, dtype=float).reshape(-1)
        if g.ndim != 2 or g.shape[1] != nu.size:
            raise ValueError(f"g has {g.shape[-1]} feature columns but {nu.size} weights")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(nu))):
            raise ValueError("feature samples contain non-finite entries")
        if np.any(nu <= 0):
            raise ValueError("feature weights must be strictly positive")
        object.__setattr__(self, "g_matrix", g)
        object.__setattr__(self, "x_weights", nu)


@dataclass(frozen=True)
class FeatureFactorization:
    kernel: np.ndarray            # M x M, sum_l nu_l g(p_i,x_l) g(p_j,x_l)
    eigenvalues: np.ndarray
    parameter_modes: np.ndarray   # M x r
    chi_modes: np.ndarray         # L x r, orthonormal in the nu-weighted product
    feature_eigenvalues: np.ndarray
    spectrum_discrepancy: float
    spatial_modes: Optional[np.ndarray] = None  # N x r when snapshots were given
    table: Optional[np.ndarray] = None          # N x L, r(x_l)


def feature_factorize(f: FeatureMapSamples, grid: ParameterGrid,
                      snapshots: Optional[SnapshotSet] = None,
                      rtol: float = 1e-8) -> FeatureFactorization:
    """Factor the kernel operator through the integral transform with kernel ``g``.

    ``(X psi)(p) = sum_l nu_l g(p, x_l) psi(x_l)`` gives ``C_Q = X X*``. The
    nonzero spectrum of ``X* X`` is computed separately and must agree with
    the kernel side. ``chi_m = X* s_m / sqrt(lambda_m)``. When ``snapshots``
    with the same Gram matrix are supplied, the KL table re-indexed by the
    feature points is returned as well.
    """
    g, nu, w = f.g_matrix, f.x_weights, grid.weights
    if g.shape[0] != len(grid):
        raise ValueError(f"feature matrix has {g.shape[0]} rows, grid has {len(grid)} points")
    kern = symmetrize((g * nu) @ g.T)
    nys = nystrom_from_gram(kern, grid)
    lam, s = nys.eigenvalues, nys.eigenfunctions

    # feature side: N^1/2 G^T W G N^1/2, same nonzero spectrum as W^1/2 K W^1/2
    sn = np.sqrt(nu)
    feat = symmetrize((sn[:, None] * g.T) @ (w[:, None] * g * sn[None, :]))
    mu = np.linalg.eigvalsh(feat)[::-1]
    mu = mu[:numerical_rank(mu)]
    if mu.size != lam.size:
        raise RuntimeError(f"feature-side rank {mu.size} differs from kernel-side rank {lam.size}")
    disc = float(np.max(np.abs(mu - lam), initial=0.0) / lam[0]) if lam.size else 0.0
    if disc > rtol:
        raise RuntimeError(f"feature and kernel spectra disagree (relative {disc:.3e})")

    chi = (g.T @ (w[:, None] * s)) / np.sqrt(lam)

    vmodes = table = None
    if snapshots is not None:
        gram = kernel_gram(snapshots).entries
        gap = np.linalg.norm(gram - kern) / max(np.linalg.norm(gram), np.finfo(float).tiny)
        if gap > rtol:
            raise ValueError(f"snapshot Gram matrix does not match the feature kernel (relative {gap:.3e})")
        vmodes = np.column_stack([apply_adjoint(snapshots, s[:, m]) for m in range(lam.size)]) \
            / np.sqrt(lam) if lam.size else np.zeros((snapshots.values.shape[0], 0))
        table = (vmodes * np.sqrt(lam)) @ chi.T
    return FeatureFactorization(kern, lam, s, chi, mu, disc, vmodes, table)
