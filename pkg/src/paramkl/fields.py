"""Vector-valued and SPD-matrix-valued parametric fields.

SPD fields are reduced in the log domain: ``H(p) = log A(p)`` lives in the
linear space of symmetric matrices, its KL expansion is truncated there, and
exponentiating any truncation gives a symmetric positive definite matrix again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._linalg import sym_eigh
from .core import ParameterGrid, SnapshotSet
from .spectral import ReducedModel, SpectralData, decompose, evaluate, truncate

SYM_TOL = 1e-12
SPD_TOL = 1e-14


def _square(a, what):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {a.shape}")
    return a


def _asym(a):
    return np.max(np.abs(a - a.T), initial=0.0) / max(np.max(np.abs(a), initial=0.0), 1.0)


def matrix_exp_sym(h) -> np.ndarray:
    h = _square(h, "exp argument")
    if _asym(h) > SYM_TOL:
        raise ValueError("matrix_exp_sym needs a symmetric matrix")
    lam, v = np.linalg.eigh(0.5 * (h + h.T))
    a = (v * np.exp(lam)) @ v.T
    return 0.5 * (a + a.T)


def matrix_log_spd(a) -> np.ndarray:
    a = _square(a, "log argument")
    if _asym(a) > SYM_TOL:
        raise ValueError("matrix_log_spd needs a symmetric matrix")
    lam, v = np.linalg.eigh(0.5 * (a + a.T))
    if lam[0] <= SPD_TOL * max(lam[-1], 0.0) or lam[0] <= 0:
        raise ValueError(f"matrix is not positive definite: eigenvalue {lam[0]:.3e}")
    h = (v * np.log(lam)) @ v.T
    return 0.5 * (h + h.T)


def matrix_exp_skew(s) -> np.ndarray:
    """Rotation ``exp(S)`` for skew-symmetric ``S``.

    ``iS`` is Hermitian, so ``S = U diag(-i mu) U^H`` with real ``mu``.
    """
    s = _square(s, "exp argument")
    scale = max(np.max(np.abs(s), initial=0.0), 1.0)
    if np.max(np.abs(s + s.T), initial=0.0) > SYM_TOL * scale:
        raise ValueError("matrix_exp_skew needs a skew-symmetric matrix")
    s = 0.5 * (s - s.T)
    mu, u = np.linalg.eigh(1j * s)
    q = (u * np.exp(-1j * mu)) @ u.conj().T
    return q.real


# --- packing of symmetric matrices -------------------------------------------

def packed_size(n):
    return n * (n + 1) // 2


def pack_sym(h) -> np.ndarray:
    """Upper triangle, row by row, off-diagonals scaled by sqrt(2).

    The Euclidean norm of the packed vector equals the Frobenius norm.
    """
    h = np.asarray(h, dtype=float)
    n = h.shape[-1]
    iu = np.triu_indices(n)
    scale = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return h[..., iu[0], iu[1]] * scale


def unpack_sym(x, n) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    iu = np.triu_indices(n)
    scale = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    h = np.zeros(x.shape[:-1] + (n, n))
    h[..., iu[0], iu[1]] = x / scale
    h[..., iu[1], iu[0]] = x / scale
    return h


# --- vector fields -------------------------------------------------------------

@dataclass(frozen=True)
class VectorFieldSet:
    """Snapshots of an ``E``-valued field over ``N`` nodes.

    ``base.values`` has ``N * n_e`` rows with the component index fastest:
    row ``i * n_e + k`` holds coefficient ``k`` at node ``i`` in the basis given
    by the columns of ``component_basis``.
    """

    base: SnapshotSet
    n_e: int
    component_basis: Optional[np.ndarray] = None

    def __post_init__(self):
        rows = self.base.values.shape[0]
        if self.n_e < 1 or rows % self.n_e:
            raise ValueError(f"{rows} rows cannot be split into components of size {self.n_e}")
        basis = np.eye(self.n_e) if self.component_basis is None else np.asarray(
            self.component_basis, dtype=float)
        if basis.shape != (self.n_e, self.n_e) or np.linalg.matrix_rank(basis) < self.n_e:
            raise ValueError("component basis must be a full-rank n_e x n_e matrix")
        object.__setattr__(self, "component_basis", basis)

    @property
    def nodes(self):
        return self.base.values.shape[0] // self.n_e

    def coefficients(self):
        """Array (N, n_e, M) of basis coefficients."""
        return self.base.values.reshape(self.nodes, self.n_e, -1)

    def physical(self) -> SnapshotSet:
        """Snapshots of the actual vectors ``sum_k c_k r_k`` in the stacked layout."""
        phys = np.einsum("ek,nkm->nem", self.component_basis, self.coefficients())
        return SnapshotSet(phys.reshape(-1, phys.shape[-1]), self.base.grid, name=self.base.name)

    def kernel_block(self, i, j) -> np.ndarray:
        """Matrix-valued kernel ``sum_{k,l} <c_k(p_i)|c_l(p_j)> r_k r_l^T`` (n_e x n_e)."""
        c = self.coefficients()
        gram = c[:, :, i].T @ c[:, :, j]
        b = self.component_basis
        return b @ gram @ b.T


@dataclass(frozen=True)
class VectorKL:
    spectral: SpectralData
    n_e: int

    def component_modes(self):
        """Spatial modes reshaped to (N, n_e, r)."""
        v = self.spectral.spatial_modes
        return v.reshape(-1, self.n_e, v.shape[1])


def vector_kl(v: VectorFieldSet) -> VectorKL:
    """KL expansion of the field on the stacked space ``U (x) E``."""
    return VectorKL(decompose(v.physical()), v.n_e)


# --- SPD fields ------------------------------------------------------------------

@dataclass(frozen=True)
class SPDFieldSet:
    """``M`` SPD samples ``A(p_j)`` (array M x n x n) and their packed logarithms."""

    matrices: np.ndarray
    log_coefficients: np.ndarray = field(init=False, default=None)

    def __post_init__(self):
        a = np.asarray(self.matrices, dtype=float)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise ValueError(f"expected an M x n x n stack, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("SPD samples contain non-finite entries")
        logs = []
        for j, aj in enumerate(a):
            try:
                logs.append(pack_sym(matrix_log_spd(aj)))
            except ValueError as exc:
                raise ValueError(f"sample {j}: {exc}") from None
        a.setflags(write=False)
        object.__setattr__(self, "matrices", a)
        object.__setattr__(self, "log_coefficients", np.array(logs))

    @property
    def n(self):
        return self.matrices.shape[1]


@dataclass(frozen=True)
class SPDFieldModel:
    """Truncated log-domain KL model of an SPD field."""

    reduced: ReducedModel
    mean: np.ndarray  # packed log-Euclidean mean (zeros if not centered)
    n: int
    centered: bool

    @property
    def rank(self):
        return self.reduced.truncation_rank

    def log_at(self, j) -> np.ndarray:
        return unpack_sym(self.mean + evaluate(self.reduced, j), self.n)

    def evaluate(self, j) -> np.ndarray:
        """``exp(H_n(p_j))``; symmetric positive definite for every rank."""
        return matrix_exp_sym(self.log_at(j))


def spd_field_reduce(f: SPDFieldSet, grid: ParameterGrid, rank: Optional[int] = None,
                     tol: Optional[float] = None, center: bool = True) -> SPDFieldModel:
    """KL-reduce the packed matrix logarithms and keep ``rank`` terms.

    With ``center`` the weighted log-Euclidean mean is removed first and
    added back on evaluation.
    """
    h = f.log_coefficients
    if h.shape[0] != len(grid):
        raise ValueError(f"{h.shape[0]} samples for a grid of {len(grid)} points")
    w = grid.weights
    mean = (w @ h) / w.sum() if center else np.zeros(h.shape[1])
    resid = h - mean
    # roundoff left by the mean subtraction is not a mode
    resid[np.abs(resid) <= 64 * np.finfo(float).eps * max(np.max(np.abs(h)), 1.0)] = 0.0
    snaps = SnapshotSet(resid.T, grid, name="spd-log")
    sd = decompose(snaps)
    if rank is None and tol is None:
        rank = sd.rank
    if rank is not None and rank > sd.rank:
        raise ValueError(f"rank {rank} exceeds the numerical rank {sd.rank} of the log field")
    rm = truncate(ReducedModel.full(sd, snaps), rank=rank, tol=tol)
    return SPDFieldModel(rm, mean, f.n, center)
