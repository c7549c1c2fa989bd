"""Tensor-train compression of multi-way parametric responses.

Unfoldings are row-major (C order) and all indices are zero-based. The
sequential SVD sweep leaves cores ``0..d-2`` left-orthogonal, which makes the
Frobenius error bounded by the root of the total discarded squared singular
values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

MAX_ENTRIES = 10 ** 8


@dataclass(frozen=True)
class FullTensor:
    dims: tuple
    data: np.ndarray  # flat, row-major

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) < 2 or any(n < 1 for n in dims):
            raise ValueError(f"need at least two positive mode sizes, got {dims}")
        data = np.asarray(self.data, dtype=float).reshape(-1)
        if data.size != int(np.prod(dims)):
            raise ValueError(f"data length {data.size} does not match dims {dims}")
        if not np.all(np.isfinite(data)):
            raise ValueError("tensor contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a.shape, a.reshape(-1))

    def array(self):
        return self.data.reshape(self.dims)

    @property
    def norm(self):
        return float(np.linalg.norm(self.data))


@dataclass(frozen=True)
class TTRepresentation:
    """Cores of shape ``(r_{k-1}, n_k, r_k)`` with ``r_0 = r_d = 1``.

    ``discarded`` holds, per split, the singular values dropped by
    :func:`tt_decompose` (empty for hand-built trains).
    """

    cores: tuple
    discarded: tuple = field(default=())

    def __post_init__(self):
        cores = tuple(np.asarray(c, dtype=float) for c in self.cores)
        if len(cores) < 2:
            raise ValueError("a tensor train needs at least two cores")
        prev = 1
        for k, c in enumerate(cores):
            if c.ndim != 3:
                raise ValueError(f"core {k} must be 3-way, got shape {c.shape}")
            if c.shape[0] != prev:
                raise ValueError(f"core {k} has left rank {c.shape[0]}, expected {prev}")
            prev = c.shape[2]
        if prev != 1:
            raise ValueError("last core must have right rank 1")
        for c in cores:
            c.setflags(write=False)
        object.__setattr__(self, "cores", cores)
        object.__setattr__(self, "discarded", tuple(np.asarray(s, dtype=float) for s in self.discarded))

    @property
    def mode_dims(self):
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self):
        return tuple(c.shape[2] for c in self.cores[:-1])

    @property
    def num_params(self):
        return sum(c.size for c in self.cores)

    def left_orthogonality_defect(self):
        """max over cores 0..d-2 of ``|G^T G - I|`` for the left unfolding G."""
        worst = 0.0
        for c in self.cores[:-1]:
            g = c.reshape(-1, c.shape[2])
            worst = max(worst, float(np.max(np.abs(g.T @ g - np.eye(g.shape[1])), initial=0.0)))
        return worst


def assemble_tensor(factors: Sequence[np.ndarray], coefficients) -> FullTensor:
    """Contract a coefficient tensor with one factor matrix per mode.

    ``out[i1,..,id] = sum coeff[l1,..,ld] * F1[i1,l1] * ... * Fd[id,ld]``.
    """
    coeff = np.asarray(coefficients, dtype=float)
    if coeff.ndim != len(factors):
        raise ValueError(f"{len(factors)} factors for a {coeff.ndim}-way coefficient tensor")
    out = coeff
    for k, f in enumerate(factors):
        f = np.asarray(f, dtype=float)
        if f.ndim != 2 or f.shape[1] != coeff.shape[k]:
            raise ValueError(
                f"factor {k} has shape {f.shape}, needs {coeff.shape[k]} columns")
        out = np.moveaxis(np.tensordot(f, out, axes=([1], [k])), 0, k)
    return FullTensor.from_array(out)


def _keep_count(sig, budget, max_rank, shape):
    """Smallest rank whose discarded squared tail fits ``budget``."""
    if sig.size == 0 or sig[0] == 0:
        return 1
    # exact-rank floor: drop numerically zero singular values
    floor = sig[0] * max(shape) * np.finfo(float).eps
    n = int(np.count_nonzero(sig > floor))
    tail = np.append(np.cumsum((sig ** 2)[::-1])[::-1], 0.0)  # tail[n] = sum_{m>=n} sig_m^2
    fits = np.nonzero(tail <= budget)[0]
    if fits.size:
        n = min(n, int(fits[0]))
    n = max(n, 1)
    if max_rank is not None:
        n = min(n, max_rank)
    return n


def tt_decompose(t: FullTensor, tol: float = 0.0, max_rank: Optional[int] = None) -> TTRepresentation:
    """Sequential-SVD (TT-SVD) sweep with a relative Frobenius target ``tol``.

    Each of the ``d-1`` splits may discard squared energy up to
    ``tol**2 * ||t||^2 / (d-1)``, so ``||t - TT|| <= tol * ||t||`` unless
    ``max_rank`` forces more truncation.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    dims = t.dims
    d = len(dims)
    budget = tol ** 2 * t.norm ** 2 / (d - 1)
    cores, discarded = [], []
    rest = t.data.reshape(1, -1)
    r_prev = 1
    for k in range(d - 1):
        mat = rest.reshape(r_prev * dims[k], -1)
        u, sig, vt = np.linalg.svd(mat, full_matrices=False)
        n = _keep_count(sig, budget, max_rank, mat.shape)
        discarded.append(sig[n:].copy())
        cores.append(u[:, :n].reshape(r_prev, dims[k], n))
        rest = sig[:n, None] * vt[:n]
        r_prev = n
    cores.append(rest.reshape(r_prev, dims[-1], 1))
    return TTRepresentation(tuple(cores), tuple(discarded))


def tt_reconstruct(tt: TTRepresentation) -> FullTensor:
    dims = tt.mode_dims
    if int(np.prod(dims, dtype=float)) > MAX_ENTRIES:
        raise MemoryError(f"refusing to materialize {np.prod(dims, dtype=float):.3g} entries")
    out = tt.cores[0].reshape(dims[0], -1)
    for c in tt.cores[1:]:
        out = (out @ c.reshape(c.shape[0], -1)).reshape(-1, c.shape[2])
    return FullTensor(dims, out.reshape(-1))


def tt_eval(tt: TTRepresentation, index: Sequence[int]) -> float:
    """Single entry as a product of core slices; never forms the full tensor."""
    dims = tt.mode_dims
    if len(index) != len(dims):
        raise IndexError(f"index has {len(index)} entries for a {len(dims)}-way tensor")
    vec = np.ones(1)
    for k, (i, c) in enumerate(zip(index, tt.cores)):
        if not 0 <= i < dims[k]:
            raise IndexError(f"index {i} out of range for mode {k} of size {dims[k]}")
        vec = vec @ c[:, i, :]
    return float(vec[0])


def tt_error_bound(discarded) -> float:
    """``sqrt(sum of squared discarded singular values over all splits)``.

    Accepts a TTRepresentation or a sequence of per-split arrays.
    """
    if isinstance(discarded, TTRepresentation):
        discarded = discarded.discarded
    return float(np.sqrt(sum(float(np.sum(np.asarray(s) ** 2)) for s in discarded)))
