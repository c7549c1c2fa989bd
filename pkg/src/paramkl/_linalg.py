"""Small dense linear-algebra helpers shared across modules."""

import numpy as np

# Relative eigenvalue cutoff used for numerical rank decisions everywhere.
RANK_CUTOFF = 1e-12
# Eigenvalues more negative than this (relative to the largest) mean "not PSD".
PSD_TOL = 1e-12


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def sym_eigh(a):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    lam, vec = np.linalg.eigh(symmetrize(a))
    return lam[::-1], vec[:, ::-1]


def numerical_rank(eigenvalues, cutoff=RANK_CUTOFF):
    """Number of eigenvalues above ``cutoff * max(eigenvalues)``."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        return 0
    top = lam.max()
    if top <= 0:
        return 0
    return int(np.count_nonzero(lam > cutoff * top))


def check_psd(eigenvalues, tol=PSD_TOL, what="matrix"):
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        return
    top = max(lam.max(), 0.0)
    low = lam.min()
    if low < -tol * top or (top == 0.0 and low < 0.0):
        raise ValueError(
            f"{what} is not positive semi-definite: eigenvalue {low:.3e} "
            f"(largest {top:.3e})"
        )


def fix_signs(vectors, *companions):
    """Flip columns so the largest-magnitude entry of each is positive.

    The same flips are applied to every companion matrix, column by column.
    """
    vectors = np.array(vectors, dtype=float)
    if vectors.size == 0:
        return (vectors,) + tuple(np.array(c, dtype=float) for c in companions)
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    out = [vectors * signs]
    for c in companions:
        out.append(np.asarray(c, dtype=float) * signs)
    return tuple(out)


def orthonormality_defect(q, weights=None):
    """max |Q^T W Q - I| for a column matrix Q."""
    q = np.asarray(q, dtype=float)
    if weights is None:
        g = q.T @ q
    else:
        g = q.T @ (np.asarray(weights)[:, None] * q)
    if g.size == 0:
        return 0.0
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))
