"""Different factorizations of the same correlation are unitarily equivalent."""
import numpy as np

from paramkl import (ParameterGrid, SnapshotSet, canonical_factor, cholesky_factor, cons_transport,
                     correlation, decompose, square_root_factor, unitary_equivalence)

rng = np.random.default_rng(0)
s = SnapshotSet(rng.standard_normal((6, 10)), ParameterGrid.uniform(np.linspace(0.0, 1.0, 10)))
c = correlation(s)

chol = cholesky_factor(c)
root = square_root_factor(c)
x = unitary_equivalence(chol, root)
print("||B_sqrt - X B_chol|| =", np.linalg.norm(root.matrix - x.matrix @ chol.matrix))
print("isometry defect:", x.isometry_defect())

# every factor carries the spectral data; the transported modes diagonalize B B^T
sd = decompose(s)
for b in (chol, root, canonical_factor(s)):
    h = cons_transport(b, sd)
    d = h.T @ b.matrix @ b.matrix.T @ h
    print(b.kind.name, np.allclose(d, np.diag(sd.eigenvalues)))
