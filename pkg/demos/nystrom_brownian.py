"""Nystrom eigenpairs of the Brownian covariance min(s, t) on [0, 1].

The exact eigenvalues are 1 / ((m - 1/2)^2 pi^2); the quadrature error shrinks
by about a factor four each time the grid is refined by two.
"""
import numpy as np

from paramkl import ParameterGrid, brownian_kernel, mercer_reconstruct, nystrom_eigensolve

exact = 1.0 / ((np.arange(1, 6) - 0.5) ** 2 * np.pi ** 2)
for m in (50, 100, 200, 400):
    res = nystrom_eigensolve(brownian_kernel(), ParameterGrid.midpoint(m), 5)
    print(m, np.array2string(np.abs(res.eigenvalues - exact) / exact, precision=2))

grid = ParameterGrid.midpoint(100)
res = nystrom_eigensolve(brownian_kernel(), grid, 100)
k = brownian_kernel().matrix(grid.points)
for n in (1, 5, 20, res.eigenvalues.size):
    err = np.linalg.norm(mercer_reconstruct(res.eigenvalues, res.eigenfunctions, n) - k) / np.linalg.norm(k)
    print(f"Mercer sum with {n} terms: relative error {err:.2e}")

# eigenfunctions extend off the grid through the kernel
print(res.extend(np.array([[0.25], [0.75]]))[:, 0])
