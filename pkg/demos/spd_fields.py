"""A parametrized family of SPD matrices reduced in the log domain.

Truncated models stay positive definite at every rank because they are
exponentials of symmetric matrices.
"""
import numpy as np

from paramkl import ParameterGrid, SPDFieldSet, spd_field_reduce
from paramkl.fields import matrix_exp_sym

grid = ParameterGrid.midpoint(30)
p = grid.points[:, 0]
base = np.array([[1.0, 0.3, 0.0], [0.3, 0.5, 0.1], [0.0, 0.1, 0.2]])
mats = np.array([matrix_exp_sym(np.sin(3 * q) * base + q * np.eye(3)) for q in p])
f = SPDFieldSet(mats)

full = spd_field_reduce(f, grid)
print("log-domain rank:", full.rank)
for n in range(full.rank + 1):
    m = spd_field_reduce(f, grid, rank=n)
    worst = min(np.linalg.eigvalsh(m.evaluate(j)).min() for j in range(len(grid)))
    err = max(np.linalg.norm(m.evaluate(j) - mats[j]) / np.linalg.norm(mats[j]) for j in range(len(grid)))
    print(f"rank {n}: smallest eigenvalue {worst:.3e}, max relative error {err:.2e}")
