"""Proper orthogonal decomposition of a parametrized family of functions.

The snapshots are r(p)(x) = exp(-p x) sampled on [0, 1] for p in [1, 10].
The spectrum decays fast, so a handful of modes reproduce the whole family.
"""
import numpy as np

from paramkl import ParameterGrid, ReducedModel, SnapshotSet, decompose, reconstruction_error, truncate

x = np.linspace(0.0, 1.0, 400)
grid = ParameterGrid.midpoint(60, lower=1.0, upper=10.0)
p = grid.points[:, 0]
s = SnapshotSet(np.exp(-np.outer(x, p)), grid, name="exp-decay")

sd = decompose(s)
print("rank:", sd.rank)
print("leading eigenvalues:", np.array2string(sd.eigenvalues[:8], precision=3))

full = ReducedModel.full(sd, s)
for n in (1, 2, 4, 6):
    rm = truncate(full, rank=n)
    print(f"n={n}: error {reconstruction_error(rm, s):.3e}  predicted {np.sqrt(rm.tail_energy):.3e}")

# eigenvalues below 1e-12 * lambda_max are treated as numerically zero, so the
# "full" model still misses an energy of that order
print("full-rank error:", reconstruction_error(full, s))

# a tolerance picks the smallest rank meeting the relative energy target
rm = truncate(full, tol=1e-6)
print("rank for tol=1e-6:", rm.truncation_rank)
