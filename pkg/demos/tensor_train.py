"""Compressing a smooth function of four variables into a tensor train."""
import numpy as np

from paramkl import FullTensor, tt_decompose, tt_error_bound, tt_eval, tt_reconstruct

g = np.linspace(0.0, 1.0, 12)
a, b, c, d = np.meshgrid(g, g, g, g, indexing="ij")
t = FullTensor.from_array(1.0 / (1.0 + a + b + c + d))

for tol in (1e-2, 1e-4, 1e-8):
    tt = tt_decompose(t, tol)
    err = np.linalg.norm(tt_reconstruct(tt).data - t.data)
    print(f"tol={tol:g}: ranks {tt.ranks}, error {err / t.norm:.2e}, bound {tt_error_bound(tt) / t.norm:.2e}")

tt = tt_decompose(t, 1e-8)
print("entry (3, 5, 7, 11):", tt_eval(tt, (3, 5, 7, 11)), "exact:", t.data.reshape(t.dims)[3, 5, 7, 11])
