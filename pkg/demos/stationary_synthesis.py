"""Sampling a periodized stationary Gaussian field with the FFT.

The kernel exp(-|z|) on a circle of length 40 is diagonalized by the DFT; its
spectral density at zero frequency approaches the continuous value 2.
"""
import numpy as np

from paramkl import spectral_density, synthesize_realizations
from paramkl.stationary import exponential_stationary, lag_covariance

k = exponential_stationary(1.0, 40.0, 4096)
d = spectral_density(k)
print("khat(0) =", d.values[0])
print("admissible:", d.admissible)

x = synthesize_realizations(d, 2000, seed=7)
print("empirical lag covariances:", np.array2string(lag_covariance(x, 5), precision=3))
print("kernel values:           ", np.array2string(k.samples[:6], precision=3))
