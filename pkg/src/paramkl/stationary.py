"""Shift-invariant kernels on uniform periodic grids.

On the grid ``z_j = j * dz`` (``j = 0..M-1``, period ``L = M * dz``) the kernel
operator of a stationary kernel is a circulant matrix, so the discrete Fourier
transform diagonalizes it. The diagonal is the spectral density
``khat(zeta_k) = dz * sum_j kappa(z_j) exp(-2 pi i z_j zeta_k)``, and
``sqrt(khat)`` times the unitary DFT is a factor of the kernel operator.
Complex arithmetic stays inside this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

EVEN_TOL = 1e-12
IMAG_TOL = 1e-10
CLAMP_TOL = 1e-10
ADMISSIBLE_TOL = 1e-6
# realizations are drawn in blocks; block b uses the child seed (seed, b)
BLOCK = 256


@dataclass(frozen=True)
class StationaryKernel1D:
    """Samples ``kappa(z_j)`` of an even kernel on a periodic grid of length ``length``."""

    samples: np.ndarray
    length: float

    def __post_init__(self):
        k = np.asarray(self.samples, dtype=float).reshape(-1)
        if k.size < 1 or not np.all(np.isfinite(k)):
            raise ValueError("kernel samples must be finite and non-empty")
        if not self.length > 0:
            raise ValueError("domain length must be positive")
        mirror = np.roll(k[::-1], 1)  # kappa(L - z_j)
        scale = max(np.max(np.abs(k)), np.finfo(float).tiny)
        if np.max(np.abs(k - mirror)) > EVEN_TOL * scale:
            raise ValueError("stationary kernel must be even: kappa(z) != kappa(L - z)")
        k.setflags(write=False)
        object.__setattr__(self, "samples", k)

    @classmethod
    def from_function(cls, f, length, points):
        """Sample ``f`` at the wrapped distance ``min(z, L - z)``."""
        z = np.arange(points) * (length / points)
        return cls(f(np.minimum(z, length - z)), length)

    @property
    def size(self):
        return self.samples.size

    @property
    def spacing(self):
        return self.length / self.size

    @property
    def positions(self):
        return np.arange(self.size) * self.spacing


def exponential_stationary(scale=1.0, length=40.0, points=4096):
    """Periodized ``exp(-scale * |z|)``."""
    return StationaryKernel1D.from_function(lambda z: np.exp(-scale * z), length, points)


def gaussian_stationary(scale=1.0, length=40.0, points=4096):
    return StationaryKernel1D.from_function(lambda z: np.exp(-scale * z ** 2), length, points)


STATIONARY_KERNELS = {"exp": exponential_stationary, "gauss": gaussian_stationary}


@dataclass(frozen=True)
class SpectralDensity:
    """Non-negative multiplier ``khat(zeta_k)`` at the DFT frequencies ``k / L``.

    ``clamped`` is the largest negative value that was set to zero;
    ``admissible`` is False when it exceeded ``1e-6 * max``.
    """

    values: np.ndarray
    length: float
    clamped: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size < 1 or not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite and non-empty")
        if np.any(v < 0):
            raise ValueError("density values must be non-negative (clamp before constructing)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self):
        return self.values.size

    @property
    def spacing(self):
        return self.length / self.size

    @property
    def frequencies(self):
        """Signed frequencies, ``k / L`` for ``k < M/2`` and ``(k - M) / L`` above."""
        return np.fft.fftfreq(self.size, d=self.spacing)

    @property
    def admissible(self):
        return self.clamped <= ADMISSIBLE_TOL * max(np.max(self.values), np.finfo(float).tiny)


def spectral_density(k: StationaryKernel1D) -> SpectralDensity:
    """Riemann-sum Fourier transform of the kernel samples."""
    raw = k.spacing * np.fft.fft(k.samples)
    scale = max(np.max(np.abs(raw)), np.finfo(float).tiny)
    if np.max(np.abs(raw.imag)) > IMAG_TOL * scale:
        raise ValueError("kernel transform is not real; kernel is not even")
    vals = raw.real.copy()
    neg = float(-min(vals.min(), 0.0))
    vals[vals < 0] = 0.0
    return SpectralDensity(vals, k.length, neg)


def kernel_from_density(d: SpectralDensity) -> StationaryKernel1D:
    """Inverse of :func:`spectral_density` (exact up to roundoff and clamping)."""
    k = np.fft.ifft(d.values).real / d.spacing
    return StationaryKernel1D(k, d.length)


def circulant_operator(k: StationaryKernel1D) -> np.ndarray:
    """Dense matrix of the discretized kernel operator, ``dz * kappa(z_i - z_j)``."""
    return k.spacing * scipy.linalg.circulant(k.samples)


@dataclass(frozen=True)
class CirculantFactor:
    """``G = diag(sqrt(khat)) F`` with ``F`` the unitary DFT; ``G* G = C_Q``."""

    density: SpectralDensity

    @property
    def multiplier(self):
        return np.sqrt(self.density.values)

    def apply(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.multiplier * np.fft.fft(phi, norm="ortho")

    def adjoint(self, psi):
        out = np.fft.ifft(self.multiplier * np.asarray(psi), norm="ortho")
        return out.real

    def correlation_apply(self, phi):
        """Action of the kernel operator: ``dz`` times circular convolution with kappa."""
        return self.adjoint(self.apply(phi))


def sqrt_multiplier_factor(d: SpectralDensity) -> CirculantFactor:
    return CirculantFactor(d)


def box_muller(rng: np.random.Generator, shape):
    """Standard normals from pairs of uniforms (basic Box-Muller).

    Uniforms and outputs are interleaved pairwise, so a shorter draw is a
    prefix of a longer one from the same stream.
    """
    n = int(np.prod(shape))
    u = rng.random(((n + 1) // 2, 2))
    rad = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    ang = 2 * np.pi * u[:, 1]
    z = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]).reshape(-1)
    return z[:n].reshape(shape)


def _hermitian_noise(z):
    """Pack M real normals per row into Hermitian-symmetric unit-variance noise."""
    count, m = z.shape
    xi = np.zeros((count, m), dtype=complex)
    xi[:, 0] = z[:, 0]
    half = (m - 1) // 2
    if half:
        k = np.arange(1, half + 1)
        pair = (z[:, 2 * k - 1] + 1j * z[:, 2 * k]) / np.sqrt(2.0)
        xi[:, k] = pair
        xi[:, m - k] = pair.conj()
    if m % 2 == 0 and m > 1:
        xi[:, m // 2] = z[:, m - 1]
    return xi


def synthesize_realizations(d: SpectralDensity, count: int, seed: int) -> np.ndarray:
    """``count`` real stationary sequences whose covariance is the kernel.

    Each row is ``sqrt(M) * ifft(sqrt(khat / dz) * xi)`` with Hermitian
    symmetric complex Gaussian ``xi``. Normals come from a PCG64 stream via
    Box-Muller; realizations are drawn in blocks of ``BLOCK`` rows and block
    ``b`` uses ``SeedSequence(seed, spawn_key=(b,))``, so output is identical
    however the blocks are scheduled.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    m = d.size
    amp = np.sqrt(d.values / d.spacing)
    out = np.empty((count, m))
    for b, start in enumerate(range(0, count, BLOCK)):
        rows = min(BLOCK, count - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        xi = _hermitian_noise(box_muller(rng, (rows, m)))
        x = np.fft.ifft(amp * xi, axis=1) * np.sqrt(m)
        scale = max(np.max(np.abs(x.real)), np.finfo(float).tiny)
        if np.max(np.abs(x.imag)) > 1e-12 * scale:
            raise RuntimeError("synthesized field is not real; density is not even")
        out[start:start + rows] = x.real
    return out


def lag_covariance(samples, max_lag):
    """Empirical covariance at lags ``0..max_lag``, pooled over rows and positions."""
    x = np.asarray(samples, dtype=float)
    return np.array([np.mean(x * np.roll(x, -h, axis=1)) for h in range(max_lag + 1)])
