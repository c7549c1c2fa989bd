"""Reduced representations of sampled parametric models.

A parametric map ``r: P -> U`` sampled on a weighted grid is analysed through
its associated linear map: correlation spectra and KL/POD truncation,
alternative factorizations, kernel-side (Nystrom, Mercer, feature map)
analysis, FFT diagonalization of stationary kernels, tensor-train compression
and log-domain reduction of SPD-matrix fields.
"""

from .core import (
    CorrelationMatrix, KernelGram, ParameterGrid, SnapshotSet,
    apply_adjoint, apply_map, correlation, kernel_gram, rkhs_reproduce,
)
from .spectral import (
    ReducedModel, SpectralData, decompose, evaluate, reconstruction_error, truncate,
)
from .factorization import (
    Factor, FactorKind, UnitaryMap, canonical_factor, cholesky_factor, cons_transport,
    represent_from_factor, square_root_factor, unitary_equivalence,
)
from .kernels import (
    FeatureMapSamples, KernelFunction, brownian_kernel, exponential_kernel,
    feature_factorize, gaussian_kernel, mercer_reconstruct, nystrom_eigensolve,
    snapshot_kernel,
)
from .stationary import (
    SpectralDensity, StationaryKernel1D, spectral_density, sqrt_multiplier_factor,
    synthesize_realizations,
)
from .tensor import (
    FullTensor, TTRepresentation, assemble_tensor, tt_decompose, tt_error_bound,
    tt_eval, tt_reconstruct,
)
from .fields import (
    SPDFieldSet, VectorFieldSet, matrix_exp_skew, matrix_exp_sym, matrix_log_spd,
    spd_field_reduce, vector_kl,
)

__version__ = "0.1.0"
