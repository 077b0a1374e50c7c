"""Gaussian RBF kernels and kernel machines for manifold-valued data.

Supports points on the SPD-matrix manifold and the Grassmann manifold
(plus plain Euclidean baselines): manifold metrics, positive definite
Gaussian kernels built from them, empirical definiteness testing, and
kernelized k-means / PCA / FDA / SVM / MKL over precomputed Gram
matrices.
"""

import os as _os

# Thread-count control: MANIKERNELS_THREADS caps the BLAS pools, which is
# the only parallelism in use. Must happen before numpy loads.
_threads = _os.environ.get("MANIKERNELS_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from . import data, features, grassmann, kernels, learn, matrixops, spd  # noqa: E402,F401
from .kernels import KernelSpec, GramMatrix, gram_matrix  # noqa: E402,F401
