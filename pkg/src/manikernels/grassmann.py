"""The Grassmann manifold of r-dimensional subspaces of R^n.

Points are n x r matrices with orthonormal columns; every function here
depends on the column span only. Metrics are defined through the
principal angles theta_i between two subspaces, the arccosines of the
singular values of Y1^T Y2:

* ``projection``     (sum_i sin^2 theta_i)^{1/2}
                     = 2^{-1/2} ||Y1 Y1^T - Y2 Y2^T||_F
* ``arc-length``     (sum_i theta_i^2)^{1/2}
* ``fubini-study``   arccos(prod_i cos theta_i)
* ``chordal-2norm``  2 max_i sin(theta_i / 2)
* ``chordal-fnorm``  2 (sum_i sin^2(theta_i / 2))^{1/2}
"""

from __future__ import annotations

import numpy as np

from .errors import (
    BadShapeError,
    DimMismatchError,
    NumericalError,
    RankDeficientError,
    UnsupportedMetricError,
)
from .matrixops import thin_svd

GRASSMANN_METRICS = (
    "projection",
    "arc-length",
    "fubini-study",
    "chordal-2norm",
    "chordal-fnorm",
)

# Singular values of Y1^T Y2 may exceed 1 by roundoff; anything beyond this
# width is a genuine numerical problem.
_COS_CLAMP = 1e-8


def make_grassmann(raw) -> np.ndarray:
    """Orthonormal basis spanning the columns of ``raw``.

    Uses the thin QR factorization with the positive-diagonal convention, so
    already-orthonormal inputs are returned essentially unchanged.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2:
        raise BadShapeError(f"expected a 2-d array, got shape {raw.shape}")
    n, r = raw.shape
    if r < 1 or n <= r:
        raise BadShapeError(f"need n > r >= 1, got {n} x {r}")
    sv = np.linalg.svd(raw, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= max(n, r) * np.finfo(float).eps * sv[0]:
        raise RankDeficientError(f"columns are not full rank (min sv {sv[-1]:.3e})")
    q, rr = np.linalg.qr(raw)
    signs = np.sign(np.diag(rr))
    signs[signs == 0] = 1.0
    return q * signs


def _check_pair(y1, y2):
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    if y1.shape != y2.shape:
        raise DimMismatchError(f"shape mismatch: {y1.shape} vs {y2.shape}")
    return y1, y2


def principal_angles(y1, y2) -> np.ndarray:
    """Principal angles between span(y1) and span(y2), ascending in [0, pi/2]."""
    y1, y2 = _check_pair(y1, y2)
    s = np.linalg.svd(y1.T @ y2, compute_uv=False)
    if s.size and s[0] > 1.0 + _COS_CLAMP:
        raise NumericalError(f"principal-angle cosine {s[0]:.12f} exceeds 1 beyond roundoff")
    s = np.clip(s, 0.0, 1.0)
    # cosines come out non-increasing, so the angles are already ascending
    return np.arccos(s)


def grassmann_distance(metric: str, y1, y2) -> float:
    """Distance between two subspaces under the selected metric."""
    if metric not in GRASSMANN_METRICS:
        raise UnsupportedMetricError(f"unknown Grassmann metric {metric!r}")
    theta = principal_angles(y1, y2)
    if metric == "projection":
        return float(np.sqrt(np.sum(np.sin(theta) ** 2)))
    if metric == "arc-length":
        return float(np.sqrt(np.sum(theta**2)))
    if metric == "fubini-study":
        prod = float(np.prod(np.cos(theta)))
        return float(np.arccos(np.clip(prod, 0.0, 1.0)))
    if metric == "chordal-2norm":
        return float(2.0 * np.max(np.sin(theta / 2.0)))
    # chordal-fnorm
    return float(2.0 * np.sqrt(np.sum(np.sin(theta / 2.0) ** 2)))


def projection_dist_sq_fast(y1, y2) -> float:
    """Squared projection distance r - ||Y1^T Y2||_F^2 (clamped at 0).

    Only needs the r x r cross-Gram, never the n x n projectors.
    """
    y1, y2 = _check_pair(y1, y2)
    r = y1.shape[1]
    val = r - float(np.sum((y1.T @ y2) ** 2))
    return max(val, 0.0)


def subspace_from_vectors(f, r: int) -> np.ndarray:
    """Dominant r-dimensional subspace of a set of column vectors.

    ``f`` is n x p with one descriptor per column; the basis is the top-r
    left singular vectors. Columns are sign-normalized (largest-magnitude
    entry positive) for reproducibility.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 2:
        raise BadShapeError(f"expected a 2-d array, got shape {f.shape}")
    n, p = f.shape
    if r < 1 or r >= min(n, p):
        raise BadShapeError(f"need 1 <= r < min(n, p) = {min(n, p)}, got r = {r}")
    if n >= p:
        svd = thin_svd(f)
        u, s = svd.u, svd.s
    else:
        u, s, _ = np.linalg.svd(f, full_matrices=False)
    if s[0] == 0.0 or s[r - 1] <= max(n, p) * np.finfo(float).eps * s[0]:
        raise RankDeficientError(f"rank below {r} (sv_{r} = {s[r - 1]:.3e})")
    basis = u[:, :r].copy()
    for c in range(r):
        j = int(np.argmax(np.abs(basis[:, c])))
        if basis[j, c] < 0:
            basis[:, c] = -basis[:, c]
    return basis
