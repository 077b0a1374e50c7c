"""The manifold of symmetric positive definite matrices.

Provides the validated SPD point constructor, five metrics, Karcher
means, and the dispersion statistic used to rank covariance descriptors.

Metrics (S1, S2 SPD, ``chol`` the lower Cholesky factor):

* ``log-euclidean``      ||log S1 - log S2||_F
* ``affine-invariant``   ||log(S1^{-1/2} S2 S1^{-1/2})||_F
* ``cholesky``           ||chol S1 - chol S2||_F
* ``power-euclidean``    (1/|alpha|) ||S1^alpha - S2^alpha||_F
* ``root-stein``         [log det((S1+S2)/2) - (1/2) log det(S1 S2)]^{1/2}

The root-Stein divergence is not a geodesic distance and its triangle
inequality is not relied on anywhere.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    BadParamError,
    BadShapeError,
    DimMismatchError,
    EmptySetError,
    NoConvergenceError,
    NotSpdError,
    NumericalError,
    UnsupportedMetricError,
)
from .matrixops import (
    cholesky_lower,
    frob,
    require_symmetric,
    spd_exp,
    spd_floor,
    spd_inv_sqrt,
    spd_log,
    spd_power,
    _eigh,
)

SPD_METRICS = (
    "log-euclidean",
    "affine-invariant",
    "cholesky",
    "power-euclidean",
    "root-stein",
)

#: Default exponent for the power-Euclidean metric.
DEFAULT_POWER_ALPHA = 0.5

# Negative Stein radicand tolerated as roundoff before clamping to 0.
_STEIN_CLAMP = 1e-12


def make_spd(raw, regularize: float | None = None) -> np.ndarray:
    """Validated SPD matrix from a raw square array.

    Strict mode (``regularize is None``) rejects matrices whose smallest
    eigenvalue is at or below the relative floor. With ``regularize``
    given, the symmetrized input is shifted by ``regularize * I`` when
    needed to clear the floor.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise BadShapeError(f"expected a square matrix, got shape {raw.shape}")
    s = require_symmetric(raw)
    w, _ = _eigh(s)
    if w[0] > spd_floor(s):
        return s
    if regularize is None:
        raise NotSpdError(f"min eigenvalue {w[0]:.3e} at or below SPD floor")
    shifted = s + regularize * np.eye(s.shape[0])
    w, _ = _eigh(shifted)
    if w[0] <= spd_floor(shifted):
        raise NotSpdError(
            f"min eigenvalue {w[0]:.3e} still at or below SPD floor after +{regularize}*I"
        )
    return shifted


def _check_metric(metric: str) -> None:
    if metric not in SPD_METRICS:
        raise UnsupportedMetricError(f"unknown SPD metric {metric!r}")


def log_det_spd(s) -> float:
    """log det(S) via Cholesky: 2 * sum(log diag(L))."""
    length = cholesky_lower(s)
    return 2.0 * float(np.sum(np.log(np.diag(length))))


def stein_divergence_sq(s1, s2) -> float:
    """Squared root-Stein divergence, with roundoff-scale negatives clamped."""
    val = log_det_spd((s1 + s2) / 2.0) - 0.5 * (log_det_spd(s1) + log_det_spd(s2))
    if val < 0:
        if val < -_STEIN_CLAMP:
            raise NumericalError(f"Stein radicand {val:.3e} negative beyond roundoff")
        val = 0.0
    return val


def spd_distance(metric: str, s1, s2, alpha: float = DEFAULT_POWER_ALPHA) -> float:
    """Distance between two SPD matrices under the selected metric."""
    _check_metric(metric)
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if s1.shape != s2.shape:
        raise DimMismatchError(f"shape mismatch: {s1.shape} vs {s2.shape}")
    if metric == "log-euclidean":
        return frob(spd_log(s1) - spd_log(s2))
    if metric == "affine-invariant":
        r = spd_inv_sqrt(s1)
        whitened = require_symmetric(r @ s2 @ r)
        return frob(spd_log(whitened))
    if metric == "cholesky":
        return frob(cholesky_lower(s1) - cholesky_lower(s2))
    if metric == "power-euclidean":
        if alpha == 0:
            raise BadParamError("power-euclidean alpha must be nonzero")
        return frob(spd_power(s1, alpha) - spd_power(s2, alpha)) / abs(alpha)
    # root-stein
    return float(np.sqrt(stein_divergence_sq(s1, s2)))


def _as_spd_stack(points) -> np.ndarray:
    pts = [np.asarray(p, dtype=float) for p in points]
    if not pts:
        raise EmptySetError("empty SPD point set")
    shape = pts[0].shape
    for p in pts:
        if p.shape != shape:
            raise DimMismatchError(f"shape mismatch in point set: {p.shape} vs {shape}")
    return np.stack(pts)


def karcher_mean_log_euclidean(points) -> np.ndarray:
    """Closed-form log-Euclidean mean exp(mean(log X_i))."""
    stack = _as_spd_stack(points)
    logs = np.stack([spd_log(p) for p in stack])
    return spd_exp(logs.mean(axis=0))


def karcher_mean_iterative(
    metric: str,
    points,
    max_iter: int = 500,
    tol: float = 1e-10,
    alpha: float = DEFAULT_POWER_ALPHA,
) -> np.ndarray:
    """Karcher mean under the selected metric.

    Cholesky and power-Euclidean means are the closed-form pullback of the
    Euclidean mean in the mapped space; the log-Euclidean mean defers to
    the closed form. The affine-invariant mean runs the fixed-point
    iteration M <- M^{1/2} exp(mean_i log(M^{-1/2} X_i M^{-1/2})) M^{1/2}
    until the tangent-step norm drops below ``tol``.
    """
    _check_metric(metric)
    if metric == "root-stein":
        raise UnsupportedMetricError("no Karcher mean implemented for root-stein")
    stack = _as_spd_stack(points)
    if metric == "log-euclidean":
        return karcher_mean_log_euclidean(stack)
    if metric == "cholesky":
        mean_l = np.stack([cholesky_lower(p) for p in stack]).mean(axis=0)
        return mean_l @ mean_l.T
    if metric == "power-euclidean":
        if alpha == 0:
            raise BadParamError("power-euclidean alpha must be nonzero")
        mean_p = np.stack([spd_power(p, alpha) for p in stack]).mean(axis=0)
        return spd_power(mean_p, 1.0 / alpha)
    # affine-invariant: fixed-point iteration, warm-started at the
    # log-Euclidean mean.
    mean = karcher_mean_log_euclidean(stack)
    for _ in range(max_iter):
        inv_sqrt = spd_inv_sqrt(mean)
        tangent = np.stack(
            [spd_log(require_symmetric(inv_sqrt @ p @ inv_sqrt)) for p in stack]
        ).mean(axis=0)
        step = frob(tangent)
        sqrt = spd_power(mean, 0.5)
        mean = require_symmetric(sqrt @ spd_exp(tangent) @ sqrt)
        if step < tol:
            return mean
    raise NoConvergenceError(f"affine-invariant mean: no convergence in {max_iter} iterations")


def affine_invariant_grad_norm(mean, points) -> float:
    """Norm of the Riemannian gradient of the affine-invariant mean objective.

    Zero exactly at the Karcher mean; used as a stationarity certificate.
    """
    stack = _as_spd_stack(points)
    inv_sqrt = spd_inv_sqrt(mean)
    tangent = np.stack(
        [spd_log(require_symmetric(inv_sqrt @ p @ inv_sqrt)) for p in stack]
    ).mean(axis=0)
    return frob(tangent)


def dispersion_stat(
    metric: str,
    points,
    p: float,
    mean,
    alpha: float = DEFAULT_POWER_ALPHA,
) -> float:
    """Mean p-th power of distances from each point to ``mean``:
    (1/m) * sum_i d(X_i, mean)^p."""
    if p <= 0:
        raise BadParamError(f"dispersion exponent must be positive, got {p}")
    stack = _as_spd_stack(points)
    mean = np.asarray(mean, dtype=float)
    if mean.shape != stack[0].shape:
        raise DimMismatchError(f"mean shape {mean.shape} != point shape {stack[0].shape}")
    dists = np.array([spd_distance(metric, x, mean, alpha=alpha) for x in stack])
    return float(np.mean(dists**p))
