"""Gaussian RBF kernels built from manifold metrics.

A kernel is specified by a manifold, a metric on it, and a bandwidth
gamma > 0; its value is k(x, y) = exp(-gamma * d^2(x, y)). Whether such
a kernel is positive definite for every gamma depends on the metric:
squared distances that embed isometrically in an inner product space
(log-Euclidean, Cholesky, power-Euclidean on SPD; projection on
Grassmann; plain Euclidean) give PSD Gram matrices for all gamma, the
others do not. This module builds Gram matrices, audits their
eigenvalues, tests conditional negative semi-definiteness of squared
distance matrices, and searches for indefiniteness witnesses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import grassmann as gr
from . import spd as sp
from .errors import (
    BadParamError,
    DimMismatchError,
    EmptySetError,
    NumericalError,
    UnsupportedMetricError,
)
from .matrixops import require_symmetric, spd_exp, spd_log, cholesky_lower, spd_power
from .spd import DEFAULT_POWER_ALPHA, log_det_spd

MANIFOLDS = ("spd", "grassmann", "euclidean")

#: Indefiniteness threshold scale: an eigenvalue below -WITNESS_TOL_FACTOR * m
#: is a genuine witness rather than roundoff (desk scale, m <= a few hundred).
WITNESS_TOL_FACTOR = 1e-7

#: Metrics whose Gaussian kernel is positive definite for every gamma > 0.
PD_FOR_ALL_GAMMA = {
    ("spd", "log-euclidean"),
    ("spd", "cholesky"),
    ("spd", "power-euclidean"),
    ("grassmann", "projection"),
    ("euclidean", "euclidean"),
}


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel selector: manifold, metric, bandwidth.

    ``alpha`` only matters for the power-Euclidean metric.
    """

    manifold: str
    metric: str
    gamma: float
    alpha: float = DEFAULT_POWER_ALPHA

    def __post_init__(self):
        if self.manifold not in MANIFOLDS:
            raise BadParamError(f"unknown manifold {self.manifold!r}")
        valid = {
            "spd": sp.SPD_METRICS,
            "grassmann": gr.GRASSMANN_METRICS,
            "euclidean": ("euclidean",),
        }[self.manifold]
        if self.metric not in valid:
            raise UnsupportedMetricError(
                f"metric {self.metric!r} is not defined on manifold {self.manifold!r}"
            )
        if not self.gamma > 0:
            raise BadParamError(f"gamma must be positive, got {self.gamma}")
        if self.alpha == 0:
            raise BadParamError("alpha must be nonzero")

    def to_dict(self) -> dict:
        return {
            "manifold": self.manifold,
            "metric": self.metric,
            "gamma": self.gamma,
            "alpha": self.alpha,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(
            manifold=d["manifold"],
            metric=d["metric"],
            gamma=float(d["gamma"]),
            alpha=float(d.get("alpha", DEFAULT_POWER_ALPHA)),
        )


def squared_distance(spec: KernelSpec, x, y) -> float:
    """d^2(x, y) under ``spec.manifold`` and ``spec.metric``."""
    if spec.manifold == "spd":
        d = sp.spd_distance(spec.metric, x, y, alpha=spec.alpha)
        return d * d
    if spec.manifold == "grassmann":
        if spec.metric == "projection":
            return gr.projection_dist_sq_fast(x, y)
        d = gr.grassmann_distance(spec.metric, x, y)
        return d * d
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimMismatchError(f"shape mismatch: {x.shape} vs {y.shape}")
    diff = (x - y).ravel()
    return float(diff @ diff)


def gaussian_kernel_value(spec: KernelSpec, x, y) -> float:
    """exp(-gamma * d^2(x, y)); equals 1 exactly when the distance is 0."""
    return float(np.exp(-spec.gamma * squared_distance(spec, x, y)))


def _stack_points(points) -> list[np.ndarray]:
    pts = [np.asarray(p, dtype=float) for p in points]
    if not pts:
        raise EmptySetError("empty point set")
    shape = pts[0].shape
    for p in pts:
        if p.shape != shape:
            raise DimMismatchError(f"inhomogeneous point shapes: {p.shape} vs {shape}")
    return pts


def _pairwise_sq_euclidean(flat: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances of row vectors, clamped at 0."""
    sq = np.einsum("ij,ij->i", flat, flat)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (flat @ flat.T)
    np.maximum(d2, 0.0, out=d2)
    d2 = (d2 + d2.T) / 2.0
    np.fill_diagonal(d2, 0.0)
    return d2


def squared_distance_matrix(
    manifold: str,
    metric: str,
    points,
    alpha: float = DEFAULT_POWER_ALPHA,
) -> np.ndarray:
    """Symmetric matrix of pairwise squared distances with exact-zero diagonal.

    Metrics that are Euclidean in a mapped space (log, Cholesky, power,
    flattening) map every point once and use vectorized pairwise
    distances; the remaining metrics are evaluated pair by pair.
    """
    pts = _stack_points(points)
    m = len(pts)
    if manifold == "euclidean":
        return _pairwise_sq_euclidean(np.stack([p.ravel() for p in pts]))
    if manifold == "spd":
        if metric == "log-euclidean":
            feats = np.stack([spd_log(p).ravel() for p in pts])
            return _pairwise_sq_euclidean(feats)
        if metric == "cholesky":
            feats = np.stack([cholesky_lower(p).ravel() for p in pts])
            return _pairwise_sq_euclidean(feats)
        if metric == "power-euclidean":
            if alpha == 0:
                raise BadParamError("alpha must be nonzero")
            feats = np.stack([spd_power(p, alpha).ravel() for p in pts])
            return _pairwise_sq_euclidean(feats) / alpha**2
        if metric == "root-stein":
            logdets = [log_det_spd(p) for p in pts]
            d2 = np.zeros((m, m))
            for i in range(m):
                for j in range(i + 1, m):
                    val = log_det_spd((pts[i] + pts[j]) / 2.0) - 0.5 * (
                        logdets[i] + logdets[j]
                    )
                    if val < -1e-12:
                        raise NumericalError(
                            f"Stein radicand {val:.3e} negative beyond roundoff"
                        )
                    d2[i, j] = d2[j, i] = max(val, 0.0)
            return d2
        if metric == "affine-invariant":
            d2 = np.zeros((m, m))
            for i in range(m):
                for j in range(i + 1, m):
                    d = sp.spd_distance("affine-invariant", pts[i], pts[j])
                    d2[i, j] = d2[j, i] = d * d
            return d2
        raise UnsupportedMetricError(f"unknown SPD metric {metric!r}")
    if manifold == "grassmann":
        if metric == "projection":
            stack = np.stack(pts)  # (m, n, r)
            r = stack.shape[2]
            cross = np.tensordot(stack, stack, axes=([1], [1]))  # (m, r, m, r)
            t = np.einsum("iajb->ij", cross**2)
            d2 = np.maximum(r - t, 0.0)
            d2 = (d2 + d2.T) / 2.0
            np.fill_diagonal(d2, 0.0)
            return d2
        if metric in gr.GRASSMANN_METRICS:
            d2 = np.zeros((m, m))
            for i in range(m):
                for j in range(i + 1, m):
                    d = gr.grassmann_distance(metric, pts[i], pts[j])
                    d2[i, j] = d2[j, i] = d * d
            return d2
        raise UnsupportedMetricError(f"unknown Grassmann metric {metric!r}")
    raise BadParamError(f"unknown manifold {manifold!r}")


def _mapped_features(manifold: str, metric: str, pts, alpha: float):
    """(flat features, scale) for metrics Euclidean in a mapped space,
    where d^2 = scale * ||phi(x) - phi(y)||^2; None otherwise."""
    if manifold == "euclidean":
        return np.stack([p.ravel() for p in pts]), 1.0
    if manifold == "spd":
        if metric == "log-euclidean":
            return np.stack([spd_log(p).ravel() for p in pts]), 1.0
        if metric == "cholesky":
            return np.stack([cholesky_lower(p).ravel() for p in pts]), 1.0
        if metric == "power-euclidean":
            return np.stack([spd_power(p, alpha).ravel() for p in pts]), 1.0 / alpha**2
    return None


def cross_squared_distances(
    manifold: str,
    metric: str,
    xs,
    ys,
    alpha: float = DEFAULT_POWER_ALPHA,
) -> np.ndarray:
    """Rectangular matrix of squared distances d^2(x_i, y_j)."""
    xs = _stack_points(xs)
    ys = _stack_points(ys)
    if xs[0].shape != ys[0].shape:
        raise DimMismatchError(f"point shapes differ: {xs[0].shape} vs {ys[0].shape}")
    mapped_x = _mapped_features(manifold, metric, xs, alpha)
    if mapped_x is not None:
        fx, scale = mapped_x
        fy, _ = _mapped_features(manifold, metric, ys, alpha)
        sq_x = np.einsum("ij,ij->i", fx, fx)
        sq_y = np.einsum("ij,ij->i", fy, fy)
        d2 = sq_x[:, None] + sq_y[None, :] - 2.0 * (fx @ fy.T)
        np.maximum(d2, 0.0, out=d2)
        return d2 * scale
    if manifold == "grassmann" and metric == "projection":
        sx = np.stack(xs)
        sy = np.stack(ys)
        r = sx.shape[2]
        cross = np.tensordot(sx, sy, axes=([1], [1]))  # (mx, r, my, r)
        t = np.einsum("iajb->ij", cross**2)
        return np.maximum(r - t, 0.0)
    spec = KernelSpec(manifold=manifold, metric=metric, gamma=1.0, alpha=alpha)
    d2 = np.empty((len(xs), len(ys)))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            d2[i, j] = squared_distance(spec, x, y)
    return d2


def cross_gram(spec: KernelSpec, xs, ys) -> np.ndarray:
    """Kernel evaluations between two point sets (len(xs) x len(ys))."""
    d2 = cross_squared_distances(spec.manifold, spec.metric, xs, ys, alpha=spec.alpha)
    return np.exp(-spec.gamma * d2)


def median_heuristic_gamma(d2) -> float:
    """1 / median of the off-diagonal squared distances (1.0 if degenerate)."""
    d2 = np.asarray(d2, dtype=float)
    m = d2.shape[0]
    if m < 2:
        return 1.0
    off = d2[np.triu_indices(m, 1)]
    med = float(np.median(off))
    return 1.0 / med if med > 0 else 1.0


@dataclass(frozen=True)
class GramMatrix:
    """Kernel matrix over a point set, with an optional eigenvalue audit."""

    entries: np.ndarray
    spec: KernelSpec
    min_eigen: float | None = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.entries.astype(dtype)
        return self.entries


def gram_matrix(spec: KernelSpec, points, audit: bool = False) -> GramMatrix:
    """Gram matrix K_ij = exp(-gamma d^2(x_i, x_j)) with unit diagonal.

    With ``audit`` the smallest eigenvalue is computed and recorded.
    """
    d2 = squared_distance_matrix(spec.manifold, spec.metric, points, alpha=spec.alpha)
    k = np.exp(-spec.gamma * d2)
    np.fill_diagonal(k, 1.0)
    min_eigen = None
    if audit:
        min_eigen = float(np.linalg.eigvalsh(k)[0])
    return GramMatrix(entries=k, spec=spec, min_eigen=min_eigen)


def gram_from_squared_distances(spec: KernelSpec, d2, audit: bool = False) -> GramMatrix:
    """Gram matrix from a precomputed squared-distance matrix."""
    d2 = np.asarray(d2, dtype=float)
    k = np.exp(-spec.gamma * d2)
    np.fill_diagonal(k, 1.0)
    k = (k + k.T) / 2.0
    min_eigen = float(np.linalg.eigvalsh(k)[0]) if audit else None
    return GramMatrix(entries=k, spec=spec, min_eigen=min_eigen)


def projection_linear_gram(points) -> np.ndarray:
    """Gamma-free baseline Gram on subspaces: K_ij = ||Y_i^T Y_j||_F^2.

    The linear kernel of the projector embedding Y -> Y Y^T; useful as the
    linear baseline next to the projection Gaussian kernel.
    """
    pts = _stack_points(points)
    stack = np.stack(pts)
    cross = np.tensordot(stack, stack, axes=([1], [1]))
    k = np.einsum("iajb->ij", cross**2)
    return (k + k.T) / 2.0


def euclidean_linear_gram(points) -> np.ndarray:
    """Plain linear-kernel Gram of flattened points: K = X X^T."""
    pts = _stack_points(points)
    flat = np.stack([p.ravel() for p in pts])
    k = flat @ flat.T
    return (k + k.T) / 2.0


def psd_check(matrix, tol: float) -> tuple[bool, float]:
    """(min eigenvalue >= -tol, min eigenvalue) for a symmetric matrix."""
    m = require_symmetric(matrix)
    w = np.linalg.eigvalsh(m)
    return bool(w[0] >= -tol), float(w[0])


def cnd_check(matrix, tol: float) -> tuple[bool, float]:
    """Conditionally-negative-semi-definite test via the centering projector.

    With P = I - (1/m) 1 1^T, the matrix M satisfies c^T M c <= 0 for every
    c summing to zero iff P M P has no eigenvalue above 0. Returns
    (max eig of PMP <= tol, max eig of PMP).
    """
    m = require_symmetric(matrix)
    size = m.shape[0]
    p = np.eye(size) - np.full((size, size), 1.0 / size)
    pmp = require_symmetric(p @ m @ p)
    w = np.linalg.eigvalsh(pmp)
    return bool(w[-1] <= tol), float(w[-1])


def sample_spd(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Log-normal SPD sample: exp of a Gaussian symmetric matrix.

    Well conditioned by construction, so distance computations are not
    stressed by near-singularity.
    """
    a = rng.standard_normal((dim, dim))
    return spd_exp((a + a.T) / 2.0)


def sample_grassmann(rng: np.random.Generator, n: int, r: int) -> np.ndarray:
    """Uniform-ish subspace sample: orthonormalized Gaussian n x r matrix."""
    return gr.make_grassmann(rng.standard_normal((n, r)))


@dataclass
class DefinitenessReport:
    """Outcome of a randomized search for Gram-matrix indefiniteness."""

    verdict: str  # "psd_within_tol" | "witness_found"
    min_eigen: float
    gamma: float
    manifold: str
    metric: str
    m: int
    trials_run: int
    gamma_grid: tuple = ()
    alpha: float = DEFAULT_POWER_ALPHA
    witness_seed: int | None = None
    witness_trial: int | None = None
    witness_points: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "min_eigen": self.min_eigen,
            "gamma": self.gamma,
            "manifold": self.manifold,
            "metric": self.metric,
            "m": self.m,
            "trials_run": self.trials_run,
            "gamma_grid": list(self.gamma_grid),
            "alpha": self.alpha,
            "witness_seed": self.witness_seed,
            "witness_trial": self.witness_trial,
            "witness_points": [p.tolist() for p in self.witness_points],
        }


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    # Per-trial streams so trial results do not depend on evaluation order.
    return np.random.default_rng([seed, trial])


def _rayleigh_longdouble(d2, gamma, vec) -> float:
    """High-precision Rayleigh quotient of the Gram built from d2."""
    k = np.exp(-np.longdouble(gamma) * d2.astype(np.longdouble))
    np.fill_diagonal(k, np.longdouble(1.0))
    v = vec.astype(np.longdouble)
    return float((v @ k @ v) / (v @ v))


def definiteness_search(
    manifold: str,
    metric: str,
    gamma_grid,
    m: int = 40,
    trials: int = 50,
    seed: int = 0,
    *,
    dim: int = 3,
    subspace_dim: int = 2,
    alpha: float = DEFAULT_POWER_ALPHA,
) -> DefinitenessReport:
    """Randomized audit of Gaussian-kernel positive definiteness.

    Samples ``trials`` point sets of size ``m``, builds the Gram matrix for
    every gamma in the grid, and reports the first eigenvalue witness below
    ``-WITNESS_TOL_FACTOR * m`` (re-verified with an extended-precision
    Rayleigh quotient before being accepted). Deterministic given
    (seed, grid, m, trials): trial t uses the stream seeded by (seed, t)
    and trials are scanned in index order.
    """
    grid = [float(g) for g in gamma_grid]
    if not grid or any(g <= 0 for g in grid):
        raise BadParamError("gamma grid must be non-empty with positive entries")
    if m < 3:
        raise BadParamError(f"need at least 3 points per trial, got {m}")
    witness_tol = WITNESS_TOL_FACTOR * m
    global_min = np.inf
    global_min_gamma = grid[0]
    trials_run = 0
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        if manifold == "spd":
            points = [sample_spd(rng, dim) for _ in range(m)]
        elif manifold == "grassmann":
            points = [sample_grassmann(rng, dim, subspace_dim) for _ in range(m)]
        elif manifold == "euclidean":
            points = [rng.standard_normal(dim) for _ in range(m)]
        else:
            raise BadParamError(f"unknown manifold {manifold!r}")
        d2 = squared_distance_matrix(manifold, metric, points, alpha=alpha)
        trials_run = trial + 1
        for gamma in grid:
            k = np.exp(-gamma * d2)
            np.fill_diagonal(k, 1.0)
            w, u = np.linalg.eigh(k)
            if w[0] < global_min:
                global_min = float(w[0])
                global_min_gamma = gamma
            if w[0] < -witness_tol:
                rayleigh = _rayleigh_longdouble(d2, gamma, u[:, 0])
                if rayleigh < -witness_tol:
                    return DefinitenessReport(
                        verdict="witness_found",
                        min_eigen=float(w[0]),
                        gamma=gamma,
                        manifold=manifold,
                        metric=metric,
                        m=m,
                        trials_run=trials_run,
                        gamma_grid=tuple(grid),
                        alpha=alpha,
                        witness_seed=seed,
                        witness_trial=trial,
                        witness_points=points,
                    )
    return DefinitenessReport(
        verdict="psd_within_tol",
        min_eigen=float(global_min),
        gamma=global_min_gamma,
        manifold=manifold,
        metric=metric,
        m=m,
        trials_run=trials_run,
        gamma_grid=tuple(grid),
        alpha=alpha,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def gram_to_csv(gram: GramMatrix, path, extra_header: list[str] | None = None) -> None:
    """Row-major CSV with a one-line `key=value` header comment."""
    spec = gram.spec
    lines = []
    for line in extra_header or []:
        lines.append(f"# {line}")
    header = (
        f"# m={gram.size} gamma={spec.gamma!r} manifold={spec.manifold}"
        f" metric={spec.metric} alpha={spec.alpha!r}"
    )
    if gram.min_eigen is not None:
        header += f" min_eigen={gram.min_eigen!r}"
    lines.append(header)
    for row in gram.entries:
        lines.append(",".join(repr(float(x)) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def gram_from_csv(path) -> GramMatrix:
    """Read a Gram matrix written by :func:`gram_to_csv`."""
    meta: dict[str, str] = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, val = token.split("=", 1)
                        meta[key] = val
                continue
            rows.append([float(x) for x in line.split(",")])
    spec = KernelSpec(
        manifold=meta["manifold"],
        metric=meta["metric"],
        gamma=float(meta["gamma"]),
        alpha=float(meta.get("alpha", DEFAULT_POWER_ALPHA)),
    )
    min_eigen = float(meta["min_eigen"]) if "min_eigen" in meta else None
    return GramMatrix(entries=np.array(rows), spec=spec, min_eigen=min_eigen)


def gram_to_json(gram: GramMatrix, path, provenance: dict | None = None) -> None:
    payload = {
        "spec": gram.spec.to_dict(),
        "m": gram.size,
        "entries": gram.entries.tolist(),
        "min_eigen": gram.min_eigen,
    }
    if provenance is not None:
        payload["provenance"] = provenance
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def gram_from_json(path) -> GramMatrix:
    with open(path) as fh:
        payload = json.load(fh)
    return GramMatrix(
        entries=np.array(payload["entries"], dtype=float),
        spec=KernelSpec.from_dict(payload["spec"]),
        min_eigen=payload.get("min_eigen"),
    )
