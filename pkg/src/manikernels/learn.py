"""Kernelized learning algorithms over precomputed Gram matrices.

Every algorithm here sees only kernel evaluations, never explicit
feature vectors, so the same code serves any manifold (or plain
Euclidean data) once a Gram matrix has been built. Inputs may be plain
``numpy`` arrays or :class:`~manikernels.kernels.GramMatrix` instances.

Determinism: tie-breaks always pick the lowest index, restarts derive
their seeds as ``seed + restart_index``, and nothing depends on
evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    BadParamError,
    DimMismatchError,
    NoConvergenceError,
    NotPsdError,
    OneClassError,
    SingularScatterError,
)
from .kernels import GramMatrix, KernelSpec
from .matrixops import require_symmetric

#: Default KKT tolerance for the SMO solver.
KKT_TOL = 1e-3

#: Default number of k-means restarts.
DEFAULT_RESTARTS = 20

#: Eigenvalue audit slack per matrix row for PSD preconditions.
PSD_TOL_FACTOR = 1e-8


def as_kernel_array(k) -> np.ndarray:
    """Symmetrized ndarray from a GramMatrix or array-like kernel matrix."""
    if isinstance(k, GramMatrix):
        k = k.entries
    return require_symmetric(np.asarray(k, dtype=float))


def _require_psd(k: np.ndarray) -> None:
    m = k.shape[0]
    w = np.linalg.eigvalsh(k)
    if w[0] < -PSD_TOL_FACTOR * m:
        raise NotPsdError(f"kernel matrix has eigenvalue {w[0]:.3e} below -{PSD_TOL_FACTOR * m:.1e}")


# ---------------------------------------------------------------------------
# Kernel k-means
# ---------------------------------------------------------------------------

@dataclass
class ClusterResult:
    labels: np.ndarray  # (m,) ints in [0, k)
    energy: float  # sum of squared RKHS distances to assigned centroids
    restarts_used: int
    energy_trace: list = field(default_factory=list)  # per-iteration, winning run


def _centroid_sq_dists(k: np.ndarray, labels: np.ndarray, n_clusters: int):
    """dist2[i, c] = ||phi(x_i) - mu_c||^2 for the centroids implied by labels.

    Empty clusters get +inf columns; caller repairs them.
    """
    m = k.shape[0]
    z = np.zeros((m, n_clusters))
    z[np.arange(m), labels] = 1.0
    counts = z.sum(axis=0)
    sums = k @ z  # sums[i, c] = sum_{j in c} K_ij
    within = np.einsum("ic,ic->c", z, sums)  # sum_{p,q in c} K_pq
    dist2 = np.full((m, n_clusters), np.inf)
    nonempty = counts > 0
    dist2[:, nonempty] = (
        np.diag(k)[:, None]
        - 2.0 * sums[:, nonempty] / counts[nonempty]
        + within[nonempty] / counts[nonempty] ** 2
    )
    np.maximum(dist2, 0.0, out=dist2)
    return dist2, counts


def _repair_empty(k, labels, n_clusters):
    """Reseed each empty cluster with the point farthest from its centroid."""
    labels = labels.copy()
    while True:
        dist2, counts = _centroid_sq_dists(k, labels, n_clusters)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return labels, dist2
        cur = dist2[np.arange(len(labels)), labels]
        # only points whose cluster keeps >= 1 member stay eligible
        movable = counts[labels] >= 2
        cur = np.where(movable, cur, -np.inf)
        farthest = int(np.argmax(cur))
        labels[farthest] = empty[0]


def _kmeanspp_init(k: np.ndarray, n_clusters: int, rng: np.random.Generator):
    """RKHS k-means++ seeding: next center drawn with probability
    proportional to the squared distance to the nearest chosen center."""
    m = k.shape[0]
    diag = np.diag(k)
    centers = [int(rng.integers(m))]
    d2 = np.maximum(diag - 2.0 * k[:, centers[0]] + diag[centers[0]], 0.0)
    for _ in range(1, n_clusters):
        total = d2.sum()
        if total <= 0.0:
            remaining = np.setdiff1d(np.arange(m), centers)
            nxt = int(remaining[rng.integers(remaining.size)])
        else:
            nxt = int(rng.choice(m, p=d2 / total))
        centers.append(nxt)
        d2 = np.minimum(d2, np.maximum(diag - 2.0 * k[:, nxt] + diag[nxt], 0.0))
    center_d2 = diag[:, None] - 2.0 * k[:, centers] + diag[centers][None, :]
    return np.argmin(center_d2, axis=1)


def _lloyd_converge(k, labels, n_clusters, max_iter, trace):
    m = k.shape[0]
    for _ in range(max_iter):
        labels, dist2 = _repair_empty(k, labels, n_clusters)
        trace.append(float(dist2[np.arange(m), labels].sum()))
        new_labels = np.argmin(dist2, axis=1)
        # points move only on strict improvement; ties keep the current
        # cluster so duplicate points cannot oscillate
        stay = dist2[np.arange(m), labels] <= dist2[np.arange(m), new_labels]
        new_labels = np.where(stay, labels, new_labels)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels


def _best_single_move(k, labels, n_clusters):
    """Most energy-reducing single-point reassignment, or None.

    Moving x from cluster a (size na) to c (size nc) changes the objective
    by nc/(nc+1) * d2(x, mu_c) - na/(na-1) * d2(x, mu_a); clusters are
    never emptied.
    """
    m = k.shape[0]
    dist2, counts = _centroid_sq_dists(k, labels, n_clusters)
    own = counts[labels].astype(float)
    remove_gain = np.where(own > 1, own / np.maximum(own - 1, 1) * dist2[np.arange(m), labels], -np.inf)
    # a move into an empty cluster creates a zero-energy singleton
    add_cost = np.zeros_like(dist2)
    nonempty = counts > 0
    add_cost[:, nonempty] = counts[nonempty] / (counts[nonempty] + 1.0) * dist2[:, nonempty]
    delta = add_cost - remove_gain[:, None]
    delta[np.arange(m), labels] = np.inf
    flat = int(np.argmin(delta))
    i, c = divmod(flat, n_clusters)
    if delta[i, c] < -1e-12:
        return i, c
    return None


def _lloyd_run(
    k: np.ndarray,
    n_clusters: int,
    rng: np.random.Generator,
    max_iter: int,
    random_partition: bool = False,
):
    m = k.shape[0]
    if random_partition:
        labels = rng.integers(n_clusters, size=m)
    else:
        labels = _kmeanspp_init(k, n_clusters, rng)
    trace = []
    for _ in range(max_iter):
        labels = _lloyd_converge(k, labels, n_clusters, max_iter, trace)
        # single-point polish: batch Lloyd alone stalls in shallow local
        # minima on small instances
        move = _best_single_move(k, labels, n_clusters)
        if move is None:
            break
        labels = labels.copy()
        labels[move[0]] = move[1]
    labels, dist2 = _repair_empty(k, labels, n_clusters)
    energy = float(dist2[np.arange(m), labels].sum())
    if not trace or energy < trace[-1]:
        trace.append(energy)
    return labels, energy, trace


def kernel_kmeans(
    k,
    n_clusters: int,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = 100,
    seed: int = 0,
) -> ClusterResult:
    """Lloyd iterations in the RKHS defined by the kernel matrix.

    ||phi(x) - mu_c||^2 expands to K_xx - (2/|c|) sum_{j in c} K_xj
    + (1/|c|^2) sum_{p,q in c} K_pq, so only kernel entries are needed.
    Runs ``restarts`` seeded initializations and keeps the lowest-energy
    run; empty clusters are reseeded with the point farthest from its
    current centroid.
    """
    k = as_kernel_array(k)
    m = k.shape[0]
    if n_clusters < 1 or n_clusters > m:
        raise BadParamError(f"need 1 <= k <= {m}, got {n_clusters}")
    if restarts < 1:
        raise BadParamError("need at least one restart")
    _require_psd(k)
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        # alternate seeding styles for initialization diversity
        labels, energy, trace = _lloyd_run(
            k, n_clusters, rng, max_iter, random_partition=bool(r % 2)
        )
        if best is None or energy < best[1]:
            best = (labels, energy, trace)
    labels, energy, trace = best
    return ClusterResult(
        labels=labels.astype(int),
        energy=energy,
        restarts_used=restarts,
        energy_trace=trace,
    )


# ---------------------------------------------------------------------------
# Kernel PCA
# ---------------------------------------------------------------------------

@dataclass
class Embedding:
    coords: np.ndarray  # (m, l)
    eigenvalues: np.ndarray  # (l,)
    weights: np.ndarray | None = None  # (m, l) out-of-sample projection coefficients


def _fix_column_signs(*mats):
    """Flip columns (jointly across mats) so the largest-|entry| of the first
    matrix's column is positive; deterministic tie-break via argmax."""
    lead = mats[0]
    for c in range(lead.shape[1]):
        j = int(np.argmax(np.abs(lead[:, c])))
        if lead[j, c] < 0:
            for mat in mats:
                mat[:, c] = -mat[:, c]


def kernel_pca(k, n_components: int) -> Embedding:
    """Principal directions of the kernel-induced feature cloud.

    Double-centers the kernel matrix, eigendecomposes it, and returns
    per-point coordinates scaled so the c-th column has squared norm equal
    to the c-th eigenvalue. Column signs follow the convention that the
    largest-magnitude coordinate is positive.
    """
    k = as_kernel_array(k)
    m = k.shape[0]
    if n_components < 1 or n_components > m:
        raise BadParamError(f"need 1 <= l <= {m}, got {n_components}")
    h = np.eye(m) - np.full((m, m), 1.0 / m)
    kc = require_symmetric(h @ k @ h)
    w, u = np.linalg.eigh(kc)
    if w[0] < -PSD_TOL_FACTOR * m:
        raise NotPsdError(f"centered kernel has eigenvalue {w[0]:.3e}")
    w = w[::-1][:n_components].copy()
    u = u[:, ::-1][:, :n_components].copy()
    coords = u * np.sqrt(np.maximum(w, 0.0))
    _fix_column_signs(coords, u)
    return Embedding(coords=coords, eigenvalues=w)


# ---------------------------------------------------------------------------
# Kernel FDA
# ---------------------------------------------------------------------------

def kernel_fda(k, labels, ridge: float | None = None, dims: int | None = None) -> Embedding:
    """Kernel Fisher discriminant projections.

    Solves the generalized eigenproblem between-class vs within-class
    scatter in the RKHS, the within-class part regularized by
    ``ridge * I`` (default 1e-4 * trace(W) / m). Returns the training
    projections plus the coefficient matrix for out-of-sample use via
    :func:`fda_project`.
    """
    k = as_kernel_array(k)
    m = k.shape[0]
    labels = np.asarray(labels)
    if labels.shape != (m,):
        raise DimMismatchError(f"labels shape {labels.shape} != ({m},)")
    classes = np.unique(labels)
    n_classes = len(classes)
    if n_classes < 2:
        raise BadParamError("kernel FDA needs at least two classes")
    if dims is None:
        dims = n_classes - 1
    if dims < 1 or dims > n_classes - 1:
        raise BadParamError(f"need 1 <= dims <= {n_classes - 1}, got {dims}")
    mu = k.mean(axis=1)
    between = np.zeros((m, m))
    within = np.zeros((m, m))
    for cls in classes:
        idx = np.flatnonzero(labels == cls)
        kc = k[:, idx]
        mu_c = kc.mean(axis=1)
        diff = mu_c - mu
        between += idx.size * np.outer(diff, diff)
        centering = np.eye(idx.size) - np.full((idx.size, idx.size), 1.0 / idx.size)
        within += kc @ centering @ kc.T
    if ridge is None:
        ridge = 1e-4 * float(np.trace(within)) / m
        if ridge <= 0.0:
            # zero within-scatter (duplicated points per class) still needs
            # a strictly positive regularizer to pose the eigenproblem
            ridge = 1e-8 * float(np.trace(k)) / m
    if ridge < 0:
        raise BadParamError(f"ridge must be non-negative, got {ridge}")
    n_mat = require_symmetric(within + ridge * np.eye(m))
    try:
        w, a = scipy.linalg.eigh(require_symmetric(between), n_mat)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise SingularScatterError(
            "within-class scatter is singular; pass a positive ridge"
        ) from exc
    w = w[::-1][:dims].copy()
    a = a[:, ::-1][:, :dims].copy()
    coords = k @ a
    _fix_column_signs(coords, a)
    return Embedding(coords=coords, eigenvalues=w, weights=a)


def fda_project(embedding: Embedding, kernel_columns) -> np.ndarray:
    """Project out-of-sample points given their kernel columns (m x t)."""
    if embedding.weights is None:
        raise BadParamError("embedding has no projection coefficients")
    cols = np.asarray(kernel_columns, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.shape[0] != embedding.weights.shape[0]:
        raise DimMismatchError(
            f"kernel columns have {cols.shape[0]} rows, expected {embedding.weights.shape[0]}"
        )
    return cols.T @ embedding.weights


# ---------------------------------------------------------------------------
# Binary SVM (SMO)
# ---------------------------------------------------------------------------

@dataclass
class SvmModel:
    dual_coefs: np.ndarray  # alpha_i * y_i, full length m
    bias: float
    support_indices: np.ndarray
    C: float
    spec: KernelSpec | None = None
    kkt_violation: float = 0.0
    n_iter: int = 0


def svm_train(
    k,
    y,
    C: float,
    kkt_tol: float = KKT_TOL,
    max_iter: int = 100_000,
    spec: KernelSpec | None = None,
) -> SvmModel:
    """Soft-margin dual SVM solved by sequential minimal optimization.

    Works on the maximal-KKT-violating pair until the violation gap drops
    below ``kkt_tol``. The bias averages y_i - sum_j alpha_j y_j K_ij over
    unbounded support vectors (midpoint of the feasible interval when
    none are unbounded).
    """
    k = as_kernel_array(k)
    m = k.shape[0]
    y = np.asarray(y, dtype=float).ravel()
    if y.shape != (m,):
        raise DimMismatchError(f"labels shape {y.shape} != ({m},)")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise BadParamError("labels must be -1/+1")
    if len(np.unique(y)) < 2:
        raise OneClassError("training labels contain a single class")
    if C <= 0:
        raise BadParamError(f"C must be positive, got {C}")
    _require_psd(k)

    q = (y[:, None] * y[None, :]) * k
    alpha = np.zeros(m)
    grad = -np.ones(m)  # gradient of (1/2) a^T Q a - sum(a)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        f = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(f[up])])
        j = int(np.flatnonzero(low)[np.argmin(f[low])])
        gap = f[i] - f[j]
        if gap <= kkt_tol:
            break
        curv = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if curv <= 0:
            curv = 1e-12
        cap_i = (C - alpha[i]) if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else (C - alpha[j])
        step = min(gap / curv, cap_i, cap_j)
        d_i = y[i] * step
        d_j = -y[j] * step
        alpha[i] = min(max(alpha[i] + d_i, 0.0), C)
        alpha[j] = min(max(alpha[j] + d_j, 0.0), C)
        grad += q[:, i] * d_i + q[:, j] * d_j
    else:
        raise NoConvergenceError(f"SMO did not converge in {max_iter} iterations")

    f = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    violation = 0.0
    if up.any() and low.any():
        violation = max(float(f[up].max() - f[low].min()), 0.0)
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(f[free].mean())
    elif up.any() and low.any():
        bias = float((f[up].max() + f[low].min()) / 2.0)
    else:
        bias = 0.0
    return SvmModel(
        dual_coefs=alpha * y,
        bias=bias,
        support_indices=np.flatnonzero(alpha > 0),
        C=C,
        spec=spec,
        kkt_violation=violation,
        n_iter=n_iter,
    )


def svm_decision(model: SvmModel, kernel_columns) -> np.ndarray:
    """Decision values f(x) = sum_i dual_coefs_i k(x_i, x) + bias.

    ``kernel_columns`` holds one column per test point (m x t).
    """
    cols = np.asarray(kernel_columns, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.shape[0] != model.dual_coefs.shape[0]:
        raise DimMismatchError(
            f"kernel columns have {cols.shape[0]} rows, expected {model.dual_coefs.shape[0]}"
        )
    return model.dual_coefs @ cols + model.bias


def svm_predict(model: SvmModel, kernel_columns) -> np.ndarray:
    """Class labels in {-1, +1}; ties at 0 go positive."""
    return np.where(svm_decision(model, kernel_columns) >= 0, 1, -1)


def svm_objectives(model: SvmModel, k, y) -> tuple[float, float]:
    """(dual, primal) objective values of a trained model.

    dual = sum(alpha) - (1/2) dc^T K dc, primal = (1/2) dc^T K dc
    + C * sum(hinge); their gap certifies solution quality.
    """
    k = as_kernel_array(k)
    y = np.asarray(y, dtype=float).ravel()
    dc = model.dual_coefs
    quad = float(dc @ k @ dc)
    dual = float(np.sum(np.abs(dc))) - 0.5 * quad
    margins = y * (k @ dc + model.bias)
    primal = 0.5 * quad + model.C * float(np.sum(np.maximum(0.0, 1.0 - margins)))
    return dual, primal


# ---------------------------------------------------------------------------
# Multiclass wrappers
# ---------------------------------------------------------------------------

@dataclass
class MulticlassSvmModel:
    mode: str  # "one-vs-all" | "one-vs-one"
    classes: np.ndarray
    models: list
    pair_indices: list | None = None  # training-subset indices per pair (ovo)
    pairs: list | None = None  # (class_a, class_b) per model (ovo)


def multiclass_svm_train(
    k,
    y,
    C: float,
    mode: str = "one-vs-all",
    kkt_tol: float = KKT_TOL,
    max_iter: int = 100_000,
) -> MulticlassSvmModel:
    """One-vs-all or one-vs-one reduction to binary SVMs."""
    k = as_kernel_array(k)
    y = np.asarray(y).ravel()
    classes = np.unique(y)
    if len(classes) < 2:
        raise OneClassError("need at least two classes")
    if mode not in ("one-vs-all", "one-vs-one"):
        raise BadParamError(f"unknown multiclass mode {mode!r}")
    if mode == "one-vs-all":
        models = []
        for cls in classes:
            y_bin = np.where(y == cls, 1.0, -1.0)
            models.append(svm_train(k, y_bin, C, kkt_tol=kkt_tol, max_iter=max_iter))
        return MulticlassSvmModel(mode=mode, classes=classes, models=models)
    models, pair_indices, pairs = [], [], []
    for a in range(len(classes)):
        for b in range(a + 1, len(classes)):
            idx = np.flatnonzero((y == classes[a]) | (y == classes[b]))
            y_bin = np.where(y[idx] == classes[a], 1.0, -1.0)
            sub = k[np.ix_(idx, idx)]
            models.append(svm_train(sub, y_bin, C, kkt_tol=kkt_tol, max_iter=max_iter))
            pair_indices.append(idx)
            pairs.append((classes[a], classes[b]))
    return MulticlassSvmModel(
        mode=mode, classes=classes, models=models, pair_indices=pair_indices, pairs=pairs
    )


def multiclass_svm_decision(model: MulticlassSvmModel, kernel_columns) -> np.ndarray:
    """Per-class scores (n_classes x t): decision values for one-vs-all,
    vote counts (with summed-decision tie info folded in) for one-vs-one."""
    cols = np.asarray(kernel_columns, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    if model.mode == "one-vs-all":
        return np.stack([svm_decision(mdl, cols) for mdl in model.models])
    votes = np.zeros((len(model.classes), cols.shape[1]))
    sums = np.zeros_like(votes)
    class_pos = {c: i for i, c in enumerate(model.classes)}
    for mdl, idx, (cls_a, cls_b) in zip(model.models, model.pair_indices, model.pairs):
        dec = svm_decision(mdl, cols[idx, :])
        ia, ib = class_pos[cls_a], class_pos[cls_b]
        votes[ia] += dec >= 0
        votes[ib] += dec < 0
        sums[ia] += dec
        sums[ib] -= dec
    # fold summed decisions in as a strictly-smaller tie-break term
    scale = 1.0 / (4.0 * (1.0 + np.max(np.abs(sums))))
    return votes + sums * scale


def multiclass_svm_predict(model: MulticlassSvmModel, kernel_columns) -> np.ndarray:
    """Predicted class ids; ties go to the lowest class id."""
    scores = multiclass_svm_decision(model, kernel_columns)
    return model.classes[np.argmax(scores, axis=0)]


# ---------------------------------------------------------------------------
# Multiple kernel learning
# ---------------------------------------------------------------------------

@dataclass
class MklModel:
    weights: np.ndarray  # simplex weights over the kernel list
    svm: SvmModel
    objective_trace: list


def combine_kernels(kernels, weights) -> np.ndarray:
    mats = [as_kernel_array(k) for k in kernels]
    out = np.zeros_like(mats[0])
    for w, mat in zip(weights, mats):
        out += w * mat
    return out


def mkl_train(
    kernels,
    y,
    C: float,
    max_outer_iter: int = 50,
    tol: float = 1e-6,
    kkt_tol: float = KKT_TOL,
) -> MklModel:
    """Simplex-constrained multiple kernel learning around an SVM.

    Minimizes the optimal SVM objective J(lambda) of the combined kernel
    K(lambda) = sum_j lambda_j K_j over the unit simplex, alternating an
    SVM solve (lambda fixed) with a reduced-gradient descent step on
    lambda (dual fixed; dJ/dlambda_j = -(1/2) dc^T K_j dc), with a
    backtracking line search that only accepts non-increasing objectives.
    """
    mats = [as_kernel_array(k) for k in kernels]
    if not mats:
        raise BadParamError("need at least one kernel")
    size = mats[0].shape
    for mat in mats:
        if mat.shape != size:
            raise DimMismatchError("kernel matrices differ in size")
        _require_psd(mat)
    n_kernels = len(mats)
    lam = np.full(n_kernels, 1.0 / n_kernels)

    def solve(weights):
        combined = combine_kernels(mats, weights)
        model = svm_train(combined, y, C, kkt_tol=kkt_tol)
        dual, _ = svm_objectives(model, combined, y)
        return model, dual

    model, objective = solve(lam)
    trace = [objective]
    for _ in range(max_outer_iter):
        dc = model.dual_coefs
        grad = np.array([-0.5 * float(dc @ mat @ dc) for mat in mats])
        pivot = int(np.argmax(lam))
        direction = -(grad - grad[pivot])
        direction[(lam <= 0) & (direction < 0)] = 0.0
        direction[pivot] = 0.0
        direction[pivot] = -direction.sum()
        if np.linalg.norm(direction) < 1e-14:
            break
        neg = direction < 0
        step = float(np.min(lam[neg] / -direction[neg]))
        accepted = False
        for _ in range(20):
            trial = np.clip(lam + step * direction, 0.0, None)
            trial /= trial.sum()
            trial_model, trial_objective = solve(trial)
            if trial_objective <= objective:
                lam, model, objective = trial, trial_model, trial_objective
                accepted = True
                break
            step /= 2.0
        if not accepted:
            break
        trace.append(objective)
        if len(trace) >= 2 and trace[-2] - trace[-1] < tol:
            break
    return MklModel(weights=lam, svm=model, objective_trace=trace)
