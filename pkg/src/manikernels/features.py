"""Image-to-SPD descriptor extraction.

Pixel feature stacks, integral-image region covariance, dispersion-ranked
subwindow selection, and spatio-temporal structure tensors. Images are
2-d float arrays; rectangles are (x0, y0, w, h) with x along columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import (
    BadParamError,
    FrameMismatchError,
    NoPositivesError,
    RectOutOfBoundsError,
    TooFewPixelsError,
    TooSmallError,
)
from .spd import dispersion_stat, karcher_mean_log_euclidean, make_spd

DERIV_EPS = 1e-8

PEDESTRIAN_CHANNELS = ("x", "y", "|Ix|", "|Iy|", "grad_mag", "|Ixx|", "|Iyy|", "grad_angle")
TEXTURE_CHANNELS = ("I", "|Ix|", "|Iy|", "|Ixx|", "|Iyy|")


@dataclass(frozen=True)
class FeatureStack:
    """Named per-pixel feature planes sharing one image grid."""

    channels: np.ndarray  # (c, h, w)
    names: tuple

    @property
    def depth(self) -> int:
        return self.channels.shape[0]

    @property
    def height(self) -> int:
        return self.channels.shape[1]

    @property
    def width(self) -> int:
        return self.channels.shape[2]


def _dx(img):
    p = np.pad(img, ((0, 0), (1, 1)), mode="edge")
    return (p[:, 2:] - p[:, :-2]) / 2.0


def _dy(img):
    p = np.pad(img, ((1, 1), (0, 0)), mode="edge")
    return (p[2:, :] - p[:-2, :]) / 2.0


def _dxx(img):
    p = np.pad(img, ((0, 0), (1, 1)), mode="edge")
    return p[:, 2:] - 2.0 * p[:, 1:-1] + p[:, :-2]


def _dyy(img):
    p = np.pad(img, ((1, 1), (0, 0)), mode="edge")
    return p[2:, :] - 2.0 * p[1:-1, :] + p[:-2, :]


def _as_image(image) -> np.ndarray:
    img = np.asarray(image, dtype=float)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise TooSmallError(f"need a grayscale image of at least 3 x 3, got shape {img.shape}")
    return img


def pedestrian_feature_maps(image) -> FeatureStack:
    """8-channel stack [x, y, |Ix|, |Iy|, sqrt(Ix^2+Iy^2), |Ixx|, |Iyy|,
    arctan(|Ix|/|Iy|)], derivatives by central differences with replicated
    borders. The angle channel floors |Iy| at DERIV_EPS."""
    img = _as_image(image)
    h, w = img.shape
    ix, iy = _dx(img), _dy(img)
    ixx, iyy = _dxx(img), _dyy(img)
    xs = np.tile(np.arange(w, dtype=float), (h, 1))
    ys = np.tile(np.arange(h, dtype=float)[:, None], (1, w))
    channels = np.stack(
        [
            xs,
            ys,
            np.abs(ix),
            np.abs(iy),
            np.sqrt(ix**2 + iy**2),
            np.abs(ixx),
            np.abs(iyy),
            np.arctan(np.abs(ix) / np.maximum(np.abs(iy), DERIV_EPS)),
        ]
    )
    return FeatureStack(channels=channels, names=PEDESTRIAN_CHANNELS)


def texture_feature_maps(image) -> FeatureStack:
    """5-channel stack [I, |Ix|, |Iy|, |Ixx|, |Iyy|]."""
    img = _as_image(image)
    channels = np.stack(
        [img, np.abs(_dx(img)), np.abs(_dy(img)), np.abs(_dxx(img)), np.abs(_dyy(img))]
    )
    return FeatureStack(channels=channels, names=TEXTURE_CHANNELS)


# ---------------------------------------------------------------------------
# Region covariance via integral images
# ---------------------------------------------------------------------------

def integral_images(stack: FeatureStack):
    """First- and second-order integral images of a feature stack.

    Zero-padded so a rectangle sum is a four-corner combination.
    """
    ch = stack.channels
    c, h, w = ch.shape
    s1 = np.zeros((c, h + 1, w + 1))
    s1[:, 1:, 1:] = ch.cumsum(axis=1).cumsum(axis=2)
    prods = ch[:, None, :, :] * ch[None, :, :, :]
    s2 = np.zeros((c, c, h + 1, w + 1))
    s2[:, :, 1:, 1:] = prods.cumsum(axis=2).cumsum(axis=3)
    return s1, s2


def _rect_bounds(stack: FeatureStack, rect):
    x0, y0, w, h = (int(v) for v in rect)
    if w < 1 or h < 1 or x0 < 0 or y0 < 0 or x0 + w > stack.width or y0 + h > stack.height:
        raise RectOutOfBoundsError(
            f"rect {rect} outside {stack.height} x {stack.width} stack"
        )
    return x0, y0, w, h


def region_covariance(stack: FeatureStack, rect, epsilon: float | None = None, integrals=None):
    """Sample covariance of the per-pixel feature vectors in ``rect``,
    regularized by ``epsilon * I`` (default 1e-6 * (trace + 1)).

    Computed from integral images so many rectangles of one stack share
    the same cumulative sums (pass ``integrals`` to reuse them).
    """
    x0, y0, w, h = _rect_bounds(stack, rect)
    c = stack.depth
    n = w * h
    if n < c + 1:
        raise TooFewPixelsError(f"rect area {n} below {c + 1} for {c} channels")
    if integrals is None:
        integrals = integral_images(stack)
    s1, s2 = integrals
    ya, yb, xa, xb = y0, y0 + h, x0, x0 + w
    sums = s1[:, yb, xb] - s1[:, ya, xb] - s1[:, yb, xa] + s1[:, ya, xa]
    quads = s2[:, :, yb, xb] - s2[:, :, ya, xb] - s2[:, :, yb, xa] + s2[:, :, ya, xa]
    cov = (quads - np.outer(sums, sums) / n) / (n - 1)
    cov = (cov + cov.T) / 2.0
    if epsilon is None:
        epsilon = 1e-6 * (float(np.trace(cov)) + 1.0)
    if epsilon <= 0:
        raise BadParamError(f"epsilon must be positive, got {epsilon}")
    return make_spd(cov + epsilon * np.eye(c))


def normalize_by_full_window(cov_sub, cov_full) -> np.ndarray:
    """Rescale a subwindow covariance by the full-window channel scales:
    diag(C_full)^{-1/2} C_sub diag(C_full)^{-1/2}. A diagonal congruence,
    so SPD-ness is preserved."""
    cov_sub = np.asarray(cov_sub, dtype=float)
    scale = 1.0 / np.sqrt(np.maximum(np.diag(np.asarray(cov_full, dtype=float)), 1e-300))
    return cov_sub * np.outer(scale, scale)


# ---------------------------------------------------------------------------
# Subwindow candidates and selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubwindowSpec:
    rect: tuple  # (x0, y0, w, h), window-relative pixels
    score: float | None = None


def candidate_grid(height: int, width: int, steps: int = 5, min_side: int = 3):
    """Candidate subwindows with sizes in ``steps`` geometric increments
    from (h/5, w/5) up to the full window, placed at strides of a quarter
    of the subwindow side."""
    if steps < 1:
        raise BadParamError("steps must be >= 1")
    heights = sorted({max(min_side, int(round(v))) for v in np.geomspace(height / 5.0, height, steps)})
    widths = sorted({max(min_side, int(round(v))) for v in np.geomspace(width / 5.0, width, steps)})
    rects = []
    for sh in heights:
        if sh > height:
            continue
        for sw in widths:
            if sw > width:
                continue
            step_y = max(1, sh // 4)
            step_x = max(1, sw // 4)
            ys = list(range(0, height - sh + 1, step_y))
            if ys[-1] != height - sh:
                ys.append(height - sh)
            xs = list(range(0, width - sw + 1, step_x))
            if xs[-1] != width - sw:
                xs.append(width - sw)
            for y0 in ys:
                for x0 in xs:
                    rects.append(SubwindowSpec(rect=(x0, y0, sw, sh)))
    return rects


def overlap_ratio(rect_a, rect_b) -> float:
    """Intersection area over the smaller rectangle's area."""
    ax, ay, aw, ah = rect_a
    bx, by, bw, bh = rect_b
    ix = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    return inter / min(aw * ah, bw * bh)


def select_subwindows(candidates, descriptors, positives, count: int, max_overlap: float):
    """Greedy low-dispersion subwindow selection.

    ``descriptors[i][j]`` is the SPD descriptor of candidate ``j`` in
    sample ``i``. Each candidate is scored by the mean distance (p = 1,
    log-Euclidean) of the positive samples' descriptors to their Karcher
    mean; candidates are taken in ascending score order, skipping any
    overlapping an already-selected one by more than ``max_overlap``.
    """
    if count < 1:
        raise BadParamError("count must be >= 1")
    if not 0.0 <= max_overlap < 1.0:
        raise BadParamError(f"max_overlap must be in [0, 1), got {max_overlap}")
    positives = np.asarray(positives, dtype=bool)
    pos_idx = np.flatnonzero(positives)
    if pos_idx.size == 0:
        raise NoPositivesError("subwindow ranking needs at least one positive sample")
    n_candidates = len(candidates)
    scores = np.empty(n_candidates)
    for j in range(n_candidates):
        descs = [np.asarray(descriptors[i][j], dtype=float) for i in pos_idx]
        mean = karcher_mean_log_euclidean(descs)
        scores[j] = dispersion_stat("log-euclidean", descs, 1.0, mean)
    order = np.argsort(scores, kind="stable")
    selected = []
    for j in order:
        rect = candidates[j].rect
        if all(overlap_ratio(rect, s.rect) <= max_overlap for s in selected):
            selected.append(SubwindowSpec(rect=tuple(rect), score=float(scores[j])))
            if len(selected) == count:
                break
    return selected


# ---------------------------------------------------------------------------
# Spatio-temporal structure tensors
# ---------------------------------------------------------------------------

def structure_tensor_field(frames, smoothing_sigma: float, epsilon: float = 1e-6) -> np.ndarray:
    """Per-pixel 3x3 structure tensors from 2 or 3 frames.

    The gradient (Ix, Iy, It) takes spatial derivatives on the reference
    frame (first of 2, middle of 3) and the temporal derivative across
    the frames; the outer product field is smoothed channel-wise with a
    Gaussian of ``smoothing_sigma`` and shifted by ``epsilon * I``.
    Returns an (h, w, 3, 3) array.
    """
    imgs = [np.asarray(f, dtype=float) for f in frames]
    if len(imgs) not in (2, 3):
        raise FrameMismatchError(f"need 2 or 3 frames, got {len(imgs)}")
    shape = imgs[0].shape
    for f in imgs:
        if f.shape != shape or f.ndim != 2:
            raise FrameMismatchError("frames must share one 2-d shape")
    if shape[0] < 3 or shape[1] < 3:
        raise TooSmallError(f"frames too small for derivatives: {shape}")
    if len(imgs) == 2:
        ref = imgs[0]
        it = imgs[1] - imgs[0]
    else:
        ref = imgs[1]
        it = (imgs[2] - imgs[0]) / 2.0
    grads = np.stack([_dx(ref), _dy(ref), it])  # (3, h, w)
    prods = grads[:, None, :, :] * grads[None, :, :, :]  # (3, 3, h, w)
    if smoothing_sigma > 0:
        smoothed = np.empty_like(prods)
        for a in range(3):
            for b in range(3):
                smoothed[a, b] = gaussian_filter(prods[a, b], smoothing_sigma, mode="nearest")
    else:
        smoothed = prods
    tensors = smoothed.transpose(2, 3, 0, 1).copy()
    tensors += epsilon * np.eye(3)
    return tensors


# ---------------------------------------------------------------------------
# Image file readers
# ---------------------------------------------------------------------------

def read_pgm(path) -> np.ndarray:
    """P2 (ascii) or P5 (binary) PGM as a float array."""
    with open(path, "rb") as fh:
        data = fh.read()

    def tokens(buf):
        i = 0
        while i < len(buf):
            if buf[i : i + 1].isspace():
                i += 1
                continue
            if buf[i : i + 1] == b"#":
                j = buf.find(b"\n", i)
                i = len(buf) if j < 0 else j + 1
                continue
            j = i
            while j < len(buf) and not buf[j : j + 1].isspace():
                j += 1
            yield buf[i:j], j
            i = j

    gen = tokens(data)
    magic, _ = next(gen)
    if magic not in (b"P2", b"P5"):
        raise BadParamError(f"not a P2/P5 PGM file: magic {magic!r}")
    (w_tok, _), (h_tok, _), (max_tok, end) = next(gen), next(gen), next(gen)
    width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    if magic == b"P2":
        vals = []
        for tok, _ in gen:
            vals.append(int(tok))
        arr = np.array(vals, dtype=float)
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        raster = data[end + 1 :]
        arr = np.frombuffer(raster, dtype=dtype, count=width * height).astype(float)
    if arr.size != width * height:
        raise BadParamError(f"PGM raster holds {arr.size} values, expected {width * height}")
    return arr.reshape(height, width)


def write_pgm(path, image, maxval: int = 255) -> None:
    """Ascii (P2) PGM writer; values clipped into [0, maxval] and rounded."""
    img = np.asarray(image, dtype=float)
    vals = np.clip(np.round(img), 0, maxval).astype(int)
    lines = ["P2", f"{img.shape[1]} {img.shape[0]}", str(maxval)]
    for row in vals:
        lines.append(" ".join(str(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_image(path) -> np.ndarray:
    """PGM by extension, otherwise a CSV matrix of pixel values."""
    text = str(path)
    if text.lower().endswith(".pgm"):
        return read_pgm(path)
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
