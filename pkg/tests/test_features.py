import numpy as np
import pytest

from manikernels.errors import (
    BadParamError,
    FrameMismatchError,
    NoPositivesError,
    RectOutOfBoundsError,
    TooFewPixelsError,
    TooSmallError,
)
from manikernels.features import (
    SubwindowSpec,
    candidate_grid,
    integral_images,
    normalize_by_full_window,
    overlap_ratio,
    pedestrian_feature_maps,
    read_image,
    read_pgm,
    region_covariance,
    select_subwindows,
    structure_tensor_field,
    texture_feature_maps,
    write_pgm,
)


def random_stack(rng, c=3, h=12, w=15):
    from manikernels.features import FeatureStack

    return FeatureStack(
        channels=rng.uniform(size=(c, h, w)), names=tuple(f"f{i}" for i in range(c))
    )


# ---------------------------------------------------------------------------
# feature maps
# ---------------------------------------------------------------------------

def test_pedestrian_constant_image():
    stack = pedestrian_feature_maps(np.full((5, 7), 3.0))
    assert stack.depth == 8
    np.testing.assert_allclose(stack.channels[2:7], 0.0, atol=1e-12)
    np.testing.assert_allclose(stack.channels[0][2], np.arange(7.0))
    np.testing.assert_allclose(stack.channels[1][:, 3], np.arange(5.0))


def test_pedestrian_ramp_image():
    h, w = 6, 8
    img = np.tile(np.arange(w, dtype=float), (h, 1))  # I(x, y) = x
    stack = pedestrian_feature_maps(img)
    np.testing.assert_allclose(stack.channels[2][:, 1:-1], 1.0, atol=1e-12)  # |Ix|
    np.testing.assert_allclose(stack.channels[3], 0.0, atol=1e-12)  # |Iy|


def test_pedestrian_magnitude_channel_pointwise():
    rng = np.random.default_rng(0)
    img = rng.uniform(size=(9, 11))
    stack = pedestrian_feature_maps(img)
    recomputed = np.sqrt(stack.channels[2] ** 2 + stack.channels[3] ** 2)
    np.testing.assert_allclose(stack.channels[4], recomputed, atol=1e-12)


def test_pedestrian_angle_channel_bounded():
    rng = np.random.default_rng(1)
    stack = pedestrian_feature_maps(rng.uniform(size=(7, 7)))
    angle = stack.channels[7]
    assert np.all(angle >= 0.0) and np.all(angle <= np.pi / 2 + 1e-12)


def test_texture_constant_image():
    stack = texture_feature_maps(np.full((4, 4), 2.5))
    assert stack.depth == 5
    np.testing.assert_allclose(stack.channels[0], 2.5)
    np.testing.assert_allclose(stack.channels[1:], 0.0, atol=1e-12)


def test_texture_ramp_gradient():
    img = np.tile(np.arange(9, dtype=float), (5, 1))
    stack = texture_feature_maps(img)
    np.testing.assert_allclose(stack.channels[1][:, 1:-1], 1.0, atol=1e-12)  # |Ix|


def test_texture_second_derivative_matches_stencil():
    rng = np.random.default_rng(2)
    img = rng.uniform(size=(8, 10))
    stack = texture_feature_maps(img)
    # interior |Ixx| via the 1, -2, 1 stencil
    expect = np.abs(img[:, 2:] - 2.0 * img[:, 1:-1] + img[:, :-2])
    np.testing.assert_allclose(stack.channels[3][:, 1:-1], expect, atol=1e-12)


def test_feature_maps_too_small():
    with pytest.raises(TooSmallError):
        pedestrian_feature_maps(np.zeros((2, 5)))
    with pytest.raises(TooSmallError):
        texture_feature_maps(np.zeros((5, 2)))


# ---------------------------------------------------------------------------
# region covariance
# ---------------------------------------------------------------------------

def test_region_covariance_constant_stack_is_epsilon_identity():
    from manikernels.features import FeatureStack

    stack = FeatureStack(channels=np.ones((3, 6, 6)), names=("a", "b", "c"))
    cov = region_covariance(stack, (0, 0, 6, 6), epsilon=1e-4)
    np.testing.assert_allclose(cov, 1e-4 * np.eye(3), atol=1e-12)


def test_region_covariance_correlated_channels():
    from manikernels.features import FeatureStack

    rng = np.random.default_rng(3)
    base = rng.uniform(size=(7, 9))
    stack = FeatureStack(channels=np.stack([base, 2.0 * base]), names=("a", "b"))
    cov = region_covariance(stack, (0, 0, 9, 7), epsilon=1e-5)
    w = np.linalg.eigvalsh(cov)
    assert w[0] == pytest.approx(1e-5, rel=1e-6)


def test_region_covariance_matches_direct_summation():
    rng = np.random.default_rng(4)
    stack = random_stack(rng, c=4, h=14, w=17)
    integrals = integral_images(stack)
    for _ in range(50):
        w = int(rng.integers(3, 10))
        h = int(rng.integers(3, 9))
        x0 = int(rng.integers(0, stack.width - w + 1))
        y0 = int(rng.integers(0, stack.height - h + 1))
        cov = region_covariance(stack, (x0, y0, w, h), epsilon=1e-9, integrals=integrals)
        pixels = stack.channels[:, y0 : y0 + h, x0 : x0 + w].reshape(stack.depth, -1)
        direct = np.cov(pixels, ddof=1) + 1e-9 * np.eye(stack.depth)
        assert np.linalg.norm(cov - direct) <= 1e-8 * max(1.0, np.linalg.norm(direct))


def test_region_covariance_errors():
    rng = np.random.default_rng(5)
    stack = random_stack(rng)
    with pytest.raises(RectOutOfBoundsError):
        region_covariance(stack, (10, 0, 10, 5))
    with pytest.raises(TooFewPixelsError):
        region_covariance(stack, (0, 0, 3, 1))


def test_normalize_by_full_window_preserves_spd():
    rng = np.random.default_rng(6)
    stack = random_stack(rng)
    integrals = integral_images(stack)
    full = region_covariance(stack, (0, 0, stack.width, stack.height), integrals=integrals)
    sub = region_covariance(stack, (2, 3, 6, 5), integrals=integrals)
    normed = normalize_by_full_window(sub, full)
    assert np.all(np.linalg.eigvalsh(normed) > 0)
    scale = np.diag(1.0 / np.sqrt(np.diag(full)))
    np.testing.assert_allclose(normed, scale @ sub @ scale, atol=1e-12)


# ---------------------------------------------------------------------------
# subwindow selection
# ---------------------------------------------------------------------------

def test_candidate_grid_contains_full_window_and_respects_bounds():
    cands = candidate_grid(20, 30)
    rects = {c.rect for c in cands}
    assert (0, 0, 30, 20) in rects
    for x0, y0, w, h in rects:
        assert 0 <= x0 and 0 <= y0 and x0 + w <= 30 and y0 + h <= 20


def test_overlap_ratio():
    assert overlap_ratio((0, 0, 4, 4), (0, 0, 4, 4)) == 1.0
    assert overlap_ratio((0, 0, 4, 4), (4, 4, 4, 4)) == 0.0
    assert overlap_ratio((0, 0, 4, 4), (2, 0, 4, 4)) == pytest.approx(0.5)
    # measured against the smaller window
    assert overlap_ratio((0, 0, 8, 8), (0, 0, 2, 2)) == 1.0


def _descriptor(rng, scale=1.0):
    a = rng.standard_normal((3, 3)) * 0.2 * scale
    sym = (a + a.T) / 2.0
    w, u = np.linalg.eigh(sym)
    return (u * np.exp(w)) @ u.T  # SPD for any noise scale


def test_single_candidate_always_selected():
    rng = np.random.default_rng(7)
    cands = [SubwindowSpec(rect=(0, 0, 4, 4))]
    descs = [[_descriptor(rng)] for _ in range(3)]
    out = select_subwindows(cands, descs, [True, True, True], count=1, max_overlap=0.75)
    assert len(out) == 1 and out[0].rect == (0, 0, 4, 4)


def test_fully_overlapping_candidates_pruned():
    rng = np.random.default_rng(8)
    cands = [SubwindowSpec(rect=(0, 0, 4, 4)), SubwindowSpec(rect=(0, 0, 4, 4))]
    descs = [[_descriptor(rng), _descriptor(rng, scale=3.0)] for _ in range(4)]
    out = select_subwindows(cands, descs, [True] * 4, count=2, max_overlap=0.75)
    assert len(out) == 1


def test_zero_dispersion_candidate_selected_first():
    rng = np.random.default_rng(9)
    constant = _descriptor(rng)
    cands = [SubwindowSpec(rect=(0, 0, 4, 4)), SubwindowSpec(rect=(10, 10, 4, 4))]
    descs = [[_descriptor(rng), constant] for _ in range(5)]
    out = select_subwindows(cands, descs, [True] * 5, count=2, max_overlap=0.75)
    assert out[0].rect == (10, 10, 4, 4)
    assert out[0].score == pytest.approx(0.0, abs=1e-9)


def test_selected_set_obeys_overlap_cap():
    rng = np.random.default_rng(10)
    cands = candidate_grid(16, 16)
    descs = [[_descriptor(rng) for _ in cands] for _ in range(3)]
    out = select_subwindows(cands, descs, [True, True, False], count=6, max_overlap=0.5)
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            assert overlap_ratio(out[i].rect, out[j].rect) <= 0.5


def test_selection_deterministic():
    rng = np.random.default_rng(11)
    cands = candidate_grid(12, 12)
    descs = [[_descriptor(rng) for _ in cands] for _ in range(3)]
    a = select_subwindows(cands, descs, [True] * 3, count=4, max_overlap=0.75)
    b = select_subwindows(cands, descs, [True] * 3, count=4, max_overlap=0.75)
    assert [s.rect for s in a] == [s.rect for s in b]


def test_selection_errors():
    cands = [SubwindowSpec(rect=(0, 0, 4, 4))]
    descs = [[np.eye(3)]]
    with pytest.raises(NoPositivesError):
        select_subwindows(cands, descs, [False], count=1, max_overlap=0.5)
    with pytest.raises(BadParamError):
        select_subwindows(cands, descs, [True], count=0, max_overlap=0.5)
    with pytest.raises(BadParamError):
        select_subwindows(cands, descs, [True], count=1, max_overlap=1.0)


# ---------------------------------------------------------------------------
# structure tensors
# ---------------------------------------------------------------------------

def test_structure_tensor_constant_frames():
    frames = [np.full((6, 6), 2.0)] * 2
    field = structure_tensor_field(frames, smoothing_sigma=1.0, epsilon=1e-6)
    assert field.shape == (6, 6, 3, 3)
    np.testing.assert_allclose(field, np.broadcast_to(1e-6 * np.eye(3), (6, 6, 3, 3)), atol=1e-15)


def test_structure_tensor_brightness_step_rank_one():
    frames = [np.full((5, 5), 1.0), np.full((5, 5), 3.0)]
    field = structure_tensor_field(frames, smoothing_sigma=0.0, epsilon=0.0)
    for tensor in field.reshape(-1, 3, 3):
        w = np.linalg.eigvalsh(tensor)
        np.testing.assert_allclose(w[:2], 0.0, atol=1e-12)
        assert w[2] == pytest.approx(4.0)  # It = 2, tensor = diag(0, 0, 4)


def test_structure_tensor_psd_before_regularization():
    rng = np.random.default_rng(12)
    frames = [rng.uniform(size=(8, 9)) for _ in range(3)]
    field = structure_tensor_field(frames, smoothing_sigma=1.5, epsilon=0.0)
    for tensor in field.reshape(-1, 3, 3):
        assert np.linalg.eigvalsh(tensor)[0] >= -1e-10


def test_structure_tensor_frame_errors():
    with pytest.raises(FrameMismatchError):
        structure_tensor_field([np.zeros((4, 4))], 1.0)
    with pytest.raises(FrameMismatchError):
        structure_tensor_field([np.zeros((4, 4)), np.zeros((5, 4))], 1.0)
    with pytest.raises(FrameMismatchError):
        structure_tensor_field([np.zeros((4, 4))] * 4, 1.0)


# ---------------------------------------------------------------------------
# image IO
# ---------------------------------------------------------------------------

def test_pgm_ascii_round_trip(tmp_path):
    rng = np.random.default_rng(13)
    img = rng.integers(0, 256, size=(5, 7)).astype(float)
    path = tmp_path / "img.pgm"
    write_pgm(path, img)
    back = read_pgm(path)
    np.testing.assert_array_equal(back, img)


def test_pgm_binary_reader(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4)
    path = tmp_path / "img.pgm"
    with open(path, "wb") as fh:
        fh.write(b"P5\n# a comment\n4 3\n255\n")
        fh.write(img.tobytes())
    back = read_pgm(path)
    np.testing.assert_array_equal(back, img.astype(float))


def test_pgm_16bit_binary_reader(tmp_path):
    vals = np.array([[0, 300], [65535, 1024]], dtype=">u2")
    path = tmp_path / "deep.pgm"
    with open(path, "wb") as fh:
        fh.write(b"P5\n2 2\n65535\n")
        fh.write(vals.tobytes())
    back = read_pgm(path)
    np.testing.assert_array_equal(back, vals.astype(float))


def test_read_image_csv(tmp_path):
    path = tmp_path / "img.csv"
    with open(path, "w") as fh:
        fh.write("1.0,2.0\n3.0,4.0\n")
    np.testing.assert_array_equal(read_image(path), [[1.0, 2.0], [3.0, 4.0]])
