import numpy as np
import pytest

from manikernels.errors import (
    BadShapeError,
    NonSymmetricError,
    NotSpdError,
    ZeroExponentError,
)
from manikernels.matrixops import (
    EigenDecomp,
    cholesky_lower,
    spd_exp,
    spd_inv_sqrt,
    spd_log,
    spd_power,
    sym_eig,
    thin_svd,
)


def rand_sym(rng, d):
    a = rng.standard_normal((d, d))
    return (a + a.T) / 2.0


def rand_spd(rng, d, lo=0.5, hi=2.0):
    # explicit spectral construction, independent of the library's samplers
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    w = rng.uniform(lo, hi, size=d)
    return (q * w) @ q.T


def test_sym_eig_identity():
    dec = sym_eig(np.eye(3))
    np.testing.assert_allclose(dec.values, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(dec.vectors.T @ dec.vectors, np.eye(3), atol=1e-12)


def test_sym_eig_diagonal_sorted():
    dec = sym_eig(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(dec.values, [3.0, 1.0])
    # eigenvectors are the axes up to column sign
    np.testing.assert_allclose(np.abs(dec.vectors), np.eye(2), atol=1e-12)


def test_sym_eig_reconstruction():
    rng = np.random.default_rng(0)
    for _ in range(5):
        s = rand_sym(rng, 5)
        dec = sym_eig(s)
        recon = dec.vectors @ np.diag(dec.values) @ dec.vectors.T
        assert np.linalg.norm(recon - s) <= 1e-10 * np.linalg.norm(s)
        assert np.all(np.diff(dec.values) <= 0)
        np.testing.assert_allclose(dec.vectors.T @ dec.vectors, np.eye(5), atol=1e-9)


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(NonSymmetricError):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_sym_eig_symmetrizes_within_tolerance():
    s = np.eye(2)
    s[0, 1] = 1e-11  # asymmetry below 10 * SYM_TOL
    dec = sym_eig(s)
    assert isinstance(dec, EigenDecomp)


def test_spd_log_identity_and_diagonal():
    np.testing.assert_allclose(spd_log(np.eye(4)), np.zeros((4, 4)), atol=1e-14)
    out = spd_log(np.diag([np.e, np.e**2]))
    np.testing.assert_allclose(out, np.diag([1.0, 2.0]), atol=1e-12)


def test_spd_log_exp_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(5):
        s = rand_spd(rng, 4)
        back = spd_exp(spd_log(s))
        assert np.linalg.norm(back - s) <= 1e-9 * np.linalg.norm(s)


def test_spd_exp_zero_and_diag():
    np.testing.assert_allclose(spd_exp(np.zeros((3, 3))), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(
        spd_exp(np.diag([1.0, 2.0])), np.diag([np.e, np.e**2]), rtol=1e-12
    )


def test_spd_exp_output_is_spd():
    rng = np.random.default_rng(2)
    for _ in range(5):
        a = rand_sym(rng, 4)
        w = np.linalg.eigvalsh(spd_exp(a))
        assert np.all(w > 0)


def test_log_exp_identity_on_symmetric():
    rng = np.random.default_rng(3)
    for d in (2, 5, 16):
        a = rand_sym(rng, d)
        back = spd_log(spd_exp(a))
        assert np.linalg.norm(back - a) <= 1e-8 * max(1.0, np.linalg.norm(a))


def test_spd_log_rejects_non_spd():
    with pytest.raises(NotSpdError):
        spd_log(np.diag([1.0, -1.0]))
    with pytest.raises(NotSpdError):
        spd_log(np.diag([1.0, 0.0]))


def test_spd_power_basics():
    np.testing.assert_allclose(spd_power(np.eye(3), 0.5), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(
        spd_power(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]), atol=1e-12
    )


def test_spd_power_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(5):
        s = rand_spd(rng, 4)
        back = spd_power(spd_power(s, 0.5), 2.0)
        assert np.linalg.norm(back - s) <= 1e-9 * np.linalg.norm(s)


def test_spd_power_zero_exponent():
    with pytest.raises(ZeroExponentError):
        spd_power(np.eye(2), 0.0)


def test_spd_inv_sqrt():
    rng = np.random.default_rng(5)
    s = rand_spd(rng, 4)
    r = spd_inv_sqrt(s)
    np.testing.assert_allclose(r @ s @ r, np.eye(4), atol=1e-10)


def test_cholesky_basics():
    np.testing.assert_allclose(cholesky_lower(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(
        cholesky_lower(np.diag([4.0, 9.0])), np.diag([2.0, 3.0])
    )


def test_cholesky_reconstruction_and_positive_diag():
    rng = np.random.default_rng(6)
    for _ in range(5):
        s = rand_spd(rng, 6)
        length = cholesky_lower(s)
        assert np.all(np.diag(length) > 0)
        assert np.linalg.norm(length @ length.T - s) <= 1e-10 * np.linalg.norm(s)


def test_cholesky_pivot_failure():
    with pytest.raises(NotSpdError):
        cholesky_lower(np.diag([1.0, -2.0]))


def test_thin_svd_trivial_cases():
    a = np.vstack([np.eye(2), np.zeros((1, 2))])
    out = thin_svd(a)
    np.testing.assert_allclose(out.s, [1.0, 1.0], atol=1e-12)

    rng = np.random.default_rng(7)
    u_vec = rng.standard_normal(5)
    v_vec = rng.standard_normal(3)
    out = thin_svd(np.outer(u_vec, v_vec))
    np.testing.assert_allclose(
        out.s[0], np.linalg.norm(u_vec) * np.linalg.norm(v_vec), rtol=1e-12
    )
    np.testing.assert_allclose(out.s[1:], 0.0, atol=1e-12)


def test_thin_svd_reconstruction():
    rng = np.random.default_rng(8)
    for _ in range(5):
        a = rng.standard_normal((8, 3))
        out = thin_svd(a)
        recon = out.u @ np.diag(out.s) @ out.v.T
        assert np.linalg.norm(recon - a) <= 1e-10 * max(1.0, np.linalg.norm(a))
        assert np.all(np.diff(out.s) <= 0)
        assert np.all(out.s >= 0)
        assert out.s[0] <= np.linalg.norm(a) + 1e-12
        np.testing.assert_allclose(out.u.T @ out.u, np.eye(3), atol=1e-9)


def test_thin_svd_bad_shape():
    with pytest.raises(BadShapeError):
        thin_svd(np.zeros((2, 3)))
    with pytest.raises(BadShapeError):
        thin_svd(np.zeros(4))
