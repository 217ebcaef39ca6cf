import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import align_exhaustive, psnr_loops, ssim_loops
from tradfpr.metrics import PSNR_CAP, align, aligned_psnr, apply_transform, psnr, ssim


def test_psnr_cap_and_closed_form():
    x = np.random.default_rng(0).random((8, 8))
    assert psnr(x, x) == PSNR_CAP == 150.0
    assert psnr(x + 0.1, x) == pytest.approx(20.0, abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_psnr_matches_loops(seed):
    a, b = np.random.default_rng(seed).random((2, 12, 9))
    assert abs(psnr(a, b) - psnr_loops(a, b)) < 1e-10
    assert psnr(a, b) == psnr(b, a)


def test_ssim_identity_and_constants():
    x = np.random.default_rng(1).random((16, 16))
    assert ssim(x, x) == pytest.approx(1.0, abs=1e-15)
    c1 = 0.01**2
    assert ssim(np.zeros((12, 12)), np.ones((12, 12))) == pytest.approx(c1 / (1 + c1), rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_ssim_matches_loops(seed):
    a, b = np.random.default_rng(seed).random((2, 14, 13))
    assert abs(ssim(a, b) - ssim_loops(a, b)) < 1e-8


def test_ssim_matches_skimage():
    skm = pytest.importorskip("skimage.metrics")
    rng = np.random.default_rng(7)
    for _ in range(5):
        a = rng.random((24, 20))
        b = np.clip(a + 0.2 * rng.standard_normal(a.shape), 0, 1)
        ref = skm.structural_similarity(a, b, data_range=1.0, gaussian_weights=True, sigma=1.5,
                                        use_sample_covariance=False)
        assert abs(ssim(a, b) - ref) < 1e-8


def test_shape_errors():
    with pytest.raises(ValueError):
        psnr(np.zeros((3, 3)), np.zeros((3, 4)))
    with pytest.raises(ValueError):
        ssim(np.zeros((12, 12)), np.zeros((12, 13)))
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 12)), np.zeros((10, 12)))
    with pytest.raises(ValueError):
        align(np.zeros((3, 3)), np.zeros((4, 3)))


def test_align_shift_and_flip_examples():
    x = np.random.default_rng(2).random((10, 12))
    r = align(np.roll(x, (3, -4), axis=(0, 1)), x)
    assert not r.flip180 and r.shift == (7, 4)
    assert psnr(r.aligned, x) == PSNR_CAP
    r = align(x[::-1, ::-1], x)
    assert r.flip180 and psnr(r.aligned, x) == PSNR_CAP


@given(st.integers(2, 12), st.integers(2, 12), st.booleans(), st.integers(0, 50), st.integers(0, 50),
       st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_align_inverts_transforms(n1, n2, flip, s0, s1, seed):
    x = np.random.default_rng(seed).random((n1, n2))
    moved = apply_transform(x, flip, (s0 % n1, s1 % n2))
    r = align(moved, x)
    assert r.aligned.tobytes() == x.tobytes()


@pytest.mark.parametrize("seed", range(5))
def test_align_reaches_exhaustive_optimum(seed):
    a, b = np.random.default_rng(seed).random((2, 8, 8))
    r = align(a, b)
    assert r.score == pytest.approx(align_exhaustive(a, b), rel=1e-12)
    assert r.score >= float(np.sum(a * b))


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_alignment_never_hurts_psnr(seed):
    a, b = np.random.default_rng(seed).random((2, 9, 7))
    assert aligned_psnr(a, b) >= psnr(a, b) - 1e-12
