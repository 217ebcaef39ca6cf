import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import laplacian_loops, tv_loops
from tradfpr.grid import MeasurementPlan, crop
from tradfpr.tv import TvMode, laplacian, tv_norm, x_update

grids = arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)),
               elements=st.floats(-10, 10, allow_nan=False))


@pytest.mark.parametrize("mode", list(TvMode))
def test_constant_has_zero_tv(mode):
    assert tv_norm(np.full((5, 4), 0.3), mode) == 0.0


@pytest.mark.parametrize("mode", list(TvMode))
def test_vertical_step_edge(mode):
    h, w, a = 6, 5, 0.7
    x = np.zeros((h, w))
    x[:, 3:] = a
    assert tv_norm(x, mode) == pytest.approx(h * a, abs=1e-14)


def test_mode_accepts_strings():
    x = np.random.default_rng(0).random((4, 4))
    assert tv_norm(x, "anisotropic") == tv_norm(x, TvMode.ANISOTROPIC)


@pytest.mark.parametrize("seed", range(3))
def test_tv_matches_loops(seed):
    x = np.random.default_rng(seed).random((4, 4))
    assert abs(tv_norm(x, TvMode.ANISOTROPIC) - tv_loops(x, False)) < 1e-12
    assert abs(tv_norm(x, TvMode.ISOTROPIC) - tv_loops(x, True)) < 1e-12


def test_isotropic_never_exceeds_anisotropic():
    x = np.random.default_rng(1).random((9, 9))
    assert tv_norm(x, TvMode.ISOTROPIC) <= tv_norm(x, TvMode.ANISOTROPIC)


@given(grids, st.floats(-5, 5, allow_nan=False))
@settings(max_examples=50, deadline=None)
def test_tv_homogeneity(x, c):
    for mode in TvMode:
        assert tv_norm(c * x, mode) == pytest.approx(abs(c) * tv_norm(x, mode), rel=1e-9, abs=1e-9)


@given(grids)
@settings(max_examples=50, deadline=None)
def test_tv_zero_iff_constant(x):
    is_const = np.all(x == x.flat[0])
    for mode in TvMode:
        assert (tv_norm(x, mode) == 0.0) == is_const


def test_laplacian_constant_is_zero():
    np.testing.assert_array_equal(laplacian(np.full((4, 6), 2.5)), 0.0)


def test_laplacian_impulse_stencil():
    x = np.zeros((5, 5))
    x[2, 2] = 1.0
    expected = np.zeros((5, 5))
    expected[2, 2] = -4
    expected[1, 2] = expected[3, 2] = expected[2, 1] = expected[2, 3] = 1
    np.testing.assert_array_equal(laplacian(x), expected)


def test_laplacian_of_ramp():
    x = np.repeat(np.arange(5.0)[:, None], 4, axis=1)
    out = laplacian(x)
    np.testing.assert_array_equal(out[1:-1], 0.0)
    np.testing.assert_array_equal(out[0], 1.0)
    np.testing.assert_array_equal(out[-1], -1.0)


def test_laplacian_matches_loops():
    x = np.random.default_rng(2).random((6, 5))
    np.testing.assert_allclose(laplacian(x), laplacian_loops(x), atol=1e-14)


@given(grids)
@settings(max_examples=50, deadline=None)
def test_laplacian_sums_to_zero(x):
    assert abs(laplacian(x).sum()) <= 1e-10 * max(1.0, np.abs(x).sum())


def test_laplacian_linear():
    rng = np.random.default_rng(3)
    x, y = rng.standard_normal((2, 5, 5))
    np.testing.assert_allclose(laplacian(2 * x - 3 * y), 2 * laplacian(x) - 3 * laplacian(y),
                               atol=1e-13)


PLAN = MeasurementPlan(4, 5, 7, 9)


def test_x_update_alpha_zero_is_crop():
    rng = np.random.default_rng(4)
    v, eta = rng.standard_normal((2, 7, 9))
    out = x_update(v, eta, 2.0, 0.0, PLAN)
    np.testing.assert_array_equal(out, crop(v + eta / 2.0, PLAN))


def test_x_update_constant_unchanged():
    out = x_update(np.full((7, 9), 0.4), np.zeros((7, 9)), 1.0, 0.5, PLAN)
    np.testing.assert_allclose(out, 0.4, atol=1e-15)


def test_x_update_matches_composition():
    rng = np.random.default_rng(5)
    v, eta = rng.standard_normal((2, 7, 9))
    rho, alpha = 1.3, 1 / 384
    y = (v + eta / rho)[:4, :5]
    expected = y - (alpha / rho) * laplacian_loops(y)
    np.testing.assert_allclose(x_update(v, eta, rho, alpha, PLAN), expected, atol=1e-12)


def test_x_update_affine():
    rng = np.random.default_rng(6)
    v1, v2, e1, e2 = rng.standard_normal((4, 7, 9))
    t = 0.3
    f = lambda v, e: x_update(v, e, 1.0, 0.1, PLAN)
    lhs = f(t * v1 + (1 - t) * v2, t * e1 + (1 - t) * e2)
    np.testing.assert_allclose(lhs, t * f(v1, e1) + (1 - t) * f(v2, e2), atol=1e-12)


def test_x_update_rejects_nonpositive_rho():
    with pytest.raises(ValueError):
        x_update(np.zeros((7, 9)), np.zeros((7, 9)), 0.0, 0.1, PLAN)
    with pytest.raises(ValueError):
        x_update(np.zeros((7, 8)), np.zeros((7, 8)), 1.0, 0.1, PLAN)
