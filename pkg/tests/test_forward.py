import math

import numpy as np
import pytest

from tradfpr.forward import (NoiseSpec, add_noise, measure, plan_from_ratio, sigma_for_snr,
                             simulate, snr_for_sigma)
from tradfpr.grid import MeasurementPlan, dft2, pad


@pytest.mark.parametrize("r,m", [(2.0, 256), (1.0, 128), (1.7, 218), (1.5, 192), (1.9, 243)])
def test_plan_from_ratio(r, m):
    plan = plan_from_ratio(128, 128, r)
    assert (plan.m1, plan.m2) == (m, m)
    assert plan.ratio == r


def test_plan_rounds_half_up():
    # 1.5 * 5 = 7.5 -> 8 ; 1.3 * 5 = 6.5 -> 7
    assert plan_from_ratio(5, 5, 1.5).m1 == 8
    assert plan_from_ratio(5, 5, 1.3).m1 == 7


def test_plan_rejects_ratio_below_one():
    with pytest.raises(ValueError):
        plan_from_ratio(8, 8, 0.9)


def test_measure_zero_and_constant():
    plan = MeasurementPlan(2, 2, 2, 2)
    np.testing.assert_array_equal(measure(np.zeros((2, 2)), plan), np.zeros((2, 2)))
    b = measure(np.full((2, 2), 0.3), plan)
    np.testing.assert_allclose(b, [[1.2, 0], [0, 0]], atol=1e-15)


def test_measure_invariant_to_shift_and_flip_of_padded_frame():
    rng = np.random.default_rng(0)
    plan = plan_from_ratio(6, 6, 2.0)
    x = rng.random((6, 6))
    b = measure(x, plan)
    assert np.all(b >= 0)
    px = pad(x, plan)
    shifted = np.roll(px, (3, -5), axis=(0, 1))
    flipped = np.roll(px[::-1, ::-1], (1, 1), axis=(0, 1))
    np.testing.assert_allclose(np.abs(dft2(shifted)), b, atol=1e-12)
    np.testing.assert_allclose(np.abs(dft2(flipped)), b, atol=1e-12)


@pytest.mark.parametrize("snr,factor", [(0, 1.0), (20, 10.0), (10, 10**0.5)])
def test_sigma_for_snr(snr, factor):
    b = np.random.default_rng(1).random((8, 8))
    assert sigma_for_snr(b, snr) ** 2 == pytest.approx(np.var(b) / factor, rel=1e-12)


def test_sigma_snr_roundtrip():
    b = np.random.default_rng(2).random((8, 8)) * 5
    for snr in (-3.0, 10.0, 20.0, 30.0, 47.5):
        assert abs(snr_for_sigma(b, sigma_for_snr(b, snr)) - snr) < 1e-12


def test_sigma_rejects_constant_measurement():
    with pytest.raises(ValueError):
        sigma_for_snr(np.ones((4, 4)), 20)


def test_add_noise_zero_sigma_is_identity():
    b = np.random.default_rng(3).random((5, 5))
    out = add_noise(b, 0.0, 123)
    assert out.tobytes() == b.tobytes()


def test_add_noise_deterministic_and_independent():
    b = np.zeros((32, 32))
    a1 = add_noise(b, 0.5, 7)
    a2 = add_noise(b, 0.5, 7)
    assert a1.tobytes() == a2.tobytes()
    a3 = add_noise(b, 0.5, 8)
    assert abs(np.corrcoef(a1.ravel(), a3.ravel())[0, 1]) < 0.1


def test_add_noise_empirical_std():
    out = add_noise(np.zeros((1000, 1000)), 0.1, 11)
    assert abs(out.std() - 0.1) < 0.001
    assert out.min() < 0  # negative entries are kept


def test_simulate_noise_spec():
    x = np.random.default_rng(4).random((8, 8))
    plan = plan_from_ratio(8, 8, 2.0)
    b, spec = simulate(x, plan, None, 3)
    assert spec.sigma == 0 and spec.snr_db is None
    np.testing.assert_array_equal(b, measure(x, plan))
    bn, spec = simulate(x, plan, 20.0, 3)
    assert spec.sigma == pytest.approx(math.sqrt(np.var(b) / 10))
    with pytest.raises(ValueError):
        NoiseSpec(None, 0.1, 0)
