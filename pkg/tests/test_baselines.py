import numpy as np
import pytest

from tradfpr.baselines import gs, hio, magnitude_error
from tradfpr.forward import add_noise, plan_from_ratio, simulate
from tradfpr.harness.phantoms import make_phantom
from tradfpr.metrics import aligned_psnr


@pytest.fixture(scope="module")
def problem():
    x = make_phantom("binary", 16)
    plan = plan_from_ratio(16, 16, 2.0)
    b, _ = simulate(x, plan)
    return x, plan, b


def test_zero_iterations_return_random_start(problem):
    _, plan, b = problem
    start = np.random.default_rng(3).random((16, 16))
    np.testing.assert_array_equal(hio(b, plan, iters=0, seed=3), start)
    np.testing.assert_array_equal(gs(b, plan, iters=0, seed=3), start)


def test_outputs_respect_constraints(problem):
    _, plan, b = problem
    for x in (hio(b, plan, iters=30, seed=1), gs(b, plan, iters=30, seed=1)):
        assert x.shape == (16, 16)
        assert np.all(x >= 0)
    boxed = hio(b, plan, iters=30, seed=1, box=True)
    assert np.all(boxed <= 1)


def test_gs_error_monotone(problem):
    _, plan, b = problem
    for seed in range(3):
        _, errs = gs(b, plan, iters=200, seed=seed, return_errors=True)
        assert len(errs) == 201
        assert all(e2 <= e1 * (1 + 1e-12) + 1e-15 for e1, e2 in zip(errs, errs[1:]))
        assert errs[-1] <= errs[0]


def test_gs_monotone_under_noise(problem):
    _, plan, b = problem
    noisy = add_noise(b, 0.5, 2)
    _, errs = gs(noisy, plan, iters=100, seed=0, return_errors=True)
    assert all(e2 <= e1 * (1 + 1e-12) + 1e-15 for e1, e2 in zip(errs, errs[1:]))


def test_magnitude_error_zero_on_truth(problem):
    x, plan, b = problem
    padded = np.zeros(plan.shape)
    padded[:16, :16] = x
    assert magnitude_error(padded, b) < 1e-25


def test_hio_recovers_binary_phantom(problem):
    x, plan, b = problem
    best = max(aligned_psnr(hio(b, plan, iters=1000, seed=s), x) for s in range(5))
    assert best > 25


def test_deterministic(problem):
    _, plan, b = problem
    assert hio(b, plan, 20, seed=4).tobytes() == hio(b, plan, 20, seed=4).tobytes()


def test_argument_errors(problem):
    _, plan, b = problem
    with pytest.raises(ValueError):
        hio(b, plan, iters=5, beta_hio=0.0)
    with pytest.raises(ValueError):
        gs(b, plan, iters=-1)
    with pytest.raises(ValueError):
        hio(b[:3], plan, iters=1)
