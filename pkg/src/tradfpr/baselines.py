"""Classical alternating-projection baselines: HIO and error reduction (GS).

The object-domain constraint is the padding support (top-left ``n1 x n2``
block) plus nonnegativity, optionally also ``x <= 1``. Noisy negative
magnitudes are clipped to zero before being imposed.
"""

from __future__ import annotations

import numpy as np

from .grid import MeasurementPlan, crop


def _support(plan):
    s = np.zeros(plan.shape, dtype=bool)
    s[: plan.n1, : plan.n2] = True
    return s


def _random_start(plan, seed):
    g = np.zeros(plan.shape)
    g[: plan.n1, : plan.n2] = np.random.default_rng(seed).random(plan.image_shape)
    return g


def _magnitude_projection(g, mags):
    G = np.fft.fft2(g)
    a = np.abs(G)
    phase = np.where(a > 0, G / np.where(a > 0, a, 1.0), 1.0)
    return np.fft.ifft2(mags * phase).real


def _project(g, support, nonneg, box):
    out = np.where(support, g, 0.0)
    if nonneg:
        out = np.maximum(out, 0.0)
    if box:
        out = np.minimum(out, 1.0)
    return out


def _check(b, plan, iters):
    b = np.asarray(b, dtype=np.float64)
    if b.shape != plan.shape:
        raise ValueError(f"measurement shape {b.shape} does not match plan {plan.shape}")
    if iters < 0:
        raise ValueError("iters must be nonnegative")
    return np.maximum(b, 0.0)


def magnitude_error(g, b) -> float:
    """``(1/2m) ||b - |F g|||^2``."""
    r = np.asarray(b) - np.abs(np.fft.fft2(g))
    return float(np.sum(r * r)) / (2 * r.size)


def hio(b, plan: MeasurementPlan, iters=1000, beta_hio=0.9, seed=0,
        nonneg=True, box=False):
    """Fienup's hybrid input-output iteration from a uniform random start.

    Returns the cropped projection of the final magnitude-consistent iterate
    onto the object constraints.
    """
    if not 0 < beta_hio <= 1:
        raise ValueError("beta_hio must lie in (0, 1]")
    mags = _check(b, plan, iters)
    support = _support(plan)
    g = _random_start(plan, seed)
    gp = g
    for _ in range(iters):
        gp = _magnitude_projection(g, mags)
        ok = support & (gp >= 0) if nonneg else support.copy()
        if box:
            ok &= gp <= 1
        g = np.where(ok, gp, g - beta_hio * gp)
    return crop(_project(gp, support, nonneg, box), plan)


def gs(b, plan: MeasurementPlan, iters=1000, seed=0, nonneg=True, box=False,
       return_errors=False):
    """Error reduction (Gerchberg-Saxton with object-domain constraints).

    With ``return_errors`` also returns the magnitude error of every iterate,
    starting with the random start; the sequence is non-increasing.
    """
    mags = _check(b, plan, iters)
    support = _support(plan)
    g = _random_start(plan, seed)
    errors = [magnitude_error(g, mags)]
    for _ in range(iters):
        g = _project(_magnitude_projection(g, mags), support, nonneg, box)
        errors.append(magnitude_error(g, mags))
    x = crop(g, plan)
    return (x, errors) if return_errors else x
