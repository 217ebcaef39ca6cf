"""Simulated Fourier magnitude measurements with optional Gaussian noise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import MeasurementPlan, dft2, pad


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level of a measurement.

    ``snr_db=None`` means noiseless, in which case ``sigma`` must be 0.
    """

    snr_db: Optional[float]
    sigma: float
    seed: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if (self.snr_db is None) != (self.sigma == 0):
            raise ValueError("sigma is zero exactly when the measurement is noiseless")


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def plan_from_ratio(n1: int, n2: int, r: float) -> MeasurementPlan:
    """Measurement plan whose side lengths are ``r`` times the image sides."""
    if r < 1:
        raise ValueError(f"sampling ratio must be >= 1, got {r}")
    # 1.7 * 128 = 217.60000000000002; round away the float noise first
    m1 = round_half_up(round(r * n1, 9))
    m2 = round_half_up(round(r * n2, 9))
    return MeasurementPlan(n1, n2, m1, m2, float(r))


def measure(x: np.ndarray, plan: MeasurementPlan) -> np.ndarray:
    """Noiseless magnitudes ``|F P x|``."""
    return np.abs(dft2(pad(x, plan)))


def sigma_for_snr(b: np.ndarray, snr_db: float) -> float:
    """Noise std giving ``snr_db = 20 log10(Var(b) / sigma^2)``.

    ``Var`` is the population variance over all entries of ``b``.
    """
    var = float(np.var(b))
    if var <= 0:
        raise ValueError("measurement has zero variance; SNR is undefined")
    return math.sqrt(var / 10.0 ** (snr_db / 20.0))


def snr_for_sigma(b: np.ndarray, sigma: float) -> float:
    return 20.0 * math.log10(float(np.var(b)) / sigma**2)


def add_noise(b: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Return ``b + delta`` with ``delta ~ N(0, sigma^2)`` drawn from ``seed``.

    Negative results are kept as they are.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    b = np.asarray(b, dtype=np.float64)
    if sigma == 0:
        return b.copy()
    rng = np.random.default_rng(seed)
    return b + sigma * rng.standard_normal(b.shape)


def simulate(x, plan: MeasurementPlan, snr_db=None, seed=0):
    """Measure ``x`` and add noise at ``snr_db`` (``None`` for noiseless).

    Returns the measurement and its :class:`NoiseSpec`.
    """
    b = measure(x, plan)
    if snr_db is None:
        return b, NoiseSpec(None, 0.0, seed)
    sigma = sigma_for_snr(b, snr_db)
    return add_noise(b, sigma, seed), NoiseSpec(float(snr_db), sigma, seed)
