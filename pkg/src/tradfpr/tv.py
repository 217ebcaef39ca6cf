"""Total variation, the 5-point Laplacian, and the linearized TV x-update.

Both use replicate (Neumann) boundaries: differences across the last
row/column are zero and the Laplacian sees mirrored edge pixels.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .grid import MeasurementPlan, crop


class TvMode(str, Enum):
    ANISOTROPIC = "anisotropic"
    ISOTROPIC = "isotropic"


def _diffs(x):
    x = np.asarray(x, dtype=np.float64)
    dv = np.zeros_like(x)
    dh = np.zeros_like(x)
    dv[:-1, :] = x[1:, :] - x[:-1, :]
    dh[:, :-1] = x[:, 1:] - x[:, :-1]
    return dv, dh


def tv_norm(x, mode=TvMode.ISOTROPIC) -> float:
    """Discrete TV with forward differences.

    Anisotropic sums ``|dh| + |dv|``; isotropic sums ``sqrt(dh^2 + dv^2)``
    per pixel.
    """
    dv, dh = _diffs(x)
    mode = TvMode(mode)
    if mode is TvMode.ANISOTROPIC:
        return float(np.sum(np.abs(dv)) + np.sum(np.abs(dh)))
    return float(np.sum(np.sqrt(dv * dv + dh * dh)))


def laplacian(x) -> np.ndarray:
    """5-point Laplacian with replicate boundaries."""
    x = np.asarray(x, dtype=np.float64)
    p = np.pad(x, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * x


def x_update(v, eta, rho: float, alpha: float, plan: MeasurementPlan) -> np.ndarray:
    """``y - (alpha/rho) * laplacian(y)`` with ``y = crop(v + eta/rho)``.

    No clamping is applied to the result.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    y = crop(np.asarray(v) + np.asarray(eta) / rho, plan)
    if alpha == 0:
        return y
    return y - (alpha / rho) * laplacian(y)
