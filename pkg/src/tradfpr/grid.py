"""2D grids, the discrete Fourier transform and the zero-padding operator.

Images are plain ``float64`` arrays of shape ``(n1, n2)``; padded grids and
spectra have shape ``(m1, m2)``. The forward transform is unnormalized and
the inverse carries the ``1/m`` factor, which is the convention under which
the closed-form fidelity gradient is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MeasurementPlan:
    """Image size ``(n1, n2)``, measurement size ``(m1, m2)`` and ratio ``r``."""

    n1: int
    n2: int
    m1: int
    m2: int
    ratio: float = 1.0

    def __post_init__(self):
        for name in ("n1", "n2", "m1", "m2"):
            if int(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.m1 < self.n1 or self.m2 < self.n2:
            raise ValueError(
                f"measurement grid {self.m1}x{self.m2} smaller than image "
                f"{self.n1}x{self.n2}"
            )

    @property
    def n(self) -> int:
        return self.n1 * self.n2

    @property
    def m(self) -> int:
        return self.m1 * self.m2

    @property
    def image_shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m1, self.m2)


def as_grid(x, name="x") -> np.ndarray:
    """Validate a real 2D grid and return it as float64."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def dft2(x: np.ndarray) -> np.ndarray:
    """Unnormalized 2D DFT of a real grid."""
    return np.fft.fft2(np.asarray(x, dtype=np.float64))


def idft2(s: np.ndarray) -> np.ndarray:
    """Inverse 2D DFT scaled by ``1/m``; only the real part is returned."""
    return np.fft.ifft2(np.asarray(s, dtype=np.complex128)).real


def pad(x: np.ndarray, plan: MeasurementPlan) -> np.ndarray:
    """Place ``x`` at the top-left corner of an ``m1 x m2`` zero canvas."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != plan.image_shape:
        raise ValueError(f"image shape {x.shape} does not match plan {plan.image_shape}")
    out = np.zeros(plan.shape)
    out[: plan.n1, : plan.n2] = x
    return out


def crop(u: np.ndarray, plan: MeasurementPlan) -> np.ndarray:
    """Left inverse of :func:`pad`: the top-left ``n1 x n2`` block (a copy)."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != plan.shape:
        raise ValueError(f"grid shape {u.shape} does not match plan {plan.shape}")
    return u[: plan.n1, : plan.n2].copy()
