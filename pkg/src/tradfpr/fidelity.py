"""Smoothed amplitude fidelity and its closed-form gradient."""

from __future__ import annotations

import numpy as np

from .grid import dft2, idft2


class FidelityContext:
    r"""Data term :math:`f(u) = \frac{1}{2m}\|\sqrt{b^2+\varepsilon} - \sqrt{|Fu|^2+\varepsilon}\|^2`.

    The smoothed magnitudes :math:`\sqrt{b^2+\varepsilon}` are computed once
    and reused for every evaluation.

    Parameters
    ----------
    b : np.ndarray
        Measured magnitudes, shape ``(m1, m2)``. May contain negative
        entries when noisy.
    epsilon : float
        Smoothing parameter, strictly positive.
    """

    def __init__(self, b, epsilon=1e-3):
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        b = np.array(b, dtype=np.float64)
        if b.ndim != 2:
            raise ValueError("b must be a 2D array")
        b.setflags(write=False)
        self.b = b
        self.epsilon = float(epsilon)
        self.smoothed_b = np.sqrt(b**2 + self.epsilon)
        self.smoothed_b.setflags(write=False)

    @property
    def shape(self):
        return self.b.shape

    @property
    def m(self) -> int:
        return self.b.size

    def _check(self, u):
        u = np.asarray(u, dtype=np.float64)
        if u.shape != self.b.shape:
            raise ValueError(f"grid shape {u.shape} does not match measurement {self.b.shape}")
        return u

    def value(self, u) -> float:
        Fu = dft2(self._check(u))
        r = self.smoothed_b - np.sqrt(np.abs(Fu) ** 2 + self.epsilon)
        return float(np.sum(r * r)) / (2 * self.m)

    def gradient(self, u) -> np.ndarray:
        u = self._check(u)
        Fu = dft2(u)
        ratio = self.smoothed_b / np.sqrt(np.abs(Fu) ** 2 + self.epsilon)
        return u - idft2(ratio * Fu)


def fidelity(ctx: FidelityContext, u) -> float:
    return ctx.value(u)


def fidelity_gradient(ctx: FidelityContext, u) -> np.ndarray:
    return ctx.gradient(u)
