"""Reconstruction quality: PSNR, SSIM and ambiguity-aware alignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PSNR_CAP = 150.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(candidate, truth):
    a = np.asarray(candidate, dtype=np.float64)
    b = np.asarray(truth, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def psnr(candidate, truth) -> float:
    """PSNR in dB for unit peak; zero error returns ``PSNR_CAP``."""
    a, b = _pair(candidate, truth)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(1.0 / mse))


def _gaussian_window():
    r = SSIM_WINDOW // 2
    g = np.exp(-(np.arange(-r, r + 1) ** 2) / (2 * SSIM_SIGMA**2))
    return g / g.sum()


def _filter_valid(x, g):
    # separable correlation, keeping only fully covered positions
    k = g.size
    v = np.lib.stride_tricks.sliding_window_view(x, k, axis=0) @ g
    return np.lib.stride_tricks.sliding_window_view(v, k, axis=1) @ g


def ssim(candidate, truth, data_range=1.0) -> float:
    """Mean single-scale SSIM over all fully contained 11x11 Gaussian windows."""
    a, b = _pair(candidate, truth)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW} pixels per side")
    g = _gaussian_window()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a**2
    var_b = _filter_valid(b * b, g) - mu_b**2
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


@dataclass
class AlignmentResult:
    aligned: np.ndarray
    flip180: bool
    shift: tuple
    score: float


def apply_transform(x, flip180: bool, shift) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if flip180:
        x = x[::-1, ::-1]
    return np.roll(x, shift, axis=(0, 1))


def align(candidate, truth) -> AlignmentResult:
    """Undo the trivial ambiguities: optional 180 degree rotation plus a circular shift.

    The transform maximizing the correlation with ``truth`` is chosen; the
    shift search uses FFT cross-correlation. ``score`` is that correlation.
    """
    a, b = _pair(candidate, truth)
    Fb = np.conj(np.fft.fft2(b))
    best = None
    for flip in (False, True):
        src = a[::-1, ::-1] if flip else a
        # corr[s] = sum_p truth[p] * src[p + s]; rolling src by -s aligns it
        corr = np.fft.ifft2(np.fft.fft2(src) * Fb).real
        idx = np.unravel_index(int(np.argmax(corr)), corr.shape)
        shift = tuple(int(-i % n) for i, n in zip(idx, corr.shape))
        cand = apply_transform(a, flip, shift)
        score = float(np.sum(cand * b))
        if best is None or score > best.score:
            best = AlignmentResult(cand, flip, shift, score)
    identity_score = float(np.sum(a * b))
    # guard against FFT round-off picking a transform no better than identity
    if best.score < identity_score:
        best = AlignmentResult(a.copy(), False, (0, 0), identity_score)
    return best


def aligned_psnr(candidate, truth) -> float:
    return psnr(align(candidate, truth).aligned, truth)
