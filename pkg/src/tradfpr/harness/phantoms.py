"""Deterministic synthetic test images with values in [0, 1]."""

from __future__ import annotations

import numpy as np


def _coords(n):
    y, x = np.mgrid[0:n, 0:n] / max(n - 1, 1)
    return y, x


def piecewise(n=64):
    """Flat background with a rectangle, a disk and a triangle."""
    y, x = _coords(n)
    img = np.full((n, n), 0.2)
    img[(y > 0.12) & (y < 0.45) & (x > 0.1) & (x < 0.55)] = 0.8
    img[(y - 0.68) ** 2 + (x - 0.66) ** 2 < 0.22**2] = 0.55
    img[(y > 0.55) & (y < 0.9) & (x > 0.08) & (x < 0.08 + (y - 0.55))] = 1.0
    return img


def blobs(n=64):
    """Sum of smooth Gaussian bumps."""
    y, x = _coords(n)
    img = 0.15 + 0.0 * x
    for cy, cx, s, a in [(0.3, 0.3, 0.12, 0.6), (0.7, 0.6, 0.18, 0.5),
                         (0.35, 0.75, 0.08, 0.4), (0.8, 0.2, 0.1, 0.3)]:
        img = img + a * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * s**2))
    return np.clip(img, 0.0, 1.0)


def grating(n=64, period=4):
    """Smooth background with a patch of fine vertical and horizontal lines."""
    img = 0.5 * blobs(n)
    i, j = np.mgrid[0:n, 0:n]
    q = n // 4
    vert = (j // (period // 2)) % 2 == 0
    horz = (i // (period // 2)) % 2 == 0
    img[q : 2 * q, q : 3 * q] = np.where(vert[q : 2 * q, q : 3 * q], 0.9, 0.3)
    img[5 * q // 2 : 7 * q // 2, q : 3 * q] = np.where(horz[5 * q // 2 : 7 * q // 2, q : 3 * q], 0.85, 0.25)
    return img


def mixed(n=64):
    """Smooth blobs on the left half, piecewise shapes and a grating on the right."""
    img = blobs(n)
    right = piecewise(n)
    img[:, n // 2 :] = right[:, n // 2 :]
    i, j = np.mgrid[0:n, 0:n]
    rows = slice(n // 8, 3 * n // 8)
    cols = slice(5 * n // 8, 7 * n // 8)
    img[rows, cols] = np.where((j[rows, cols] // 2) % 2 == 0, 0.95, 0.35)
    return img


def binary(n=16):
    """0/1 shape image for the classical baselines."""
    img = np.zeros((n, n))
    img[2 : n // 2, 3 : n - 3] = 1.0
    img[n // 2 : n - 3, 2 : n // 2] = 1.0
    img[n - 5 : n - 2, n - 6 : n - 2] = 1.0
    return img


PHANTOMS = {
    "piecewise": piecewise,
    "blobs": blobs,
    "grating": grating,
    "mixed": mixed,
    "binary": binary,
}


def make_phantom(name: str, n: int) -> np.ndarray:
    try:
        fn = PHANTOMS[name]
    except KeyError:
        raise ValueError(f"unknown phantom {name!r}; choose from {sorted(PHANTOMS)}") from None
    return fn(n)
