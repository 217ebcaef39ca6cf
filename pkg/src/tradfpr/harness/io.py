"""File formats: PGM images, raw float64 measurements with JSON sidecars."""

from __future__ import annotations

import json
import os

import numpy as np


class FormatError(ValueError):
    pass


def _tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def load_image(path) -> np.ndarray:
    """Read a P2 or P5 PGM (8- or 16-bit) scaled to [0, 1]."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"image not found: {path}")
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: unsupported format {magic!r}; expected P2 or P5 PGM")
    try:
        (w, h, maxval), pos = _tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as e:
        raise FormatError(f"{path}: malformed PGM header ({e})") from None
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise FormatError(f"{path}: bad PGM dimensions or maxval")
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos + 1 : pos + 1 + w * h * dtype.itemsize]
        if len(raw) != w * h * dtype.itemsize:
            raise FormatError(f"{path}: pixel data truncated")
        pix = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    else:
        vals, _ = _tokens(data, w * h, pos) if w * h else ([], pos)
        try:
            pix = np.array([int(v) for v in vals], dtype=np.float64)
        except ValueError:
            raise FormatError(f"{path}: non-integer pixel value") from None
    if np.any(pix > maxval):
        raise FormatError(f"{path}: pixel value exceeds maxval {maxval}")
    scale = 65535.0 if maxval > 255 else 255.0
    return pix.reshape(h, w) / scale


def save_image(x, path):
    """Write a 16-bit binary PGM; values are clamped to [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("only 2D grayscale images can be saved")
    q = np.rint(np.clip(x, 0.0, 1.0) * 65535.0).astype(">u2")
    h, w = x.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode())
        fh.write(q.tobytes())


def save_measurement(path_stem, b, meta: dict):
    """Write ``<stem>.f64`` (little-endian float64, row-major) and ``<stem>.json``."""
    b = np.asarray(b, dtype=np.float64)
    meta = dict(meta)
    meta["m1"], meta["m2"] = (int(s) for s in b.shape)
    with open(str(path_stem) + ".f64", "wb") as fh:
        fh.write(b.astype("<f8").tobytes())
    with open(str(path_stem) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def load_measurement(path_stem):
    stem = str(path_stem)
    if stem.endswith(".json") or stem.endswith(".f64"):
        stem = stem.rsplit(".", 1)[0]
    with open(stem + ".json") as fh:
        meta = json.load(fh)
    raw = np.fromfile(stem + ".f64", dtype="<f8")
    m1, m2 = meta["m1"], meta["m2"]
    if raw.size != m1 * m2:
        raise FormatError(f"{stem}.f64 holds {raw.size} values, sidecar says {m1}x{m2}")
    return raw.astype(np.float64).reshape(m1, m2), meta
