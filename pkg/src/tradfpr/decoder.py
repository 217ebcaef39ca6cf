"""Untrained deep-decoder generator with a hand-written backward pass.

Each hidden layer is a 1x1 convolution (a matrix product over channels),
ReLU, channel normalization with per-channel affine terms, and fixed
bilinear x2 upsampling. The output layer is a 1x1 convolution followed by a
sigmoid. Activations are stored as ``(height, width, channels)`` arrays.

All trainable parameters live in one flat vector; :class:`DecoderParams`
exposes per-layer views into it so that flattening is free and the Adam
update can run on the flat vector directly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class DecoderConfig:
    """Architecture of the generator.

    ``channels`` is ``[c0, c1, ..., cJ]``; the network has ``J`` hidden layers
    and the latent code has shape ``(latent_h, latent_w, c0)``.
    """

    channels: tuple = (128, 128, 128, 128)
    latent_h: int = 16
    latent_w: int = 16
    output_channels: int = 1
    upsample_factor: int = 2
    cn_epsilon: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        if len(self.channels) < 2:
            raise ValueError("need at least one hidden layer: channels=[c0, c1, ...]")
        if min(self.channels) < 1 or self.output_channels < 1:
            raise ValueError("channel counts must be positive")
        if self.latent_h < 1 or self.latent_w < 1 or self.upsample_factor < 1:
            raise ValueError("latent dims and upsample factor must be positive")

    @property
    def depth(self) -> int:
        return len(self.channels) - 1

    @property
    def output_shape(self) -> tuple[int, int]:
        s = self.upsample_factor**self.depth
        return (self.latent_h * s, self.latent_w * s)

    @classmethod
    def for_image(cls, n1, n2, channels=(128, 128, 128, 128), **kw):
        """Config whose output is ``n1 x n2``; latent dims are ``n / factor**J``."""
        f = kw.get("upsample_factor", 2) ** (len(channels) - 1)
        if n1 % f or n2 % f:
            raise ValueError(
                f"image {n1}x{n2} is not divisible by the total upsampling {f}"
            )
        return cls(channels=tuple(channels), latent_h=n1 // f, latent_w=n2 // f, **kw)


def param_count(cfg: DecoderConfig) -> int:
    c = cfg.channels
    weights = sum(c[j] * c[j + 1] for j in range(cfg.depth)) + c[-1] * cfg.output_channels
    return weights + sum(2 * c[j + 1] for j in range(cfg.depth))


def _layout(cfg: DecoderConfig):
    """Offsets and shapes of every parameter block inside flat theta."""
    c = cfg.channels
    blocks = []
    off = 0
    shapes = [(c[j], c[j + 1]) for j in range(cfg.depth)] + [(c[-1], cfg.output_channels)]
    for shp in shapes:
        size = shp[0] * shp[1]
        blocks.append(("W", off, shp))
        off += size
    for j in range(cfg.depth):
        blocks.append(("scale", off, (c[j + 1],)))
        off += c[j + 1]
        blocks.append(("bias", off, (c[j + 1],)))
        off += c[j + 1]
    return blocks, off


@dataclass
class DecoderParams:
    """Trainable parameters, stored flat as ``vec(W_0..W_J, scale_0, bias_0, ...)``."""

    cfg: DecoderConfig
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        n = param_count(self.cfg)
        if self.theta.shape != (n,):
            raise ValueError(f"theta must have length {n}, got {self.theta.shape}")
        blocks, _ = _layout(self.cfg)
        views = {"W": [], "scale": [], "bias": []}
        for kind, off, shp in blocks:
            size = int(np.prod(shp))
            views[kind].append(self.theta[off : off + size].reshape(shp))
        self.weights = views["W"]
        self.cn_scale = views["scale"]
        self.cn_bias = views["bias"]

    def flatten(self) -> np.ndarray:
        return self.theta.copy()

    @classmethod
    def unflatten(cls, cfg, theta):
        return cls(cfg, np.array(theta, dtype=np.float64))

    def copy(self):
        return DecoderParams(self.cfg, self.theta.copy())


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)

    def copy(self):
        return AdamState(self.m.copy(), self.v.copy(), self.step)


def init_latent(cfg: DecoderConfig, seed: int) -> np.ndarray:
    """Fixed latent code with i.i.d. N(0, 0.01) entries, shape ``(h, w, c0)``."""
    rng = np.random.default_rng(seed)
    return 0.1 * rng.standard_normal((cfg.latent_h, cfg.latent_w, cfg.channels[0]))


def init_params(cfg: DecoderConfig, seed: int) -> DecoderParams:
    """He-normal weights (std ``sqrt(2 / fan_in)``), unit scales, zero biases."""
    rng = np.random.default_rng(seed)
    p = DecoderParams(cfg, np.zeros(param_count(cfg)))
    for W in p.weights:
        W[...] = rng.standard_normal(W.shape) * np.sqrt(2.0 / W.shape[0])
    for s in p.cn_scale:
        s[...] = 1.0
    return p


_UPSAMPLE_CACHE: dict = {}


def upsample_matrix(n_in: int, factor: int = 2) -> np.ndarray:
    """Bilinear interpolation matrix ``(factor*n_in, n_in)``, half-pixel centers.

    Sample positions are clamped at the borders, so every row sums to one.
    """
    key = (n_in, factor)
    U = _UPSAMPLE_CACHE.get(key)
    if U is None:
        n_out = n_in * factor
        U = np.zeros((n_out, n_in))
        for o in range(n_out):
            src = min(max((o + 0.5) / factor - 0.5, 0.0), n_in - 1)
            i0 = int(np.floor(src))
            i1 = min(i0 + 1, n_in - 1)
            w1 = src - i0
            U[o, i0] += 1.0 - w1
            U[o, i1] += w1
        U.setflags(write=False)
        _UPSAMPLE_CACHE[key] = U
    return U


def _upsample(X, Uh, Uw):
    # X: (h, w, c) -> (H, W, c)
    h, w, c = X.shape
    Y = (Uh @ X.reshape(h, w * c)).reshape(Uh.shape[0], w, c)
    return np.matmul(Uw, Y)


def _upsample_adjoint(dY, Uh, Uw):
    dYw = np.matmul(Uw.T, dY)
    H, w, c = dYw.shape
    return (Uh.T @ dYw.reshape(H, w * c)).reshape(Uh.shape[1], w, c)


def _sigmoid(x):
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _check_latent(cfg, latent):
    latent = np.asarray(latent, dtype=np.float64)
    want = (cfg.latent_h, cfg.latent_w, cfg.channels[0])
    if latent.shape != want:
        raise ValueError(f"latent shape {latent.shape} does not match config {want}")
    return latent


def _forward(cfg, params, latent, keep=False):
    # Upsampling acts on space and the 1x1 convolutions on channels, so
    # U(C) W == U(C W). Each product is taken at the lower resolution and
    # the (usually narrower) result is upsampled.
    if params.cfg != cfg:
        raise ValueError("parameters were built for a different config")
    C = _check_latent(cfg, latent)
    f = cfg.upsample_factor
    tape = []
    for j in range(cfg.depth):
        A = C @ params.weights[j]
        ups = None
        if j > 0:
            h, w, _ = A.shape
            ups = (upsample_matrix(h, f), upsample_matrix(w, f))
            A = _upsample(A, *ups)
        R = np.maximum(A, 0.0)
        Rc = R - R.mean(axis=(0, 1))
        inv_std = 1.0 / np.sqrt((Rc * Rc).mean(axis=(0, 1)) + cfg.cn_epsilon)
        N = Rc * inv_std
        if keep:
            tape.append((C, A, N, inv_std, ups))
        C = N * params.cn_scale[j] + params.cn_bias[j]
    O = C @ params.weights[-1]
    h, w, _ = O.shape
    ups = (upsample_matrix(h, f), upsample_matrix(w, f))
    out = _sigmoid(_upsample(O, *ups))
    if keep:
        tape.append((C, None, None, None, ups))
    return out, tape


def _as_image(out, cfg):
    return out[:, :, 0] if cfg.output_channels == 1 else out


def forward(cfg: DecoderConfig, params: DecoderParams, latent) -> np.ndarray:
    """Generator output ``G(theta)``, shape ``(H, W)`` for one output channel."""
    out, _ = _forward(cfg, params, latent)
    return _as_image(out, cfg)


def loss_and_grad(cfg: DecoderConfig, params: DecoderParams, latent, target):
    """Loss ``||G(theta) - target||^2`` and its gradient with respect to flat theta."""
    out, tape = _forward(cfg, params, latent, keep=True)
    target = np.asarray(target, dtype=np.float64)
    if cfg.output_channels == 1 and target.ndim == 2:
        target = target[:, :, None]
    if target.shape != out.shape:
        raise ValueError(f"target shape {target.shape} does not match output {out.shape}")
    diff = out - target
    loss = float(np.sum(diff * diff))

    grad = DecoderParams(cfg, np.zeros_like(params.theta))
    C, _, _, _, ups = tape[-1]
    dO = _upsample_adjoint(2.0 * diff * out * (1.0 - out), *ups)
    grad.weights[-1][...] = _channel_outer(C, dO)
    dC = dO @ params.weights[-1].T
    for j in range(cfg.depth - 1, -1, -1):
        C, A, N, inv_std, ups = tape[j]
        grad.cn_scale[j][...] = np.sum(dC * N, axis=(0, 1))
        grad.cn_bias[j][...] = np.sum(dC, axis=(0, 1))
        dN = dC * params.cn_scale[j]
        dR = inv_std * (dN - dN.mean(axis=(0, 1)) - N * (dN * N).mean(axis=(0, 1)))
        dA = dR * (A > 0)
        if ups is not None:
            dA = _upsample_adjoint(dA, *ups)
        grad.weights[j][...] = _channel_outer(C, dA)
        if j > 0:
            dC = dA @ params.weights[j].T
    return loss, grad.theta


def _channel_outer(X, dY):
    # sum over pixels of X[p, :]^T dY[p, :]
    return X.reshape(-1, X.shape[-1]).T @ dY.reshape(-1, dY.shape[-1])


def adam_step(params: DecoderParams, grad, state: AdamState, lr: float,
              beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update; returns new ``(params, state)``."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != params.theta.shape or state.m.shape != params.theta.shape:
        raise ValueError("gradient / optimizer state do not match parameter length")
    t = state.step + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * grad * grad
    mhat = m / (1.0 - beta1**t)
    vhat = v / (1.0 - beta2**t)
    theta = params.theta - lr * mhat / (np.sqrt(vhat) + eps)
    return DecoderParams(params.cfg, theta), AdamState(m, v, t)


def fit(cfg, params, state, latent, target, steps: int, lr: float):
    """Run ``steps`` Adam iterations on ``||G(theta) - target||^2``.

    Starts from ``params`` and ``state`` (warm start) and returns the final
    pair. With ``steps == 0`` the inputs are returned untouched.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    for _ in range(steps):
        _, g = loss_and_grad(cfg, params, latent, target)
        params, state = adam_step(params, g, state, lr)
    return params, state


def save_checkpoint(path, params: DecoderParams, seed: Optional[int] = None, step: int = 0):
    """Write a JSON header line followed by theta as little-endian float64."""
    header = {"cfg": asdict(params.cfg), "seed": seed, "step": step,
              "length": int(params.theta.size)}
    header["cfg"]["channels"] = list(params.cfg.channels)
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(params.theta.astype("<f8").tobytes())


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(params, header)``."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        raw = fh.read()
    cfg = DecoderConfig(**header["cfg"])
    theta = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if theta.size != header["length"]:
        raise ValueError(f"checkpoint truncated: {theta.size} of {header['length']} values")
    return DecoderParams(cfg, theta), header
