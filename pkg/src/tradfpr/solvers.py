"""ADMM phase-retrieval solvers combining a deep-decoder prior with TV.

One outer iteration, given ``x_k`` and the multiplier ``eta_k``:

1. ``u = w - grad f(w) / rho`` with ``w = P x_k - eta_k / rho``
2. fit the decoder to ``crop(u)`` with ``l_k`` Adam steps at rate ``gamma_k``
3. ``v = mu_k P G(theta) + (1 - mu_k) u``
4. ``x_{k+1} = y - (alpha/rho) laplacian(y)`` with ``y = crop(v + eta_k / rho)``
5. ``eta_{k+1} = eta_k + rho (v - P x_{k+1})``

The vanilla solver keeps ``mu_k = 1``; the accelerated one lets ``mu_k``
decay after ``kappa3`` iterations and stops fitting the decoder once the
weight is negligible.
"""

from __future__ import annotations

import contextlib
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import decoder as dd
from .fidelity import FidelityContext
from .grid import MeasurementPlan, crop, idft2, pad
from .metrics import aligned_psnr, psnr
from .tv import TvMode, tv_norm, x_update

MODES = ("vanilla", "accelerated", "tv_only", "dd_only", "no_reg")

# Below this weight the decoder contributes nothing measurable and its fit is skipped.
MU_FLOOR = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    """Solver hyperparameters. Defaults target 128x128 images with K = 2000."""

    rho: float = 1.0
    epsilon: float = 1e-3
    alpha: float = 1.0 / 384.0
    iters: int = 2000
    gamma0: float = 0.005
    beta: float = 0.5
    kappa1: int = 500
    l0: int = 5
    zeta: float = 1.2
    kappa2: int = 500
    kappa3: int = 1000
    lam: float = 10.0
    mode: str = "accelerated"
    tv_mode: TvMode = TvMode.ISOTROPIC
    seed: int = 0
    channels: tuple = (128, 128, 128, 128)
    decoder: Optional[dd.DecoderConfig] = None
    mu_floor: float = MU_FLOOR
    trace_align: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tv_mode", TvMode(self.tv_mode))
        object.__setattr__(self, "channels", tuple(self.channels))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not self.zeta > 1:
            raise ValueError("zeta must exceed 1")
        if not (self.rho > 0 and self.epsilon > 0 and self.lam > 0):
            raise ValueError("rho, epsilon and lambda must be positive")
        if self.iters < 0 or self.alpha < 0:
            raise ValueError("iters and alpha must be nonnegative")

    def decoder_for(self, plan: MeasurementPlan) -> dd.DecoderConfig:
        if self.decoder is not None:
            if self.decoder.output_shape != plan.image_shape:
                raise ValueError(
                    f"decoder output {self.decoder.output_shape} does not match "
                    f"image {plan.image_shape}"
                )
            return self.decoder
        return dd.DecoderConfig.for_image(plan.n1, plan.n2, channels=self.channels)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tv_mode"] = self.tv_mode.value
        d["channels"] = list(self.channels)
        if self.decoder is not None:
            d["decoder"]["channels"] = list(self.decoder.channels)
        return d


def lr_schedule(k: int, cfg: SolverConfig) -> float:
    return cfg.gamma0 * cfg.beta ** (k // cfg.kappa1)


def loop_schedule(k: int, cfg: SolverConfig) -> int:
    return int(math.floor(cfg.l0 * cfg.zeta ** (k // cfg.kappa2) + 0.5))


def weight_schedule(k: int, cfg: SolverConfig) -> float:
    return math.exp(-((max(0, k - cfg.kappa3) / cfg.lam) ** 2))


def u_step(x, eta, ctx: FidelityContext, rho: float, plan: MeasurementPlan) -> np.ndarray:
    """Linearized fidelity step at ``w = P x - eta / rho``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    w = pad(x, plan) - eta / rho
    return w - ctx.gradient(w) / rho


@dataclass
class SolverTrace:
    """Per-iteration diagnostics; record ``k`` describes ``x_k``.

    ``mu``, ``gamma`` and ``l`` are the schedule values at index ``k``
    (zero where the mode does not use the decoder). ``time_ms`` is wall
    time since the solver started.
    """

    mode: str
    seed: int
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return [r.get(name) for r in self.records]

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for r in self.records:
                fh.write(json.dumps(r) + "\n")

    @staticmethod
    def read_jsonl(path):
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]


@contextlib.contextmanager
def thread_limit(threads: Optional[int] = 1):
    """Cap BLAS threads; ``None`` leaves the pool alone (the fast path)."""
    if threads is None:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=threads):
        yield


def _init_decoder(dcfg, seed):
    latent_seq, param_seq = np.random.SeedSequence(seed).spawn(2)
    latent = dd.init_latent(dcfg, latent_seq.generate_state(1)[0])
    params = dd.init_params(dcfg, param_seq.generate_state(1)[0])
    return latent, params, dd.AdamState.zeros(params.theta.size)


def solve(b, plan: MeasurementPlan, cfg: SolverConfig, truth=None):
    """Run the solver selected by ``cfg.mode``; returns ``(x_K, trace)``.

    ``truth`` is only used to fill the trace's PSNR column.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != plan.shape:
        raise ValueError(f"measurement shape {b.shape} does not match plan {plan.shape}")
    if truth is not None and np.shape(truth) != plan.image_shape:
        raise ValueError("ground truth shape does not match the plan")
    mode = cfg.mode
    rho = cfg.rho
    alpha = 0.0 if mode in ("dd_only", "no_reg") else cfg.alpha
    uses_decoder = mode in ("vanilla", "accelerated", "dd_only")

    ctx = FidelityContext(b, cfg.epsilon)
    x = crop(idft2(b), plan)
    eta = np.zeros(plan.shape)
    if uses_decoder:
        dcfg = cfg.decoder_for(plan)
        latent, params, adam = _init_decoder(dcfg, cfg.seed)

    score = aligned_psnr if cfg.trace_align else psnr
    trace = SolverTrace(mode, cfg.seed)
    t0 = time.perf_counter()

    def record(k):
        mu = 0.0
        gamma = 0.0
        loops = 0
        if uses_decoder:
            mu = weight_schedule(k, cfg) if mode == "accelerated" else 1.0
            gamma = lr_schedule(k, cfg)
            loops = loop_schedule(k, cfg)
        trace.records.append({
            "k": k,
            "mu": mu,
            "gamma": gamma,
            "l": loops,
            "fidelity": ctx.value(pad(x, plan)),
            "tv": tv_norm(x, cfg.tv_mode),
            "time_ms": (time.perf_counter() - t0) * 1e3,
            "psnr": None if truth is None else score(x, truth),
        })
        return mu, gamma, loops

    mu, gamma, loops = record(0)
    for k in range(cfg.iters):
        u = u_step(x, eta, ctx, rho, plan)
        if uses_decoder and mu >= cfg.mu_floor:
            params, adam = dd.fit(dcfg, params, adam, latent, crop(u, plan), loops, gamma)
            g = pad(dd.forward(dcfg, params, latent), plan)
            v = g if mu == 1.0 else mu * g + (1.0 - mu) * u
        else:
            v = u
        x = x_update(v, eta, rho, alpha, plan)
        eta = eta + rho * (v - pad(x, plan))
        mu, gamma, loops = record(k + 1)
    return x, trace


def _require_mode(cfg, allowed):
    if cfg.mode not in allowed:
        raise ValueError(f"config mode {cfg.mode!r} not valid here; expected {allowed}")


def vanilla_trad(b, plan, cfg: SolverConfig, truth=None):
    _require_mode(cfg, ("vanilla",))
    return solve(b, plan, cfg, truth)


def accelerated_trad(b, plan, cfg: SolverConfig, truth=None):
    _require_mode(cfg, ("accelerated",))
    return solve(b, plan, cfg, truth)


def ablation_solve(b, plan, cfg: SolverConfig, truth=None):
    """TV only (no decoder), decoder only (``alpha = 0``), or neither."""
    _require_mode(cfg, ("tv_only", "dd_only", "no_reg"))
    return solve(b, plan, cfg, truth)


def with_mode(cfg: SolverConfig, mode: str, **kw) -> SolverConfig:
    return replace(cfg, mode=mode, **kw)
